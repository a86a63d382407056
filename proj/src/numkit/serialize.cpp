#include "highway_rl/numkit/serialize.hpp"

#include <fstream>
#include <sstream>

#include "highway_rl/errors.hpp"

namespace highway_rl::numkit {

namespace {

constexpr const char* kFormat = "numkit-params/1";

}  // namespace

nlohmann::ordered_json params_to_json(const ParamSet& params,
                                      const nlohmann::ordered_json& metadata) {
  nlohmann::ordered_json doc;
  doc["format"] = kFormat;
  doc["tensors"] = nlohmann::ordered_json::object();
  for (const auto& p : params) {
    nlohmann::ordered_json t;
    t["shape"] = p.shape;
    std::vector<double> flat(p.value.data(), p.value.data() + p.value.size());
    t["values"] = flat;
    doc["tensors"][p.name] = std::move(t);
  }
  if (!metadata.is_null()) doc["metadata"] = metadata;
  return doc;
}

ParamSet params_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kFormat || !doc.contains("tensors"))
    throw FormatError("not a numkit parameter document");
  ParamSet ps;
  for (const auto& [name, t] : doc["tensors"].items()) {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    try {
      shape = t.at("shape").get<std::vector<std::size_t>>();
      values = t.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("tensor '" + name + "': " + e.what());
    }
    std::size_t idx = 0;
    try {
      idx = ps.add(name, shape);
    } catch (const ConfigError& e) {
      throw FormatError("tensor '" + name + "': " + e.what());
    }
    auto& p = ps[idx];
    if (values.size() != p.size())
      throw FormatError("tensor '" + name + "': value count " + std::to_string(values.size()) +
                        " does not match shape");
    std::copy(values.begin(), values.end(), p.value.data());
  }
  return ps;
}

nlohmann::ordered_json read_param_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open parameter file " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("parameter file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void save_params(const ParamSet& params, const std::filesystem::path& path,
                 const nlohmann::ordered_json& metadata) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write parameter file " + path.string());
  out << params_to_json(params, metadata).dump(1) << '\n';
  if (!out) throw FormatError("failed writing parameter file " + path.string());
}

ParamSet load_params(const std::filesystem::path& path) {
  return params_from_json(read_param_file(path));
}

void load_params_into(ParamSet& target, const nlohmann::ordered_json& doc) {
  ParamSet loaded = params_from_json(doc);
  for (const auto& p : target) {
    const std::size_t i = loaded.find(p.name);
    if (i == loaded.size()) throw FormatError("tensor '" + p.name + "' missing from file");
    if (loaded[i].shape != p.shape) {
      std::ostringstream msg;
      msg << "tensor '" << p.name << "' has shape [";
      for (std::size_t k = 0; k < loaded[i].shape.size(); ++k) msg << (k ? "," : "") << loaded[i].shape[k];
      msg << "] in file, expected [";
      for (std::size_t k = 0; k < p.shape.size(); ++k) msg << (k ? "," : "") << p.shape[k];
      msg << "]";
      throw FormatError(msg.str());
    }
  }
  for (const auto& p : loaded)
    if (target.find(p.name) == target.size())
      throw FormatError("tensor '" + p.name + "' in file is not part of this architecture");
  for (auto& p : target) p.value = loaded[loaded.find(p.name)].value;
}

void load_params_into(ParamSet& target, const std::filesystem::path& path) {
  load_params_into(target, read_param_file(path));
}

}  // namespace highway_rl::numkit
