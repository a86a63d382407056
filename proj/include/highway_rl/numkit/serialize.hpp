#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "highway_rl/numkit/param.hpp"

namespace highway_rl::numkit {

// File layout:
//   { "format": "numkit-params/1",
//     "tensors": { "<name>": { "shape": [..], "values": [..] }, ... },
//     "metadata": { ... } }
// Tensor order is preserved. Values are written with round-trip precision.

nlohmann::ordered_json params_to_json(const ParamSet& params,
                                      const nlohmann::ordered_json& metadata = {});
ParamSet params_from_json(const nlohmann::ordered_json& doc);

void save_params(const ParamSet& params, const std::filesystem::path& path,
                 const nlohmann::ordered_json& metadata = {});

/// Rebuilds a ParamSet exactly as stored.
ParamSet load_params(const std::filesystem::path& path);

/// Loads values into an existing architecture. Throws FormatError naming the
/// first tensor that is missing, extra, or misshaped.
void load_params_into(ParamSet& target, const std::filesystem::path& path);
void load_params_into(ParamSet& target, const nlohmann::ordered_json& doc);

nlohmann::ordered_json read_param_file(const std::filesystem::path& path);

}  // namespace highway_rl::numkit
