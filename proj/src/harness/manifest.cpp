#include "highway_rl/harness/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "highway_rl/errors.hpp"

namespace highway_rl::harness {

namespace fs = std::filesystem;

std::string git_blob_sha1(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError(file.string() + ": cannot open for hashing");
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "blob " + std::to_string(data.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) &&
                  EVP_DigestUpdate(ctx, data.data(), data.size()) && EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  if (!ok) throw FormatError(file.string() + ": SHA-1 computation failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

FileEntry describe_file(const fs::path& file, const fs::path& base) {
  FileEntry e;
  e.path = base.empty() ? file.generic_string() : fs::relative(file, base).generic_string();
  e.sha1 = git_blob_sha1(file);
  e.bytes = fs::file_size(file);
  return e;
}

namespace {

nlohmann::ordered_json entries_json(const std::vector<FileEntry>& v) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : v) arr.push_back({{"path", e.path}, {"sha1", e.sha1}, {"bytes", e.bytes}});
  return arr;
}

std::vector<FileEntry> entries_from(const nlohmann::json& arr) {
  std::vector<FileEntry> out;
  for (const auto& e : arr)
    out.push_back({e.at("path").get<std::string>(), e.at("sha1").get<std::string>(), e.at("bytes").get<std::uintmax_t>()});
  return out;
}

}  // namespace

void write_manifest(const fs::path& dir, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["format"] = "highway-rl-manifest/1";
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["config"] = m.config;
  j["inputs"] = entries_json(m.inputs);
  j["outputs"] = entries_json(m.outputs);
  std::ofstream out(dir / kManifestName);
  if (!out) throw FormatError((dir / kManifestName).string() + ": cannot write manifest");
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError(file.string() + ": cannot open manifest");
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != "highway-rl-manifest/1")
    throw FormatError(file.string() + ": not a run manifest");
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    m.config = j.at("config");
    m.inputs = entries_from(j.at("inputs"));
    m.outputs = entries_from(j.at("outputs"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(file.string() + ": malformed manifest: " + e.what());
  }
}

void verify_artifact(const fs::path& file) {
  if (!fs::is_regular_file(file)) throw FormatError(file.string() + ": no such artifact");
  const fs::path manifest = file.parent_path() / kManifestName;
  if (!fs::exists(manifest)) return;
  const RunManifest m = read_manifest(manifest);
  const std::string name = file.filename().generic_string();
  for (const auto& e : m.outputs) {
    if (e.path != name) continue;
    const std::string actual = git_blob_sha1(file);
    if (actual != e.sha1)
      throw FormatError(file.string() + ": checksum mismatch against " + manifest.string() + " (expected " + e.sha1 +
                        ", found " + actual + ")");
    return;
  }
}

}  // namespace highway_rl::harness
