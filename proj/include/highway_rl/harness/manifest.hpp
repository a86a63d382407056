#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace highway_rl::harness {

inline constexpr const char* kManifestName = "manifest.json";

struct FileEntry {
  std::string path;  // relative to the manifest's directory (outputs) or as given (inputs)
  std::string sha1;  // git blob hash
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::string started;  // UTC, ISO 8601
  std::string finished;
  std::vector<FileEntry> inputs;
  std::vector<FileEntry> outputs;
};

/// SHA-1 of "blob <size>\0" followed by the file bytes, as `git hash-object` reports.
std::string git_blob_sha1(const std::filesystem::path& file);
std::string utc_timestamp();

FileEntry describe_file(const std::filesystem::path& file, const std::filesystem::path& base = {});

void write_manifest(const std::filesystem::path& dir, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& file);

/// When the artifact's directory holds a manifest listing it, recomputes the
/// hash and throws FormatError on mismatch. Missing files throw FormatError.
void verify_artifact(const std::filesystem::path& file);

}  // namespace highway_rl::harness
