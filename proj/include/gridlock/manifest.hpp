#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gridlock {

/// Everything needed to reproduce one CLI run bit-exactly: tool version, the
/// fully resolved parameter set (defaults included), the seed, and content
/// digests of every input file. Contains no wall-clock information, so
/// identical runs write identical manifests.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;  // flag name -> value
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path -> fnv1a64 hex
  std::vector<std::string> outputs;

  void set(const std::string& name, const std::string& value);
  void set(const std::string& name, double value);
  void set(const std::string& name, long long value);
  void set(const std::string& name, int value) { set(name, static_cast<long long>(value)); }
  void set(const std::string& name, bool value);
  void set_seed(std::uint64_t value);
  void add_input(const std::string& path);  // digests the file

  std::string to_json() const;
};

/// 64-bit FNV-1a of the file contents, as 16 hex digits.
std::string fnv1a64_file_hex(const std::string& path);

/// Writes `<output_path>.manifest.json` next to the output.
void write_manifest(const RunManifest& manifest, const std::string& output_path);

}  // namespace gridlock
