#include "gridlock/manifest.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "gridlock/csv.hpp"
#include "gridlock/errors.hpp"
#include "gridlock/version.hpp"

namespace gridlock {

void RunManifest::set(const std::string& name, const std::string& value) {
  parameters.emplace_back(name, value);
}

void RunManifest::set(const std::string& name, double value) {
  parameters.emplace_back(name, csv::format_double(value));
}

void RunManifest::set(const std::string& name, long long value) {
  parameters.emplace_back(name, csv::format_int(value));
}

void RunManifest::set(const std::string& name, bool value) {
  parameters.emplace_back(name, value ? "true" : "false");
}

void RunManifest::set_seed(std::uint64_t value) {
  has_seed = true;
  seed = value;
}

void RunManifest::add_input(const std::string& path) {
  inputs.emplace_back(path, fnv1a64_file_hex(path));
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["tool"] = kToolName;
  doc["version"] = kVersion;
  doc["command"] = command;
  if (has_seed) doc["seed"] = seed;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [name, value] : parameters) params[name] = value;
  doc["parameters"] = params;
  nlohmann::ordered_json ins = nlohmann::ordered_json::object();
  for (const auto& [path, digest] : inputs) ins[path] = digest;
  doc["inputs"] = ins;
  doc["outputs"] = outputs;
  return doc.dump(2) + "\n";
}

std::string fnv1a64_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open input file for digest: " + path);
  std::uint64_t h = 0xCBF29CE484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void write_manifest(const RunManifest& manifest, const std::string& output_path) {
  csv::write_file(output_path + ".manifest.json", manifest.to_json());
}

}  // namespace gridlock
