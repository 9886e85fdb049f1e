#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace camal::cli {

// 64-bit FNV-1a over a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

// Record of one command invocation, written next to its primary output.
class RunManifest {
 public:
  explicit RunManifest(std::string command, std::vector<std::string> argv);

  nlohmann::json& section(const std::string& name) { return doc_[name]; }
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void set_seed(const std::string& name, std::uint64_t seed);

  // Fills output checksums and the finish time, then writes the JSON.
  void write(const std::filesystem::path& path);

 private:
  nlohmann::json doc_;
};

}  // namespace camal::cli
