#include "camal/cli/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "camal/errors.hpp"

namespace camal::cli {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path.string() + " for checksum");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv) {
  doc_["command"] = std::move(command);
  doc_["argv"] = std::move(argv);
  doc_["started_at"] = utc_now();
  doc_["inputs"] = nlohmann::json::array();
  doc_["outputs"] = nlohmann::json::array();
  doc_["seeds"] = nlohmann::json::object();
}

void RunManifest::add_input(const std::filesystem::path& path) {
  doc_["inputs"].push_back({{"path", path.string()}, {"fnv1a64", file_checksum(path)}});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  doc_["outputs"].push_back({{"path", path.string()}});
}

void RunManifest::set_seed(const std::string& name, std::uint64_t seed) { doc_["seeds"][name] = seed; }

void RunManifest::write(const std::filesystem::path& path) {
  for (auto& out : doc_["outputs"]) {
    out["fnv1a64"] = file_checksum(out["path"].get<std::string>());
  }
  doc_["finished_at"] = utc_now();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw StorageError("cannot write manifest " + path.string());
  f << doc_.dump(2) << '\n';
}

}  // namespace camal::cli
