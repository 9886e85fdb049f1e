#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "camal/errors.hpp"
#include "camal/tuner.hpp"

namespace camal {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_cell(const std::string& cell, const char* column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw StorageError(std::string("sample CSV: bad ") + column + " '" + cell + "'");
  }
  return v;
}

}  // namespace

std::string SampleStore::key_of(const CostSample& s) {
  std::ostringstream k;
  k << s.workload_id << '|' << static_cast<int>(s.config.policy) << '|' << s.config.size_ratio
    << '|' << s.config.buffer_bytes << '|' << s.config.filter_bytes << '|' << s.config.cache_bytes
    << '|' << s.env.N << '|' << s.env.E << '|' << s.env.B << '|' << s.env.M << '|' << s.seed;
  return k.str();
}

bool SampleStore::contains(const CostSample& s) const {
  return std::binary_search(keys_.begin(), keys_.end(), key_of(s));
}

void SampleStore::append(CostSample sample) {
  auto key = key_of(sample);
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it != keys_.end() && *it == key) throw ConfigError("duplicate sample " + key);
  keys_.insert(it, std::move(key));
  samples_.push_back(std::move(sample));
}

std::string SampleStore::to_csv() const {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& s : samples_) {
    out << s.workload_id << ',' << num(s.mix.v) << ',' << num(s.mix.r) << ',' << num(s.mix.q) << ','
        << num(s.mix.w) << ',' << num(s.mix.s) << ',' << policy_name(s.config.policy) << ','
        << s.config.size_ratio << ',' << s.config.buffer_bytes << ',' << s.config.filter_bytes << ','
        << s.config.cache_bytes << ',' << s.env.N << ',' << s.env.E << ',' << s.env.B << ','
        << s.io.blocks_read << ',' << s.io.blocks_written << ',' << num(s.mean_latency_ns) << ','
        << num(s.p90_latency_ns) << ',' << num(s.io_per_op) << ',' << s.seed << '\n';
  }
  return out.str();
}

void SampleStore::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw StorageError("cannot write " + path.string());
  out << to_csv();
  if (!out) throw StorageError("write failed: " + path.string());
}

SampleStore SampleStore::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open sample file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_csv(text.str());
}

SampleStore SampleStore::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw StorageError("sample CSV: unexpected header");
  }
  SampleStore store;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 20) throw StorageError("sample CSV: expected 20 columns in '" + line + "'");
    CostSample s;
    s.workload_id = c[0];
    s.mix.v = parse_cell<double>(c[1], "v");
    s.mix.r = parse_cell<double>(c[2], "r");
    s.mix.q = parse_cell<double>(c[3], "q");
    s.mix.w = parse_cell<double>(c[4], "w");
    s.mix.s = parse_cell<double>(c[5], "s");
    s.config.policy = parse_policy(c[6]);
    s.config.size_ratio = parse_cell<std::uint32_t>(c[7], "T");
    s.config.buffer_bytes = parse_cell<std::uint64_t>(c[8], "Mb_bytes");
    s.config.filter_bytes = parse_cell<std::uint64_t>(c[9], "Mf_bytes");
    s.config.cache_bytes = parse_cell<std::uint64_t>(c[10], "Mc_bytes");
    s.env.N = parse_cell<std::uint64_t>(c[11], "N");
    s.env.E = parse_cell<std::uint64_t>(c[12], "E");
    s.env.B = parse_cell<std::uint64_t>(c[13], "B");
    s.env.M = s.config.memory();
    s.env.min_buffer = s.config.buffer_bytes;
    s.env.block_bytes = s.env.E * s.env.B;
    s.io.blocks_read = parse_cell<std::uint64_t>(c[14], "blocks_read");
    s.io.blocks_written = parse_cell<std::uint64_t>(c[15], "blocks_written");
    s.mean_latency_ns = parse_cell<double>(c[16], "mean_latency_ns");
    s.p90_latency_ns = parse_cell<double>(c[17], "p90_latency_ns");
    s.io_per_op = parse_cell<double>(c[18], "io_per_op");
    s.seed = parse_cell<std::uint64_t>(c[19], "seed");
    store.append(std::move(s));
  }
  return store;
}

TrainedModel train_model(const std::vector<CostSample>& samples, LabelKind label, ModelKind kind,
                         const TreeParams& params, RankHandling rank, std::uint64_t seed,
                         CoefficientSign sign) {
  std::vector<FeatureVector> x;
  std::vector<double> y;
  x.reserve(samples.size());
  y.reserve(samples.size());
  for (const auto& s : samples) {
    x.push_back(make_features(s.env, s.config, s.mix));
    y.push_back(s.label(label));
  }
  TrainedModel model = kind == ModelKind::Poly ? fit_poly(x, y, rank, sign) : fit_trees(x, y, params);
  model.label = label;
  model.seed = seed;
  return model;
}

}  // namespace camal
