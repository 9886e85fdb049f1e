#include "camal/workload.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "camal/errors.hpp"

namespace camal {

namespace {

constexpr std::uint64_t kMask63 = (std::uint64_t{1} << 63) - 1;

// Bijection on [0, 2^63): xorshifts and odd multiplications modulo 2^63.
std::uint64_t mix63(std::uint64_t x) noexcept {
  x &= kMask63;
  x ^= x >> 31;
  x = (x * 0x7fb5d329728ea185ULL) & kMask63;
  x ^= x >> 27;
  x = (x * 0x81dadef4bc2dd44dULL) & kMask63;
  x ^= x >> 33;
  return x;
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

WorkloadMix percent_mix(double v, double r, double q, double w) {
  return WorkloadMix{v / 100.0, r / 100.0, q / 100.0, w / 100.0};
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("workload file: not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string shortest(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

void WorkloadMix::validate() const {
  for (double f : {v, r, q, w, delete_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("workload fraction outside [0, 1]");
  }
  if (std::abs(v + r + q + w - 1.0) > 1e-9) {
    throw ConfigError("workload fractions must sum to 1 (got " + shortest(v + r + q + w) + ")");
  }
  if (!(s >= 0.0)) throw ConfigError("range selectivity must be non-negative");
}

std::vector<WorkloadMix> training_workloads() {
  return {
      percent_mix(25, 25, 25, 25),  //
      percent_mix(97, 1, 1, 1),   percent_mix(1, 97, 1, 1),   percent_mix(1, 1, 97, 1),
      percent_mix(1, 1, 1, 97),   percent_mix(49, 49, 1, 1),  percent_mix(49, 1, 49, 1),
      percent_mix(49, 1, 1, 49),  percent_mix(1, 49, 49, 1),  percent_mix(1, 49, 1, 49),
      percent_mix(1, 1, 49, 49),  percent_mix(33, 33, 33, 1), percent_mix(33, 33, 1, 33),
      percent_mix(33, 1, 33, 33), percent_mix(1, 33, 33, 33),
  };
}

std::vector<WorkloadMix> test_workloads() {
  static constexpr double v[24] = {60, 75, 91, 75, 60, 45, 30, 15, 3, 5, 5, 5,
                                   5,  5,  3,  5,  5,  5,  5,  5,  3, 15, 30, 45};
  static constexpr double r[24] = {5, 5,  3,  15, 30, 45, 60, 75, 91, 75, 60, 45,
                                   30, 15, 3, 5,  5,  5,  5,  5,  3,  5,  5,  5};
  static constexpr double q[24] = {5,  5,  3,  5,  5,  5,  5,  5,  3, 15, 30, 45,
                                   60, 75, 91, 75, 60, 45, 30, 15, 3, 5,  5,  5};
  static constexpr double w[24] = {30, 15, 3, 5,  5,  5,  5,  5,  3,  5,  5,  5,
                                   5,  5,  3, 15, 30, 45, 60, 75, 91, 75, 60, 45};
  std::vector<WorkloadMix> out;
  out.reserve(24);
  for (int i = 0; i < 24; ++i) out.push_back(percent_mix(v[i], r[i], q[i], w[i]));
  return out;
}

std::string format_workload_line(const WorkloadMix& mix) {
  return shortest(mix.v) + "," + shortest(mix.r) + "," + shortest(mix.q) + "," + shortest(mix.w) +
         "," + shortest(mix.s) + "," + shortest(mix.delete_fraction);
}

WorkloadMix parse_workload_line(const std::string& line) {
  std::vector<double> fields;
  std::string_view rest = line;
  while (true) {
    const auto comma = rest.find(',');
    fields.push_back(parse_double(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (fields.size() != 6) {
    throw ConfigError("workload line needs 6 fields v,r,q,w,s,delete_fraction: '" + line + "'");
  }
  WorkloadMix mix{fields[0], fields[1], fields[2], fields[3], fields[4], fields[5]};
  mix.validate();
  return mix;
}

void write_workload_file(const std::filesystem::path& path, const std::vector<WorkloadMix>& mixes) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw StorageError("cannot write workload file " + path.string());
  for (const auto& mix : mixes) out << format_workload_line(mix) << '\n';
  if (!out) throw StorageError("write failed: " + path.string());
}

std::vector<WorkloadMix> read_workload_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read workload file " + path.string());
  std::vector<WorkloadMix> mixes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    mixes.push_back(parse_workload_line(line));
  }
  return mixes;
}

std::uint64_t KeyUniverse::key_at(std::uint64_t index) noexcept { return mix63(index); }

std::uint64_t KeyUniverse::absent_key(std::uint64_t random_bits) noexcept {
  return random_bits | (std::uint64_t{1} << 63);
}

std::uint64_t Rng::next() noexcept { return splitmix64(state_); }

double Rng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift; bias is negligible for the ranges used here.
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
}

ZipfianGenerator::ZipfianGenerator(std::uint64_t n, double theta) : n_(n), theta_(theta) {
  if (n == 0) throw ConfigError("zipfian over an empty key range");
  if (!(theta >= 0.0 && theta <= 0.99)) throw ConfigError("zipfian theta must be in [0, 0.99]");
  alpha_ = 1.0 / (1.0 - theta_);
  double zetan = 0.0;
  for (std::uint64_t i = 1; i <= n_; ++i) zetan += 1.0 / std::pow(static_cast<double>(i), theta_);
  zetan_ = zetan;
  const double zeta2 = 1.0 + 1.0 / std::pow(2.0, theta_);
  eta_ = n_ <= 2 ? 1.0
                 : (1.0 - std::pow(2.0 / static_cast<double>(n_), 1.0 - theta_)) /
                       (1.0 - zeta2 / zetan_);
}

std::uint64_t ZipfianGenerator::sample(Rng& rng) const noexcept {
  const double u = rng.uniform();
  const double uz = u * zetan_;
  if (uz < 1.0) return 0;
  if (n_ > 1 && uz < 1.0 + std::pow(0.5, theta_)) return 1;
  const auto rank = static_cast<std::uint64_t>(static_cast<double>(n_) *
                                               std::pow(eta_ * u - eta_ + 1.0, alpha_));
  return rank < n_ ? rank : n_ - 1;
}

std::string make_value(std::uint64_t key, std::uint64_t stamp, std::size_t bytes) {
  std::string value(bytes, '\0');
  std::uint64_t state = key ^ (stamp * 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < bytes; i += 8) {
    const std::uint64_t word = splitmix64(state);
    for (std::size_t j = 0; j < 8 && i + j < bytes; ++j) {
      value[i + j] = static_cast<char>('a' + ((word >> (8 * j)) & 0xff) % 26);
    }
  }
  return value;
}

OperationStream generate_stream(const WorkloadMix& mix, const KeyDistribution& dist,
                                std::uint64_t count, const KeyUniverse& universe) {
  mix.validate();
  if (count == 0) throw ConfigError("stream length must be positive");
  if (universe.size == 0) throw ConfigError("key universe is empty");

  Rng rng(dist.seed);
  std::optional<ZipfianGenerator> zipf;
  if (dist.kind == KeyDistributionKind::Zipfian) zipf.emplace(universe.size, dist.theta);
  auto existing = [&]() {
    const std::uint64_t rank = zipf ? zipf->sample(rng) : rng.below(universe.size);
    return KeyUniverse::key_at(rank);
  };

  const double c_v = mix.v;
  const double c_r = c_v + mix.r;
  const double c_q = c_r + mix.q;
  const auto selectivity = static_cast<std::uint32_t>(std::llround(mix.s));

  OperationStream stream;
  stream.seed = dist.seed;
  stream.ops.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double u = rng.uniform();
    if (u < c_v) {
      stream.ops.push_back({OpKind::PointGetAbsent, KeyUniverse::absent_key(rng.next())});
    } else if (u < c_r) {
      stream.ops.push_back({OpKind::PointGetExisting, existing()});
    } else if (u < c_q) {
      stream.ops.push_back(
          {OpKind::RangeGet, KeyUniverse::key_at(rng.below(universe.size)), selectivity});
    } else {
      const bool is_delete = mix.delete_fraction > 0.0 && rng.uniform() < mix.delete_fraction;
      stream.ops.push_back({is_delete ? OpKind::Delete : OpKind::Put, existing()});
    }
  }
  return stream;
}

}  // namespace camal
