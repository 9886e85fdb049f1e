#include "camal/analytic_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "camal/errors.hpp"

namespace camal {

namespace {

constexpr double kBitsPerByte = 8.0;

double filter_term(const Environment& env, double filter_bytes) noexcept {
  return std::exp(-kBitsPerByte * filter_bytes / static_cast<double>(env.N));
}

// d L / d M_f for the relaxed level count, with M_b = M - M_f.
double level_slope_in_filter(const Environment& env, double ln_t, double buffer_bytes) noexcept {
  const double data = static_cast<double>(env.N) * static_cast<double>(env.E);
  return data / (ln_t * buffer_bytes * (data + buffer_bytes));
}

bool is_integral(double k) noexcept { return std::floor(k) == k && k <= 1048576.0; }

}  // namespace

std::string_view policy_name(Policy p) noexcept {
  return p == Policy::Leveling ? "leveling" : "tiering";
}

Policy parse_policy(std::string_view name) {
  if (name == "leveling") return Policy::Leveling;
  if (name == "tiering") return Policy::Tiering;
  throw ConfigError("unknown compaction policy '" + std::string(name) + "'");
}

Environment Environment::make(std::uint64_t entries, std::uint64_t entry_bytes,
                              std::uint64_t memory, std::uint64_t min_buffer,
                              std::uint64_t block_bytes) {
  if (entry_bytes == 0 || entry_bytes > block_bytes) {
    throw ConfigError("entry size must be in [1, block size]");
  }
  Environment env{entries, entry_bytes, block_bytes / entry_bytes, memory, min_buffer, block_bytes};
  env.validate();
  return env;
}

Environment Environment::full_profile() {
  return make(10'000'000, 1024, 16ULL << 20, 1ULL << 20);
}

Environment Environment::test_profile() { return make(100'000, 64, 256ULL << 10, 8ULL << 10); }

std::uint64_t Environment::t_lim() const noexcept {
  if (min_buffer == 0) return 0;
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(N) * E) / min_buffer);
}

std::size_t Environment::value_bytes() const noexcept {
  if (B == 0) return 0;
  const std::uint64_t per_record = (block_bytes - kBlockHeaderBytes) / B;
  return per_record > kRecordOverheadBytes ? per_record - kRecordOverheadBytes : 0;
}

Environment Environment::scaled(double k) const {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("scale factor must be positive");
  Environment out = *this;
  out.N = static_cast<std::uint64_t>(std::llround(static_cast<double>(N) * k));
  out.M = static_cast<std::uint64_t>(std::llround(static_cast<double>(M) * k));
  out.validate();
  return out;
}

void Environment::validate() const {
  if (N == 0 || E == 0 || B == 0 || M == 0 || min_buffer == 0 || block_bytes == 0) {
    throw ConfigError("environment fields N, E, B, M, min_buffer must be positive");
  }
  if (t_lim() < 2) {
    throw ConfigError("N*E/min_buffer must be at least 2 (T_lim = " + std::to_string(t_lim()) + ")");
  }
}

double LsmConfig::bits_per_key(const Environment& env) const noexcept {
  return kBitsPerByte * static_cast<double>(filter_bytes) / static_cast<double>(env.N);
}

void LsmConfig::validate(const Environment& env) const {
  if (size_ratio < 2) throw ConfigError("size ratio must be at least 2");
  if (size_ratio > env.t_lim()) {
    throw ConfigError("size ratio " + std::to_string(size_ratio) + " exceeds T_lim " +
                      std::to_string(env.t_lim()));
  }
  if (memory() != env.M) {
    throw ConfigError("memory split " + std::to_string(memory()) + " B does not sum to M = " +
                      std::to_string(env.M) + " B");
  }
  if (buffer_bytes < env.min_buffer) {
    throw ConfigError("write buffer " + std::to_string(buffer_bytes) +
                      " B is below the minimum " + std::to_string(env.min_buffer) + " B");
  }
}

void CalibrationConstants::validate() const {
  if (!(I_r > 0.0) || I_w < 0.0 || C_r < 0.0 || C_w < 0.0 || C_q < 0.0) {
    throw ConfigError("calibration constants must be non-negative with I_r > 0");
  }
}

std::uint32_t level_count(const Environment& env, std::uint32_t size_ratio,
                          std::uint64_t buffer_bytes) {
  if (size_ratio < 2) throw ConfigError("size ratio must be at least 2");
  if (buffer_bytes == 0) throw ConfigError("write buffer must be non-empty");
  const double target =
      static_cast<double>(env.N) * static_cast<double>(env.E) / static_cast<double>(buffer_bytes) +
      1.0;
  // Smallest L with T^L >= N*E/M_b + 1.
  std::uint32_t levels = 0;
  double capacity = 1.0;
  while (capacity < target) {
    capacity *= size_ratio;
    ++levels;
  }
  return levels == 0 ? 1 : levels;
}

double relaxed_level_count(const Environment& env, double size_ratio,
                           double buffer_bytes) noexcept {
  const double data = static_cast<double>(env.N) * static_cast<double>(env.E);
  return std::log(data / buffer_bytes + 1.0) / std::log(size_ratio);
}

CostBreakdown cost(const Environment& env, const LsmConfig& cfg, const WorkloadMix& mix,
                   LevelModel levels) {
  if (cfg.size_ratio < 2) throw ConfigError("size ratio must be at least 2");
  if (cfg.buffer_bytes == 0) throw ConfigError("write buffer must be non-empty");
  const double T = cfg.size_ratio;
  const double B = static_cast<double>(env.B);
  const double L = levels == LevelModel::Relaxed
                       ? relaxed_level_count(env, T, static_cast<double>(cfg.buffer_bytes))
                       : static_cast<double>(level_count(env, cfg.size_ratio, cfg.buffer_bytes));
  const double phi = filter_term(env, static_cast<double>(cfg.filter_bytes));

  CostBreakdown c;
  if (cfg.policy == Policy::Leveling) {
    c.V = phi;
    c.R = phi + 1.0;
    c.Q = L + mix.s / B;
    c.W = L * T / B;
  } else {
    c.V = phi * T;
    c.R = c.V + 1.0;
    c.Q = L * T + T * mix.s / B;
    c.W = L / B;
  }
  c.combined = mix.v * c.V + mix.r * c.R + mix.q * c.Q + mix.w * c.W;
  return c;
}

double leveling_ratio_root(const Environment& env, const WorkloadMix& mix) {
  if (mix.w <= 0.0) return -1.0;
  const double qB = mix.q * static_cast<double>(env.B);
  auto g = [&](double t) { return mix.w * t * (std::log(t) - 1.0) - qB; };
  // g(1) < 0 and g is increasing on (1, inf).
  double lo = 1.0;
  double hi = 4.0;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::uint32_t theoretical_opt_T(const Environment& env, const WorkloadMix& mix, Policy policy) {
  return theoretical_opt_T(env, mix, policy, default_split(env));
}

std::uint32_t theoretical_opt_T(const Environment& env, const WorkloadMix& mix, Policy policy,
                                const MemorySplit& at) {
  env.validate();
  mix.validate();
  const std::uint64_t t_lim = env.t_lim();
  const auto t_max = static_cast<std::uint32_t>(
      std::min<std::uint64_t>(t_lim, std::numeric_limits<std::uint32_t>::max()));

  if (policy == Policy::Tiering) {
    LsmConfig cfg{2, Policy::Tiering, at.buffer_bytes, at.filter_bytes, 0};
    std::uint32_t best_t = 2;
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t t = 2; t <= t_max; ++t) {
      cfg.size_ratio = t;
      const double c = cost(env, cfg, mix).combined;
      if (c < best) {
        best = c;
        best_t = t;
      }
    }
    return best_t;
  }

  // Leveling: the T-dependent part of the cost is ln(NE/M_b + 1) * (q + wT/B) / ln T,
  // whose derivative has the sign of w T (ln T - 1) - q B.
  if (mix.w <= 0.0) return mix.q > 0.0 ? t_max : 2;
  const double root = leveling_ratio_root(env, mix);
  if (root <= 2.0) return 2;
  if (root >= static_cast<double>(t_max)) return t_max;
  const double B = static_cast<double>(env.B);
  auto shape = [&](double t) { return (mix.q + mix.w * t / B) / std::log(t); };
  const auto lo = static_cast<std::uint32_t>(std::floor(root));
  const std::uint32_t hi = lo + 1;
  return shape(hi) < shape(lo) ? hi : lo;
}

MemorySplit theoretical_opt_memory(const Environment& env, const WorkloadMix& mix,
                                   std::uint32_t size_ratio, Policy policy) {
  env.validate();
  mix.validate();
  if (size_ratio < 2) throw ConfigError("size ratio must be at least 2");
  if (env.M < env.min_buffer) {
    throw ConfigError("memory budget is smaller than the minimum write buffer");
  }
  const double M = static_cast<double>(env.M);
  const double max_filter = static_cast<double>(env.M - env.min_buffer);
  const double T = size_ratio;
  const double ln_t = std::log(T);
  const double B = static_cast<double>(env.B);
  const double lookups = mix.v + mix.r;
  const double lookup_weight = policy == Policy::Leveling ? lookups : lookups * T;
  const double level_weight = policy == Policy::Leveling ? mix.q + mix.w * T / B
                                                         : mix.q * T + mix.w / B;

  auto slope = [&](double filter) {
    const double gain =
        -kBitsPerByte / static_cast<double>(env.N) * lookup_weight * filter_term(env, filter);
    return gain + level_weight * level_slope_in_filter(env, ln_t, M - filter);
  };

  double filter = 0.0;
  if (slope(0.0) >= 0.0) {
    filter = 0.0;
  } else if (slope(max_filter) <= 0.0) {
    filter = max_filter;
  } else {
    double lo = 0.0;
    double hi = max_filter;
    for (int i = 0; i < 200 && hi - lo > 0.25; ++i) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    filter = 0.5 * (lo + hi);
  }
  const auto filter_bytes = static_cast<std::uint64_t>(std::llround(filter));
  return MemorySplit{env.M - filter_bytes, filter_bytes};
}

LsmConfig analytic_optimum(const Environment& env, const WorkloadMix& mix, Policy policy) {
  const std::uint32_t t = theoretical_opt_T(env, mix, policy);
  const MemorySplit split = theoretical_opt_memory(env, mix, t, policy);
  return LsmConfig{t, policy, split.buffer_bytes, split.filter_bytes, 0};
}

MemorySplit default_split(const Environment& env) {
  const auto ten_bits = static_cast<std::uint64_t>(std::llround(10.0 * static_cast<double>(env.N) /
                                                                kBitsPerByte));
  const std::uint64_t room = env.M > env.min_buffer ? env.M - env.min_buffer : 0;
  const std::uint64_t filter = std::min(ten_bits, room);
  return MemorySplit{env.M - filter, filter};
}

LsmConfig default_config(const Environment& env) {
  const MemorySplit split = default_split(env);
  const auto t = static_cast<std::uint32_t>(std::min<std::uint64_t>(10, env.t_lim()));
  return LsmConfig{t, Policy::Leveling, split.buffer_bytes, split.filter_bytes, 0};
}

double calibrated_cost(const Environment& env, const LsmConfig& cfg, const WorkloadMix& mix,
                       const CalibrationConstants& k) {
  if (cfg.policy != Policy::Leveling) {
    throw ConfigError("the calibrated cost is defined for leveling only");
  }
  if (cfg.size_ratio < 2) throw ConfigError("size ratio must be at least 2");
  if (cfg.buffer_bytes == 0) throw ConfigError("write buffer must be non-empty");
  k.validate();
  const double T = cfg.size_ratio;
  const double B = static_cast<double>(env.B);
  const double L = relaxed_level_count(env, T, static_cast<double>(cfg.buffer_bytes));
  const double phi = filter_term(env, static_cast<double>(cfg.filter_bytes));
  return k.I_r * mix.v * phi + k.I_r * mix.r * (phi + 1.0) + 2.0 * k.C_r * L +
         k.I_r * mix.q * (L + mix.s / B) + k.C_q * L + (k.I_w + k.I_r) * L * T / B +
         k.C_w * T * L;
}

LsmConfig extrapolate(const LsmConfig& cfg, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("extrapolation factor must be positive");
  LsmConfig out = cfg;
  if (is_integral(k)) {
    const auto factor = static_cast<std::uint64_t>(k);
    out.buffer_bytes = cfg.buffer_bytes * factor;
    out.filter_bytes = cfg.filter_bytes * factor;
    out.cache_bytes = cfg.cache_bytes * factor;
    return out;
  }
  const auto total = static_cast<std::uint64_t>(std::llround(k * static_cast<double>(cfg.memory())));
  out.filter_bytes = static_cast<std::uint64_t>(std::llround(k * static_cast<double>(cfg.filter_bytes)));
  out.cache_bytes = static_cast<std::uint64_t>(std::llround(k * static_cast<double>(cfg.cache_bytes)));
  out.buffer_bytes = total - out.filter_bytes - out.cache_bytes;
  return out;
}

}  // namespace camal
