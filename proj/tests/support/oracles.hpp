#pragma once

// Brute-force reference answers shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "camal/analytic_model.hpp"
#include "camal/workload.hpp"

namespace camal::oracle {

inline double sum_fpr(const std::vector<std::uint64_t>& n, const std::vector<double>& bits) {
  const double ln2sq = std::numbers::ln2 * std::numbers::ln2;
  double s = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] == 0) continue;
    s += std::min(1.0, std::exp(-bits[i] / static_cast<double>(n[i]) * ln2sq));
  }
  return s;
}

// Smallest sum of per-level false-positive rates over allocations of
// `total_bits` to two or three levels, searched on a grid of `steps` cells
// per free dimension.
inline double monkey_grid_min(const std::vector<std::uint64_t>& n, double total_bits,
                              int steps = 2000) {
  double best = std::numeric_limits<double>::infinity();
  if (n.size() == 1) return sum_fpr(n, {total_bits});
  if (n.size() == 2) {
    for (int i = 0; i <= steps; ++i) {
      const double a = total_bits * i / steps;
      best = std::min(best, sum_fpr(n, {a, total_bits - a}));
    }
    return best;
  }
  for (int i = 0; i <= steps; ++i) {
    const double a = total_bits * i / steps;
    for (int j = 0; i + j <= steps; ++j) {
      const double b = total_bits * j / steps;
      best = std::min(best, sum_fpr(n, {a, b, total_bits - a - b}));
    }
  }
  return best;
}

// Exhaustive integer T scan at a fixed memory split.
inline std::uint32_t scan_T(const Environment& env, const WorkloadMix& mix, Policy policy,
                            const MemorySplit& at) {
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t arg = 2;
  for (std::uint32_t t = 2; t <= env.t_lim(); ++t) {
    const double v = cost(env, {t, policy, at.buffer_bytes, at.filter_bytes, 0}, mix).combined;
    if (v < best) {
      best = v;
      arg = t;
    }
  }
  return arg;
}

// Exhaustive M_f scan at fixed T on a bits-per-key grid; returns filter bytes.
inline std::uint64_t scan_filter(const Environment& env, const WorkloadMix& mix, std::uint32_t t,
                                 Policy policy, double step_bpk) {
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t arg = 0;
  const double room = static_cast<double>(env.M - env.min_buffer);
  for (std::uint64_t i = 0;; ++i) {
    const double f = static_cast<double>(i) * step_bpk * static_cast<double>(env.N) / 8.0;
    if (f > room) break;
    const auto fb = static_cast<std::uint64_t>(std::llround(f));
    const double v = cost(env, {t, policy, env.M - fb, fb, 0}, mix).combined;
    if (v < best) {
      best = v;
      arg = fb;
    }
  }
  return arg;
}

struct GridOptimum {
  LsmConfig config;
  double cost = std::numeric_limits<double>::infinity();
};

// Joint scan over policy, integer T in [2, T_lim] and M_f on a bits-per-key
// grid (no cache) of the relaxed analytic cost.
inline GridOptimum exhaustive_optimum(const Environment& env, const WorkloadMix& mix,
                                      double step_bpk) {
  GridOptimum best;
  const double room = static_cast<double>(env.M - env.min_buffer);
  std::vector<std::uint64_t> filters;
  for (std::uint64_t i = 0;; ++i) {
    const double f = static_cast<double>(i) * step_bpk * static_cast<double>(env.N) / 8.0;
    if (f > room) break;
    filters.push_back(static_cast<std::uint64_t>(std::llround(f)));
  }
  for (auto policy : {Policy::Leveling, Policy::Tiering}) {
    for (std::uint32_t t = 2; t <= env.t_lim(); ++t) {
      for (auto fb : filters) {
        const LsmConfig c{t, policy, env.M - fb, fb, 0};
        const double v = cost(env, c, mix).combined;
        if (v < best.cost) best = {c, v};
      }
    }
  }
  return best;
}

}  // namespace camal::oracle
