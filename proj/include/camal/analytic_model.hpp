#pragma once

// Complexity-based I/O cost models for leveled and tiered LSM-trees, their
// first-order optimality conditions, the CPU+I/O calibrated cost, and the
// scale-extrapolation rule for tuned configurations.
//
// Units: entry counts for N and B, bytes for E and every memory budget.
// Bloom-filter memory enters the formulas as bits (8 * filter_bytes).

#include <cstdint>
#include <string_view>

#include "camal/workload.hpp"

namespace camal {

inline constexpr std::uint64_t kDefaultBlockBytes = 4096;
// On-disk block layout: u16 record count, then records of
// [u8 tombstone][u64 key][u32 value length][value].
inline constexpr std::uint64_t kBlockHeaderBytes = 2;
inline constexpr std::uint64_t kRecordOverheadBytes = 13;

enum class Policy : std::uint8_t { Leveling, Tiering };

std::string_view policy_name(Policy p) noexcept;
Policy parse_policy(std::string_view name);

// Immutable system facts.
struct Environment {
  std::uint64_t N = 0;           // entries
  std::uint64_t E = 0;           // bytes per entry
  std::uint64_t B = 0;           // entries per block
  std::uint64_t M = 0;           // total memory, bytes
  std::uint64_t min_buffer = 0;  // smallest admissible write buffer, bytes
  std::uint64_t block_bytes = kDefaultBlockBytes;

  // B = block_bytes / E.
  static Environment make(std::uint64_t entries, std::uint64_t entry_bytes, std::uint64_t memory,
                          std::uint64_t min_buffer, std::uint64_t block_bytes = kDefaultBlockBytes);

  // N = 1e7 entries of 1 KB, 16 MB of memory, 1 MB buffer floor.
  static Environment full_profile();
  // N = 1e5 entries of 64 B, 256 KB of memory, 8 KB buffer floor.
  static Environment test_profile();

  // Largest admissible size ratio: floor(N * E / min_buffer).
  std::uint64_t t_lim() const noexcept;

  // Value payload size so a record fills exactly one B-th of a block.
  std::size_t value_bytes() const noexcept;

  // Same system with N and M multiplied by k (buffer floor and block size kept).
  Environment scaled(double k) const;

  void validate() const;

  friend bool operator==(const Environment&, const Environment&) = default;
};

// One tunable point.
struct LsmConfig {
  std::uint32_t size_ratio = 10;
  Policy policy = Policy::Leveling;
  std::uint64_t buffer_bytes = 0;
  std::uint64_t filter_bytes = 0;
  std::uint64_t cache_bytes = 0;

  std::uint64_t memory() const noexcept { return buffer_bytes + filter_bytes + cache_bytes; }
  double bits_per_key(const Environment& env) const noexcept;

  // 2 <= T <= T_lim, memory sums to M, buffer >= min_buffer.
  void validate(const Environment& env) const;

  friend bool operator==(const LsmConfig&, const LsmConfig&) = default;
};

struct MemorySplit {
  std::uint64_t buffer_bytes = 0;
  std::uint64_t filter_bytes = 0;

  friend bool operator==(const MemorySplit&, const MemorySplit&) = default;
};

// Expected I/Os per operation kind plus the mix-weighted mean.
struct CostBreakdown {
  double V = 0.0;
  double R = 0.0;
  double Q = 0.0;
  double W = 0.0;
  double combined = 0.0;
};

struct CalibrationConstants {
  double I_r = 1.0;   // read I/O
  double I_w = 1.0;   // write I/O
  double C_r = 0.01;  // probing one run's metadata
  double C_w = 0.01;  // compacting one entry
  double C_q = 0.01;  // range-lookup metadata work

  void validate() const;
};

// How the level count enters the cost formulas.
//   Relaxed: L = log_T(N*E/M_b + 1) as a real number. This is the smooth
//     surface whose T-derivative has the closed-form root used by the
//     optimizers, and the one every optimizer in this module minimizes.
//   Ceil: L = level_count(), the integer number of levels.
enum class LevelModel { Relaxed, Ceil };

// ceil(log_T(N*E/M_b + 1)), at least 1.
std::uint32_t level_count(const Environment& env, std::uint32_t size_ratio,
                          std::uint64_t buffer_bytes);

double relaxed_level_count(const Environment& env, double size_ratio, double buffer_bytes) noexcept;

CostBreakdown cost(const Environment& env, const LsmConfig& cfg, const WorkloadMix& mix,
                   LevelModel levels = LevelModel::Relaxed);

// Real root of w*T*(ln T - 1) = q*B on (1, inf), if one exists.
// Returns a negative value when w == 0 (no root).
double leveling_ratio_root(const Environment& env, const WorkloadMix& mix);

// Integer T in [2, T_lim] minimizing the relaxed cost. Leveling brackets the
// root of the T-derivative and compares its two integer neighbours; tiering
// scans all integers at the memory split `at` (its optimum depends mildly on
// the filter memory).
std::uint32_t theoretical_opt_T(const Environment& env, const WorkloadMix& mix, Policy policy,
                                const MemorySplit& at);
std::uint32_t theoretical_opt_T(const Environment& env, const WorkloadMix& mix, Policy policy);

// Split of M between buffer and filters (no cache) minimizing the relaxed
// cost at fixed T. Bisection on the sign change of the M_f-derivative.
MemorySplit theoretical_opt_memory(const Environment& env, const WorkloadMix& mix,
                                   std::uint32_t size_ratio, Policy policy);

// Analytic optimum for one policy: T* at the default split, then memory at T*.
LsmConfig analytic_optimum(const Environment& env, const WorkloadMix& mix, Policy policy);

// Leveling, T = 10, 10 bits per key of filter, rest of M to the buffer.
LsmConfig default_config(const Environment& env);

// Filter-to-buffer split used to seed tiering's T scan: 10 bits per key, or
// whatever M - min_buffer allows.
MemorySplit default_split(const Environment& env);

// CPU+I/O overhead per operation of a leveled tree:
//   I_r v e^{-M_f/N} + I_r r (e^{-M_f/N} + 1) + 2 C_r L + I_r q (L + s/B)
//   + C_q L + (I_w + I_r) L T / B + C_w T L
// The last four CPU/compaction terms are not weighted by the operation mix.
double calibrated_cost(const Environment& env, const LsmConfig& cfg, const WorkloadMix& mix,
                       const CalibrationConstants& constants = {});

// Tuned configuration at (N', M') mapped to (kN', kM'): T kept, every memory
// budget multiplied by k. Integer k is exact; otherwise budgets are rounded
// to bytes and the buffer absorbs the rounding so the total is round(k*M').
LsmConfig extrapolate(const LsmConfig& cfg, double k);

}  // namespace camal
