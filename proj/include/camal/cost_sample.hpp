#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "camal/analytic_model.hpp"
#include "camal/workload.hpp"

namespace camal {

// Counters kept by one engine instance. Every field only grows; take the
// difference of two snapshots to measure a window.
struct IoStats {
  std::uint64_t blocks_read = 0;             // storage fetches, cache misses plus compaction input
  std::uint64_t blocks_written = 0;          // flush and compaction output
  std::uint64_t compaction_blocks_read = 0;  // the part of blocks_read spent reading merge input
  std::uint64_t filter_probes = 0;
  std::uint64_t filter_false_positives = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t wall_ns = 0;
  std::uint64_t flushes = 0;
  std::uint64_t compactions = 0;
  std::array<std::uint64_t, kOpKindCount> op_counts{};

  std::uint64_t ops() const noexcept;
  // Blocks moved by flushes and merges.
  std::uint64_t compaction_io() const noexcept { return compaction_blocks_read + blocks_written; }

  IoStats operator-(const IoStats& earlier) const noexcept;
  IoStats& operator+=(const IoStats& other) noexcept;

  friend bool operator==(const IoStats&, const IoStats&) = default;
};

enum class LabelKind : std::uint8_t { MeanLatency, P90Latency, IoPerOp };

std::string_view label_name(LabelKind kind) noexcept;
LabelKind parse_label(std::string_view name);

// One measurement of a (workload, config, environment) triple.
struct CostSample {
  std::string workload_id;
  WorkloadMix mix;
  LsmConfig config;
  Environment env;
  IoStats io;
  double mean_latency_ns = 0.0;
  double p90_latency_ns = 0.0;
  double io_per_op = 0.0;
  std::uint64_t seed = 0;

  double label(LabelKind kind) const noexcept;
};

}  // namespace camal
