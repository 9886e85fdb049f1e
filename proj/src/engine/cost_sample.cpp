#include "camal/cost_sample.hpp"

#include "camal/errors.hpp"

namespace camal {

std::uint64_t IoStats::ops() const noexcept {
  std::uint64_t n = 0;
  for (auto c : op_counts) n += c;
  return n;
}

IoStats IoStats::operator-(const IoStats& e) const noexcept {
  IoStats d;
  d.blocks_read = blocks_read - e.blocks_read;
  d.blocks_written = blocks_written - e.blocks_written;
  d.compaction_blocks_read = compaction_blocks_read - e.compaction_blocks_read;
  d.filter_probes = filter_probes - e.filter_probes;
  d.filter_false_positives = filter_false_positives - e.filter_false_positives;
  d.cache_hits = cache_hits - e.cache_hits;
  d.wall_ns = wall_ns - e.wall_ns;
  d.flushes = flushes - e.flushes;
  d.compactions = compactions - e.compactions;
  for (std::size_t i = 0; i < op_counts.size(); ++i) d.op_counts[i] = op_counts[i] - e.op_counts[i];
  return d;
}

IoStats& IoStats::operator+=(const IoStats& o) noexcept {
  blocks_read += o.blocks_read;
  blocks_written += o.blocks_written;
  compaction_blocks_read += o.compaction_blocks_read;
  filter_probes += o.filter_probes;
  filter_false_positives += o.filter_false_positives;
  cache_hits += o.cache_hits;
  wall_ns += o.wall_ns;
  flushes += o.flushes;
  compactions += o.compactions;
  for (std::size_t i = 0; i < op_counts.size(); ++i) op_counts[i] += o.op_counts[i];
  return *this;
}

std::string_view label_name(LabelKind kind) noexcept {
  switch (kind) {
    case LabelKind::MeanLatency:
      return "latency";
    case LabelKind::P90Latency:
      return "p90";
    case LabelKind::IoPerOp:
      return "io";
  }
  return "latency";
}

LabelKind parse_label(std::string_view name) {
  if (name == "latency") return LabelKind::MeanLatency;
  if (name == "p90") return LabelKind::P90Latency;
  if (name == "io") return LabelKind::IoPerOp;
  throw ConfigError("unknown label kind '" + std::string(name) + "' (latency|p90|io)");
}

double CostSample::label(LabelKind kind) const noexcept {
  switch (kind) {
    case LabelKind::MeanLatency:
      return mean_latency_ns;
    case LabelKind::P90Latency:
      return p90_latency_ns;
    case LabelKind::IoPerOp:
      return io_per_op;
  }
  return mean_latency_ns;
}

}  // namespace camal
