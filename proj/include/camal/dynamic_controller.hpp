#pragma once

// Online reconfiguration: watch operation fractions period by period, and
// when one drifts more than tau from the mix of the last reconfiguration,
// pick a new target with the cost model and hand it to the engine's lazy
// transition.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "camal/analytic_model.hpp"
#include "camal/cost_sample.hpp"
#include "camal/learner.hpp"
#include "camal/tuner.hpp"
#include "camal/workload.hpp"

namespace camal {

class LsmTree;

struct DetectorConfig {
  std::uint64_t p = 10'000;  // period length in operations
  double tau = 0.10;         // absolute drift on any operation fraction
  // A trigger keeps the current target unless the model predicts at least
  // this relative saving for the observed mix.
  double min_gain = 0.0;

  void validate() const;
};

enum class TriggerKind : std::uint8_t { None, V, R, Q, W };
std::string_view trigger_name(TriggerKind kind) noexcept;

struct Decision {
  bool reconfigure = false;
  TriggerKind kind = TriggerKind::None;  // the largest drift, when triggered
  double delta = 0.0;
};

// Empirical fractions of a window; deletes count as writes.
WorkloadMix observe(std::span<const Operation> window);

// Triggers iff some |observed - reference| fraction strictly exceeds tau.
Decision should_reconfigure(const WorkloadMix& observed, const WorkloadMix& reference, double tau);

struct ShiftEvent {
  std::uint64_t period = 0;
  std::uint64_t phase = 0;
  TriggerKind kind = TriggerKind::None;
  WorkloadMix observed;
  WorkloadMix reference;
  LsmConfig old_config;
  LsmConfig new_config;
};

// Model argmin for `mix` at the training scale, mapped to `live` by
// k = live.N / train.N. The buffer absorbs rounding so memory sums to live.M.
LsmConfig target_for(const TrainedModel& model, const Environment& train_env,
                     const Environment& live, const WorkloadMix& mix, const TunerConfig& tcfg);

class DynamicController {
 public:
  DynamicController(const TrainedModel& model, Environment train_env, DetectorConfig detector,
                    TunerConfig tcfg, WorkloadMix reference);

  // Observes one period; retargets the engine and returns the event on a trigger.
  std::optional<ShiftEvent> on_period(LsmTree& engine, std::span<const Operation> window,
                                      std::uint64_t period, std::uint64_t phase);

  // Unconditional retarget to the model's choice for `observed`.
  ShiftEvent retarget(LsmTree& engine, const WorkloadMix& observed);

  const WorkloadMix& reference() const noexcept { return reference_; }
  const DetectorConfig& detector() const noexcept { return detector_; }

 private:
  const TrainedModel& model_;
  Environment train_env_;
  DetectorConfig detector_;
  TunerConfig tcfg_;
  WorkloadMix reference_;
};

struct DynamicOptions {
  DetectorConfig detector;
  std::uint64_t periods_per_phase = 50;
  KeyDistribution dist{};
  std::uint64_t seed = 1;
  double device_read_ns = 0.0;
  double device_write_ns = 0.0;
};

struct PhaseResult {
  std::uint64_t phase = 0;
  WorkloadMix mix;
  IoStats io;  // phase operations plus the filler inserts after them
  double mean_latency_ns = 0.0;
  double p90_latency_ns = 0.0;
  double io_per_op = 0.0;
  // Compaction I/O beyond the control run in this phase. Negative when a
  // merge the control run performs here lands in another phase of the
  // dynamic run.
  std::int64_t transition_io = 0;
};

struct DynamicReport {
  std::vector<PhaseResult> dynamic;
  std::vector<PhaseResult> control;   // tuned start, never retargeted
  std::vector<PhaseResult> baseline;  // static default configuration
  std::vector<ShiftEvent> events;
  LsmConfig initial;
  std::uint64_t filler_per_phase = 0;

  std::uint64_t total_io(const std::vector<PhaseResult>& phases) const noexcept;
  // Net compaction I/O beyond the control run over the whole replay, floored at 0.
  std::uint64_t transition_io() const noexcept;
};

// Replays `phases` on three in-memory engines loaded with env.N entries.
// Between phases every engine receives the same number of fresh-key inserts:
// one buffer flush per level of the initial configuration.
DynamicReport run_dynamic(const Environment& env, const std::vector<WorkloadMix>& phases,
                          const TrainedModel& model, const Environment& train_env,
                          const TunerConfig& tcfg, const DynamicOptions& options);

inline constexpr const char* kEventCsvHeader =
    "period,phase,trigger_kind,old_T,new_T,old_Mf,new_Mf,old_Mb,new_Mb,old_Mc,new_Mc";
inline constexpr const char* kPhaseCsvHeader =
    "phase,v,r,q,w,ops,blocks_read,blocks_written,io_per_op,mean_latency_ns,p90_latency_ns,"
    "transition_io";

std::string events_csv(const std::vector<ShiftEvent>& events);
std::string phases_csv(const std::vector<PhaseResult>& phases);

}  // namespace camal
