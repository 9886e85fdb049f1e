#pragma once

// Decoupled active learning over (T, memory split, cache), the model-driven
// configuration search it relies on, scale extrapolation and KL-ball robust
// tuning.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "camal/analytic_model.hpp"
#include "camal/cost_sample.hpp"
#include "camal/learner.hpp"
#include "camal/workload.hpp"

namespace camal {

struct TunerConfig {
  std::size_t h = 20;  // evaluator calls per workload, split evenly over both policies
  std::size_t samples_per_stage = 3;
  std::uint32_t T_step = 2;
  double bpk_step = 2.0;
  std::vector<double> cache_fractions{0.0, 0.1, 0.2, 0.3};
  double grid_bpk = 0.05;  // memory argmin resolution
  LabelKind label = LabelKind::MeanLatency;
  ModelKind model = ModelKind::Poly;
  TreeParams tree_params;
  std::uint64_t seed = 1;
  double rho = 0.0;
  std::size_t rho_draws = 16;

  void validate() const;
};

// Runs one (workload, config) measurement.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual CostSample evaluate(const std::string& workload_id, const WorkloadMix& mix,
                              const Environment& env, const LsmConfig& cfg,
                              std::uint64_t seed) = 0;
};

// Noise-free oracle: every label is the relaxed analytic cost.
class AnalyticEvaluator final : public Evaluator {
 public:
  CostSample evaluate(const std::string& workload_id, const WorkloadMix& mix,
                      const Environment& env, const LsmConfig& cfg, std::uint64_t seed) override;
  std::size_t calls() const noexcept { return calls_; }

 private:
  std::size_t calls_ = 0;
};

struct EngineEvaluatorOptions {
  std::uint64_t ops = 50'000;
  double warmup_fraction = 0.1;
  KeyDistribution dist{};
  double device_read_ns = 10'000.0;
  double device_write_ns = 10'000.0;
};

// Fresh in-memory engine per call: load env.N entries, warm up, measure.
class EngineEvaluator final : public Evaluator {
 public:
  explicit EngineEvaluator(EngineEvaluatorOptions options = {}) : options_(options) {}
  CostSample evaluate(const std::string& workload_id, const WorkloadMix& mix,
                      const Environment& env, const LsmConfig& cfg, std::uint64_t seed) override;
  std::size_t calls() const noexcept { return calls_; }

 private:
  EngineEvaluatorOptions options_;
  std::size_t calls_ = 0;
};

// Preloads `tree` with keys 0..count-1 of the universe.
class LsmTree;
void preload(LsmTree& tree, std::uint64_t count);

// Append-only collection keyed by (workload, config, environment, seed).
class SampleStore {
 public:
  static constexpr const char* kCsvHeader =
      "workload_id,v,r,q,w,s,policy,T,Mb_bytes,Mf_bytes,Mc_bytes,N,E,B,blocks_read,"
      "blocks_written,mean_latency_ns,p90_latency_ns,io_per_op,seed";

  bool contains(const CostSample& s) const;
  // Throws ConfigError on a duplicate key.
  void append(CostSample sample);
  const std::vector<CostSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  // Rows carry no buffer floor, so each sample's env has M = Mb + Mf + Mc,
  // min_buffer = Mb and block_bytes = E * B.
  static SampleStore read_csv(const std::filesystem::path& path);
  static SampleStore parse_csv(const std::string& text);

 private:
  static std::string key_of(const CostSample& s);
  std::vector<CostSample> samples_;
  std::vector<std::string> keys_;  // sorted
};

TrainedModel train_model(const std::vector<CostSample>& samples, LabelKind label, ModelKind kind,
                         const TreeParams& params = {},
                         RankHandling rank = RankHandling::DropDeficient, std::uint64_t seed = 0,
                         CoefficientSign sign = CoefficientSign::NonNegative);

// Cost surface searched by select_config.
using ConfigObjective = std::function<double(const LsmConfig&)>;

ConfigObjective model_objective(const TrainedModel& model, const Environment& env,
                                const WorkloadMix& mix);
// Mean prediction over several mixes.
ConfigObjective model_objective(const TrainedModel& model, const Environment& env,
                                const std::vector<WorkloadMix>& mixes);

struct Selection {
  LsmConfig config;
  double objective = 0.0;
};

// Coordinate search for one policy: T over [2, T_lim] at the analytic split,
// then M_f over the bpk grid, then T and M_f again, then the cache fraction.
// `seed_mix` places the analytic starting point.
Selection select_for_policy(const ConfigObjective& objective, const Environment& env,
                            const WorkloadMix& seed_mix, Policy policy, const TunerConfig& tcfg);
// Cheaper of the two policies.
Selection select_config(const ConfigObjective& objective, const Environment& env,
                        const WorkloadMix& seed_mix, const TunerConfig& tcfg);
Selection select_config(const TrainedModel& model, const Environment& env, const WorkloadMix& mix,
                        const TunerConfig& tcfg);

// Cheaper analytic optimum of the two policies (the zero-budget answer).
LsmConfig analytic_choice(const Environment& env, const WorkloadMix& mix);

struct StageTrace {
  Policy policy = Policy::Leveling;
  std::string stage;  // "T", "memory", "cache"
  std::size_t calls = 0;
  LsmConfig incumbent;
  double predicted = 0.0;  // incumbent under the model trained at the end of the stage
};

struct WorkloadTuning {
  std::string workload_id;
  WorkloadMix mix;
  LsmConfig config;
  double predicted_cost = 0.0;
  double analytic_cost = 0.0;
  std::size_t calls = 0;
  std::vector<StageTrace> trace;
};

struct TuningResult {
  SampleStore store;
  std::vector<WorkloadTuning> workloads;
  std::optional<TrainedModel> model;
  std::vector<std::string> warnings;
  std::size_t evaluator_calls = 0;
};

// Workload ids default to "w01", "w02", ...
TuningResult decoupled_al(const std::vector<WorkloadMix>& workloads, const Environment& env,
                          const TunerConfig& tcfg, Evaluator& evaluator,
                          std::vector<std::string> ids = {});

struct ExtrapolatedTuning {
  TuningResult small;               // as tuned at env_small
  std::vector<LsmConfig> configs;   // mapped to (k N, k M)
};

ExtrapolatedTuning tune_with_extrapolation(const std::vector<WorkloadMix>& workloads,
                                           const Environment& env_small, double k,
                                           const TunerConfig& tcfg, Evaluator& evaluator,
                                           std::vector<std::string> ids = {});

// Mixes drawn by Dirichlet perturbation of `mix` and kept when
// KL(draw || mix) <= rho. Operation kinds absent from `mix` stay absent.
std::vector<WorkloadMix> sample_kl_ball(const WorkloadMix& mix, double rho, std::size_t draws,
                                        std::uint64_t seed);
double kl_divergence(const WorkloadMix& p, const WorkloadMix& q);

struct RobustSelection {
  LsmConfig config;
  std::vector<WorkloadMix> draws;
};

RobustSelection robust_tune(const WorkloadMix& mix, double rho, std::size_t draws,
                            const TrainedModel& model, const Environment& env,
                            const TunerConfig& tcfg);
// Same, minimizing the mean of an arbitrary per-mix objective.
RobustSelection robust_tune(const WorkloadMix& mix, double rho, std::size_t draws,
                            const std::function<double(const LsmConfig&, const WorkloadMix&)>& cost,
                            const Environment& env, const TunerConfig& tcfg);

}  // namespace camal
