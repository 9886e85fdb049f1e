#include <cmath>

#include "camal/lsm_tree.hpp"
#include "camal/tuner.hpp"

namespace camal {

CostSample AnalyticEvaluator::evaluate(const std::string& workload_id, const WorkloadMix& mix,
                                       const Environment& env, const LsmConfig& cfg,
                                       std::uint64_t seed) {
  ++calls_;
  CostSample s;
  s.workload_id = workload_id;
  s.mix = mix;
  s.config = cfg;
  s.env = env;
  s.seed = seed;
  const double c = cost(env, cfg, mix).combined;
  s.mean_latency_ns = c;
  s.p90_latency_ns = c;
  s.io_per_op = c;
  return s;
}

void preload(LsmTree& tree, std::uint64_t count) {
  const std::size_t bytes = tree.env().value_bytes();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto key = KeyUniverse::key_at(i);
    tree.put(key, make_value(key, 0, bytes));
  }
}

CostSample EngineEvaluator::evaluate(const std::string& workload_id, const WorkloadMix& mix,
                                     const Environment& env, const LsmConfig& cfg,
                                     std::uint64_t seed) {
  ++calls_;
  EngineOptions eo;
  eo.seed = seed;
  eo.device_read_ns = options_.device_read_ns;
  eo.device_write_ns = options_.device_write_ns;
  auto tree = LsmTree::open(env, cfg, eo);
  preload(*tree, env.N);

  const KeyUniverse universe{env.N};
  KeyDistribution dist = options_.dist;
  const auto warm_ops =
      static_cast<std::uint64_t>(std::llround(options_.warmup_fraction * options_.ops));
  if (warm_ops > 0) {
    dist.seed = seed ^ 0x77a3e5c1d2b49f01ULL;
    (void)tree->run_workload(generate_stream(mix, dist, warm_ops, universe));
  }
  dist.seed = seed;
  CostSample s = tree->run_workload(generate_stream(mix, dist, options_.ops, universe));
  s.workload_id = workload_id;
  s.mix = mix;
  s.config = cfg;
  s.seed = seed;
  return s;
}

}  // namespace camal
