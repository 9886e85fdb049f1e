#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "camal/errors.hpp"
#include "camal/tuner.hpp"
#include "oracles.hpp"

using namespace camal;

namespace {

Environment env() { return Environment::test_profile(); }

TunerConfig oracle_config() {
  TunerConfig t;
  t.label = LabelKind::IoPerOp;
  return t;
}

double analytic(const LsmConfig& c, const WorkloadMix& m, const Environment& e = env()) {
  return cost(e, c, m).combined;
}

}  // namespace

TEST(TunerConfig, Validation) {
  TunerConfig t;
  EXPECT_NO_THROW(t.validate());
  t.T_step = 0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.bpk_step = -1;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.rho = -0.1;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(SampleStore, RejectsDuplicatesAndRoundTrips) {
  SampleStore store;
  AnalyticEvaluator ev;
  const auto mix = training_workloads()[0];
  auto s = ev.evaluate("w01", mix, env(), default_config(env()), 1);
  store.append(s);
  EXPECT_TRUE(store.contains(s));
  EXPECT_THROW(store.append(s), ConfigError);
  s.seed = 2;
  store.append(s);
  auto t = ev.evaluate("w02", training_workloads()[1], env(), analytic_choice(env(), mix), 1);
  t.io.blocks_read = 17;
  store.append(t);
  const auto csv = store.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), SampleStore::kCsvHeader);
  const auto back = SampleStore::parse_csv(csv);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back.to_csv(), csv);
  EXPECT_EQ(back.samples()[2].io.blocks_read, 17u);
  EXPECT_EQ(back.samples()[2].config, t.config);
  EXPECT_EQ(back.samples()[2].mix, t.mix);
  EXPECT_EQ(back.samples()[0].io_per_op, store.samples()[0].io_per_op);
  const auto path = std::filesystem::temp_directory_path() / "camal_samples_rt.csv";
  store.write_csv(path);
  EXPECT_EQ(SampleStore::read_csv(path).to_csv(), csv);
  std::filesystem::remove(path);
  EXPECT_THROW(SampleStore::parse_csv("bad,header\n"), StorageError);
}

TEST(DecoupledAl, ZeroBudgetIsAnalytic) {
  auto t = oracle_config();
  t.h = 0;
  AnalyticEvaluator ev;
  const auto mixes = training_workloads();
  const auto r = decoupled_al(mixes, env(), t, ev);
  EXPECT_EQ(ev.calls(), 0u);
  EXPECT_TRUE(r.store.samples().empty());
  for (std::size_t i = 0; i < mixes.size(); ++i) {
    EXPECT_EQ(r.workloads[i].config, analytic_choice(env(), mixes[i]));
    EXPECT_EQ(r.workloads[i].config.cache_bytes, 0u);
  }
  EXPECT_EQ(r.workloads[0].workload_id, "w01");
  EXPECT_EQ(r.workloads[14].workload_id, "w15");
}

TEST(DecoupledAl, CallBudgetPerStage) {
  auto t = oracle_config();
  AnalyticEvaluator ev;
  const auto mixes = training_workloads();
  const auto r = decoupled_al(mixes, env(), t, ev);
  EXPECT_EQ(ev.calls(), 20u * mixes.size());
  EXPECT_EQ(r.evaluator_calls, ev.calls());
  for (const auto& wt : r.workloads) {
    EXPECT_EQ(wt.calls, 20u);
    std::map<Policy, std::size_t> per;
    for (const auto& st : wt.trace) per[st.policy] += st.calls;
    EXPECT_EQ(per[Policy::Leveling], 3u + 3u + 4u);
    EXPECT_EQ(per[Policy::Tiering], 3u + 3u + 4u);
  }
  EXPECT_EQ(r.store.size(), 20u * mixes.size());
  EXPECT_TRUE(r.warnings.empty());
}

TEST(DecoupledAl, SmallBudgetEndsStagesEarly) {
  auto t = oracle_config();
  t.h = 8;  // 4 per policy: stage 1 plus one call of stage 2
  AnalyticEvaluator ev;
  const auto r = decoupled_al({training_workloads()[0]}, env(), t, ev);
  EXPECT_EQ(ev.calls(), 8u);
  EXPECT_NO_THROW(r.workloads[0].config.validate(env()));
}

TEST(DecoupledAl, OracleTuningMatchesExhaustiveOptimum) {
  auto t = oracle_config();
  AnalyticEvaluator ev;
  const auto mixes = training_workloads();
  const auto r = decoupled_al(mixes, env(), t, ev);
  for (std::size_t i = 0; i < mixes.size(); ++i) {
    const auto best = oracle::exhaustive_optimum(env(), mixes[i], t.grid_bpk);
    const auto& got = r.workloads[i].config;
    EXPECT_NO_THROW(got.validate(env()));
    EXPECT_LE(analytic(got, mixes[i]), best.cost * (1 + 1e-9)) << i;
    EXPECT_EQ(got.policy, best.config.policy) << i;
    EXPECT_EQ(got.size_ratio, best.config.size_ratio) << i;
    EXPECT_LE(std::abs(static_cast<double>(got.filter_bytes) - static_cast<double>(best.config.filter_bytes)),
              t.grid_bpk * env().N / 8.0 + 1)
        << i;
  }
}

TEST(DecoupledAl, IncumbentNeverGetsWorseOnOracle) {
  auto t = oracle_config();
  AnalyticEvaluator ev;
  const auto r = decoupled_al(training_workloads(), env(), t, ev);
  for (const auto& wt : r.workloads) {
    for (auto p : {Policy::Leveling, Policy::Tiering}) {
      double prev = std::numeric_limits<double>::infinity();
      for (const auto& st : wt.trace) {
        if (st.policy != p) continue;
        const double c = analytic(st.incumbent, wt.mix);
        EXPECT_LE(c, prev * (1 + 1e-12)) << wt.workload_id << " " << st.stage;
        prev = c;
      }
    }
  }
}

TEST(DecoupledAl, StageOneBracketsInteriorRoot) {
  auto t = oracle_config();
  AnalyticEvaluator ev;
  const auto mixes = training_workloads();
  const auto r = decoupled_al(mixes, env(), t, ev);
  for (std::size_t i = 0; i < mixes.size(); ++i) {
    const double root = leveling_ratio_root(env(), mixes[i]);
    if (!(root > 2.0 && root < env().t_lim() - 2.0)) continue;
    // The first three samples of each workload are leveling stage 1.
    const auto& s = r.store.samples();
    std::uint32_t lo = ~0u, hi = 0;
    for (std::size_t k = 20 * i; k < 20 * i + 3; ++k) {
      EXPECT_EQ(s[k].config.policy, Policy::Leveling);
      lo = std::min(lo, s[k].config.size_ratio);
      hi = std::max(hi, s[k].config.size_ratio);
    }
    EXPECT_LE(lo, root) << i;
    EXPECT_GE(hi, root) << i;
  }
}

TEST(DecoupledAl, Deterministic) {
  auto t = oracle_config();
  AnalyticEvaluator a, b;
  const auto mixes = training_workloads();
  const auto r1 = decoupled_al(mixes, env(), t, a);
  const auto r2 = decoupled_al(mixes, env(), t, b);
  EXPECT_EQ(r1.store.to_csv(), r2.store.to_csv());
  for (std::size_t i = 0; i < mixes.size(); ++i) EXPECT_EQ(r1.workloads[i].config, r2.workloads[i].config);
  EXPECT_EQ(serialize_model(*r1.model), serialize_model(*r2.model));
}

TEST(DecoupledAl, RejectsBadInput) {
  AnalyticEvaluator ev;
  EXPECT_THROW(decoupled_al({{0.5, 0.5, 0.5, 0}}, env(), {}, ev), ConfigError);
  EXPECT_THROW(decoupled_al(training_workloads(), env(), {}, ev, {"a"}), ConfigError);
}

TEST(Extrapolation, UnitScaleIsPlainTuning) {
  auto t = oracle_config();
  AnalyticEvaluator a, b;
  const auto mixes = training_workloads();
  const auto x = tune_with_extrapolation(mixes, env(), 1.0, t, a);
  const auto r = decoupled_al(mixes, env(), t, b);
  for (std::size_t i = 0; i < mixes.size(); ++i) EXPECT_EQ(x.configs[i], r.workloads[i].config);
  EXPECT_EQ(a.calls(), b.calls());
}

TEST(Extrapolation, TenfoldStaysNearFullScaleOptimum) {
  auto t = oracle_config();
  const auto full = Environment::test_profile().scaled(10);
  const auto small = Environment::test_profile();
  AnalyticEvaluator ev;
  const auto mixes = training_workloads();
  const auto x = tune_with_extrapolation(mixes, small, 10.0, t, ev);
  EXPECT_EQ(ev.calls(), 20u * mixes.size());
  for (std::size_t i = 0; i < mixes.size(); ++i) {
    const auto& c = x.configs[i];
    EXPECT_EQ(c.memory(), full.M);
    const double best = oracle::exhaustive_optimum(full, mixes[i], 0.25).cost;
    EXPECT_LE(analytic(c, mixes[i], full), best * 1.05) << i;
  }
}

TEST(KlBall, DrawsStayInsideAndRespectSupport) {
  const WorkloadMix m{0.5, 0.3, 0.0, 0.2};
  const auto draws = sample_kl_ball(m, 0.2, 50, 9);
  ASSERT_EQ(draws.size(), 50u);
  for (const auto& d : draws) {
    EXPECT_NO_THROW(d.validate());
    EXPECT_LE(kl_divergence(d, m), 0.2 + 1e-12);
    EXPECT_EQ(d.q, 0.0);
  }
  EXPECT_EQ(sample_kl_ball(m, 0.2, 50, 9).front(), draws.front());
  EXPECT_NEAR(kl_divergence(m, m), 0.0, 1e-15);
  const auto same = sample_kl_ball(m, 0.0, 3, 1);
  for (const auto& d : same) EXPECT_EQ(d, m);
}

TEST(Robust, ZeroRadiusIsNominalArgmin) {
  const auto mix = training_workloads()[7];
  auto t = oracle_config();
  auto f = [&](const LsmConfig& c, const WorkloadMix& m) { return analytic(c, m); };
  const auto r = robust_tune(mix, 0.0, 8, f, env(), t);
  const auto nominal = select_config([&](const LsmConfig& c) { return analytic(c, mix); }, env(), mix, t);
  EXPECT_EQ(r.config, nominal.config);
}

TEST(Robust, SingleDrawIsArgminForThatDraw) {
  const auto mix = training_workloads()[0];
  auto t = oracle_config();
  auto f = [&](const LsmConfig& c, const WorkloadMix& m) { return analytic(c, m); };
  const auto r = robust_tune(mix, 0.3, 1, f, env(), t);
  ASSERT_EQ(r.draws.size(), 1u);
  const auto d = r.draws[0];
  const auto direct = select_config([&](const LsmConfig& c) { return analytic(c, d); }, env(), d, t);
  EXPECT_NEAR(analytic(r.config, d), direct.objective, 1e-9 * direct.objective);
}

TEST(Robust, MeanOverDrawsNoWorseThanNominal) {
  auto t = oracle_config();
  auto f = [&](const LsmConfig& c, const WorkloadMix& m) { return analytic(c, m); };
  for (const auto& mix : training_workloads()) {
    const auto r = robust_tune(mix, 0.2, 16, f, env(), t);
    ASSERT_EQ(r.draws.size(), 16u);
    const auto nominal =
        select_config([&](const LsmConfig& c) { return analytic(c, mix); }, env(), mix, t).config;
    double mean_r = 0, mean_n = 0;
    for (const auto& d : r.draws) {
      mean_r += analytic(r.config, d);
      mean_n += analytic(nominal, d);
    }
    EXPECT_LE(mean_r, mean_n * (1 + 1e-9));
  }
}

TEST(EngineEvaluator, DeterministicSmallRun) {
  EngineEvaluatorOptions o;
  o.ops = 2000;
  EngineEvaluator ev(o);
  const auto e = Environment::make(10'000, 64, 64 * 1024, 8192);
  const auto mix = training_workloads()[0];
  const auto a = ev.evaluate("w01", mix, e, default_config(e), 5);
  const auto b = ev.evaluate("w01", mix, e, default_config(e), 5);
  EXPECT_EQ(a.io.blocks_read, b.io.blocks_read);
  EXPECT_EQ(a.io.blocks_written, b.io.blocks_written);
  EXPECT_EQ(a.io.ops(), 2000u);
  EXPECT_EQ(a.io_per_op, b.io_per_op);
  EXPECT_GT(a.mean_latency_ns, 0.0);
  EXPECT_GE(a.p90_latency_ns, 0.0);
  EXPECT_EQ(ev.calls(), 2u);
}
