#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "camal/analytic_model.hpp"
#include "camal/errors.hpp"

using namespace camal;

namespace {

Environment env_with_ratio(double ne_over_mb) {
  // N * E / M_b == ne_over_mb with E = 64, M_b = 64.
  return Environment{static_cast<std::uint64_t>(ne_over_mb), 64, 64, 1 << 20, 64, 4096};
}

Environment mid_env() { return Environment::make(1'000'000, 64, 16ull << 20, 1ull << 20); }

// Exhaustive M_f scan at fixed T on a bits-per-key grid.
std::uint64_t grid_filter(const Environment& env, const WorkloadMix& mix, std::uint32_t t,
                          Policy policy, double step_bpk) {
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t arg = 0;
  const double room = static_cast<double>(env.M - env.min_buffer);
  for (double bpk = 0.0;; bpk += step_bpk) {
    const double f = bpk * static_cast<double>(env.N) / 8.0;
    if (f > room) break;
    const auto fb = static_cast<std::uint64_t>(std::llround(f));
    const LsmConfig c{t, policy, env.M - fb, fb, 0};
    const double v = cost(env, c, mix).combined;
    if (v < best) {
      best = v;
      arg = fb;
    }
  }
  return arg;
}

}  // namespace

TEST(Environment, Profiles) {
  const auto p = Environment::full_profile();
  EXPECT_EQ(p.N, 10'000'000u);
  EXPECT_EQ(p.E, 1024u);
  EXPECT_EQ(p.B, 4u);
  EXPECT_EQ(p.M, 16ull << 20);
  const auto t = Environment::test_profile();
  EXPECT_EQ(t.N, 100'000u);
  EXPECT_EQ(t.B, 64u);
  EXPECT_EQ(t.t_lim(), 781u);
  EXPECT_EQ(t.value_bytes(), 50u);
  EXPECT_EQ(p.value_bytes(), 1010u);
  const auto s = t.scaled(10);
  EXPECT_EQ(s.N, 1'000'000u);
  EXPECT_EQ(s.M, t.M * 10);
  EXPECT_EQ(s.min_buffer, t.min_buffer);
}

TEST(LsmConfig, ValidateInvariants) {
  const auto env = Environment::test_profile();
  EXPECT_NO_THROW(default_config(env).validate(env));
  LsmConfig c = default_config(env);
  c.size_ratio = 1;
  EXPECT_THROW(c.validate(env), ConfigError);
  c = default_config(env);
  c.size_ratio = 782;
  EXPECT_THROW(c.validate(env), ConfigError);
  c = default_config(env);
  c.buffer_bytes -= 1;
  EXPECT_THROW(c.validate(env), ConfigError);
  c = LsmConfig{10, Policy::Leveling, env.min_buffer - 1, env.M - env.min_buffer + 1, 0};
  EXPECT_THROW(c.validate(env), ConfigError);
}

TEST(DefaultConfig, TenBitsPerKey) {
  const auto env = Environment::test_profile();
  const auto c = default_config(env);
  EXPECT_EQ(c.size_ratio, 10u);
  EXPECT_EQ(c.policy, Policy::Leveling);
  EXPECT_DOUBLE_EQ(c.bits_per_key(env), 10.0);
  EXPECT_EQ(c.memory(), env.M);
  EXPECT_EQ(c.cache_bytes, 0u);
}

TEST(LevelCount, Examples) {
  EXPECT_EQ(level_count(env_with_ratio(99), 10, 64), 2u);
  EXPECT_EQ(level_count(env_with_ratio(1), 2, 64), 1u);
  EXPECT_EQ(level_count(env_with_ratio(150), 10, 64), 3u);
  EXPECT_NEAR(relaxed_level_count(env_with_ratio(99), 10, 64), 2.0, 1e-12);
}

TEST(Cost, FilterTermExamples) {
  const auto env = mid_env();
  const WorkloadMix mix{0.25, 0.25, 0.25, 0.25};
  LsmConfig c{10, Policy::Leveling, env.M, 0, 0};
  auto b = cost(env, c, mix);
  EXPECT_DOUBLE_EQ(b.V, 1.0);
  EXPECT_DOUBLE_EQ(b.R, 2.0);
  c.filter_bytes = env.N / 8;
  c.buffer_bytes = env.M - c.filter_bytes;
  b = cost(env, c, mix);
  EXPECT_NEAR(b.V, std::exp(-1.0), 1e-12);
}

TEST(Cost, TieringLookupsScaleWithT) {
  const auto env = mid_env();
  const WorkloadMix mix{0.25, 0.25, 0.25, 0.25};
  for (std::uint32_t t : {2u, 5u, 17u}) {
    for (std::uint64_t f : {0ull, 100'000ull, 900'000ull}) {
      const LsmConfig lev{t, Policy::Leveling, env.M - f, f, 0};
      LsmConfig tier = lev;
      tier.policy = Policy::Tiering;
      EXPECT_NEAR(cost(env, tier, mix).V, cost(env, lev, mix).V * t, 1e-12);
    }
  }
}

TEST(Cost, WriteHeavyDominatedByWriteTerm) {
  const auto env = mid_env();
  const auto mix = training_workloads()[4];
  ASSERT_DOUBLE_EQ(mix.w, 0.97);
  const LsmConfig c{10, Policy::Leveling, env.M - env.N * 10 / 8, env.N * 10 / 8, 0};
  const auto b = cost(env, c, mix);
  const double L = relaxed_level_count(env, 10, static_cast<double>(c.buffer_bytes));
  EXPECT_NEAR(b.W, L * 10 / env.B, 1e-12);
  const double terms[] = {mix.v * b.V, mix.r * b.R, mix.q * b.Q, mix.w * b.W};
  EXPECT_NEAR(terms[0] + terms[1] + terms[2] + terms[3], b.combined, 1e-12);
  EXPECT_GT(terms[3], 0.5 * b.combined);
  for (int i = 0; i < 3; ++i) EXPECT_GT(terms[3], terms[i]);
}

TEST(Cost, CeilLevelModelUsesIntegerLevels) {
  const auto env = mid_env();
  const LsmConfig c{10, Policy::Leveling, 2ull << 20, 14ull << 20, 0};
  const WorkloadMix q{0, 0, 1, 0};
  const auto ceil = cost(env, c, q, LevelModel::Ceil);
  EXPECT_NEAR(ceil.Q, level_count(env, 10, c.buffer_bytes) + q.s / env.B, 1e-12);
}

TEST(OptT, PureWritesPicksTwoOrThree) {
  for (std::uint64_t e : {1024u, 256u, 64u}) {
    const auto env = Environment::make(10'000'000, e, 16ull << 20, 1ull << 20);
    const auto t = theoretical_opt_T(env, {0, 0, 0, 1}, Policy::Leveling);
    EXPECT_TRUE(t == 2 || t == 3) << t;
  }
}

TEST(OptT, PureRangesPicksTLim) {
  const auto env = Environment::full_profile();
  EXPECT_EQ(theoretical_opt_T(env, {0, 0, 1, 0}, Policy::Leveling), env.t_lim());
}

TEST(OptT, EqualWritesAndRangesWithSmallBlocks) {
  const auto env = Environment::full_profile();  // B = 4
  const WorkloadMix mix{0, 0, 0.5, 0.5};
  EXPECT_NEAR(leveling_ratio_root(env, mix), 5.57, 0.01);
  const auto t = theoretical_opt_T(env, mix, Policy::Leveling);
  EXPECT_TRUE(t == 5 || t == 6) << t;
}

TEST(OptT, LevelingMatchesIntegerScan) {
  const auto env = Environment::make(1'000'000, 256, 16ull << 20, 1ull << 20);
  for (const auto& mix : training_workloads()) {
    const auto split = default_split(env);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::uint32_t t = 2; t <= env.t_lim(); ++t) {
      const double v =
          cost(env, {t, Policy::Leveling, split.buffer_bytes, split.filter_bytes, 0}, mix).combined;
      if (v < best) {
        best = v;
        arg = t;
      }
    }
    EXPECT_EQ(theoretical_opt_T(env, mix, Policy::Leveling), arg);
  }
}

TEST(OptMemory, NoLookupsMeansNoFilters) {
  const auto env = mid_env();
  const auto s = theoretical_opt_memory(env, {0, 0, 0.5, 0.5}, 10, Policy::Leveling);
  EXPECT_EQ(s.filter_bytes, 0u);
  EXPECT_EQ(s.buffer_bytes, env.M);
}

TEST(OptMemory, NoRangesOrWritesMaxesFilters) {
  const auto env = mid_env();
  for (auto p : {Policy::Leveling, Policy::Tiering}) {
    const auto s = theoretical_opt_memory(env, {0.5, 0.5, 0, 0}, 10, p);
    EXPECT_EQ(s.filter_bytes, env.M - env.min_buffer);
    EXPECT_EQ(s.buffer_bytes, env.min_buffer);
  }
}

TEST(OptMemory, MatchesGridForBalancedMix) {
  const auto env = mid_env();
  const auto mix = training_workloads()[0];
  for (auto p : {Policy::Leveling, Policy::Tiering}) {
    for (std::uint32_t t : {4u, 10u}) {
      const auto s = theoretical_opt_memory(env, mix, t, p);
      const auto g = grid_filter(env, mix, t, p, 0.1);
      EXPECT_LE(std::abs(static_cast<double>(s.filter_bytes) - static_cast<double>(g)),
                0.1 * env.N / 8.0 + 1.0);
      EXPECT_EQ(s.buffer_bytes + s.filter_bytes, env.M);
    }
  }
}

TEST(OptMemory, NeverWorseThanGrid) {
  const auto env = mid_env();
  for (const auto& mix : training_workloads()) {
    const auto s = theoretical_opt_memory(env, mix, 8, Policy::Leveling);
    const auto g = grid_filter(env, mix, 8, Policy::Leveling, 0.05);
    const double a = cost(env, {8, Policy::Leveling, s.buffer_bytes, s.filter_bytes, 0}, mix).combined;
    const double b = cost(env, {8, Policy::Leveling, env.M - g, g, 0}, mix).combined;
    EXPECT_LE(a, b * (1 + 1e-9));
  }
}

TEST(AnalyticOptimum, IsValidConfig) {
  const auto env = Environment::test_profile();
  for (const auto& mix : training_workloads()) {
    for (auto p : {Policy::Leveling, Policy::Tiering}) {
      const auto c = analytic_optimum(env, mix, p);
      EXPECT_NO_THROW(c.validate(env));
      EXPECT_EQ(c.policy, p);
    }
  }
}

TEST(CalibratedCost, ReducesToIoModelTermwise) {
  const auto env = mid_env();
  CalibrationConstants k{1, 1, 0, 0, 0};
  for (const auto& mix : training_workloads()) {
    const LsmConfig c{7, Policy::Leveling, 6ull << 20, 10ull << 20, 0};
    const auto b = cost(env, c, mix);
    const double expected = mix.v * b.V + mix.r * b.R + mix.q * b.Q + 2.0 * b.W;
    EXPECT_NEAR(calibrated_cost(env, c, mix, k), expected, 1e-12);
  }
}

TEST(CalibratedCost, PureWrites) {
  const auto env = mid_env();
  CalibrationConstants k{1.5, 2.0, 0.3, 0.4, 0.7};
  const LsmConfig c{6, Policy::Leveling, 4ull << 20, 12ull << 20, 0};
  const double L = relaxed_level_count(env, 6, 4ull << 20);
  const double T = 6, B = static_cast<double>(env.B);
  const double expected = (k.I_w + k.I_r) * L * T / B + k.C_w * T * L + 2 * k.C_r * L + k.C_q * L;
  EXPECT_NEAR(calibrated_cost(env, c, {0, 0, 0, 1}, k), expected, 1e-12);
}

TEST(CalibratedCost, LinearInConstants) {
  const auto env = mid_env();
  const LsmConfig c{6, Policy::Leveling, 4ull << 20, 12ull << 20, 0};
  CalibrationConstants k;
  CalibrationConstants k2{2 * k.I_r, 2 * k.I_w, 2 * k.C_r, 2 * k.C_w, 2 * k.C_q};
  for (const auto& mix : training_workloads()) {
    EXPECT_NEAR(calibrated_cost(env, c, mix, k2), 2 * calibrated_cost(env, c, mix, k), 1e-12);
  }
  LsmConfig tier = c;
  tier.policy = Policy::Tiering;
  EXPECT_THROW(calibrated_cost(env, tier, training_workloads()[0]), ConfigError);
}

TEST(Extrapolate, Examples) {
  const LsmConfig c{10, Policy::Leveling, 3'000'001, 1'000'000, 12'345};
  EXPECT_EQ(extrapolate(c, 1), c);
  const auto x = extrapolate(c, 10);
  EXPECT_EQ(x.size_ratio, 10u);
  EXPECT_EQ(x.filter_bytes, 10'000'000u);  // 8e6 bits -> 8e7 bits
  EXPECT_EQ(x.buffer_bytes, 30'000'010u);
  EXPECT_EQ(x.cache_bytes, 123'450u);
  const auto h = extrapolate(c, 2.5);
  EXPECT_EQ(h.memory(), static_cast<std::uint64_t>(std::llround(2.5 * c.memory())));
  EXPECT_THROW(extrapolate(c, 0), ConfigError);
}

TEST(Policy, NameRoundTrip) {
  EXPECT_EQ(parse_policy(policy_name(Policy::Tiering)), Policy::Tiering);
  EXPECT_EQ(parse_policy(policy_name(Policy::Leveling)), Policy::Leveling);
  EXPECT_THROW(parse_policy("bogus"), ConfigError);
}
