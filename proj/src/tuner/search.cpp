#include <algorithm>
#include <cmath>
#include <random>

#include "camal/errors.hpp"
#include "search_internal.hpp"

namespace camal {

void TunerConfig::validate() const {
  if (samples_per_stage == 0) throw ConfigError("samples_per_stage must be positive");
  if (T_step == 0 || !(bpk_step > 0.0) || !(grid_bpk > 0.0)) {
    throw ConfigError("neighborhood strides must be positive");
  }
  for (double f : cache_fractions) {
    if (!(f >= 0.0 && f < 1.0)) throw ConfigError("cache fractions must lie in [0, 1)");
  }
  if (rho < 0.0) throw ConfigError("rho must be non-negative");
}

namespace detail {

Selection argmin_T(const ConfigObjective& f, const Environment& env, const LsmConfig& cfg) {
  Selection best{cfg, f(cfg)};
  LsmConfig c = cfg;
  const auto t_lim = env.t_lim();
  for (std::uint64_t t = 2; t <= t_lim; ++t) {
    c.size_ratio = static_cast<std::uint32_t>(t);
    const double v = f(c);
    if (v < best.objective) best = {c, v};
  }
  return best;
}

Selection argmin_memory(const ConfigObjective& f, const Environment& env, const LsmConfig& cfg,
                        double grid_bpk, std::uint64_t extra_filter_bytes) {
  Selection best{cfg, f(cfg)};
  if (env.M < env.min_buffer + cfg.cache_bytes) return best;
  const std::uint64_t room = env.M - env.min_buffer - cfg.cache_bytes;
  LsmConfig c = cfg;
  auto consider = [&](std::uint64_t filter) {
    if (filter > room) return;
    c.filter_bytes = filter;
    c.buffer_bytes = env.M - cfg.cache_bytes - filter;
    const double v = f(c);
    if (v < best.objective) best = {c, v};
  };
  const double step = grid_bpk * static_cast<double>(env.N) / 8.0;
  for (std::uint64_t j = 0;; ++j) {
    const auto filter = static_cast<std::uint64_t>(std::llround(static_cast<double>(j) * step));
    if (filter > room) break;
    consider(filter);
  }
  consider(extra_filter_bytes);
  return best;
}

std::optional<LsmConfig> with_cache(const Environment& env, const LsmConfig& cfg, double fraction) {
  const auto cache = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(env.M)));
  const std::uint64_t pool = cfg.buffer_bytes + cfg.cache_bytes;
  if (cache > pool || pool - cache < env.min_buffer) return std::nullopt;
  LsmConfig c = cfg;
  c.cache_bytes = cache;
  c.buffer_bytes = pool - cache;
  return c;
}

}  // namespace detail

ConfigObjective model_objective(const TrainedModel& model, const Environment& env,
                                const WorkloadMix& mix) {
  return [&model, env, mix](const LsmConfig& cfg) {
    return model.predict(make_features(env, cfg, mix));
  };
}

ConfigObjective model_objective(const TrainedModel& model, const Environment& env,
                                const std::vector<WorkloadMix>& mixes) {
  if (mixes.empty()) throw ConfigError("no mixes to average over");
  return [&model, env, mixes](const LsmConfig& cfg) {
    double sum = 0.0;
    for (const auto& m : mixes) sum += model.predict(make_features(env, cfg, m));
    return sum / static_cast<double>(mixes.size());
  };
}

Selection select_for_policy(const ConfigObjective& objective, const Environment& env,
                            const WorkloadMix& seed_mix, Policy policy, const TunerConfig& tcfg) {
  const auto t = theoretical_opt_T(env, seed_mix, policy);
  const auto split = theoretical_opt_memory(env, seed_mix, t, policy);
  LsmConfig cfg{t, policy, split.buffer_bytes, split.filter_bytes, 0};
  Selection best{cfg, objective(cfg)};
  for (int round = 0; round < 2; ++round) {
    best = detail::argmin_T(objective, env, best.config);
    best = detail::argmin_memory(objective, env, best.config, tcfg.grid_bpk,
                                 split.filter_bytes);
  }
  const LsmConfig base = best.config;
  for (double f : tcfg.cache_fractions) {
    if (auto c = detail::with_cache(env, base, f)) {
      const double v = objective(*c);
      if (v < best.objective) best = {*c, v};
    }
  }
  return best;
}

Selection select_config(const ConfigObjective& objective, const Environment& env,
                        const WorkloadMix& seed_mix, const TunerConfig& tcfg) {
  const auto lev = select_for_policy(objective, env, seed_mix, Policy::Leveling, tcfg);
  const auto tier = select_for_policy(objective, env, seed_mix, Policy::Tiering, tcfg);
  return tier.objective < lev.objective ? tier : lev;
}

Selection select_config(const TrainedModel& model, const Environment& env, const WorkloadMix& mix,
                        const TunerConfig& tcfg) {
  return select_config(model_objective(model, env, mix), env, mix, tcfg);
}

LsmConfig analytic_choice(const Environment& env, const WorkloadMix& mix) {
  const auto lev = analytic_optimum(env, mix, Policy::Leveling);
  const auto tier = analytic_optimum(env, mix, Policy::Tiering);
  return cost(env, tier, mix).combined < cost(env, lev, mix).combined ? tier : lev;
}

double kl_divergence(const WorkloadMix& p, const WorkloadMix& q) {
  const double ps[] = {p.v, p.r, p.q, p.w};
  const double qs[] = {q.v, q.r, q.q, q.w};
  double kl = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (ps[i] <= 0.0) continue;
    if (qs[i] <= 0.0) return INFINITY;
    kl += ps[i] * std::log(ps[i] / qs[i]);
  }
  return std::max(0.0, kl);
}

std::vector<WorkloadMix> sample_kl_ball(const WorkloadMix& mix, double rho, std::size_t draws,
                                        std::uint64_t seed) {
  mix.validate();
  if (rho < 0.0 || !std::isfinite(rho)) throw ConfigError("rho must be a non-negative number");
  if (draws == 0) throw ConfigError("rho_draws must be positive");
  const double p[] = {mix.v, mix.r, mix.q, mix.w};
  int support = 0;
  for (double x : p) support += x > 0.0 ? 1 : 0;
  if (rho == 0.0 || support <= 1) return std::vector<WorkloadMix>(draws, mix);

  // Concentration chosen so the typical KL of a draw is about rho / 2.
  const double alpha = (support - 1) / rho;
  std::mt19937_64 gen(seed);
  std::vector<WorkloadMix> out;
  out.reserve(draws);
  const std::size_t max_attempts = 10'000 * draws;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < draws; ++attempt) {
    double g[4] = {0, 0, 0, 0};
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (p[i] <= 0.0) continue;
      std::gamma_distribution<double> gamma(alpha * p[i], 1.0);
      g[i] = gamma(gen);
      sum += g[i];
    }
    if (!(sum > 0.0)) continue;
    WorkloadMix d = mix;
    d.v = g[0] / sum;
    d.r = g[1] / sum;
    d.q = g[2] / sum;
    d.w = 1.0 - d.v - d.r - d.q;
    if (d.w < 0.0) d.w = 0.0;
    if (kl_divergence(d, mix) <= rho) out.push_back(d);
  }
  if (out.size() < draws) throw ConfigError("no mixes found inside the KL ball; rho is infeasible");
  return out;
}

namespace {

WorkloadMix mean_mix(const std::vector<WorkloadMix>& mixes) {
  WorkloadMix m = mixes.front();
  m.v = m.r = m.q = m.w = 0.0;
  for (const auto& x : mixes) {
    m.v += x.v;
    m.r += x.r;
    m.q += x.q;
    m.w += x.w;
  }
  const double n = static_cast<double>(mixes.size());
  m.v /= n;
  m.r /= n;
  m.q /= n;
  m.w = std::max(0.0, 1.0 - m.v - m.r - m.q);
  return m;
}

}  // namespace

RobustSelection robust_tune(const WorkloadMix& mix, double rho, std::size_t draws,
                            const std::function<double(const LsmConfig&, const WorkloadMix&)>& cost_fn,
                            const Environment& env, const TunerConfig& tcfg) {
  RobustSelection out;
  out.draws = sample_kl_ball(mix, rho, draws, tcfg.seed);
  const auto& mixes = out.draws;
  ConfigObjective objective = [&](const LsmConfig& cfg) {
    double sum = 0.0;
    for (const auto& m : mixes) sum += cost_fn(cfg, m);
    return sum / static_cast<double>(mixes.size());
  };
  const WorkloadMix seed_mix = rho == 0.0 ? mix : mean_mix(mixes);
  out.config = select_config(objective, env, seed_mix, tcfg).config;
  return out;
}

RobustSelection robust_tune(const WorkloadMix& mix, double rho, std::size_t draws,
                            const TrainedModel& model, const Environment& env,
                            const TunerConfig& tcfg) {
  return robust_tune(
      mix, rho, draws,
      [&](const LsmConfig& cfg, const WorkloadMix& m) {
        return model.predict(make_features(env, cfg, m));
      },
      env, tcfg);
}

}  // namespace camal
