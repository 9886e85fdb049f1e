#include <algorithm>
#include <cmath>
#include <cstdio>

#include "camal/errors.hpp"
#include "search_internal.hpp"

namespace camal {

namespace {

// n points spaced `step` apart around `center`, shifted to fit [lo, hi].
std::vector<double> neighborhood(double center, double step, std::size_t n, double lo, double hi) {
  std::vector<double> pts(n);
  const double half = static_cast<double>((n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) pts[i] = center + (static_cast<double>(i) - half) * step;
  if (pts.front() < lo) {
    const double shift = lo - pts.front();
    for (auto& p : pts) p += shift;
  }
  if (pts.back() > hi) {
    const double shift = pts.back() - hi;
    for (auto& p : pts) p -= shift;
  }
  for (auto& p : pts) p = std::clamp(p, lo, hi);
  return pts;
}

class Session {
 public:
  Session(const Environment& env, const TunerConfig& tcfg, Evaluator& evaluator, TuningResult& out)
      : env_(env), tcfg_(tcfg), evaluator_(evaluator), out_(out) {}

  WorkloadTuning tune(const std::string& id, const WorkloadMix& mix) {
    WorkloadTuning wt;
    wt.workload_id = id;
    wt.mix = mix;
    const std::size_t lev_budget = tcfg_.h - tcfg_.h / 2;
    const std::size_t tier_budget = tcfg_.h / 2;
    if (lev_budget < tcfg_.samples_per_stage || tier_budget < tcfg_.samples_per_stage) {
      warn(id + ": budget " + std::to_string(tcfg_.h) +
           " does not cover one full stage per policy; unsampled parameters stay analytic");
    }
    incumbents_.push_back(tune_policy(wt, Policy::Leveling, lev_budget));
    incumbents_.push_back(tune_policy(wt, Policy::Tiering, tier_budget));
    return wt;
  }

  const std::vector<LsmConfig>& incumbents() const noexcept { return incumbents_; }

 private:
  LsmConfig tune_policy(WorkloadTuning& wt, Policy policy, std::size_t budget) {
    const WorkloadMix& mix = wt.mix;
    const auto t_star = theoretical_opt_T(env_, mix, policy);
    const auto split = theoretical_opt_memory(env_, mix, t_star, policy);
    LsmConfig inc{t_star, policy, split.buffer_bytes, split.filter_bytes, 0};

    // Stage 1: size ratio.
    std::size_t n = std::min(tcfg_.samples_per_stage, budget);
    budget -= n;
    if (n > 0) {
      std::vector<LsmConfig> cfgs;
      for (double t : neighborhood(t_star, tcfg_.T_step, n, 2.0,
                                   static_cast<double>(env_.t_lim()))) {
        LsmConfig c = inc;
        c.size_ratio = static_cast<std::uint32_t>(t);
        cfgs.push_back(c);
      }
      if (run_stage(wt, mix, cfgs) > 0 && retrain()) {
        inc = detail::argmin_T(objective(mix), env_, inc).config;
      }
      record(wt, policy, "T", n, inc);
    }

    // Stage 2: filter/buffer split at the chosen T.
    const auto split2 = theoretical_opt_memory(env_, mix, inc.size_ratio, policy);
    n = std::min(tcfg_.samples_per_stage, budget);
    budget -= n;
    bool memory_fixed = false;
    if (n > 0) {
      const double room = static_cast<double>(env_.M - env_.min_buffer);
      const double step = tcfg_.bpk_step * static_cast<double>(env_.N) / 8.0;
      std::vector<LsmConfig> cfgs;
      for (double f : neighborhood(static_cast<double>(split2.filter_bytes), step, n, 0.0, room)) {
        LsmConfig c = inc;
        c.filter_bytes = static_cast<std::uint64_t>(std::llround(f));
        c.buffer_bytes = env_.M - c.filter_bytes;
        cfgs.push_back(c);
      }
      if (run_stage(wt, mix, cfgs) > 0 && retrain()) {
        inc = detail::argmin_memory(objective(mix), env_, inc, tcfg_.grid_bpk, split2.filter_bytes)
                  .config;
        memory_fixed = true;
      }
    }
    if (!memory_fixed) {
      inc.buffer_bytes = split2.buffer_bytes;
      inc.filter_bytes = split2.filter_bytes;
    }
    if (n > 0) record(wt, policy, "memory", n, inc);

    // Stage 3: cache carved out of the buffer.
    std::vector<LsmConfig> cfgs;
    for (double f : tcfg_.cache_fractions) {
      if (cfgs.size() == budget) break;
      if (auto c = detail::with_cache(env_, inc, f)) cfgs.push_back(*c);
    }
    if (!cfgs.empty()) {
      budget -= cfgs.size();
      if (run_stage(wt, mix, cfgs) > 0 && retrain()) {
        const auto f = objective(mix);
        double best = f(inc);
        for (const auto& c : cfgs) {
          const double v = f(c);
          if (v < best) {
            best = v;
            inc = c;
          }
        }
      }
      record(wt, policy, "cache", cfgs.size(), inc);
    }
    return inc;
  }

  std::size_t run_stage(WorkloadTuning& wt, const WorkloadMix& mix,
                        const std::vector<LsmConfig>& cfgs) {
    std::size_t ok = 0;
    for (const auto& cfg : cfgs) {
      ++wt.calls;
      ++out_.evaluator_calls;
      // Repeated configurations become replicates under the next free seed.
      CostSample probe;
      probe.workload_id = wt.workload_id;
      probe.config = cfg;
      probe.env = env_;
      probe.seed = tcfg_.seed;
      while (out_.store.contains(probe)) ++probe.seed;
      try {
        auto s = evaluator_.evaluate(wt.workload_id, mix, env_, cfg, probe.seed);
        s.workload_id = wt.workload_id;
        s.mix = mix;
        s.config = cfg;
        s.env = env_;
        s.seed = probe.seed;
        out_.store.append(std::move(s));
        ++ok;
      } catch (const std::exception& e) {
        warn(wt.workload_id + ": evaluation failed (" + e.what() + "); sample skipped");
      }
    }
    return ok;
  }

  bool retrain() {
    const auto& samples = out_.store.samples();
    if (samples.empty() || (tcfg_.model == ModelKind::Trees && samples.size() < 2)) return false;
    out_.model = train_model(samples, tcfg_.label, tcfg_.model, tcfg_.tree_params,
                             RankHandling::DropDeficient, tcfg_.seed);
    return true;
  }

  ConfigObjective objective(const WorkloadMix& mix) const {
    return model_objective(*out_.model, env_, mix);
  }

  void record(WorkloadTuning& wt, Policy policy, const char* stage, std::size_t calls,
              const LsmConfig& inc) {
    StageTrace t;
    t.policy = policy;
    t.stage = stage;
    t.calls = calls;
    t.incumbent = inc;
    t.predicted = out_.model ? out_.model->predict(make_features(env_, inc, wt.mix))
                             : cost(env_, inc, wt.mix).combined;
    wt.trace.push_back(std::move(t));
  }

  void warn(std::string message) {
    std::fprintf(stderr, "warning: %s\n", message.c_str());
    out_.warnings.push_back(std::move(message));
  }

  const Environment& env_;
  const TunerConfig& tcfg_;
  Evaluator& evaluator_;
  TuningResult& out_;
  std::vector<LsmConfig> incumbents_;
};

}  // namespace

TuningResult decoupled_al(const std::vector<WorkloadMix>& workloads, const Environment& env,
                          const TunerConfig& tcfg, Evaluator& evaluator,
                          std::vector<std::string> ids) {
  env.validate();
  tcfg.validate();
  if (ids.empty()) {
    for (std::size_t i = 0; i < workloads.size(); ++i) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "w%02zu", i + 1);
      ids.emplace_back(buf);
    }
  }
  if (ids.size() != workloads.size()) throw ConfigError("one workload id per workload required");
  for (const auto& m : workloads) m.validate();

  TuningResult result;
  if (tcfg.h == 0) {
    for (std::size_t i = 0; i < workloads.size(); ++i) {
      WorkloadTuning wt;
      wt.workload_id = ids[i];
      wt.mix = workloads[i];
      wt.config = analytic_choice(env, workloads[i]);
      wt.analytic_cost = cost(env, wt.config, wt.mix).combined;
      wt.predicted_cost = wt.analytic_cost;
      result.workloads.push_back(std::move(wt));
    }
    return result;
  }

  Session session(env, tcfg, evaluator, result);
  for (std::size_t i = 0; i < workloads.size(); ++i) {
    result.workloads.push_back(session.tune(ids[i], workloads[i]));
  }

  // Final pick under the model trained on the whole pool: the stage
  // incumbents of both policies and a fresh model-driven search.
  const auto& incumbents = session.incumbents();
  for (std::size_t i = 0; i < result.workloads.size(); ++i) {
    auto& wt = result.workloads[i];
    if (!result.model) {
      wt.config = analytic_choice(env, wt.mix);
      wt.predicted_cost = cost(env, wt.config, wt.mix).combined;
    } else {
      const auto f = model_objective(*result.model, env, wt.mix);
      Selection best = select_config(f, env, wt.mix, tcfg);
      for (std::size_t p = 0; p < 2; ++p) {
        const auto& c = incumbents[2 * i + p];
        const double v = f(c);
        if (v < best.objective) best = {c, v};
      }
      wt.config = best.config;
      wt.predicted_cost = best.objective;
    }
    wt.analytic_cost = cost(env, wt.config, wt.mix).combined;
  }
  return result;
}

ExtrapolatedTuning tune_with_extrapolation(const std::vector<WorkloadMix>& workloads,
                                           const Environment& env_small, double k,
                                           const TunerConfig& tcfg, Evaluator& evaluator,
                                           std::vector<std::string> ids) {
  if (!(k > 0.0)) throw ConfigError("scale factor must be positive");
  ExtrapolatedTuning out;
  out.small = decoupled_al(workloads, env_small, tcfg, evaluator, std::move(ids));
  for (const auto& wt : out.small.workloads) out.configs.push_back(extrapolate(wt.config, k));
  return out;
}

}  // namespace camal
