#include "camal/dynamic_controller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "camal/errors.hpp"
#include "camal/lsm_tree.hpp"

namespace camal {

void DetectorConfig::validate() const {
  if (p < 1) throw ConfigError("period length must be at least 1");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  if (!(min_gain >= 0.0 && min_gain < 1.0)) throw ConfigError("min_gain must lie in [0, 1)");
}

std::string_view trigger_name(TriggerKind kind) noexcept {
  switch (kind) {
    case TriggerKind::V:
      return "v";
    case TriggerKind::R:
      return "r";
    case TriggerKind::Q:
      return "q";
    case TriggerKind::W:
      return "w";
    case TriggerKind::None:
      break;
  }
  return "none";
}

WorkloadMix observe(std::span<const Operation> window) {
  WorkloadMix m;
  if (window.empty()) return m;
  std::uint64_t counts[kOpKindCount] = {};
  double range_len = 0.0;
  for (const auto& op : window) {
    ++counts[static_cast<std::size_t>(op.kind)];
    if (op.kind == OpKind::RangeGet) range_len += op.length;
  }
  const double n = static_cast<double>(window.size());
  const auto c = [&](OpKind k) { return static_cast<double>(counts[static_cast<std::size_t>(k)]); };
  m.v = c(OpKind::PointGetAbsent) / n;
  m.r = c(OpKind::PointGetExisting) / n;
  m.q = c(OpKind::RangeGet) / n;
  const double writes = c(OpKind::Put) + c(OpKind::Delete);
  m.w = writes / n;
  if (c(OpKind::RangeGet) > 0) m.s = range_len / c(OpKind::RangeGet);
  m.delete_fraction = writes > 0 ? c(OpKind::Delete) / writes : 0.0;
  return m;
}

Decision should_reconfigure(const WorkloadMix& observed, const WorkloadMix& reference, double tau) {
  const double deltas[] = {std::abs(observed.v - reference.v), std::abs(observed.r - reference.r),
                           std::abs(observed.q - reference.q), std::abs(observed.w - reference.w)};
  const TriggerKind kinds[] = {TriggerKind::V, TriggerKind::R, TriggerKind::Q, TriggerKind::W};
  Decision d;
  for (int i = 0; i < 4; ++i) {
    if (deltas[i] > tau && deltas[i] > d.delta) {
      d.reconfigure = true;
      d.kind = kinds[i];
      d.delta = deltas[i];
    }
  }
  return d;
}

LsmConfig target_for(const TrainedModel& model, const Environment& train_env,
                     const Environment& live, const WorkloadMix& mix, const TunerConfig& tcfg) {
  LsmConfig c = select_config(model, train_env, mix, tcfg).config;
  if (live.N == train_env.N && live.M == train_env.M) return c;
  c = extrapolate(c, static_cast<double>(live.N) / static_cast<double>(train_env.N));
  const auto total = c.memory();
  if (total != live.M) {
    const auto adjusted = static_cast<std::int64_t>(c.buffer_bytes) +
                          static_cast<std::int64_t>(live.M) - static_cast<std::int64_t>(total);
    if (adjusted <= 0) throw ConfigError("extrapolated configuration does not fit the live memory");
    c.buffer_bytes = static_cast<std::uint64_t>(adjusted);
  }
  c.size_ratio = std::min<std::uint32_t>(c.size_ratio, static_cast<std::uint32_t>(live.t_lim()));
  c.validate(live);
  return c;
}

DynamicController::DynamicController(const TrainedModel& model, Environment train_env,
                                     DetectorConfig detector, TunerConfig tcfg,
                                     WorkloadMix reference)
    : model_(model),
      train_env_(train_env),
      detector_(detector),
      tcfg_(std::move(tcfg)),
      reference_(reference) {
  detector_.validate();
  if (model_.features_hash != feature_hash()) {
    throw ConfigError("model feature ordering does not match this build");
  }
}

std::optional<ShiftEvent> DynamicController::on_period(LsmTree& engine,
                                                       std::span<const Operation> window,
                                                       std::uint64_t period, std::uint64_t phase) {
  const WorkloadMix observed = observe(window);
  const Decision d = should_reconfigure(observed, reference_, detector_.tau);
  if (!d.reconfigure) return std::nullopt;
  ShiftEvent e = retarget(engine, observed);
  e.period = period;
  e.phase = phase;
  e.kind = d.kind;
  return e;
}

ShiftEvent DynamicController::retarget(LsmTree& engine, const WorkloadMix& observed) {
  ShiftEvent e;
  e.observed = observed;
  e.reference = reference_;
  e.old_config = engine.target_config();
  e.new_config = target_for(model_, train_env_, engine.env(), observed, tcfg_);
  if (detector_.min_gain > 0.0 && e.new_config != e.old_config) {
    const double now = model_.predict(make_features(engine.env(), e.old_config, observed));
    const double next = model_.predict(make_features(engine.env(), e.new_config, observed));
    if (next > now * (1.0 - detector_.min_gain)) e.new_config = e.old_config;
  }
  engine.set_target_config(e.new_config);
  reference_ = observed;
  return e;
}

std::uint64_t DynamicReport::total_io(const std::vector<PhaseResult>& phases) const noexcept {
  std::uint64_t n = 0;
  for (const auto& p : phases) n += p.io.blocks_read + p.io.blocks_written;
  return n;
}

std::uint64_t DynamicReport::transition_io() const noexcept {
  std::int64_t n = 0;
  for (const auto& p : dynamic) n += p.transition_io;
  return n > 0 ? static_cast<std::uint64_t>(n) : 0;
}

namespace {

double p90(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(v.size()))) - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank), v.end());
  return v[rank];
}

}  // namespace

DynamicReport run_dynamic(const Environment& env, const std::vector<WorkloadMix>& phases,
                          const TrainedModel& model, const Environment& train_env,
                          const TunerConfig& tcfg, const DynamicOptions& options) {
  options.detector.validate();
  if (phases.empty()) throw ConfigError("no phases to replay");
  if (options.periods_per_phase == 0) throw ConfigError("periods_per_phase must be positive");

  DynamicReport report;
  report.initial = target_for(model, train_env, env, phases.front(), tcfg);
  const auto& init = report.initial;
  report.filler_per_phase = static_cast<std::uint64_t>(level_count(env, init.size_ratio, init.buffer_bytes)) *
                            std::max<std::uint64_t>(1, init.buffer_bytes / env.E);

  auto replay = [&](const LsmConfig& cfg, DynamicController* controller) {
    EngineOptions eo;
    eo.seed = options.seed;
    eo.device_read_ns = options.device_read_ns;
    eo.device_write_ns = options.device_write_ns;
    auto tree = LsmTree::open(env, cfg, eo);
    preload(*tree, env.N);
    const KeyUniverse universe{env.N};
    const std::size_t value_bytes = env.value_bytes();
    std::uint64_t next_index = env.N;
    std::uint64_t period = 0;
    std::vector<PhaseResult> out;
    for (std::size_t i = 0; i < phases.size(); ++i) {
      KeyDistribution dist = options.dist;
      dist.seed = options.seed * 0x9e3779b97f4a7c15ULL + i;
      const auto stream = generate_stream(phases[i], dist,
                                          options.detector.p * options.periods_per_phase, universe);
      const IoStats before = tree->stats();
      std::vector<double> latencies;
      latencies.reserve(stream.size());
      for (std::size_t off = 0; off < stream.size(); off += options.detector.p) {
        const std::size_t end = std::min<std::size_t>(stream.size(), off + options.detector.p);
        OperationStream window;
        window.seed = stream.seed;
        window.ops.assign(stream.ops.begin() + static_cast<std::ptrdiff_t>(off),
                          stream.ops.begin() + static_cast<std::ptrdiff_t>(end));
        (void)tree->run_workload(window, &latencies);
        if (controller) {
          if (auto e = controller->on_period(*tree, window.ops, period, i + 1)) {
            report.events.push_back(std::move(*e));
          }
        }
        ++period;
      }
      for (std::uint64_t j = 0; j < report.filler_per_phase; ++j) {
        const auto key = KeyUniverse::key_at(next_index++);
        tree->put(key, make_value(key, i + 1, value_bytes));
      }
      PhaseResult r;
      r.phase = i + 1;
      r.mix = phases[i];
      r.io = tree->stats() - before;
      double sum = 0.0;
      for (double l : latencies) sum += l;
      r.mean_latency_ns = latencies.empty() ? 0.0 : sum / static_cast<double>(latencies.size());
      r.p90_latency_ns = p90(latencies);
      r.io_per_op = static_cast<double>(r.io.blocks_read + r.io.blocks_written) /
                    static_cast<double>(stream.size());
      out.push_back(std::move(r));
    }
    return out;
  };

  DynamicController controller(model, train_env, options.detector, tcfg, phases.front());
  report.dynamic = replay(init, &controller);
  report.control = replay(init, nullptr);
  report.baseline = replay(default_config(env), nullptr);
  for (std::size_t i = 0; i < report.dynamic.size(); ++i) {
    const auto dyn = report.dynamic[i].io.compaction_io();
    const auto ctl = report.control[i].io.compaction_io();
    report.dynamic[i].transition_io = static_cast<std::int64_t>(dyn) - static_cast<std::int64_t>(ctl);
  }
  return report;
}

std::string events_csv(const std::vector<ShiftEvent>& events) {
  std::ostringstream out;
  out << kEventCsvHeader << '\n';
  for (const auto& e : events) {
    out << e.period << ',' << e.phase << ',' << trigger_name(e.kind) << ','
        << e.old_config.size_ratio << ',' << e.new_config.size_ratio << ','
        << e.old_config.filter_bytes << ',' << e.new_config.filter_bytes << ','
        << e.old_config.buffer_bytes << ',' << e.new_config.buffer_bytes << ','
        << e.old_config.cache_bytes << ',' << e.new_config.cache_bytes << '\n';
  }
  return out.str();
}

std::string phases_csv(const std::vector<PhaseResult>& phases) {
  std::ostringstream out;
  out << kPhaseCsvHeader << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& p : phases) {
    out << p.phase << ',' << num(p.mix.v) << ',' << num(p.mix.r) << ',' << num(p.mix.q) << ','
        << num(p.mix.w) << ',' << p.io.ops() << ',' << p.io.blocks_read << ','
        << p.io.blocks_written << ',' << num(p.io_per_op) << ',' << num(p.mean_latency_ns) << ','
        << num(p.p90_latency_ns) << ',' << p.transition_io << '\n';
  }
  return out.str();
}

}  // namespace camal
