#include "camal/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "camal/analytic_model.hpp"
#include "camal/cli/manifest.hpp"
#include "camal/dynamic_controller.hpp"
#include "camal/errors.hpp"
#include "camal/learner.hpp"
#include "camal/tuner.hpp"
#include "camal/workload.hpp"

namespace camal::cli {

namespace {

constexpr std::uint64_t kMiB = 1ULL << 20;

struct EnvFlags {
  std::string profile = "test";
  std::uint64_t n = 0;
  std::uint64_t entry_bytes = 0;
  double mem_mb = 0.0;
  double min_buffer_mb = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--profile", profile, "Base environment")
        ->check(CLI::IsMember({"test", "full"}))
        ->capture_default_str();
    app->add_option("--n", n, "Entries loaded into the tree");
    app->add_option("--entry-bytes", entry_bytes, "Bytes per entry");
    app->add_option("--mem-mb", mem_mb, "Total memory budget in MiB");
    app->add_option("--min-buffer-mb", min_buffer_mb, "Smallest write buffer in MiB");
  }

  Environment build() const {
    Environment e = profile == "full" ? Environment::full_profile() : Environment::test_profile();
    auto bytes = [](double mb) {
      if (!(mb > 0.0)) throw ConfigError("memory sizes must be positive");
      return static_cast<std::uint64_t>(std::llround(mb * static_cast<double>(kMiB)));
    };
    const auto env = Environment::make(n ? n : e.N, entry_bytes ? entry_bytes : e.E,
                                       mem_mb != 0.0 ? bytes(mem_mb) : e.M,
                                       min_buffer_mb != 0.0 ? bytes(min_buffer_mb) : e.min_buffer,
                                       e.block_bytes);
    env.validate();
    return env;
  }

  std::uint64_t default_ops() const { return profile == "full" ? 500'000 : 50'000; }
  std::uint64_t default_period() const { return profile == "full" ? 10'000 : 1'000; }
};

struct StreamFlags {
  std::string dist = "uniform";
  double theta = 0.99;
  std::uint64_t ops = 0;

  void attach(CLI::App* app) {
    app->add_option("--dist", dist, "Key distribution")
        ->check(CLI::IsMember({"uniform", "zipfian"}))
        ->capture_default_str();
    app->add_option("--theta", theta, "Zipfian skew")->check(CLI::Range(0.0, 0.99));
    app->add_option("--ops", ops, "Measured operations per evaluation (default by profile)");
  }

  KeyDistribution distribution(std::uint64_t seed) const {
    KeyDistribution d;
    d.kind = dist == "zipfian" ? KeyDistributionKind::Zipfian : KeyDistributionKind::Uniform;
    d.theta = theta;
    d.seed = seed;
    return d;
  }
};

struct SeedFlag {
  std::uint64_t seed = 1;
  CLI::Option* opt = nullptr;

  void attach(CLI::App* app) {
    opt = app->add_option("--seed", seed, "Seed (CAMAL_SEED overrides the default)");
  }

  std::uint64_t resolve() const {
    if (opt && opt->count() > 0) return seed;
    if (const char* env = std::getenv("CAMAL_SEED"); env && *env) {
      char* end = nullptr;
      const auto v = std::strtoull(env, &end, 10);
      if (*end != '\0') throw ConfigError(std::string("CAMAL_SEED is not an integer: ") + env);
      return v;
    }
    return seed;
  }
};

struct TunerFlags {
  std::size_t budget = 20;
  std::size_t samples_per_stage = 3;
  std::string model = "poly";
  std::string label = "latency";
  std::string evaluator = "engine";

  void attach(CLI::App* app) {
    app->add_option("--budget", budget, "Evaluator calls per workload (both policies)")
        ->capture_default_str();
    app->add_option("--samples-per-stage", samples_per_stage, "Neighborhood size per stage")
        ->capture_default_str();
    app->add_option("--model", model, "Cost regressor")
        ->check(CLI::IsMember({"poly", "trees"}))
        ->capture_default_str();
    app->add_option("--label", label, "Training label")
        ->check(CLI::IsMember({"latency", "p90", "io"}))
        ->capture_default_str();
    app->add_option("--evaluator", evaluator, "Measurement backend")
        ->check(CLI::IsMember({"engine", "analytic"}))
        ->capture_default_str();
  }

  TunerConfig build(std::uint64_t seed) const {
    TunerConfig t;
    t.h = budget;
    t.samples_per_stage = samples_per_stage;
    t.model = parse_model_kind(model);
    t.label = parse_label(label);
    t.seed = seed;
    t.validate();
    return t;
  }
};

std::unique_ptr<Evaluator> make_evaluator(const TunerFlags& tf, const StreamFlags& sf,
                                          const EnvFlags& ef) {
  if (tf.evaluator == "analytic") return std::make_unique<AnalyticEvaluator>();
  EngineEvaluatorOptions o;
  o.ops = sf.ops ? sf.ops : ef.default_ops();
  o.dist = sf.distribution(0);
  return std::make_unique<EngineEvaluator>(o);
}

nlohmann::json env_json(const Environment& e) {
  return {{"N", e.N}, {"E", e.E}, {"B", e.B}, {"M", e.M}, {"min_buffer", e.min_buffer},
          {"block_bytes", e.block_bytes}};
}

nlohmann::json tuner_json(const TunerConfig& t) {
  return {{"h", t.h},
          {"samples_per_stage", t.samples_per_stage},
          {"T_step", t.T_step},
          {"bpk_step", t.bpk_step},
          {"cache_fractions", t.cache_fractions},
          {"label", std::string(label_name(t.label))},
          {"model", std::string(model_kind_name(t.model))},
          {"rho", t.rho},
          {"rho_draws", t.rho_draws}};
}

std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "w%02zu", i + 1);
    ids.emplace_back(buf);
  }
  return ids;
}

std::size_t index_of_id(const std::string& id) {
  if (id.size() < 2 || id[0] != 'w') throw ConfigError("unrecognized workload id '" + id + "'");
  const auto n = std::stoul(id.substr(1));
  if (n == 0) throw ConfigError("unrecognized workload id '" + id + "'");
  return n - 1;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw StorageError("cannot write " + path.string());
  out << text;
  if (!out) throw StorageError("write failed: " + path.string());
}

std::filesystem::path manifest_for(const std::filesystem::path& out) {
  return std::filesystem::path(out.string() + ".manifest.json");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string config_cells(const LsmConfig& c) {
  std::ostringstream s;
  s << policy_name(c.policy) << ',' << c.size_ratio << ',' << c.buffer_bytes << ','
    << c.filter_bytes << ',' << c.cache_bytes;
  return s.str();
}

// A missing input is a bad argument, not a storage failure.
void require_input(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ConfigError("input file not found: " + path.string());
  }
}

std::vector<WorkloadMix> load_workloads(const std::string& path, const std::vector<WorkloadMix>& fallback,
                                        RunManifest& manifest) {
  if (path.empty()) return fallback;
  require_input(path);
  manifest.add_input(path);
  return read_workload_file(path);
}

// ---- commands ----

int cmd_workloads(const std::string& dir, const std::string& only, RunManifest& manifest) {
  const std::filesystem::path out_dir(dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (only.empty() || only == "train") {
    const auto p = out_dir / "train.workloads";
    write_workload_file(p, training_workloads());
    manifest.add_output(p);
  }
  if (only.empty() || only == "test") {
    const auto p = out_dir / "test.workloads";
    write_workload_file(p, test_workloads());
    manifest.add_output(p);
  }
  manifest.write(out_dir / "workloads.manifest.json");
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"LSM-tree cost-model tuning toolkit"};
  app.require_subcommand(1);
  std::vector<std::string> args(argv, argv + argc);

  // workloads
  auto* wl = app.add_subcommand("workloads", "Write the training and test workload files");
  std::string wl_dir = ".";
  std::string wl_only;
  wl->add_option("--out-dir", wl_dir, "Output directory")->capture_default_str();
  wl->add_option("--only", wl_only, "Write a single file")->check(CLI::IsMember({"train", "test"}));

  // sample
  auto* sa = app.add_subcommand("sample", "Collect cost samples by decoupled active learning");
  EnvFlags sa_env;
  StreamFlags sa_stream;
  SeedFlag sa_seed;
  TunerFlags sa_tuner;
  std::string sa_workloads;
  std::string sa_out = "samples.csv";
  sa_env.attach(sa);
  sa_stream.attach(sa);
  sa_seed.attach(sa);
  sa_tuner.attach(sa);
  sa->add_option("--workloads", sa_workloads, "Workload file (default: the 15 training mixes)");
  sa->add_option("--out", sa_out, "Sample CSV")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Fit a cost model to a sample CSV");
  std::string tr_samples;
  std::string tr_out = "model.txt";
  std::string tr_model = "poly";
  std::string tr_label = "latency";
  TreeParams tr_params;
  SeedFlag tr_seed;
  tr->add_option("--samples", tr_samples, "Sample CSV")->required();
  tr->add_option("--out", tr_out, "Model file")->capture_default_str();
  tr->add_option("--model", tr_model, "Cost regressor")
      ->check(CLI::IsMember({"poly", "trees"}))
      ->capture_default_str();
  tr->add_option("--label", tr_label, "Training label")
      ->check(CLI::IsMember({"latency", "p90", "io"}))
      ->capture_default_str();
  tr->add_option("--trees", tr_params.n_trees, "Boosting stages")->capture_default_str();
  tr->add_option("--depth", tr_params.max_depth, "Tree depth")->capture_default_str();
  tr->add_option("--learning-rate", tr_params.learning_rate, "Shrinkage")->capture_default_str();
  tr->add_option("--min-leaf", tr_params.min_leaf, "Smallest leaf")->capture_default_str();
  tr_seed.attach(tr);

  // tune
  auto* tu = app.add_subcommand("tune", "Tune configurations and write a report");
  EnvFlags tu_env;
  StreamFlags tu_stream;
  SeedFlag tu_seed;
  TunerFlags tu_tuner;
  std::string tu_workloads;
  std::string tu_out = "tuned.csv";
  std::string tu_model_file;
  std::string tu_samples_out;
  double tu_k = 1.0;
  double tu_rho = 0.0;
  std::size_t tu_rho_draws = 16;
  tu_env.attach(tu);
  tu_stream.attach(tu);
  tu_seed.attach(tu);
  tu_tuner.attach(tu);
  tu->add_option("--workloads", tu_workloads, "Workload file (default: the 15 training mixes)");
  tu->add_option("--out", tu_out, "Report CSV")->capture_default_str();
  tu->add_option("--model-file", tu_model_file, "Select with this model instead of sampling");
  tu->add_option("--samples-out", tu_samples_out, "Also write the collected samples");
  tu->add_option("--k", tu_k, "Tune at N/k, M/k and scale the result up")->capture_default_str();
  tu->add_option("--rho", tu_rho, "KL radius for robust selection")->capture_default_str();
  tu->add_option("--rho-draws", tu_rho_draws, "Mixes drawn inside the KL ball")->capture_default_str();

  // bench
  auto* be = app.add_subcommand("bench", "Measure the configurations of a tuning report");
  EnvFlags be_env;
  StreamFlags be_stream;
  SeedFlag be_seed;
  std::string be_report;
  std::string be_workloads;
  std::string be_out = "bench.csv";
  be_env.attach(be);
  be_stream.attach(be);
  be_seed.attach(be);
  be->add_option("--report", be_report, "Report written by tune")->required();
  be->add_option("--workloads", be_workloads, "Workload file the report was tuned for")->required();
  be->add_option("--out", be_out, "Results CSV")->capture_default_str();

  // dynamic
  auto* dy = app.add_subcommand("dynamic", "Replay the shifting test workloads with reconfiguration");
  EnvFlags dy_env;
  StreamFlags dy_stream;
  SeedFlag dy_seed;
  std::string dy_model_file;
  std::string dy_workloads;
  std::string dy_out = "dynamic";
  double dy_tau = 0.10;
  double dy_min_gain = 0.0;
  std::uint64_t dy_period = 0;
  std::uint64_t dy_periods_per_phase = 50;
  double dy_k = 1.0;
  dy_env.attach(dy);
  dy_stream.attach(dy);
  dy_seed.attach(dy);
  dy->add_option("--model-file", dy_model_file, "Trained model")->required();
  dy->add_option("--workloads", dy_workloads, "Phase sequence (default: the 24 test mixes)");
  dy->add_option("--out", dy_out, "Output prefix")->capture_default_str();
  dy->add_option("--tau", dy_tau, "Drift threshold")->capture_default_str();
  dy->add_option("--min-gain", dy_min_gain, "Predicted relative saving needed to change the target")
      ->capture_default_str();
  dy->add_option("--period", dy_period, "Operations per detection period (default by profile)");
  dy->add_option("--periods-per-phase", dy_periods_per_phase, "Periods per workload phase")
      ->capture_default_str();
  dy->add_option("--k", dy_k, "The model was trained at N/k, M/k")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*wl) {
      RunManifest manifest("workloads", args);
      return cmd_workloads(wl_dir, wl_only, manifest);
    }

    if (*sa) {
      RunManifest manifest("sample", args);
      const auto env = sa_env.build();
      const auto seed = sa_seed.resolve();
      const auto tcfg = sa_tuner.build(seed);
      const auto mixes = load_workloads(sa_workloads, training_workloads(), manifest);
      auto evaluator = make_evaluator(sa_tuner, sa_stream, sa_env);
      const auto result = decoupled_al(mixes, env, tcfg, *evaluator);
      result.store.write_csv(sa_out);
      manifest.section("environment") = env_json(env);
      manifest.section("tuner") = tuner_json(tcfg);
      manifest.set_seed("tuner", seed);
      manifest.add_output(sa_out);
      manifest.write(manifest_for(sa_out));
      std::printf("%zu samples from %zu evaluator calls -> %s\n", result.store.size(),
                  result.evaluator_calls, sa_out.c_str());
      return 0;
    }

    if (*tr) {
      RunManifest manifest("train", args);
      const auto seed = tr_seed.resolve();
      require_input(tr_samples);
      const auto store = SampleStore::read_csv(tr_samples);
      manifest.add_input(tr_samples);
      if (store.size() == 0) throw ConfigError("sample file has no rows");
      const auto model = train_model(store.samples(), parse_label(tr_label),
                                     parse_model_kind(tr_model), tr_params, RankHandling::Strict,
                                     seed);
      save_model(model, tr_out);
      manifest.section("model") = {{"kind", tr_model},
                                   {"label", tr_label},
                                   {"samples", store.size()},
                                   {"n_trees", tr_params.n_trees},
                                   {"max_depth", tr_params.max_depth},
                                   {"learning_rate", tr_params.learning_rate},
                                   {"min_leaf", tr_params.min_leaf}};
      manifest.set_seed("model", seed);
      manifest.add_output(tr_out);
      manifest.write(manifest_for(tr_out));
      std::printf("%s model on %zu samples -> %s\n", tr_model.c_str(), store.size(), tr_out.c_str());
      return 0;
    }

    if (*tu) {
      RunManifest manifest("tune", args);
      const auto env = tu_env.build();
      const auto seed = tu_seed.resolve();
      auto tcfg = tu_tuner.build(seed);
      tcfg.rho = tu_rho;
      tcfg.rho_draws = tu_rho_draws;
      if (!(tu_k > 0.0)) throw ConfigError("--k must be positive");
      const auto mixes = load_workloads(tu_workloads, training_workloads(), manifest);
      const auto ids = default_ids(mixes.size());
      const Environment small = tu_k == 1.0 ? env : env.scaled(1.0 / tu_k);

      std::optional<TrainedModel> model;
      std::vector<LsmConfig> configs;
      if (!tu_model_file.empty()) {
        require_input(tu_model_file);
        model = load_model(tu_model_file);
        manifest.add_input(tu_model_file);
        tcfg.label = model->label;
        for (const auto& m : mixes) configs.push_back(target_for(*model, small, env, m, tcfg));
      } else {
        auto evaluator = make_evaluator(tu_tuner, tu_stream, tu_env);
        auto result = tune_with_extrapolation(mixes, small, tu_k, tcfg, *evaluator, ids);
        model = result.small.model;
        for (auto c : result.configs) {
          // Rounding at the small scale can leave the total a few bytes off M.
          c.buffer_bytes = env.M - c.filter_bytes - c.cache_bytes;
          configs.push_back(c);
        }
        if (!tu_samples_out.empty()) {
          result.small.store.write_csv(tu_samples_out);
          manifest.add_output(tu_samples_out);
        }
      }
      if (model && tu_rho > 0.0) {
        for (std::size_t i = 0; i < mixes.size(); ++i) {
          auto robust = robust_tune(mixes[i], tu_rho, tu_rho_draws, *model, small, tcfg).config;
          if (tu_k != 1.0) {
            robust = extrapolate(robust, tu_k);
            robust.buffer_bytes = env.M - robust.filter_bytes - robust.cache_bytes;
          }
          configs[i] = robust;
        }
      }

      std::ostringstream out;
      out << "# environment N=" << env.N << " E=" << env.E << " B=" << env.B << " M=" << env.M
          << " min_buffer=" << env.min_buffer << '\n';
      if (tu_k != 1.0) {
        out << "# training scale N=" << small.N << " M=" << small.M << " (k=" << num(tu_k)
            << "); configurations are extrapolated to the full scale\n";
      }
      out << "# label " << label_name(tcfg.label) << ", model "
          << (model ? model_kind_name(model->kind) : std::string_view("analytic")) << ", budget "
          << tcfg.h << '\n';
      out << "workload_id,label,policy,T,Mb_bytes,Mf_bytes,Mc_bytes,predicted_cost,analytic_cost\n";
      const LsmConfig def = default_config(env);
      for (std::size_t i = 0; i < mixes.size(); ++i) {
        auto predicted = [&](const LsmConfig& c) {
          return model ? model->predict(make_features(env, c, mixes[i]))
                       : cost(env, c, mixes[i]).combined;
        };
        out << ids[i] << ",tuned," << config_cells(configs[i]) << ',' << num(predicted(configs[i]))
            << ',' << num(cost(env, configs[i], mixes[i]).combined) << '\n';
        out << ids[i] << ",default," << config_cells(def) << ',' << num(predicted(def)) << ','
            << num(cost(env, def, mixes[i]).combined) << '\n';
      }
      write_text(tu_out, out.str());
      manifest.section("environment") = env_json(env);
      manifest.section("training_environment") = env_json(small);
      manifest.section("tuner") = tuner_json(tcfg);
      manifest.section("k") = tu_k;
      manifest.set_seed("tuner", seed);
      manifest.add_output(tu_out);
      manifest.write(manifest_for(tu_out));
      std::printf("%zu workloads tuned -> %s\n", mixes.size(), tu_out.c_str());
      return 0;
    }

    if (*be) {
      RunManifest manifest("bench", args);
      const auto env = be_env.build();
      const auto seed = be_seed.resolve();
      require_input(be_workloads);
      require_input(be_report);
      const auto mixes = read_workload_file(be_workloads);
      manifest.add_input(be_workloads);
      manifest.add_input(be_report);
      std::ifstream report(be_report);
      if (!report) throw StorageError("cannot open report " + be_report);

      EngineEvaluatorOptions o;
      o.ops = be_stream.ops ? be_stream.ops : be_env.default_ops();
      o.dist = be_stream.distribution(0);
      EngineEvaluator evaluator(o);

      std::ostringstream out;
      out << "workload_id,label,policy,T,Mb_bytes,Mf_bytes,Mc_bytes,ops,blocks_read,"
             "blocks_written,io_per_op,mean_latency_ns,p90_latency_ns,error\n";
      std::string line;
      bool header_seen = false;
      while (!mixes.empty() && std::getline(report, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
          header_seen = true;
          continue;
        }
        std::vector<std::string> c;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) c.push_back(cell);
        if (c.size() < 7) throw ConfigError("malformed report row '" + line + "'");
        LsmConfig cfg;
        cfg.policy = parse_policy(c[2]);
        cfg.size_ratio = static_cast<std::uint32_t>(std::stoul(c[3]));
        cfg.buffer_bytes = std::stoull(c[4]);
        cfg.filter_bytes = std::stoull(c[5]);
        cfg.cache_bytes = std::stoull(c[6]);
        const auto idx = index_of_id(c[0]);
        if (idx >= mixes.size()) throw ConfigError("report row for unknown workload " + c[0]);
        out << c[0] << ',' << c[1] << ',' << config_cells(cfg) << ',';
        try {
          const auto s = evaluator.evaluate(c[0], mixes[idx], env, cfg, seed);
          out << o.ops << ',' << s.io.blocks_read << ',' << s.io.blocks_written << ','
              << num(s.io_per_op) << ',' << num(s.mean_latency_ns) << ','
              << num(s.p90_latency_ns) << ",\n";
        } catch (const std::exception& e) {
          std::string msg = e.what();
          for (auto& ch : msg) {
            if (ch == ',' || ch == '\n') ch = ';';
          }
          out << o.ops << ",,,,,," << msg << '\n';
          std::fprintf(stderr, "warning: %s %s: %s\n", c[0].c_str(), c[1].c_str(), e.what());
        }
      }
      write_text(be_out, out.str());
      manifest.section("environment") = env_json(env);
      manifest.section("ops") = o.ops;
      manifest.set_seed("stream", seed);
      manifest.add_output(be_out);
      manifest.write(manifest_for(be_out));
      std::printf("bench results -> %s\n", be_out.c_str());
      return 0;
    }

    if (*dy) {
      RunManifest manifest("dynamic", args);
      const auto env = dy_env.build();
      const auto seed = dy_seed.resolve();
      require_input(dy_model_file);
      const auto model = load_model(dy_model_file);
      manifest.add_input(dy_model_file);
      const auto phases = load_workloads(dy_workloads, test_workloads(), manifest);
      if (!(dy_k > 0.0)) throw ConfigError("--k must be positive");
      const Environment train_env = dy_k == 1.0 ? env : env.scaled(1.0 / dy_k);
      TunerConfig tcfg;
      tcfg.label = model.label;
      tcfg.model = model.kind;
      tcfg.seed = seed;
      DynamicOptions opt;
      opt.detector.tau = dy_tau;
      opt.detector.min_gain = dy_min_gain;
      opt.detector.p = dy_period ? dy_period : dy_env.default_period();
      opt.periods_per_phase = dy_periods_per_phase;
      opt.dist = dy_stream.distribution(seed);
      opt.seed = seed;
      const auto report = run_dynamic(env, phases, model, train_env, tcfg, opt);

      const std::string prefix = dy_out;
      const std::filesystem::path phases_path = prefix + ".phases.csv";
      const std::filesystem::path events_path = prefix + ".events.csv";
      const std::filesystem::path control_path = prefix + ".control.csv";
      const std::filesystem::path baseline_path = prefix + ".baseline.csv";
      write_text(phases_path, phases_csv(report.dynamic));
      write_text(events_path, events_csv(report.events));
      write_text(control_path, phases_csv(report.control));
      write_text(baseline_path, phases_csv(report.baseline));
      for (const auto& p : {phases_path, events_path, control_path, baseline_path}) {
        manifest.add_output(p);
      }
      manifest.section("environment") = env_json(env);
      manifest.section("training_environment") = env_json(train_env);
      manifest.section("detector") = {{"tau", opt.detector.tau},
                                      {"p", opt.detector.p},
                                      {"periods_per_phase", opt.periods_per_phase}};
      manifest.set_seed("stream", seed);
      manifest.write(manifest_for(prefix));
      const auto dyn = report.total_io(report.dynamic);
      std::printf("events %zu, I/O dynamic %llu, control %llu, default %llu, transition %llu\n",
                  report.events.size(), static_cast<unsigned long long>(dyn),
                  static_cast<unsigned long long>(report.total_io(report.control)),
                  static_cast<unsigned long long>(report.total_io(report.baseline)),
                  static_cast<unsigned long long>(report.transition_io()));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const RankDeficientError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "engine failure: %s\n", e.what());
    return 3;
  }
  return 0;
}

}  // namespace camal::cli
