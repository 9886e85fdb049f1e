#include "camal/learner.hpp"

#include <cmath>
#include <numbers>

#include "camal/errors.hpp"

namespace camal {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "N", "T", "Mb", "Mc", "Mf", "v", "r", "w", "q", "policy", "E", "B", "s"};

constexpr double at(const FeatureVector& x, Feature f) noexcept {
  return x[static_cast<std::size_t>(f)];
}

}  // namespace

std::span<const std::string_view> feature_names() noexcept { return kNames; }

std::uint64_t feature_hash() noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto name : kNames) {
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    h ^= ',';
    h *= 0x100000001b3ULL;
  }
  return h;
}

FeatureVector make_features(const Environment& env, const LsmConfig& cfg, const WorkloadMix& mix) {
  FeatureVector x{};
  auto set = [&](Feature f, double value) { x[static_cast<std::size_t>(f)] = value; };
  set(Feature::N, static_cast<double>(env.N));
  set(Feature::T, cfg.size_ratio);
  set(Feature::Mb, static_cast<double>(cfg.buffer_bytes));
  set(Feature::Mc, static_cast<double>(cfg.cache_bytes));
  set(Feature::Mf, static_cast<double>(cfg.filter_bytes));
  set(Feature::v, mix.v);
  set(Feature::r, mix.r);
  set(Feature::w, mix.w);
  set(Feature::q, mix.q);
  set(Feature::policy, cfg.policy == Policy::Tiering ? 1.0 : 0.0);
  set(Feature::E, static_cast<double>(env.E));
  set(Feature::B, static_cast<double>(env.B));
  set(Feature::s, mix.s);
  return x;
}

BasisVector poly_basis(const FeatureVector& x) noexcept {
  const double n = at(x, Feature::N);
  const double t = at(x, Feature::T);
  const double mb = at(x, Feature::Mb);
  const double b = at(x, Feature::B);
  const double tier = at(x, Feature::policy) != 0.0 ? 1.0 : 0.0;
  const double lev = 1.0 - tier;
  const double v = at(x, Feature::v);
  const double r = at(x, Feature::r);
  const double q = at(x, Feature::q);
  const double w = at(x, Feature::w);
  const double bpk = n > 0.0 ? 8.0 * at(x, Feature::Mf) / n : 0.0;
  const double phi = std::exp(-bpk);
  const double fpr = std::exp(-bpk * std::numbers::ln2 * std::numbers::ln2);
  const double levels =
      (t > 1.0 && mb > 0.0) ? std::log(n * at(x, Feature::E) / mb + 1.0) / std::log(t) : 0.0;
  const double sb = b > 0.0 ? at(x, Feature::s) / b : 0.0;
  const double inv_b = b > 0.0 ? 1.0 / b : 0.0;
  return {v * phi * lev,
          r * phi * lev,
          v * phi * t * tier,
          r * phi * t * tier,
          q * levels * lev,
          q * levels * t * tier,
          q * sb * lev,
          q * t * sb * tier,
          w * levels * t * inv_b * lev,
          w * levels * inv_b * tier,
          v,
          r,
          q,
          w,
          v * fpr * lev,
          r * fpr * lev,
          v * fpr * t * tier,
          r * fpr * t * tier};
}

std::string_view model_kind_name(ModelKind kind) noexcept {
  return kind == ModelKind::Poly ? "poly" : "trees";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "poly") return ModelKind::Poly;
  if (name == "trees") return ModelKind::Trees;
  throw ConfigError("unknown model kind '" + std::string(name) + "' (poly|trees)");
}

double TrainedModel::predict(std::span<const double> x) const {
  if (x.size() != kFeatureCount) {
    throw ConfigError("feature vector has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(kFeatureCount));
  }
  FeatureVector fv{};
  std::copy(x.begin(), x.end(), fv.begin());
  return predict(fv);
}

}  // namespace camal
