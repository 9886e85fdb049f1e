#pragma once

// Cost regressors: least squares over cost-model basis terms, and
// squared-loss gradient-boosted regression trees on raw features.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "camal/analytic_model.hpp"
#include "camal/cost_sample.hpp"
#include "camal/workload.hpp"

namespace camal {

// Raw feature order. Changing it changes feature_hash() and invalidates
// stored models.
enum class Feature : std::uint8_t { N, T, Mb, Mc, Mf, v, r, w, q, policy, E, B, s };
inline constexpr std::size_t kFeatureCount = 13;

using FeatureVector = std::array<double, kFeatureCount>;

std::span<const std::string_view> feature_names() noexcept;
std::uint64_t feature_hash() noexcept;

// policy: 0 leveling, 1 tiering. Memory in bytes.
FeatureVector make_features(const Environment& env, const LsmConfig& cfg, const WorkloadMix& mix);

// Polynomial basis. With phi = e^{-8 Mf / N}, p = e^{-ln^2(2) 8 Mf / N} (the
// bloom false-positive rate at that many bits per key), L the relaxed level
// count and lev/tier the policy indicators:
//   v*phi*lev, r*phi*lev, v*phi*T*tier, r*phi*T*tier,
//   q*L*lev, q*L*T*tier, q*(s/B)*lev, q*T*(s/B)*tier,
//   w*L*T/B*lev, w*L/B*tier, v, r, q, w,
//   v*p*lev, r*p*lev, v*p*T*tier, r*p*T*tier
// The analytic cost lies in the span of the first fourteen; the last four
// follow the filters the engine actually builds.
inline constexpr std::size_t kBasisCount = 18;
using BasisVector = std::array<double, kBasisCount>;
BasisVector poly_basis(const FeatureVector& x) noexcept;

enum class ModelKind : std::uint8_t { Poly, Trees };
std::string_view model_kind_name(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

struct TreeParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  std::size_t min_leaf = 2;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  double value = 0.0;
  int left = -1;
  int right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(const FeatureVector& x) const noexcept;
};

struct TrainedModel {
  ModelKind kind = ModelKind::Poly;
  LabelKind label = LabelKind::MeanLatency;
  std::uint64_t features_hash = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  std::vector<double> coefficients;  // Poly, kBasisCount entries

  double base = 0.0;  // Trees
  double learning_rate = 0.0;
  std::vector<RegressionTree> trees;

  // Training RMSE after the base score and after each tree; not persisted.
  std::vector<double> stage_rmse;

  double predict(const FeatureVector& x) const;
  // Throws ConfigError unless x has kFeatureCount entries.
  double predict(std::span<const double> x) const;
};

enum class RankHandling : std::uint8_t {
  Strict,        // throw RankDeficientError naming the dependent basis columns
  DropDeficient  // zero the dependent columns and fit the rest
};

enum class CoefficientSign : std::uint8_t {
  Free,
  // Every basis term is a cost contribution; a negative weight lets the
  // argmin chase extrapolation artifacts.
  NonNegative
};

inline constexpr double kRidge = 1e-8;

TrainedModel fit_poly(std::span<const FeatureVector> x, std::span<const double> y,
                      RankHandling rank = RankHandling::Strict,
                      CoefficientSign sign = CoefficientSign::Free);
TrainedModel fit_trees(std::span<const FeatureVector> x, std::span<const double> y,
                       const TreeParams& params = {});

std::string serialize_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace camal
