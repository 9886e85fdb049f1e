#include <algorithm>
#include <cmath>
#include <numeric>

#include "camal/errors.hpp"
#include "camal/kernels.hpp"
#include "camal/learner.hpp"

namespace camal {

double RegressionTree::predict(const FeatureVector& x) const noexcept {
  if (nodes.empty()) return 0.0;
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureVector> x, std::span<const double> target,
              const TreeParams& params)
      : x_(x), target_(target), params_(params) {}

  RegressionTree build() {
    std::vector<std::size_t> idx(x_.size());
    std::iota(idx.begin(), idx.end(), 0);
    double total = 0.0;
    for (double t : target_) total += t * t;
    min_gain_ = 1e-12 * std::max(total, 1e-300);
    tree_.nodes.clear();
    grow(idx, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t>& idx, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    double sum = 0.0;
    for (auto i : idx) sum += target_[i];
    tree_.nodes[static_cast<std::size_t>(id)].value = sum / static_cast<double>(idx.size());
    if (depth >= params_.max_depth || idx.size() < 2 * params_.min_leaf) return id;

    const Split split = best_split(idx, sum);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto i : idx) {
      (x_[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(i);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& idx, double sum) const {
    Split best;
    const std::size_t n = idx.size();
    const double parent = sum * sum / static_cast<double>(n);
    std::vector<std::size_t> order(idx);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x_[a][f] < x_[b][f]; });
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_sum += target_[order[k]];
        const double here = x_[order[k]][f];
        const double next = x_[order[k + 1]][f];
        if (here == next) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - parent;
        if (gain > min_gain_ && gain > best.gain) {
          best.feature = static_cast<int>(f);
          best.threshold = here + 0.5 * (next - here);
          if (!(best.threshold < next)) best.threshold = here;
          best.gain = gain;
        }
      }
    }
    return best;
  }

  std::span<const FeatureVector> x_;
  std::span<const double> target_;
  const TreeParams& params_;
  double min_gain_ = 0.0;
  RegressionTree tree_;
};

}  // namespace

TrainedModel fit_trees(std::span<const FeatureVector> x, std::span<const double> y,
                       const TreeParams& params) {
  if (x.size() != y.size()) throw ConfigError("feature and label counts differ");
  if (x.size() < 2) throw ConfigError("tree ensemble needs at least 2 samples");
  if (params.max_depth == 0 || params.min_leaf == 0 || !(params.learning_rate > 0.0)) {
    throw ConfigError("invalid tree parameters");
  }
  const std::size_t n = x.size();
  TrainedModel model;
  model.kind = ModelKind::Trees;
  model.features_hash = feature_hash();
  model.samples = n;
  model.learning_rate = params.learning_rate;
  model.base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  std::vector<double> pred(n, model.base);
  std::vector<double> residual(n);
  const std::span<const double> labels = y;
  auto rmse = [&] {
    return std::sqrt(kernels::squared_distance(pred, labels) / static_cast<double>(n));
  };
  model.stage_rmse.push_back(rmse());
  model.trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
    auto tree = TreeBuilder(x, residual, params).build();
    for (std::size_t i = 0; i < n; ++i) pred[i] += params.learning_rate * tree.predict(x[i]);
    model.trees.push_back(std::move(tree));
    model.stage_rmse.push_back(rmse());
  }
  return model;
}

}  // namespace camal
