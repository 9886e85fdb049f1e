#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "camal/errors.hpp"
#include "camal/learner.hpp"

namespace camal {

namespace {

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump(const RegressionTree& tree, int i, std::ostringstream& out) {
  const auto& node = tree.nodes[static_cast<std::size_t>(i)];
  if (node.feature < 0) {
    out << "leaf " << exact(node.value) << '\n';
    return;
  }
  out << "split " << node.feature << ' ' << exact(node.threshold) << '\n';
  dump(tree, node.left, out);
  dump(tree, node.right, out);
}

class Reader {
 public:
  explicit Reader(std::string_view text) : in_(std::string(text)) {}

  std::istringstream line(std::string_view expected_tag) {
    std::string text;
    while (std::getline(in_, text)) {
      if (text.empty()) continue;
      std::istringstream ls(text);
      std::string tag;
      ls >> tag;
      if (tag != expected_tag) fail("expected '" + std::string(expected_tag) + "', got '" + text + "'");
      return ls;
    }
    fail("truncated model file, expected '" + std::string(expected_tag) + "'");
  }

  template <typename T>
  T value(std::string_view tag) {
    auto ls = line(tag);
    T v{};
    ls >> v;
    if (!ls) fail("bad value on '" + std::string(tag) + "' line");
    return v;
  }

  double number(std::istringstream& ls) {
    std::string tok;
    ls >> tok;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("bad number '" + tok + "'");
    return v;
  }

  int read_node(RegressionTree& tree, std::size_t& budget) {
    if (budget == 0) fail("tree has more nodes than declared");
    --budget;
    std::string text;
    while (std::getline(in_, text) && text.empty()) {
    }
    std::istringstream ls(text);
    std::string tag;
    ls >> tag;
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    if (tag == "leaf") {
      tree.nodes.back().value = number(ls);
      return id;
    }
    if (tag != "split") fail("expected split or leaf, got '" + text + "'");
    int feature = -1;
    ls >> feature;
    if (!ls || feature < 0 || feature >= static_cast<int>(kFeatureCount)) fail("bad split feature");
    const double threshold = number(ls);
    const int l = read_node(tree, budget);
    const int r = read_node(tree, budget);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = feature;
    node.threshold = threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  [[noreturn]] static void fail(const std::string& what) { throw StorageError("model file: " + what); }

 private:
  std::istringstream in_;
};

}  // namespace

std::string serialize_model(const TrainedModel& m) {
  std::ostringstream out;
  out << "camal-model 1\n";
  out << "kind " << model_kind_name(m.kind) << '\n';
  out << "label " << label_name(m.label) << '\n';
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.features_hash));
  out << "features " << hash << '\n';
  out << "samples " << m.samples << '\n';
  out << "seed " << m.seed << '\n';
  if (m.kind == ModelKind::Poly) {
    out << "coefficients " << m.coefficients.size() << '\n';
    for (double c : m.coefficients) out << "c " << exact(c) << '\n';
  } else {
    out << "base " << exact(m.base) << '\n';
    out << "learning_rate " << exact(m.learning_rate) << '\n';
    out << "trees " << m.trees.size() << '\n';
    for (const auto& tree : m.trees) {
      out << "tree " << tree.nodes.size() << '\n';
      if (!tree.nodes.empty()) dump(tree, 0, out);
    }
  }
  return out.str();
}

TrainedModel parse_model(std::string_view text) {
  Reader r(text);
  if (r.value<int>("camal-model") != 1) Reader::fail("unsupported version");
  TrainedModel m;
  m.kind = parse_model_kind(r.value<std::string>("kind"));
  m.label = parse_label(r.value<std::string>("label"));
  const auto hash = r.value<std::string>("features");
  m.features_hash = std::stoull(hash, nullptr, 16);
  if (m.features_hash != feature_hash()) {
    throw ConfigError("model was trained with a different feature ordering");
  }
  m.samples = r.value<std::uint64_t>("samples");
  m.seed = r.value<std::uint64_t>("seed");
  if (m.kind == ModelKind::Poly) {
    const auto count = r.value<std::size_t>("coefficients");
    if (count != kBasisCount) Reader::fail("coefficient count does not match the basis");
    for (std::size_t i = 0; i < count; ++i) {
      auto ls = r.line("c");
      m.coefficients.push_back(r.number(ls));
    }
  } else {
    auto ls = r.line("base");
    m.base = r.number(ls);
    ls = r.line("learning_rate");
    m.learning_rate = r.number(ls);
    const auto count = r.value<std::size_t>("trees");
    for (std::size_t t = 0; t < count; ++t) {
      std::size_t nodes = r.value<std::size_t>("tree");
      RegressionTree tree;
      if (nodes > 0) {
        const std::size_t declared = nodes;
        r.read_node(tree, nodes);
        if (tree.nodes.size() != declared) Reader::fail("tree node count mismatch");
      }
      m.trees.push_back(std::move(tree));
    }
  }
  return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw StorageError("cannot write model file " + path.string());
  out << serialize_model(model);
  if (!out) throw StorageError("write failed: " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open model file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_model(text.str());
}

}  // namespace camal
