#include "stormclass/forest.hpp"

#include <algorithm>
#include <numeric>

#include "stormclass/parallel.hpp"
#include "stormclass/rng.hpp"

namespace stormclass {

namespace {

// Weighted Gini impurity times total mass: W - sum_c H_c^2 / W.
double scaled_gini(const ClassHistogram& h) {
  const double w = h.sum();
  return w > 0.0 ? w - h.squaredNorm() / w : 0.0;
}

struct SplitChoice {
  int band = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const std::vector<double>& sample_weight, const ForestParams& params, Rng& rng)
      : data_(data), weight_(sample_weight), params_(params), rng_(rng) {}

  DecisionTree build(std::vector<Eigen::Index> idx) {
    idx_ = std::move(idx);
    tree_.nodes.clear();
    grow(0, idx_.size(), 0);
    return std::move(tree_);
  }

 private:
  ClassHistogram histogram(std::size_t begin, std::size_t end) const {
    ClassHistogram h = ClassHistogram::Zero();
    for (std::size_t i = begin; i < end; ++i) h[index_of(data_.labels[idx_[i]])] += weight_[idx_[i]];
    return h;
  }

  SplitChoice best_split(std::size_t begin, std::size_t end, const ClassHistogram& parent) {
    std::array<int, kBandCount> bands{};
    std::iota(bands.begin(), bands.end(), 0);
    const int n_features = std::clamp(params_.max_features, 1, kBandCount);
    for (int i = 0; i < n_features; ++i) {
      std::uniform_int_distribution<int> pick(i, kBandCount - 1);
      std::swap(bands[static_cast<std::size_t>(i)], bands[static_cast<std::size_t>(pick(rng_))]);
    }

    const double parent_impurity = scaled_gini(parent);
    const double tolerance = 1e-12 * parent.sum();
    SplitChoice best;
    for (int f = 0; f < n_features; ++f) {
      const int band = bands[static_cast<std::size_t>(f)];
      buffer_.clear();
      for (std::size_t i = begin; i < end; ++i) buffer_.emplace_back(data_.features(idx_[i], band), idx_[i]);
      std::sort(buffer_.begin(), buffer_.end());
      ClassHistogram left = ClassHistogram::Zero();
      for (std::size_t j = 0; j + 1 < buffer_.size(); ++j) {
        left[index_of(data_.labels[buffer_[j].second])] += weight_[buffer_[j].second];
        const double lo = buffer_[j].first;
        const double hi = buffer_[j + 1].first;
        if (!(lo < hi)) continue;
        const ClassHistogram right = parent - left;
        const double gain = parent_impurity - scaled_gini(left) - scaled_gini(right);
        if (gain > tolerance && gain > best.gain) {
          double mid = lo + 0.5 * (hi - lo);
          if (!(mid < hi)) mid = lo;
          best = {band, mid, gain};
        }
      }
    }
    return best;
  }

  int grow(std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const ClassHistogram h = histogram(begin, end);
    tree_.nodes[static_cast<std::size_t>(id)].histogram = h;
    const bool pure = (h.array() > 0.0).count() <= 1;
    if (depth >= params_.max_depth || pure || end - begin < 2) return id;

    const SplitChoice split = best_split(begin, end, h);
    if (split.band < 0) return id;
    const auto mid_it = std::partition(idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                                       idx_.begin() + static_cast<std::ptrdiff_t>(end),
                                       [&](Eigen::Index i) { return data_.features(i, split.band) <= split.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - idx_.begin());
    const int left = grow(begin, mid, depth + 1);
    const int right = grow(mid, end, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.band = split.band;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const Dataset& data_;
  const std::vector<double>& weight_;
  const ForestParams& params_;
  Rng& rng_;
  std::vector<Eigen::Index> idx_;
  std::vector<std::pair<double, Eigen::Index>> buffer_;
  DecisionTree tree_;
};

int subtree_depth(const DecisionTree& t, int node) {
  const auto& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(subtree_depth(t, n.left), subtree_depth(t, n.right));
}

}  // namespace

const TreeNode& DecisionTree::leaf_for(const RadianceVector& x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf())
    node = &nodes[static_cast<std::size_t>(x[node->band] <= node->threshold ? node->left : node->right)];
  return *node;
}

int DecisionTree::depth() const { return nodes.empty() ? 0 : subtree_depth(*this, 0); }

std::vector<int> bootstrap_counts(std::size_t n, std::uint64_t seed, int tree) {
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(tree), 0xb007ULL}));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<int> counts(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[pick(rng)];
  return counts;
}

ForestModel train_rdf(const Dataset& data, const ForestParams& params, const ClassWeights& weights) {
  const auto n = static_cast<std::size_t>(data.size());
  if (n == 0) throw Error(ErrorKind::DegenerateModel, "no training samples");
  const auto counts = class_counts(data.labels);
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    throw Error(ErrorKind::DegenerateModel, "random forest needs at least two classes");
  if (params.n_trees < 1 || params.max_depth < 0) throw Error(ErrorKind::Config, "invalid forest parameters");

  ForestModel model;
  model.params = params;
  model.weights = weights;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  parallel_for(model.trees.size(), [&](std::size_t t) {
    std::vector<int> multiplicity = params.bootstrap ? bootstrap_counts(n, params.seed, static_cast<int>(t))
                                                     : std::vector<int>(n, 1);
    std::vector<double> sample_weight(n, 0.0);
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < n; ++i) {
      sample_weight[i] = multiplicity[i] * weights[data.labels[i]];
      if (sample_weight[i] > 0.0) idx.push_back(static_cast<Eigen::Index>(i));
    }
    Rng rng(derive_seed(params.seed, {static_cast<std::uint64_t>(t), 0x5e1eULL}));
    TreeBuilder builder(data, sample_weight, params, rng);
    model.trees[t] = builder.build(std::move(idx));
  });
  return model;
}

Prediction predict_rdf(const ForestModel& model, const RadianceVector& x) {
  Prediction p;
  for (const auto& tree : model.trees) {
    const ClassHistogram& h = tree.leaf_for(x).histogram;
    const double total = h.sum();
    if (total > 0.0) p.scores += h / total;
  }
  if (!model.trees.empty()) p.scores /= static_cast<double>(model.trees.size());
  p.label = class5_at(argmax_prefer_storm(p.scores));
  return p;
}

}  // namespace stormclass
