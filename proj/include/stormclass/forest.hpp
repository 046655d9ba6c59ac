#ifndef STORMCLASS_FOREST_HPP
#define STORMCLASS_FOREST_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "stormclass/class_weights.hpp"
#include "stormclass/core.hpp"

namespace stormclass {

using ClassHistogram = Eigen::Matrix<double, kClassCount, 1>;

struct TreeNode {
  int band = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[band] <= threshold goes left
  int left = -1;
  int right = -1;
  ClassHistogram histogram = ClassHistogram::Zero();  // class-weighted sample mass

  bool is_leaf() const { return band < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(const RadianceVector& x) const;
  int depth() const;
};

struct ForestParams {
  int n_trees = 32;
  int max_depth = 14;
  int max_features = 3;  // round(sqrt(8))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct ForestModel {
  ForestParams params;
  ClassWeights weights;
  std::vector<DecisionTree> trees;
};

/// CART with weighted Gini impurity. Each tree draws a bootstrap sample from a
/// generator keyed by (seed, tree index); each node scores `max_features` bands drawn
/// without replacement at every midpoint between consecutive distinct values. A split is
/// kept only if it strictly lowers weighted impurity. Throws DegenerateModel on
/// single-class data.
ForestModel train_rdf(const Dataset& data, const ForestParams& params, const ClassWeights& weights);

/// Bootstrap multiplicities for one tree; exposed so resampling is reproducible.
std::vector<int> bootstrap_counts(std::size_t n, std::uint64_t seed, int tree);

/// Mean of the trees' normalized leaf histograms; ties go to the stronger class.
Prediction predict_rdf(const ForestModel& model, const RadianceVector& x);

}  // namespace stormclass

#endif  // STORMCLASS_FOREST_HPP
