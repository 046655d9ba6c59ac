#include <doctest.h>

#include "stormclass/classifier.hpp"
#include "stormclass/forest.hpp"
#include "stormclass/linear_svm.hpp"
#include "stormclass/naive_bayes.hpp"
#include "support/oracles.hpp"

using namespace stormclass;

namespace {

Dataset random_dataset(std::uint64_t seed, int n, int n_classes = kClassCount) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0, 3);
  Dataset d;
  d.features.resize(n, kBandCount);
  for (int i = 0; i < n; ++i) {
    const int c = i % n_classes;
    d.labels.push_back(class5_at(c));
    for (int b = 0; b < kBandCount; ++b) d.features(i, b) = 250.0 - 8.0 * c * (b % 3 + 1) / 3.0 + noise(rng);
  }
  return d;
}

}  // namespace

TEST_CASE("GNB posterior matches closed-form Bayes") {
  const auto c = oracle::gnb_case();
  const auto model = train_gnb(c.data);
  const auto p = predict_gnb(model, c.query);
  const auto expected = oracle::gnb_posterior(c.data, c.query);
  for (int k = 0; k < kClassCount; ++k) CHECK(std::abs(std::exp(p.scores[k]) - expected[static_cast<std::size_t>(k)]) < 1e-9);
  CHECK(std::abs(std::exp(p.scores[4]) - 1.0 / (1.0 + std::exp(-1.0))) < 1e-9);
  CHECK(p.label == CloudClass5::ConvectionCore);
}

TEST_CASE("GNB on random data agrees with the density product") {
  const auto d = random_dataset(11, 60);
  const auto model = train_gnb(d);
  for (int i = 0; i < 5; ++i) {
    const RadianceVector x = d.features.row(i).transpose();
    const auto p = predict_gnb(model, x);
    const auto e = oracle::gnb_posterior(d, x);
    for (int k = 0; k < kClassCount; ++k) CHECK(std::abs(std::exp(p.scores[k]) - e[static_cast<std::size_t>(k)]) < 1e-9);
  }
}

TEST_CASE("GNB rejects a class with a single sample") {
  auto d = random_dataset(1, 9);
  d.labels[0] = CloudClass5::ConvectionCore;
  d.labels[4] = CloudClass5::ClearSky;  // ConvectionCore now appears once
  CHECK_THROWS_AS(train_gnb(d), Error);
}

TEST_CASE("a depth-1 tree picks the exhaustive best split") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = random_dataset(seed, 40, 3);
    const auto w = uniform_weights(d.labels);
    ForestParams p;
    p.n_trees = 1;
    p.max_depth = 1;
    p.max_features = kBandCount;
    p.bootstrap = false;
    p.seed = seed;
    const auto forest = train_rdf(d, p, w);
    const auto& root = forest.trees[0].nodes[0];
    const auto best = oracle::exhaustive_stump(d, w);
    REQUIRE_FALSE(root.is_leaf());
    CHECK(root.band == best.band);
    CHECK(root.threshold == doctest::Approx(best.threshold).epsilon(1e-12));
    CHECK(oracle::stump_child_impurity(d, w, root.band, root.threshold) ==
          doctest::Approx(best.child_impurity).epsilon(1e-12));
  }
}

TEST_CASE("forest respects max_depth and is reproducible") {
  const auto d = random_dataset(2, 200);
  ForestParams p;
  p.n_trees = 4;
  p.max_depth = 3;
  p.seed = 8;
  const auto a = train_rdf(d, p, compute_balanced_weights(d.labels));
  const auto b = train_rdf(d, p, compute_balanced_weights(d.labels));
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    CHECK(a.trees[t].depth() <= 3);
    CHECK(a.trees[t].nodes.size() == b.trees[t].nodes.size());
  }
  const RadianceVector x = d.features.row(0).transpose();
  CHECK(predict_rdf(a, x).scores == predict_rdf(b, x).scores);
  CHECK(predict_rdf(a, x).scores.sum() == doctest::Approx(1.0));
}

TEST_CASE("forest rejects single-class data") {
  auto d = random_dataset(3, 10, 1);
  CHECK_THROWS_AS(train_rdf(d, ForestParams{}, uniform_weights(d.labels)), Error);
}

TEST_CASE("bootstrap counts sum to n") {
  const auto c = bootstrap_counts(100, 5, 2);
  int total = 0;
  for (int v : c) total += v;
  CHECK(total == 100);
  CHECK(c == bootstrap_counts(100, 5, 2));
  CHECK(c != bootstrap_counts(100, 5, 3));
}

TEST_CASE("Pegasos reaches the grid-search minimum of the hinge objective") {
  Rng rng(4);
  std::normal_distribution<double> n;
  const int m = 30;
  Eigen::MatrixXd x(m, 1);
  Eigen::VectorXd y(m), s(m);
  for (int i = 0; i < m; ++i) {
    y[i] = i % 2 ? 1.0 : -1.0;
    x(i, 0) = 0.8 * y[i] + n(rng);
    s[i] = y[i] > 0 ? 2.0 : 1.0;
  }
  const double reg = 0.1;
  double grid_best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd w(1);
  for (double wv = -3.0; wv <= 3.0; wv += 0.005)
    for (double b = -2.0; b <= 2.0; b += 0.005) {
      w[0] = wv;
      grid_best = std::min(grid_best, hinge_objective(x, y, s, w, b, reg));
    }
  const auto sol = fit_binary_hinge(x, y, s, reg, 200, 1);
  CHECK(sol.objective == doctest::Approx(hinge_objective(x, y, s, sol.w, sol.b, reg)));
  CHECK(sol.objective <= grid_best + 5e-3);
}

TEST_CASE("linear SVM separates well-separated classes") {
  // One raised band per class, so every one-vs-rest problem is linearly separable.
  Dataset d;
  Rng rng(5);
  std::normal_distribution<double> noise(0, 1);
  d.features.resize(300, kBandCount);
  for (int i = 0; i < 300; ++i) {
    const int c = i % kClassCount;
    d.labels.push_back(class5_at(c));
    for (int b = 0; b < kBandCount; ++b) d.features(i, b) = 250.0 + (b == c ? 10.0 : 0.0) + noise(rng);
  }
  SvmParams p;
  p.seed = 3;
  const auto model = train_linear_svm(d, compute_balanced_weights(d.labels), p);
  int correct = 0;
  for (int i = 0; i < d.size(); ++i)
    correct += predict_linear_svm(model, d.features.row(i).transpose()).label == d.labels[static_cast<std::size_t>(i)];
  CHECK(correct > 0.9 * d.size());
}

TEST_CASE("train_classifier covers every family and checks band order") {
  const auto d = random_dataset(6, 200);
  for (Family f : all_families()) {
    auto cfg = TrainerConfig::defaults(f, 1);
    cfg.nn_train.epochs = 2;
    cfg.forest.n_trees = 3;
    const auto clf = train_classifier(cfg, d);
    CHECK(clf.family == f);
    const auto preds = predict_all(clf, d.features);
    CHECK(preds.size() == static_cast<std::size_t>(d.size()));
    CHECK(preds[3].label == predict(clf, d.features.row(3).transpose()).label);
    auto swapped = canonical_band_order();
    std::swap(swapped[0], swapped[1]);
    CHECK_NOTHROW(check_band_order(clf, canonical_band_order()));
    CHECK_THROWS_AS(check_band_order(clf, swapped), Error);
  }
}

TEST_CASE("family names round-trip") {
  for (Family f : all_families()) CHECK(parse_family(family_name(f)) == f);
  CHECK_THROWS_AS(parse_family("svm_rbf"), Error);
}
