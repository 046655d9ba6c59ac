#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace oracle {

GnbCase gnb_case() {
  GnbCase c;
  c.data.features.resize(4, kBandCount);
  const double band0[4] = {-1.0, 1.0, 1.0, 3.0};
  for (int i = 0; i < 4; ++i) {
    c.data.features(i, 0) = band0[i];
    // Identical in both classes, so these bands cancel out of the posterior.
    for (int b = 1; b < kBandCount; ++b) c.data.features(i, b) = 200.0 + b + ((i % 2) ? 1.0 : -1.0);
  }
  c.data.labels = {CloudClass5::ClearSky, CloudClass5::ClearSky, CloudClass5::ConvectionCore,
                   CloudClass5::ConvectionCore};
  c.query = RadianceVector::Constant(0.0);
  c.query[0] = 1.5;
  for (int b = 1; b < kBandCount; ++b) c.query[b] = 200.0 + b + 0.3;
  return c;
}

std::array<double, kClassCount> gnb_posterior(const Dataset& data, const RadianceVector& x) {
  std::array<double, kClassCount> joint{};
  const double n = static_cast<double>(data.size());
  for (int c = 0; c < kClassCount; ++c) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < data.size(); ++i)
      if (index_of(data.labels[static_cast<std::size_t>(i)]) == c) rows.push_back(i);
    if (rows.empty()) continue;
    double p = static_cast<double>(rows.size()) / n;
    for (int b = 0; b < kBandCount; ++b) {
      double mean = 0.0, var = 0.0;
      for (auto i : rows) mean += data.features(i, b);
      mean /= static_cast<double>(rows.size());
      for (auto i : rows) var += (data.features(i, b) - mean) * (data.features(i, b) - mean);
      var /= static_cast<double>(rows.size());
      p *= std::exp(-(x[b] - mean) * (x[b] - mean) / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
    }
    joint[static_cast<std::size_t>(c)] = p;
  }
  double total = 0.0;
  for (double v : joint) total += v;
  for (double& v : joint) v /= total;
  return joint;
}

std::vector<ScienceVector> silhouette_points() {
  std::vector<ScienceVector> pts;
  for (double v : {0.0, 0.1, 0.2, 10.0, 10.1, 10.2}) pts.push_back({v, 0.0, 0.0});
  return pts;
}

std::vector<int> silhouette_assignment() { return {0, 0, 0, 1, 1, 1}; }

double silhouette_by_hand() {
  // s = 1 - a/b when a < b. Cluster A = {0, .1, .2}, B = {10, 10.1, 10.2}; by symmetry
  // the B points mirror the A points.
  const double s0 = 1.0 - ((0.1 + 0.2) / 2.0) / ((10.0 + 10.1 + 10.2) / 3.0);
  const double s1 = 1.0 - ((0.1 + 0.1) / 2.0) / ((9.9 + 10.0 + 10.1) / 3.0);
  const double s2 = 1.0 - ((0.2 + 0.1) / 2.0) / ((9.8 + 9.9 + 10.0) / 3.0);
  return (s0 + s1 + s2) / 3.0;
}

std::vector<int> normalized(std::vector<int> assignment) {
  if (!assignment.empty() && assignment[0] != 0)
    for (int& a : assignment) a = 1 - a;
  return assignment;
}

Partition exhaustive_two_means(const std::vector<ScienceVector>& points) {
  const Eigen::MatrixX3d x = standardize(points, fit_standardizer(points));
  const int n = static_cast<int>(points.size());
  Partition best{{}, std::numeric_limits<double>::infinity()};
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    if (mask & 1u) continue;  // point 0 always in cluster 0
    double sse = 0.0;
    for (int c = 0; c < 2; ++c) {
      Eigen::RowVector3d mean = Eigen::RowVector3d::Zero();
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (static_cast<int>((mask >> i) & 1u) == c) mean += x.row(i), ++count;
      mean /= count;
      for (int i = 0; i < n; ++i)
        if (static_cast<int>((mask >> i) & 1u) == c) sse += (x.row(i) - mean).squaredNorm();
    }
    if (sse < best.inertia) {
      best.inertia = sse;
      best.assignment.assign(static_cast<std::size_t>(n), 0);
      for (int i = 0; i < n; ++i) best.assignment[static_cast<std::size_t>(i)] = static_cast<int>((mask >> i) & 1u);
    }
  }
  return best;
}

double stump_child_impurity(const Dataset& data, const ClassWeights& weights, int band, double threshold) {
  std::array<double, kClassCount> left{}, right{};
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const auto label = data.labels[static_cast<std::size_t>(i)];
    (data.features(i, band) <= threshold ? left : right)[static_cast<std::size_t>(index_of(label))] += weights[label];
  }
  auto mass = [](const std::array<double, kClassCount>& h) {
    double s = 0.0;
    for (double v : h) s += v;
    return s;
  };
  auto gini = [&](const std::array<double, kClassCount>& h) {
    const double w = mass(h);
    if (w == 0.0) return 0.0;
    double g = 1.0;
    for (double v : h) g -= (v / w) * (v / w);
    return g;
  };
  const double wl = mass(left), wr = mass(right);
  return (wl * gini(left) + wr * gini(right)) / (wl + wr);
}

Stump exhaustive_stump(const Dataset& data, const ClassWeights& weights) {
  Stump best{-1, 0.0, std::numeric_limits<double>::infinity()};
  for (int b = 0; b < kBandCount; ++b) {
    std::vector<double> v(data.features.col(b).data(), data.features.col(b).data() + data.size());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
      const double t = 0.5 * (v[j] + v[j + 1]);
      const double g = stump_child_impurity(data, weights, b, t);
      if (g < best.child_impurity) best = {b, t, g};
    }
  }
  return best;
}

double gradient_check(const NnConfig& config, std::uint64_t seed, double h) {
  NnModel model = init_model(config, seed);
  Rng rng(derive_seed(seed, "batch"));
  std::normal_distribution<double> normal;
  const int batch = 6;
  Eigen::MatrixXd x(batch, config.input_dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  std::vector<int> targets(batch);
  for (int i = 0; i < batch; ++i) targets[static_cast<std::size_t>(i)] = (i * 3 + static_cast<int>(seed)) % config.n_classes;
  Eigen::VectorXd w(batch);
  for (int i = 0; i < batch; ++i) w[i] = 0.5 + 0.25 * i;
  // Nonzero biases so no unit sits exactly at a ReLU kink.
  for (auto& p : model.params)
    if (p.shape.size() == 1)
      for (Eigen::Index i = 0; i < p.size(); ++i) p.values[i] = 0.1 * normal(rng);

  const std::uint64_t mask_seed = derive_seed(seed, "dropout");
  const LossGradient analytic = loss_and_gradient(model, x, targets, w, Mode::Train, mask_seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < model.params.size(); ++t) {
    for (Eigen::Index i = 0; i < model.params[t].size(); ++i) {
      double& theta = model.params[t].values[i];
      const double saved = theta;
      theta = saved + h;
      const double up = loss_value(model, x, targets, w, Mode::Train, mask_seed);
      theta = saved - h;
      const double down = loss_value(model, x, targets, w, Mode::Train, mask_seed);
      theta = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = analytic.grads[t][i];
      const double scale = std::max({std::abs(numeric), std::abs(exact), 1e-6});
      worst = std::max(worst, std::abs(numeric - exact) / scale);
    }
  }
  return worst;
}

}  // namespace oracle
