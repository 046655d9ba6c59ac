#include "stormclass/linear_svm.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "stormclass/rng.hpp"

namespace stormclass {

HingeSolution fit_binary_hinge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                               double reg, int epochs, std::uint64_t seed) {
  if (!(reg > 0.0)) throw Error(ErrorKind::Config, "regularization must be positive");
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = x;
  Rng rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  Eigen::VectorXd w_avg = Eigen::VectorXd::Zero(d);
  double b_avg = 0.0;
  double averaged = 0.0;

  HingeSolution best;
  best.w = w;
  best.objective = hinge_objective(x, y, s, w, b, reg);
  auto consider = [&](const Eigen::VectorXd& cw, double cb) {
    const double obj = hinge_objective(x, y, s, cw, cb, reg);
    if (obj < best.objective) {
      best.w = cw;
      best.b = cb;
      best.objective = obj;
    }
    return obj;
  };

  std::uint64_t t = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const bool averaging = epoch >= epochs / 2;
    for (Eigen::Index i : order) {
      ++t;
      const double eta = 1.0 / (reg * static_cast<double>(t));
      const double margin = y[i] * (rows.row(i).dot(w) + b);
      const double shrink = 1.0 - eta * reg;
      w *= shrink;
      b *= shrink;
      if (margin < 1.0) {
        const double step = eta * s[i] * y[i];
        w += step * rows.row(i).transpose();
        b += step;
      }
      if (averaging) {
        averaged += 1.0;
        w_avg += (w - w_avg) / averaged;
        b_avg += (b - b_avg) / averaged;
      }
    }
    best.epoch_objectives.push_back(consider(w, b));
  }
  if (averaged > 0.0) consider(w_avg, b_avg);
  return best;
}

LinearSvmModel train_linear_svm(const Dataset& data, const ClassWeights& weights, const SvmParams& params) {
  const Eigen::Index n = data.size();
  const auto counts = class_counts(data.labels);
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    throw Error(ErrorKind::DegenerateModel, "linear SVM needs at least two classes");

  LinearSvmModel model;
  model.params = params;
  model.weights = weights;
  model.feature_mean = data.features.colwise().mean().transpose();
  const RadianceVector var =
      (data.features.rowwise() - model.feature_mean.transpose()).colwise().squaredNorm().transpose() /
      static_cast<double>(n);
  for (int b = 0; b < kBandCount; ++b) model.feature_sd[b] = var[b] > 0.0 ? std::sqrt(var[b]) : 1.0;
  const Eigen::MatrixXd z = (data.features.rowwise() - model.feature_mean.transpose())
                                .array()
                                .rowwise() /
                            model.feature_sd.transpose().array();

  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = weights[data.labels[static_cast<std::size_t>(i)]];

  model.intercept.setConstant(-std::numeric_limits<double>::infinity());
  for (CloudClass5 c : all_classes5()) {
    const int ci = index_of(c);
    model.present[static_cast<std::size_t>(ci)] = counts[static_cast<std::size_t>(ci)] > 0;
    if (!model.present[static_cast<std::size_t>(ci)]) continue;
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = data.labels[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
    HingeSolution best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, params.restarts); ++r) {
      HingeSolution sol = fit_binary_hinge(
          z, y, s, params.reg, params.epochs,
          derive_seed(params.seed, {static_cast<std::uint64_t>(ci), static_cast<std::uint64_t>(r)}));
      if (sol.objective < best.objective) best = std::move(sol);
    }
    model.coef.row(ci) = best.w.transpose();
    model.intercept[ci] = best.b;
    model.objective[ci] = best.objective;
  }
  return model;
}

Prediction predict_linear_svm(const LinearSvmModel& model, const RadianceVector& x) {
  const RadianceVector z = (x - model.feature_mean).cwiseQuotient(model.feature_sd);
  Prediction p;
  for (int c = 0; c < kClassCount; ++c)
    p.scores[c] = model.present[static_cast<std::size_t>(c)] ? model.coef.row(c).dot(z) + model.intercept[c]
                                                             : -std::numeric_limits<double>::infinity();
  p.label = class5_at(argmax_prefer_storm(p.scores));
  return p;
}

}  // namespace stormclass
