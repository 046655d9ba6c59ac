#include "stormclass/naive_bayes.hpp"

#include <cmath>
#include <limits>

namespace stormclass {

GnbModel train_gnb(const Dataset& data) {
  const Eigen::Index n = data.size();
  if (n == 0) throw Error(ErrorKind::InsufficientData, "no training samples");
  const auto counts = class_counts(data.labels);
  GnbModel model;
  for (int c = 0; c < kClassCount; ++c) {
    const auto count = counts[static_cast<std::size_t>(c)];
    if (count == 0) continue;
    if (count < 2)
      throw Error(ErrorKind::InsufficientData,
                  "class " + std::string(class_name(class5_at(c))) + " has fewer than 2 samples");
    model.present[static_cast<std::size_t>(c)] = true;
    model.prior[c] = static_cast<double>(count) / static_cast<double>(n);
  }

  Eigen::Matrix<double, kClassCount, kBandCount> sum = Eigen::Matrix<double, kClassCount, kBandCount>::Zero();
  for (Eigen::Index i = 0; i < n; ++i) sum.row(index_of(data.labels[static_cast<std::size_t>(i)])) += data.features.row(i);
  for (int c = 0; c < kClassCount; ++c)
    if (model.present[static_cast<std::size_t>(c)]) model.mean.row(c) = sum.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);

  // Two-pass variance: shift-invariant up to rounding.
  Eigen::Matrix<double, kClassCount, kBandCount> sq = Eigen::Matrix<double, kClassCount, kBandCount>::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = index_of(data.labels[static_cast<std::size_t>(i)]);
    sq.row(c) += (data.features.row(i) - model.mean.row(c)).cwiseAbs2();
  }
  const RadianceVector band_mean = data.features.colwise().mean().transpose();
  const double max_band_var =
      ((data.features.rowwise() - band_mean.transpose()).colwise().squaredNorm() / static_cast<double>(n)).maxCoeff();
  model.var_floor = max_band_var > 0.0 ? 1e-9 * max_band_var : 1e-9;
  for (int c = 0; c < kClassCount; ++c) {
    if (!model.present[static_cast<std::size_t>(c)]) continue;
    model.var.row(c) = (sq.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)])).cwiseMax(model.var_floor);
  }
  return model;
}

Prediction predict_gnb(const GnbModel& model, const RadianceVector& x) {
  const auto joint = gnb_joint_log_likelihood(model, x);
  const double top = joint.maxCoeff();
  const double log_norm = top + std::log((joint.array() - top).exp().sum());
  Prediction p;
  p.scores = joint.array() - log_norm;
  p.label = class5_at(argmax_prefer_storm(p.scores));
  return p;
}

}  // namespace stormclass
