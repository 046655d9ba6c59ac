#ifndef STORMCLASS_NAIVE_BAYES_HPP
#define STORMCLASS_NAIVE_BAYES_HPP

#include "stormclass/class_weights.hpp"
#include "stormclass/core.hpp"

namespace stormclass {

/// Gaussian naive Bayes over raw kelvins. Variances use the population convention
/// (divide by n) and are floored at var_floor = 1e-9 * (largest band variance).
struct GnbModel {
  Eigen::Matrix<double, kClassCount, 1> prior = Eigen::Matrix<double, kClassCount, 1>::Zero();
  Eigen::Matrix<double, kClassCount, kBandCount> mean = Eigen::Matrix<double, kClassCount, kBandCount>::Zero();
  Eigen::Matrix<double, kClassCount, kBandCount> var = Eigen::Matrix<double, kClassCount, kBandCount>::Ones();
  std::array<bool, kClassCount> present{};
  double var_floor = 0.0;
};

/// Empirical priors. Throws InsufficientData if a present class has fewer than 2 samples.
GnbModel train_gnb(const Dataset& data);

/// log prior + sum_b log N(x_b; mu, var), evaluated in log space.
template <typename Derived>
Eigen::Matrix<double, kClassCount, 1> gnb_joint_log_likelihood(const GnbModel& model,
                                                               const Eigen::MatrixBase<Derived>& x) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  Eigen::Matrix<double, kClassCount, 1> out;
  for (int c = 0; c < kClassCount; ++c) {
    if (!model.present[static_cast<std::size_t>(c)]) {
      out[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const auto v = model.var.row(c).transpose().array();
    const auto diff = x.array() - model.mean.row(c).transpose().array();
    out[c] = std::log(model.prior[c]) - 0.5 * (kLog2Pi + v.log() + diff.square() / v).sum();
  }
  return out;
}

/// Scores are normalized log-posteriors (their exponentials sum to 1).
Prediction predict_gnb(const GnbModel& model, const RadianceVector& x);

}  // namespace stormclass

#endif  // STORMCLASS_NAIVE_BAYES_HPP
