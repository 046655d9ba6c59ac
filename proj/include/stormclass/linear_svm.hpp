#ifndef STORMCLASS_LINEAR_SVM_HPP
#define STORMCLASS_LINEAR_SVM_HPP

#include <cstdint>

#include "stormclass/class_weights.hpp"
#include "stormclass/core.hpp"

namespace stormclass {

/// Weighted, L2-regularized hinge objective with a regularized intercept:
///   reg/2 (|w|^2 + b^2) + 1/n sum_i s_i max(0, 1 - y_i (w.x_i + b)),  y_i in {-1, +1}.
template <typename DerivedX, typename DerivedY, typename DerivedS, typename DerivedW>
double hinge_objective(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                       const Eigen::MatrixBase<DerivedS>& s, const Eigen::MatrixBase<DerivedW>& w, double b,
                       double reg) {
  const auto margins = (y.array() * ((x * w).array() + b)).eval();
  const double loss = (s.array() * (1.0 - margins).cwiseMax(0.0)).sum() / static_cast<double>(x.rows());
  return 0.5 * reg * (w.squaredNorm() + b * b) + loss;
}

struct HingeSolution {
  Eigen::VectorXd w;
  double b = 0.0;
  double objective = 0.0;
  std::vector<double> epoch_objectives;
};

/// Epoch-shuffled Pegasos subgradient descent with step 1 / (reg * t). Returns the best
/// of the epoch-end iterate and the running average over the second half of training.
HingeSolution fit_binary_hinge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                               double reg, int epochs, std::uint64_t seed);

struct SvmParams {
  double reg = 1.0;
  int epochs = 10;
  int restarts = 5;
  std::uint64_t seed = 0;
};

/// One-vs-rest linear SVM on internally standardized bands.
struct LinearSvmModel {
  SvmParams params;
  ClassWeights weights;
  RadianceVector feature_mean = RadianceVector::Zero();
  RadianceVector feature_sd = RadianceVector::Ones();
  Eigen::Matrix<double, kClassCount, kBandCount> coef = Eigen::Matrix<double, kClassCount, kBandCount>::Zero();
  Eigen::Matrix<double, kClassCount, 1> intercept = Eigen::Matrix<double, kClassCount, 1>::Zero();
  std::array<bool, kClassCount> present{};
  Eigen::Matrix<double, kClassCount, 1> objective = Eigen::Matrix<double, kClassCount, 1>::Zero();
};

/// Throws DegenerateModel on single-class data.
LinearSvmModel train_linear_svm(const Dataset& data, const ClassWeights& weights, const SvmParams& params);

/// Argmax of per-class margins; absent classes score -inf; ties go to the stronger class.
Prediction predict_linear_svm(const LinearSvmModel& model, const RadianceVector& x);

}  // namespace stormclass

#endif  // STORMCLASS_LINEAR_SVM_HPP
