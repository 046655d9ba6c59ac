#ifndef STORMCLASS_CLASS_WEIGHTS_HPP
#define STORMCLASS_CLASS_WEIGHTS_HPP

#include <array>
#include <optional>
#include <span>

#include "stormclass/core.hpp"

namespace stormclass {

/// Per-class sample weights; classes absent from the training labels carry no weight.
struct ClassWeights {
  std::array<std::optional<double>, kClassCount> weights{};

  double operator[](CloudClass5 c) const { return weights[static_cast<std::size_t>(index_of(c))].value_or(0.0); }
  bool present(CloudClass5 c) const { return weights[static_cast<std::size_t>(index_of(c))].has_value(); }
  int present_count() const;
};

/// w_c = N / (K * N_c) over the K classes present.
ClassWeights compute_balanced_weights(std::span<const CloudClass5> labels);
/// Weight 1 for every present class.
ClassWeights uniform_weights(std::span<const CloudClass5> labels);

/// Predicted class plus the per-class scores it was chosen from. The meaning of the
/// scores depends on the family (probabilities, margins or log-posteriors).
struct Prediction {
  CloudClass5 label = CloudClass5::ClearSky;
  Eigen::Matrix<double, kClassCount, 1> scores = Eigen::Matrix<double, kClassCount, 1>::Zero();
};

}  // namespace stormclass

#endif  // STORMCLASS_CLASS_WEIGHTS_HPP
