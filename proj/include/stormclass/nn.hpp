#ifndef STORMCLASS_NN_HPP
#define STORMCLASS_NN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stormclass/class_weights.hpp"
#include "stormclass/core.hpp"
#include "stormclass/rng.hpp"

namespace stormclass {

/// Row-major parameter storage with an explicit shape.
struct Tensor {
  std::vector<int> shape;
  Eigen::VectorXd values;

  static Tensor zeros(std::vector<int> shape);
  Eigen::Index size() const { return values.size(); }

  using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstRowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  /// First axis as rows, remaining axes flattened into columns.
  RowMajorMap as_matrix();
  ConstRowMajorMap as_matrix() const;
};

enum class Architecture { Mlp, Cnn };
enum class Activation { Relu, Tanh };

std::string_view architecture_name(Architecture a);
Architecture parse_architecture(std::string_view name);
std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

/// Networks read raw brightness temperatures. The CNN convolves over the band axis
/// with valid padding (8 -> 6 -> 4 -> 2 for kernel 3) and no pooling, then flattens
/// (position, channel) into the dense head.
struct NnConfig {
  Architecture arch = Architecture::Mlp;
  int input_dim = kBandCount;
  std::vector<int> hidden = {32, 32};
  int n_classes = kClassCount;
  double dropout = 0.1;
  Activation hidden_activation = Activation::Relu;
  std::vector<int> conv_filters = {6, 12, 24};
  int kernel = 3;

  static NnConfig mlp() { return {}; }
  static NnConfig cnn() {
    NnConfig c;
    c.arch = Architecture::Cnn;
    return c;
  }
};

struct NnTrainConfig {
  int epochs = 20;
  int batch_size = 256;
  double lr = 1e-3;
  bool class_weighted = false;  // inverse-frequency weighting of the cross-entropy
  std::uint64_t seed = 0;
};

struct NnModel {
  NnConfig config;
  std::vector<Tensor> params;  // dense: W (out, in), b (out); conv: W (out_ch, kernel, in_ch), b (out_ch)
  std::uint64_t init_seed = 0;
  NnTrainConfig training;
};

/// He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
NnModel init_model(const NnConfig& config, std::uint64_t seed);
/// Checks parameter shapes against the config. Throws Schema on mismatch.
void validate(const NnModel& model);

enum class Mode { Train, Eval };

/// Batch logits (rows are samples). Train mode applies inverted dropout with masks
/// drawn from `dropout_seed`. Throws NumericOverflow on non-finite logits.
Eigen::MatrixXd forward_logits(const NnModel& model, const Eigen::MatrixXd& x, Mode mode,
                               std::uint64_t dropout_seed = 0);

/// Row-wise softmax, shifted by the row maximum.
template <typename Derived>
Eigen::MatrixXd softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

Eigen::VectorXd forward_probabilities(const NnModel& model, const Eigen::VectorXd& x, Mode mode,
                                      std::uint64_t dropout_seed = 0);
Eigen::VectorXd forward_mlp(const NnModel& model, const Eigen::VectorXd& x, Mode mode, std::uint64_t seed = 0);
Eigen::VectorXd forward_cnn(const NnModel& model, const Eigen::VectorXd& x, Mode mode, std::uint64_t seed = 0);

/// Shape (positions, channels) produced by the convolution stack for a given input.
std::pair<int, int> conv_output_shape(const NnConfig& config);

struct LossGradient {
  double loss = 0.0;
  std::vector<Eigen::VectorXd> grads;  // aligned with model.params
};

/// Mean weighted cross-entropy over the batch and its gradient by reverse accumulation
/// through the layer tape. Softmax and cross-entropy are fused.
LossGradient loss_and_gradient(const NnModel& model, const Eigen::MatrixXd& x, std::span<const int> targets,
                               const Eigen::VectorXd& sample_weight, Mode mode, std::uint64_t dropout_seed = 0);
double loss_value(const NnModel& model, const Eigen::MatrixXd& x, std::span<const int> targets,
                  const Eigen::VectorXd& sample_weight, Mode mode, std::uint64_t dropout_seed = 0);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> v;

  explicit AdamState(const NnModel& model, double learning_rate = 1e-3);
  void apply(NnModel& model, const std::vector<Eigen::VectorXd>& grads);
};

struct NnTrainingResult {
  NnModel model;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

/// Adam on mini-batches reshuffled every epoch. Throws DivergedTraining naming the epoch
/// on a non-finite loss.
NnTrainingResult train_nn(const NnConfig& config, const Dataset& data, const NnTrainConfig& train);

/// Eval-mode argmax of the probabilities; ties go to the stronger class.
Prediction predict_nn(const NnModel& model, const RadianceVector& x);

}  // namespace stormclass

#endif  // STORMCLASS_NN_HPP
