#include "stormclass/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stormclass {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DenseOp {
  int weight;
  int bias;
  int in;
  int out;
};

struct ConvOp {
  int weight;
  int bias;
  int length;  // input positions
  int in_ch;
  int out_ch;
  int kernel;
};

struct ActivationOp {
  Activation kind;
};

struct DropoutOp {
  double rate;
};

using Op = std::variant<DenseOp, ConvOp, ActivationOp, DropoutOp>;

struct Graph {
  std::vector<Op> ops;
  std::vector<std::vector<int>> param_shapes;
  std::vector<int> fan_in;  // per parameter tensor; 0 for biases
};

Graph compile(const NnConfig& cfg) {
  if (cfg.input_dim < 1 || cfg.n_classes < 2) throw Error(ErrorKind::Config, "invalid network dimensions");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw Error(ErrorKind::Config, "dropout must lie in [0, 1)");
  Graph g;
  auto add_param = [&](std::vector<int> shape, int fan_in) {
    g.param_shapes.push_back(std::move(shape));
    g.fan_in.push_back(fan_in);
    return static_cast<int>(g.param_shapes.size()) - 1;
  };
  int width = cfg.input_dim;
  if (cfg.arch == Architecture::Cnn) {
    if (cfg.kernel < 1) throw Error(ErrorKind::Config, "kernel must be positive");
    int length = cfg.input_dim;
    int channels = 1;
    for (int filters : cfg.conv_filters) {
      if (filters < 1 || length - cfg.kernel + 1 < 1)
        throw Error(ErrorKind::Config, "convolution stack does not fit the input length");
      const int w = add_param({filters, cfg.kernel, channels}, cfg.kernel * channels);
      const int b = add_param({filters}, 0);
      g.ops.emplace_back(ConvOp{w, b, length, channels, filters, cfg.kernel});
      g.ops.emplace_back(ActivationOp{Activation::Relu});
      length -= cfg.kernel - 1;
      channels = filters;
    }
    width = length * channels;
  }
  for (int h : cfg.hidden) {
    if (h < 1) throw Error(ErrorKind::Config, "hidden widths must be positive");
    const int w = add_param({h, width}, width);
    const int b = add_param({h}, 0);
    g.ops.emplace_back(DenseOp{w, b, width, h});
    g.ops.emplace_back(ActivationOp{cfg.hidden_activation});
    g.ops.emplace_back(DropoutOp{cfg.dropout});
    width = h;
  }
  const int w = add_param({cfg.n_classes, width}, width);
  const int b = add_param({cfg.n_classes}, 0);
  g.ops.emplace_back(DenseOp{w, b, width, cfg.n_classes});
  return g;
}

Tensor::ConstRowMajorMap weight_matrix(const Tensor& t) { return t.as_matrix(); }

struct Tape {
  std::vector<Eigen::MatrixXd> inputs;  // input to each op
  std::vector<Eigen::MatrixXd> masks;   // dropout masks, empty when inactive
};

Eigen::MatrixXd run_forward(const NnModel& model, const Graph& g, const Eigen::MatrixXd& x, Mode mode,
                            std::uint64_t dropout_seed, Tape* tape) {
  if (x.cols() != model.config.input_dim)
    throw Error(ErrorKind::Schema, "input has " + std::to_string(x.cols()) + " features, network expects " +
                                       std::to_string(model.config.input_dim));
  Rng rng(dropout_seed);
  Eigen::MatrixXd a = x;
  if (tape) {
    tape->inputs.clear();
    tape->masks.assign(g.ops.size(), Eigen::MatrixXd());
  }
  for (std::size_t k = 0; k < g.ops.size(); ++k) {
    if (tape) tape->inputs.push_back(a);
    std::visit(
        [&](const auto& op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, DenseOp>) {
            const auto w = weight_matrix(model.params[static_cast<std::size_t>(op.weight)]);
            const auto& b = model.params[static_cast<std::size_t>(op.bias)].values;
            Eigen::MatrixXd out = a * w.transpose();
            out.rowwise() += b.transpose();
            a = std::move(out);
          } else if constexpr (std::is_same_v<T, ConvOp>) {
            const auto w = weight_matrix(model.params[static_cast<std::size_t>(op.weight)]);  // (out, k*in)
            const auto& b = model.params[static_cast<std::size_t>(op.bias)].values;
            const int positions = op.length - op.kernel + 1;
            Eigen::MatrixXd out(a.rows(), positions * op.out_ch);
            for (int p = 0; p < positions; ++p) {
              auto block = out.middleCols(p * op.out_ch, op.out_ch);
              block.noalias() = a.middleCols(p * op.in_ch, op.kernel * op.in_ch) * w.transpose();
              block.rowwise() += b.transpose();
            }
            a = std::move(out);
          } else if constexpr (std::is_same_v<T, ActivationOp>) {
            if (op.kind == Activation::Relu)
              a = a.cwiseMax(0.0);
            else
              a = a.array().tanh().matrix();
          } else {
            if (mode == Mode::Train && op.rate > 0.0) {
              std::bernoulli_distribution keep(1.0 - op.rate);
              Eigen::MatrixXd mask(a.rows(), a.cols());
              const double scale = 1.0 / (1.0 - op.rate);
              for (Eigen::Index j = 0; j < mask.cols(); ++j)
                for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = keep(rng) ? scale : 0.0;
              a = a.cwiseProduct(mask);
              if (tape) tape->masks[k] = std::move(mask);
            }
          }
        },
        g.ops[k]);
  }
  if (!a.allFinite()) throw Error(ErrorKind::NumericOverflow, "non-finite network output");
  return a;
}

std::vector<Eigen::VectorXd> run_backward(const NnModel& model, const Graph& g, const Tape& tape,
                                          Eigen::MatrixXd grad) {
  std::vector<Eigen::VectorXd> grads;
  grads.reserve(model.params.size());
  for (const auto& p : model.params) grads.push_back(Eigen::VectorXd::Zero(p.size()));
  for (std::size_t k = g.ops.size(); k-- > 0;) {
    const Eigen::MatrixXd& in = tape.inputs[k];
    std::visit(
        [&](const auto& op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, DenseOp>) {
            const auto w = weight_matrix(model.params[static_cast<std::size_t>(op.weight)]);
            Eigen::Map<RowMatrix> dw(grads[static_cast<std::size_t>(op.weight)].data(), op.out, op.in);
            dw.noalias() += grad.transpose() * in;
            grads[static_cast<std::size_t>(op.bias)] += grad.colwise().sum().transpose();
            grad = (grad * w).eval();
          } else if constexpr (std::is_same_v<T, ConvOp>) {
            const auto w = weight_matrix(model.params[static_cast<std::size_t>(op.weight)]);
            const int patch = op.kernel * op.in_ch;
            Eigen::Map<RowMatrix> dw(grads[static_cast<std::size_t>(op.weight)].data(), op.out_ch, patch);
            Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(in.rows(), in.cols());
            const int positions = op.length - op.kernel + 1;
            for (int p = 0; p < positions; ++p) {
              const auto g_p = grad.middleCols(p * op.out_ch, op.out_ch);
              dw.noalias() += g_p.transpose() * in.middleCols(p * op.in_ch, patch);
              grads[static_cast<std::size_t>(op.bias)] += g_p.colwise().sum().transpose();
              dx.middleCols(p * op.in_ch, patch).noalias() += g_p * w;
            }
            grad = std::move(dx);
          } else if constexpr (std::is_same_v<T, ActivationOp>) {
            if (op.kind == Activation::Relu)
              grad = grad.cwiseProduct((in.array() > 0.0).cast<double>().matrix());
            else
              grad = grad.cwiseProduct((1.0 - in.array().tanh().square()).matrix());
          } else {
            if (tape.masks[k].size() > 0) grad = grad.cwiseProduct(tape.masks[k]);
          }
        },
        g.ops[k]);
  }
  return grads;
}

double weighted_cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> targets,
                              const Eigen::VectorXd& weight, Eigen::MatrixXd* grad_logits) {
  const Eigen::Index batch = logits.rows();
  if (static_cast<Eigen::Index>(targets.size()) != batch || weight.size() != batch)
    throw Error(ErrorKind::Schema, "targets and weights must match the batch size");
  const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  const Eigen::MatrixXd shifted = logits.colwise() - row_max;
  const Eigen::VectorXd log_norm = shifted.array().exp().rowwise().sum().log();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0 || t >= logits.cols()) throw Error(ErrorKind::Schema, "target class out of range");
    loss += weight[i] * (log_norm[i] - shifted(i, t));
  }
  loss /= static_cast<double>(batch);
  if (grad_logits) {
    Eigen::MatrixXd p = (shifted.colwise() - log_norm).array().exp();
    for (Eigen::Index i = 0; i < batch; ++i) p(i, targets[static_cast<std::size_t>(i)]) -= 1.0;
    p.array().colwise() *= weight.array() / static_cast<double>(batch);
    *grad_logits = std::move(p);
  }
  return loss;
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  const Eigen::Index n = std::accumulate(shape.begin(), shape.end(), Eigen::Index{1},
                                         [](Eigen::Index a, int b) { return a * b; });
  t.shape = std::move(shape);
  t.values = Eigen::VectorXd::Zero(n);
  return t;
}

Tensor::RowMajorMap Tensor::as_matrix() {
  const Eigen::Index rows = shape.empty() ? 1 : shape.front();
  return {values.data(), rows, rows == 0 ? 0 : values.size() / rows};
}

Tensor::ConstRowMajorMap Tensor::as_matrix() const {
  const Eigen::Index rows = shape.empty() ? 1 : shape.front();
  return {values.data(), rows, rows == 0 ? 0 : values.size() / rows};
}

std::string_view architecture_name(Architecture a) { return a == Architecture::Mlp ? "mlp" : "cnn"; }

Architecture parse_architecture(std::string_view name) {
  if (name == "mlp") return Architecture::Mlp;
  if (name == "cnn") return Architecture::Cnn;
  throw Error(ErrorKind::Config, "unknown architecture '" + std::string(name) + "'");
}

std::string_view activation_name(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw Error(ErrorKind::Config, "unknown activation '" + std::string(name) + "'");
}

NnModel init_model(const NnConfig& config, std::uint64_t seed) {
  const Graph g = compile(config);
  NnModel model;
  model.config = config;
  model.init_seed = seed;
  Rng rng(seed);
  for (std::size_t i = 0; i < g.param_shapes.size(); ++i) {
    Tensor t = Tensor::zeros(g.param_shapes[i]);
    if (g.fan_in[i] > 0) {
      const double limit = std::sqrt(6.0 / g.fan_in[i]);
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index j = 0; j < t.size(); ++j) t.values[j] = u(rng);
    }
    model.params.push_back(std::move(t));
  }
  return model;
}

void validate(const NnModel& model) {
  const Graph g = compile(model.config);
  if (g.param_shapes.size() != model.params.size())
    throw Error(ErrorKind::Schema, "network has " + std::to_string(model.params.size()) + " tensors, expected " +
                                       std::to_string(g.param_shapes.size()));
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const Tensor& t = model.params[i];
    const Eigen::Index expect = std::accumulate(t.shape.begin(), t.shape.end(), Eigen::Index{1},
                                                [](Eigen::Index a, int b) { return a * b; });
    if (t.shape != g.param_shapes[i] || t.values.size() != expect)
      throw Error(ErrorKind::Schema, "tensor " + std::to_string(i) + " has the wrong shape");
    if (!t.values.allFinite()) throw Error(ErrorKind::Schema, "tensor " + std::to_string(i) + " is not finite");
  }
}

std::pair<int, int> conv_output_shape(const NnConfig& config) {
  int length = config.input_dim;
  int channels = 1;
  for (int f : config.conv_filters) {
    length -= config.kernel - 1;
    channels = f;
  }
  return {length, channels};
}

Eigen::MatrixXd forward_logits(const NnModel& model, const Eigen::MatrixXd& x, Mode mode,
                               std::uint64_t dropout_seed) {
  return run_forward(model, compile(model.config), x, mode, dropout_seed, nullptr);
}

Eigen::VectorXd forward_probabilities(const NnModel& model, const Eigen::VectorXd& x, Mode mode,
                                      std::uint64_t dropout_seed) {
  const Eigen::MatrixXd logits = forward_logits(model, x.transpose(), mode, dropout_seed);
  return softmax_rows(logits).row(0).transpose();
}

Eigen::VectorXd forward_mlp(const NnModel& model, const Eigen::VectorXd& x, Mode mode, std::uint64_t seed) {
  if (model.config.arch != Architecture::Mlp) throw Error(ErrorKind::Config, "model is not an MLP");
  return forward_probabilities(model, x, mode, seed);
}

Eigen::VectorXd forward_cnn(const NnModel& model, const Eigen::VectorXd& x, Mode mode, std::uint64_t seed) {
  if (model.config.arch != Architecture::Cnn) throw Error(ErrorKind::Config, "model is not a CNN");
  return forward_probabilities(model, x, mode, seed);
}

LossGradient loss_and_gradient(const NnModel& model, const Eigen::MatrixXd& x, std::span<const int> targets,
                               const Eigen::VectorXd& sample_weight, Mode mode, std::uint64_t dropout_seed) {
  const Graph g = compile(model.config);
  Tape tape;
  const Eigen::MatrixXd logits = run_forward(model, g, x, mode, dropout_seed, &tape);
  Eigen::MatrixXd grad;
  LossGradient out;
  out.loss = weighted_cross_entropy(logits, targets, sample_weight, &grad);
  out.grads = run_backward(model, g, tape, std::move(grad));
  return out;
}

double loss_value(const NnModel& model, const Eigen::MatrixXd& x, std::span<const int> targets,
                  const Eigen::VectorXd& sample_weight, Mode mode, std::uint64_t dropout_seed) {
  return weighted_cross_entropy(forward_logits(model, x, mode, dropout_seed), targets, sample_weight, nullptr);
}

AdamState::AdamState(const NnModel& model, double learning_rate) : lr(learning_rate) {
  for (const auto& p : model.params) {
    m.push_back(Eigen::VectorXd::Zero(p.size()));
    v.push_back(Eigen::VectorXd::Zero(p.size()));
  }
}

void AdamState::apply(NnModel& model, const std::vector<Eigen::VectorXd>& grads) {
  ++step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i].cwiseAbs2();
    model.params[i].values.array() -= lr * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + epsilon);
  }
}

NnTrainingResult train_nn(const NnConfig& config, const Dataset& data, const NnTrainConfig& train) {
  const Eigen::Index n = data.size();
  if (n == 0) throw Error(ErrorKind::EmptyInput, "no training samples");
  if (train.batch_size < 1 || train.epochs < 0 || !(train.lr > 0.0))
    throw Error(ErrorKind::Config, "invalid training configuration");

  NnTrainingResult result;
  result.model = init_model(config, derive_seed(train.seed, "init"));
  result.model.training = train;
  std::vector<int> targets(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) targets[static_cast<std::size_t>(i)] = index_of(data.labels[static_cast<std::size_t>(i)]);
  Eigen::VectorXd weight = Eigen::VectorXd::Ones(n);
  if (train.class_weighted) {
    const ClassWeights cw = compute_balanced_weights(data.labels);
    for (Eigen::Index i = 0; i < n; ++i) weight[i] = cw[data.labels[static_cast<std::size_t>(i)]];
  }

  AdamState adam(result.model, train.lr);
  Rng shuffle_rng(derive_seed(train.seed, "shuffle"));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Graph g = compile(config);
  Eigen::MatrixXd xb;
  Eigen::VectorXd wb;
  std::vector<int> tb;
  std::uint64_t batch_counter = 0;
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += train.batch_size) {
      const Eigen::Index size = std::min<Eigen::Index>(train.batch_size, n - start);
      xb.resize(size, data.features.cols());
      wb.resize(size);
      tb.resize(static_cast<std::size_t>(size));
      for (Eigen::Index i = 0; i < size; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + i)];
        xb.row(i) = data.features.row(src);
        wb[i] = weight[src];
        tb[static_cast<std::size_t>(i)] = targets[static_cast<std::size_t>(src)];
      }
      Tape tape;
      Eigen::MatrixXd logits;
      try {
        logits = run_forward(result.model, g, xb, Mode::Train, derive_seed(train.seed, {++batch_counter}), &tape);
      } catch (const Error& e) {
        throw Error(ErrorKind::DivergedTraining, "epoch " + std::to_string(epoch + 1) + ": " + e.what());
      }
      Eigen::MatrixXd grad;
      const double loss = weighted_cross_entropy(logits, tb, wb, &grad);
      if (!std::isfinite(loss))
        throw Error(ErrorKind::DivergedTraining, "non-finite loss in epoch " + std::to_string(epoch + 1));
      adam.apply(result.model, run_backward(result.model, g, tape, std::move(grad)));
      epoch_loss += loss * static_cast<double>(size);
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

Prediction predict_nn(const NnModel& model, const RadianceVector& x) {
  if (model.config.n_classes != kClassCount || model.config.input_dim != kBandCount)
    throw Error(ErrorKind::Schema, "network is not a 8-band, 5-class classifier");
  Prediction p;
  p.scores = forward_probabilities(model, x, Mode::Eval);
  p.label = class5_at(argmax_prefer_storm(p.scores));
  return p;
}

}  // namespace stormclass
