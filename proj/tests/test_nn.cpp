#include <doctest.h>

#include "stormclass/nn.hpp"
#include "support/oracles.hpp"

using namespace stormclass;

namespace {

NnConfig small_mlp(Activation act) {
  NnConfig c;
  c.hidden = {5, 4};
  c.dropout = 0.25;
  c.hidden_activation = act;
  return c;
}

NnConfig small_cnn() {
  NnConfig c = NnConfig::cnn();
  c.conv_filters = {2, 3};
  c.hidden = {4};
  c.dropout = 0.25;
  return c;
}

}  // namespace

TEST_CASE("MLP gradients match central differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CHECK(oracle::gradient_check(small_mlp(Activation::Relu), seed) < 1e-3);
    CHECK(oracle::gradient_check(small_mlp(Activation::Tanh), seed) < 1e-3);
  }
}

TEST_CASE("CNN gradients match central differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(oracle::gradient_check(small_cnn(), seed) < 1e-3);
}

TEST_CASE("2-2-2 network forward pass by hand") {
  NnConfig c;
  c.input_dim = 2;
  c.hidden = {2};
  c.n_classes = 2;
  c.dropout = 0.0;
  NnModel m = init_model(c, 1);
  m.params[0].values << 1, -1, 0.5, 2;  // W1 (out, in)
  m.params[1].values << 0, -1;
  m.params[2].values << 1, 1, -1, 2;
  m.params[3].values << 0.5, 0;
  Eigen::VectorXd x(2);
  x << 1, 2;
  // hidden = relu([-1, 3.5]) = [0, 3.5]; logits = [4, 7]
  const auto p = forward_probabilities(m, x, Mode::Eval);
  CHECK(p[1] == doctest::Approx(std::exp(3.0) / (1 + std::exp(3.0))).epsilon(1e-12));
  CHECK(p.sum() == doctest::Approx(1.0));
}

TEST_CASE("a (1, 0, 0) kernel copies the input positions") {
  NnConfig c = NnConfig::cnn();
  c.conv_filters = {1};
  c.hidden = {};
  c.n_classes = 6;
  c.dropout = 0.0;
  NnModel m = init_model(c, 2);
  CHECK(conv_output_shape(c) == std::pair<int, int>{6, 1});
  m.params[0].values << 1, 0, 0;
  m.params[1].values.setZero();
  m.params[2].as_matrix().setIdentity();
  m.params[3].values.setZero();
  Eigen::MatrixXd x(1, 8);
  x << 3, 1, 4, 1, 5, 9, 2, 6;
  const Eigen::MatrixXd logits = forward_logits(m, x, Mode::Eval);
  for (int i = 0; i < 6; ++i) CHECK(logits(0, i) == x(0, i));
}

TEST_CASE("a CNN with an identity kernel equals the MLP with the same head") {
  NnConfig cc = NnConfig::cnn();
  cc.conv_filters = {1};
  cc.kernel = 1;
  cc.hidden = {6};
  cc.dropout = 0.0;
  NnConfig mc;
  mc.hidden = {6};
  mc.dropout = 0.0;
  NnModel cnn = init_model(cc, 3);
  const NnModel mlp = init_model(mc, 4);
  cnn.params[0].values << 1;
  cnn.params[1].values << 0;
  for (std::size_t i = 0; i < mlp.params.size(); ++i) cnn.params[i + 2] = mlp.params[i];
  Rng rng(5);
  std::uniform_real_distribution<double> u(200, 300);
  Eigen::MatrixXd x(4, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);  // positive, so ReLU is the identity
  const Eigen::MatrixXd a = forward_logits(cnn, x, Mode::Eval);
  const Eigen::MatrixXd b = forward_logits(mlp, x, Mode::Eval);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dropout is active only in training and keyed by seed") {
  NnModel m = init_model(small_mlp(Activation::Relu), 7);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 8);
  CHECK(forward_logits(m, x, Mode::Eval, 1) == forward_logits(m, x, Mode::Eval, 2));
  CHECK(forward_logits(m, x, Mode::Train, 1) == forward_logits(m, x, Mode::Train, 1));
  CHECK(forward_logits(m, x, Mode::Train, 1) != forward_logits(m, x, Mode::Train, 2));
}

TEST_CASE("Adam's first step moves each parameter by about lr against the gradient") {
  NnModel m = init_model(small_mlp(Activation::Relu), 1);
  const NnModel before = m;
  AdamState adam(m, 0.01);
  std::vector<Eigen::VectorXd> g;
  for (const auto& p : m.params) g.push_back(Eigen::VectorXd::Constant(p.size(), 0.5));
  adam.apply(m, g);
  for (std::size_t t = 0; t < m.params.size(); ++t)
    CHECK((before.params[t].values - m.params[t].values).isApprox(Eigen::VectorXd::Constant(m.params[t].size(), 0.01), 1e-6));
}

TEST_CASE("validate rejects mismatched shapes") {
  NnModel m = init_model(NnConfig::mlp(), 1);
  m.params[0] = Tensor::zeros({3, 3});
  CHECK_THROWS_AS(validate(m), Error);
}

TEST_CASE("training lowers the loss and is reproducible") {
  Dataset d;
  Rng rng(3);
  std::normal_distribution<double> n(0, 2);
  d.features.resize(400, 8);
  for (int i = 0; i < 400; ++i) {
    const int c = i % kClassCount;
    d.labels.push_back(class5_at(c));
    for (int b = 0; b < 8; ++b) d.features(i, b) = 260.0 - 12.0 * c + n(rng);
  }
  NnTrainConfig t;
  t.epochs = 15;
  t.batch_size = 32;
  t.lr = 3e-3;
  t.seed = 9;
  const auto a = train_nn(NnConfig::mlp(), d, t);
  const auto b = train_nn(NnConfig::mlp(), d, t);
  CHECK(a.loss_curve.back() < a.loss_curve.front());
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.model.params[0].values == b.model.params[0].values);
}

TEST_CASE("a runaway learning rate is reported, not silently absorbed") {
  Dataset d;
  d.features = Eigen::MatrixXd::Constant(20, 8, 1e150);
  for (int i = 0; i < 20; ++i) d.labels.push_back(class5_at(i % 2));
  NnTrainConfig t;
  t.epochs = 2;
  t.lr = 1e100;
  CHECK_THROWS_AS(train_nn(NnConfig::mlp(), d, t), Error);
}
