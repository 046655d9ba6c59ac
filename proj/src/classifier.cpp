#include "stormclass/classifier.hpp"

#include <algorithm>

#include "stormclass/parallel.hpp"
#include "stormclass/rng.hpp"

namespace stormclass {

int ClassWeights::present_count() const {
  return static_cast<int>(std::count_if(weights.begin(), weights.end(), [](const auto& w) { return w.has_value(); }));
}

ClassWeights compute_balanced_weights(std::span<const CloudClass5> labels) {
  const auto counts = class_counts(labels);
  const double n = static_cast<double>(labels.size());
  const double k = static_cast<double>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
  ClassWeights w;
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] > 0) w.weights[c] = n / (k * static_cast<double>(counts[c]));
  return w;
}

ClassWeights uniform_weights(std::span<const CloudClass5> labels) {
  const auto counts = class_counts(labels);
  ClassWeights w;
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] > 0) w.weights[c] = 1.0;
  return w;
}

const std::array<Family, 5>& all_families() {
  static const std::array<Family, 5> f{Family::Rdf, Family::LinearSvm, Family::Gnb, Family::Ann, Family::Cnn};
  return f;
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Rdf: return "rdf";
    case Family::LinearSvm: return "linear_svm";
    case Family::Gnb: return "gnb";
    case Family::Ann: return "ann";
    case Family::Cnn: return "cnn";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : all_families())
    if (family_name(f) == name) return f;
  throw Error(ErrorKind::Config, "unknown classifier family '" + std::string(name) + "'");
}

TrainerConfig TrainerConfig::defaults(Family family, std::uint64_t seed) {
  TrainerConfig c;
  c.family = family;
  c.seed = seed;
  // The networks train on the raw class mix unless asked otherwise.
  c.balanced = family == Family::Rdf || family == Family::LinearSvm;
  c.nn = family == Family::Cnn ? NnConfig::cnn() : NnConfig::mlp();
  return c;
}

TrainedClassifier train_classifier(const TrainerConfig& config, const Dataset& data) {
  if (data.size() == 0) throw Error(ErrorKind::EmptyInput, "no training pixels");
  TrainedClassifier clf;
  clf.family = config.family;
  clf.seed = config.seed;
  const ClassWeights weights =
      config.balanced ? compute_balanced_weights(data.labels) : uniform_weights(data.labels);
  switch (config.family) {
    case Family::Rdf: {
      ForestParams p = config.forest;
      p.seed = config.seed;
      clf.model = train_rdf(data, p, weights);
      break;
    }
    case Family::LinearSvm: {
      SvmParams p = config.svm;
      p.seed = config.seed;
      clf.model = train_linear_svm(data, weights, p);
      break;
    }
    case Family::Gnb:
      clf.model = train_gnb(data);
      break;
    case Family::Ann:
    case Family::Cnn: {
      NnConfig arch = config.nn;
      arch.arch = config.family == Family::Cnn ? Architecture::Cnn : Architecture::Mlp;
      NnTrainConfig t = config.nn_train;
      t.seed = config.seed;
      t.class_weighted = config.balanced;
      auto result = train_nn(arch, data, t);
      clf.model = std::move(result.model);
      clf.loss_curve = std::move(result.loss_curve);
      break;
    }
  }
  return clf;
}

void check_band_order(const TrainedClassifier& clf, std::span<const std::string> band_order) {
  if (!std::equal(clf.band_order.begin(), clf.band_order.end(), band_order.begin(), band_order.end()))
    throw Error(ErrorKind::BandOrder, "model band order does not match the data");
}

Prediction predict(const TrainedClassifier& clf, const RadianceVector& x) {
  return std::visit(
      [&](const auto& m) -> Prediction {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ForestModel>) return predict_rdf(m, x);
        else if constexpr (std::is_same_v<T, LinearSvmModel>) return predict_linear_svm(m, x);
        else if constexpr (std::is_same_v<T, GnbModel>) return predict_gnb(m, x);
        else return predict_nn(m, x);
      },
      clf.model);
}

std::vector<Prediction> predict_all(const TrainedClassifier& clf, const Eigen::MatrixXd& features) {
  if (features.cols() != kBandCount)
    throw Error(ErrorKind::Schema, "expected " + std::to_string(kBandCount) + " feature columns");
  const auto n = static_cast<std::size_t>(features.rows());
  std::vector<Prediction> out(n);
  if (const auto* nn = std::get_if<NnModel>(&clf.model)) {
    constexpr Eigen::Index kChunk = 4096;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t c) {
      const Eigen::Index start = static_cast<Eigen::Index>(c) * kChunk;
      const Eigen::Index rows = std::min<Eigen::Index>(kChunk, features.rows() - start);
      const Eigen::MatrixXd probs = softmax_rows(forward_logits(*nn, features.middleRows(start, rows), Mode::Eval));
      for (Eigen::Index i = 0; i < rows; ++i) {
        Prediction& p = out[static_cast<std::size_t>(start + i)];
        p.scores = probs.row(i).transpose();
        p.label = class5_at(argmax_prefer_storm(p.scores));
      }
    });
    return out;
  }
  parallel_for(n, [&](std::size_t i) {
    out[i] = predict(clf, features.row(static_cast<Eigen::Index>(i)).transpose());
  });
  return out;
}

std::vector<CloudClass5> predict_labels(const TrainedClassifier& clf, const Eigen::MatrixXd& features) {
  const auto preds = predict_all(clf, features);
  std::vector<CloudClass5> labels(preds.size());
  std::transform(preds.begin(), preds.end(), labels.begin(), [](const Prediction& p) { return p.label; });
  return labels;
}

}  // namespace stormclass
