#ifndef STORMCLASS_CLASSIFIER_HPP
#define STORMCLASS_CLASSIFIER_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stormclass/class_weights.hpp"
#include "stormclass/core.hpp"
#include "stormclass/forest.hpp"
#include "stormclass/linear_svm.hpp"
#include "stormclass/naive_bayes.hpp"
#include "stormclass/nn.hpp"

namespace stormclass {

enum class Family : std::uint8_t { Rdf, LinearSvm, Gnb, Ann, Cnn };

const std::array<Family, 5>& all_families();
std::string_view family_name(Family f);  // "rdf", "linear_svm", "gnb", "ann", "cnn"
Family parse_family(std::string_view name);

/// Everything needed to train one model family. `balanced` applies inverse-frequency
/// class weights to the RDF, the SVM and (when set) the networks; GNB ignores it.
struct TrainerConfig {
  Family family = Family::Rdf;
  bool balanced = true;
  ForestParams forest;
  SvmParams svm;
  NnConfig nn;  // arch is overridden by the family
  NnTrainConfig nn_train;
  std::uint64_t seed = 0;

  static TrainerConfig defaults(Family family, std::uint64_t seed);
};

using ModelVariant = std::variant<ForestModel, LinearSvmModel, GnbModel, NnModel>;

struct TrainedClassifier {
  Family family = Family::Rdf;
  std::uint64_t seed = 0;
  std::vector<std::string> band_order = canonical_band_order();
  std::vector<std::string> classes = class5_names();
  ModelVariant model;
  std::vector<double> loss_curve;  // networks only
};

TrainedClassifier train_classifier(const TrainerConfig& config, const Dataset& data);

/// Throws BandOrder unless the model was trained on `band_order`.
void check_band_order(const TrainedClassifier& clf, std::span<const std::string> band_order);

Prediction predict(const TrainedClassifier& clf, const RadianceVector& x);
/// Row-wise prediction; networks are evaluated in batches.
std::vector<Prediction> predict_all(const TrainedClassifier& clf, const Eigen::MatrixXd& features);
std::vector<CloudClass5> predict_labels(const TrainedClassifier& clf, const Eigen::MatrixXd& features);

}  // namespace stormclass

#endif  // STORMCLASS_CLASSIFIER_HPP
