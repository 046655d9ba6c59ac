#ifndef STORMCLASS_EVALUATION_HPP
#define STORMCLASS_EVALUATION_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stormclass/classifier.hpp"
#include "stormclass/core.hpp"

namespace stormclass {

struct SplitPlan {
  Region region = Region::Tropical;
  std::vector<int> train_image_ids;
  std::vector<int> test_image_ids;

  /// Tropical: images 1-10 train, 11-13 test. Non-tropical: cutouts 1-20 / 21-29.
  static SplitPlan standard(Region region);
  /// The noise experiment trains on the first eight images and tests on the rest.
  static SplitPlan noise(Region region);
  /// First `train` ids of 1..images for training, the remainder for testing.
  static SplitPlan first_n(Region region, int images, int train);
};

struct Split {
  std::vector<PixelRecord> train;
  std::vector<PixelRecord> test;
  std::vector<std::string> warnings;
};

/// Partitions pixels by image id. Throws InvalidPlan when the id lists overlap or name
/// an image that is not present. Pixels of unlisted images are dropped.
Split make_split(std::span<const SceneGrid> scenes, const SplitPlan& plan);
Split make_split(std::span<const PixelRecord> pixels, const SplitPlan& plan);

struct EvalReport {
  ConfusionMatrix cm5;
  ConfusionMatrix cm3;
  ConfusionMatrix cm2;
  std::vector<std::optional<double>> recall5;
  std::vector<std::optional<double>> recall3;
  std::vector<std::optional<double>> recall2;
  std::optional<double> accuracy5;
  std::optional<double> accuracy3;
  std::optional<double> accuracy2;
  std::optional<double> nonstorm_recall;
  std::optional<double> storm_recall;
  std::map<std::string, std::string> metadata;  // model hash, dataset hash, noise spec, ...

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport evaluate_predictions(std::span<const CloudClass5> truth, std::span<const CloudClass5> predicted);
/// Throws MissingLabel if any test pixel is unlabeled.
EvalReport evaluate(const TrainedClassifier& clf, std::span<const PixelRecord> test);

/// Fits on the training view and returns predicted labels for the held-out features.
using FitPredict = std::function<std::vector<CloudClass5>(const Dataset& train, const Eigen::MatrixXd& held_out)>;

struct CrossValResult {
  std::vector<std::vector<int>> folds;  // held-out image ids per fold
  std::vector<EvalReport> reports;
  std::vector<std::optional<double>> mean_recall5;
  std::vector<std::optional<double>> sd_recall5;
  std::vector<std::optional<double>> mean_recall2;
  std::vector<std::optional<double>> sd_recall2;
  double mean_accuracy5 = 0.0;
  double mean_accuracy3 = 0.0;
};

/// Seeded shuffle of the distinct image ids dealt round-robin into folds.
/// Throws InfeasibleFolds when there are fewer images than folds.
std::vector<std::vector<int>> assign_folds(std::vector<int> image_ids, int folds, std::uint64_t seed);

/// Image-level k-fold cross-validation.
CrossValResult cross_validate(const FitPredict& fit_predict, std::span<const PixelRecord> pixels, int folds,
                              std::uint64_t seed);
CrossValResult cross_validate(const TrainerConfig& trainer, std::span<const PixelRecord> pixels, int folds,
                              std::uint64_t seed);

}  // namespace stormclass

#endif  // STORMCLASS_EVALUATION_HPP
