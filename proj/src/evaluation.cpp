#include "stormclass/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "stormclass/rng.hpp"

namespace stormclass {

namespace {

std::vector<int> iota_ids(int first, int last) {
  std::vector<int> ids;
  for (int i = first; i <= last; ++i) ids.push_back(i);
  return ids;
}

std::optional<double> storm_class_recall(const ConfusionMatrix& cm2, CloudClass2 c) {
  return cm2.recall(static_cast<int>(c));
}

// Mean and population sd over folds where the value is defined.
std::pair<std::optional<double>, std::optional<double>> summarize(const std::vector<std::optional<double>>& xs) {
  std::vector<double> v;
  for (const auto& x : xs)
    if (x) v.push_back(*x);
  if (v.empty()) return {};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

SplitPlan SplitPlan::standard(Region region) {
  return region == Region::Tropical ? first_n(region, 13, 10) : first_n(region, 29, 20);
}

SplitPlan SplitPlan::noise(Region region) {
  return region == Region::Tropical ? first_n(region, 13, 8) : first_n(region, 29, 8);
}

SplitPlan SplitPlan::first_n(Region region, int images, int train) {
  SplitPlan p;
  p.region = region;
  p.train_image_ids = iota_ids(1, train);
  p.test_image_ids = iota_ids(train + 1, images);
  return p;
}

Split make_split(std::span<const PixelRecord> pixels, const SplitPlan& plan) {
  const std::set<int> train(plan.train_image_ids.begin(), plan.train_image_ids.end());
  const std::set<int> test(plan.test_image_ids.begin(), plan.test_image_ids.end());
  for (int id : train)
    if (test.count(id)) throw Error(ErrorKind::InvalidPlan, "image " + std::to_string(id) + " is in both train and test");
  if (train.empty()) throw Error(ErrorKind::InvalidPlan, "split plan has no training images");
  std::set<int> present;
  for (const auto& p : pixels) present.insert(p.image_id);
  for (const auto* ids : {&train, &test})
    for (int id : *ids)
      if (!present.count(id)) throw Error(ErrorKind::InvalidPlan, "image " + std::to_string(id) + " does not exist");

  Split s;
  for (const auto& p : pixels) {
    if (train.count(p.image_id)) s.train.push_back(p);
    else if (test.count(p.image_id)) s.test.push_back(p);
  }
  if (s.test.empty()) s.warnings.push_back("test set is empty: every image is assigned to training");
  return s;
}

Split make_split(std::span<const SceneGrid> scenes, const SplitPlan& plan) {
  const auto pixels = flatten(scenes);
  return make_split(std::span<const PixelRecord>(pixels), plan);
}

EvalReport evaluate_predictions(std::span<const CloudClass5> truth, std::span<const CloudClass5> predicted) {
  if (truth.size() != predicted.size()) throw Error(ErrorKind::Schema, "truth and prediction counts differ");
  EvalReport r;
  r.cm5 = ConfusionMatrix(class5_names());
  for (std::size_t i = 0; i < truth.size(); ++i) r.cm5.add(index_of(truth[i]), index_of(predicted[i]));
  r.cm3 = collapse_matrix(r.cm5, ClassMapping::five_to_three());
  r.cm2 = collapse_matrix(r.cm3, ClassMapping::three_to_two());
  r.recall5 = r.cm5.recalls();
  r.recall3 = r.cm3.recalls();
  r.recall2 = r.cm2.recalls();
  r.accuracy5 = r.cm5.accuracy();
  r.accuracy3 = r.cm3.accuracy();
  r.accuracy2 = r.cm2.accuracy();
  r.nonstorm_recall = storm_class_recall(r.cm2, CloudClass2::NonStorm);
  r.storm_recall = storm_class_recall(r.cm2, CloudClass2::Storm);
  return r;
}

EvalReport evaluate(const TrainedClassifier& clf, std::span<const PixelRecord> test) {
  const Dataset d = to_dataset(test);
  const auto predicted = predict_labels(clf, d.features);
  EvalReport r = evaluate_predictions(d.labels, predicted);
  r.metadata["family"] = std::string(family_name(clf.family));
  r.metadata["pixels"] = std::to_string(d.size());
  return r;
}

std::vector<std::vector<int>> assign_folds(std::vector<int> image_ids, int folds, std::uint64_t seed) {
  std::sort(image_ids.begin(), image_ids.end());
  image_ids.erase(std::unique(image_ids.begin(), image_ids.end()), image_ids.end());
  if (folds < 2 || static_cast<int>(image_ids.size()) < folds)
    throw Error(ErrorKind::InfeasibleFolds, std::to_string(image_ids.size()) + " images cannot form " +
                                                std::to_string(folds) + " folds");
  Rng rng(seed);
  std::shuffle(image_ids.begin(), image_ids.end(), rng);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < image_ids.size(); ++i) out[i % out.size()].push_back(image_ids[i]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

CrossValResult cross_validate(const FitPredict& fit_predict, std::span<const PixelRecord> pixels, int folds,
                              std::uint64_t seed) {
  std::vector<int> ids;
  for (const auto& p : pixels) ids.push_back(p.image_id);
  CrossValResult result;
  result.folds = assign_folds(std::move(ids), folds, seed);
  for (const auto& held : result.folds) {
    const std::set<int> held_set(held.begin(), held.end());
    std::vector<PixelRecord> train;
    std::vector<PixelRecord> test;
    for (const auto& p : pixels) (held_set.count(p.image_id) ? test : train).push_back(p);
    const Dataset tr = to_dataset(train);
    const Dataset te = to_dataset(test);
    const auto predicted = fit_predict(tr, te.features);
    result.reports.push_back(evaluate_predictions(te.labels, predicted));
  }
  for (int c = 0; c < kClassCount; ++c) {
    std::vector<std::optional<double>> xs;
    for (const auto& r : result.reports) xs.push_back(r.recall5[static_cast<std::size_t>(c)]);
    const auto [m, s] = summarize(xs);
    result.mean_recall5.push_back(m);
    result.sd_recall5.push_back(s);
  }
  for (int c = 0; c < 2; ++c) {
    std::vector<std::optional<double>> xs;
    for (const auto& r : result.reports) xs.push_back(r.recall2[static_cast<std::size_t>(c)]);
    const auto [m, s] = summarize(xs);
    result.mean_recall2.push_back(m);
    result.sd_recall2.push_back(s);
  }
  for (const auto& r : result.reports) {
    result.mean_accuracy5 += r.accuracy5.value_or(0.0);
    result.mean_accuracy3 += r.accuracy3.value_or(0.0);
  }
  result.mean_accuracy5 /= static_cast<double>(result.reports.size());
  result.mean_accuracy3 /= static_cast<double>(result.reports.size());
  return result;
}

CrossValResult cross_validate(const TrainerConfig& trainer, std::span<const PixelRecord> pixels, int folds,
                              std::uint64_t seed) {
  return cross_validate(
      [&](const Dataset& train, const Eigen::MatrixXd& held_out) {
        return predict_labels(train_classifier(trainer, train), held_out);
      },
      pixels, folds, seed);
}

}  // namespace stormclass
