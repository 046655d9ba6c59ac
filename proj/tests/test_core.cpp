#include <doctest.h>

#include "stormclass/class_weights.hpp"
#include "stormclass/core.hpp"
#include "stormclass/rng.hpp"

using namespace stormclass;

TEST_CASE("collapse maps 5 -> 3 -> 2") {
  CHECK(collapse5to3(CloudClass5::ClearSky) == CloudClass3::NonStorm);
  CHECK(collapse5to3(CloudClass5::ThinCirrus) == CloudClass3::NonStorm);
  CHECK(collapse5to3(CloudClass5::Cirrus) == CloudClass3::NonStorm);
  CHECK(collapse5to3(CloudClass5::RainyAnvil) == CloudClass3::RainyAnvil);
  CHECK(collapse5to3(CloudClass5::ConvectionCore) == CloudClass3::ConvectionCore);
  CHECK(collapse3to2(CloudClass3::NonStorm) == CloudClass2::NonStorm);
  CHECK(collapse3to2(CloudClass3::RainyAnvil) == CloudClass2::Storm);
  CHECK(collapse3to2(CloudClass3::ConvectionCore) == CloudClass2::Storm);
}

TEST_CASE("confusion matrix collapse sums preimage blocks") {
  ConfusionMatrix cm(class5_names());
  int v = 1;
  for (int i = 0; i < kClassCount; ++i)
    for (int j = 0; j < kClassCount; ++j) cm.add(i, j, v++);
  const auto c3 = collapse_matrix(cm, ClassMapping::five_to_three());
  const auto c2 = collapse_matrix(cm, ClassMapping::five_to_two());
  CHECK(c3.total() == cm.total());
  // NonStorm x NonStorm = top-left 3x3 block.
  std::int64_t block = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) block += cm.counts(i, j);
  CHECK(c3.counts(0, 0) == block);
  CHECK(c3.counts(2, 1) == cm.counts(4, 3));
  CHECK(c2 == collapse_matrix(c3, ClassMapping::three_to_two()));
  CHECK(c2.counts(1, 1) == cm.counts(3, 3) + cm.counts(3, 4) + cm.counts(4, 3) + cm.counts(4, 4));
}

TEST_CASE("collapse rejects an uncovered class") {
  ConfusionMatrix cm(class5_names());
  ClassMapping bad = ClassMapping::five_to_three();
  bad.assign.erase("Cirrus");
  CHECK_THROWS_AS(collapse_matrix(cm, bad), Error);
}

TEST_CASE("recall is empty for classes with no true members") {
  ConfusionMatrix cm(class2_names());
  cm.add(0, 0, 3);
  cm.add(0, 1, 1);
  CHECK(*cm.recall(0) == doctest::Approx(0.75));
  CHECK_FALSE(cm.recall(1).has_value());
  CHECK(*cm.accuracy() == doctest::Approx(0.75));
}

TEST_CASE("balanced weights are N / (K * N_c) over present classes") {
  std::vector<CloudClass5> labels;
  for (int i = 0; i < 6; ++i) labels.push_back(CloudClass5::ClearSky);
  for (int i = 0; i < 3; ++i) labels.push_back(CloudClass5::RainyAnvil);
  labels.push_back(CloudClass5::ConvectionCore);
  const auto w = compute_balanced_weights(labels);
  CHECK(w.present_count() == 3);
  CHECK(w[CloudClass5::ClearSky] == doctest::Approx(10.0 / (3 * 6)));
  CHECK(w[CloudClass5::RainyAnvil] == doctest::Approx(10.0 / (3 * 3)));
  CHECK(w[CloudClass5::ConvectionCore] == doctest::Approx(10.0 / 3));
  CHECK_FALSE(w.present(CloudClass5::Cirrus));
  // Weighted mass is equal across present classes.
  CHECK(6 * w[CloudClass5::ClearSky] == doctest::Approx(1 * w[CloudClass5::ConvectionCore]));
}

TEST_CASE("derived seeds are stable and distinct") {
  static_assert(derive_seed(1, "train") == derive_seed(1, "train"));
  CHECK(derive_seed(1, "train") != derive_seed(1, "cluster"));
  CHECK(derive_seed(1, "train") != derive_seed(2, "train"));
  CHECK(derive_seed(5, {1, 2}) != derive_seed(5, {2, 1}));
}

TEST_CASE("argmax ties go to the stronger class") {
  Eigen::Matrix<double, kClassCount, 1> s;
  s << 1, 0, 0, 1, 1;
  CHECK(argmax_prefer_storm(s) == 4);
}

TEST_CASE("band and class names") {
  CHECK(canonical_band_order().size() == kBandCount);
  CHECK(parse_class5("RainyAnvil") == CloudClass5::RainyAnvil);
  CHECK_FALSE(parse_class5("Hail").has_value());
  CHECK(parse_region(region_name(Region::NonTropical)) == Region::NonTropical);
}
