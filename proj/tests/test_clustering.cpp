#include <doctest.h>

#include "stormclass/autolabel.hpp"
#include "stormclass/clustering.hpp"
#include "stormclass/scenegen.hpp"
#include "support/oracles.hpp"

using namespace stormclass;

TEST_CASE("silhouette matches the hand computation on the six-point fixture") {
  const auto pts = oracle::silhouette_points();
  const auto a = oracle::silhouette_assignment();
  CHECK(std::abs(silhouette_score(pts, a, 100, 1) - oracle::silhouette_by_hand()) < 1e-9);
}

TEST_CASE("silhouette needs two clusters") {
  const auto pts = oracle::silhouette_points();
  std::vector<int> one(pts.size(), 0);
  CHECK_THROWS_AS(silhouette_score(pts, one, 100, 1), Error);
}

TEST_CASE("k-means k=2 finds the exhaustive optimum") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::normal_distribution<double> n;
    std::vector<ScienceVector> pts;
    for (int i = 0; i < 6; ++i) pts.push_back({n(rng), n(rng), n(rng)});
    const auto best = oracle::exhaustive_two_means(pts);
    const auto model = fit_kmeans(pts, 2, seed);
    CHECK(model.inertia == doctest::Approx(best.inertia).epsilon(1e-9));
    CHECK(oracle::normalized(assign_all(model, pts)) == best.assignment);
  }
}

TEST_CASE("k-means is deterministic per seed and inertia never increases") {
  std::vector<ScienceVector> pts;
  Rng rng(3);
  std::uniform_real_distribution<double> u(0, 10);
  for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  const auto a = fit_kmeans(pts, 4, 9);
  const auto b = fit_kmeans(pts, 4, 9);
  CHECK(a.centroids == b.centroids);
  for (std::size_t i = 1; i < a.inertia_trace.size(); ++i) CHECK(a.inertia_trace[i] <= a.inertia_trace[i - 1] + 1e-9);
}

TEST_CASE("k-means rejects k above the number of distinct points") {
  std::vector<ScienceVector> pts(4, ScienceVector{1, 1, 1});
  CHECK_THROWS_AS(fit_kmeans(pts, 2, 1), Error);
}

TEST_CASE("label map sends the zero cluster to ClearSky and orders the rest by iwp") {
  std::vector<ScienceVector> pts;
  Rng rng(4);
  std::normal_distribution<double> jitter(0, 0.01);
  const double iwp[4] = {0.05, 0.3, 1.0, 3.0};
  const double cth[4] = {13000, 10000, 7000, 4000};
  for (int i = 0; i < 40; ++i) pts.push_back({0, 0, 0});
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 40; ++i)
      pts.push_back({iwp[c] * (1 + jitter(rng)), 50.0 * (c + 1) * (1 + jitter(rng)), cth[c] * (1 + jitter(rng))});
  const auto model = fit_kmeans(pts, 5, 2);
  const auto map = derive_label_map(model, pts);
  const auto clusters = assign_all(model, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int expected = static_cast<int>(i / 40);
    CHECK(index_of(map[clusters[i]]) == expected);
  }
  CHECK(map.warnings.empty());
}

TEST_CASE("label map on scenegen recovers the planted classes") {
  SceneGenConfig cfg = default_scenegen_config(Region::Tropical);
  cfg.images = 1;  // full-size image: small crops can lack clear sky entirely
  cfg.target_mix.reset();
  cfg.seed = 5;
  const auto pixels = flatten(generate_scenes(cfg));
  std::vector<ScienceVector> sci;
  for (const auto& p : pixels) sci.push_back(*p.science);
  const auto model = fit_kmeans(sci, 5, 1);
  const auto labeled = label_pixels(model, derive_label_map(model, sci), pixels);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < pixels.size(); ++i) agree += (*pixels[i].label == *labeled[i].label);
  CHECK(static_cast<double>(agree) / static_cast<double>(pixels.size()) > 0.95);
}

TEST_CASE("label_pixels names pixels without science") {
  std::vector<ScienceVector> pts = oracle::silhouette_points();
  const auto model = fit_kmeans(pts, 2, 1);
  const auto map = derive_label_map(model, pts);
  std::vector<PixelRecord> px(2);
  px[0].science = pts[0];
  CHECK_THROWS_AS(label_pixels(model, map, px), Error);
}
