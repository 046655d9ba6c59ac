#include <doctest.h>

#include <set>

#include "stormclass/evaluation.hpp"
#include "stormclass/noise.hpp"
#include "stormclass/scenegen.hpp"
#include "stormclass/targeting.hpp"

using namespace stormclass;

namespace {

std::vector<PixelRecord> tiny_images(int images, int per_image = 20) {
  std::vector<PixelRecord> px;
  for (int id = 1; id <= images; ++id)
    for (int i = 0; i < per_image; ++i) {
      PixelRecord p;
      p.image_id = id;
      p.row = i / 5;
      p.col = i % 5;
      const int c = (i + id) % kClassCount;
      p.label = class5_at(c);
      p.radiance = RadianceVector::Constant(260.0 - 15.0 * c);
      px.push_back(p);
    }
  return px;
}

}  // namespace

TEST_CASE("evaluate_predictions tallies and collapses") {
  using C = CloudClass5;
  const std::vector<C> truth = {C::ClearSky, C::Cirrus, C::RainyAnvil, C::ConvectionCore, C::ConvectionCore, C::ThinCirrus};
  const std::vector<C> pred = {C::ClearSky, C::ThinCirrus, C::ConvectionCore, C::ConvectionCore, C::ClearSky, C::ThinCirrus};
  const auto r = evaluate_predictions(truth, pred);
  CHECK(r.cm5.counts(2, 1) == 1);
  CHECK(r.cm5.total() == 6);
  CHECK(*r.accuracy5 == doctest::Approx(3.0 / 6));
  CHECK(*r.accuracy3 == doctest::Approx(4.0 / 6));  // cirrus->thin cirrus is correct at 3 classes
  CHECK(*r.accuracy2 == doctest::Approx(5.0 / 6));  // anvil->core is correct at 2 classes
  CHECK(*r.nonstorm_recall == doctest::Approx(1.0));
  CHECK(*r.storm_recall == doctest::Approx(2.0 / 3));
  CHECK_FALSE(evaluate_predictions(std::vector<C>{C::ClearSky}, std::vector<C>{C::ClearSky}).storm_recall.has_value());
}

TEST_CASE("standard split plans") {
  const auto t = SplitPlan::standard(Region::Tropical);
  CHECK(t.train_image_ids.size() == 10);
  CHECK(t.test_image_ids.front() == 11);
  const auto n = SplitPlan::standard(Region::NonTropical);
  CHECK(n.train_image_ids.size() == 20);
  CHECK(n.test_image_ids.size() == 9);
  CHECK(SplitPlan::noise(Region::Tropical).train_image_ids.size() == 8);
}

TEST_CASE("make_split partitions by image and rejects bad plans") {
  const auto px = tiny_images(4);
  const auto s = make_split(px, SplitPlan::first_n(Region::Tropical, 4, 3));
  CHECK(s.train.size() == 60);
  CHECK(s.test.size() == 20);
  for (const auto& p : s.test) CHECK(p.image_id == 4);

  SplitPlan overlap{Region::Tropical, {1, 2}, {2, 3}};
  CHECK_THROWS_AS(make_split(px, overlap), Error);
  SplitPlan missing{Region::Tropical, {1, 9}, {2}};
  CHECK_THROWS_AS(make_split(px, missing), Error);
  const auto empty_test = make_split(px, SplitPlan{Region::Tropical, {1, 2, 3, 4}, {}});
  CHECK(empty_test.test.empty());
  CHECK_FALSE(empty_test.warnings.empty());
}

TEST_CASE("folds cover every image exactly once") {
  const auto folds = assign_folds({5, 3, 1, 2, 4, 3, 6, 7}, 3, 11);
  CHECK(folds.size() == 3);
  std::set<int> seen;
  for (const auto& f : folds) {
    CHECK((f.size() == 2 || f.size() == 3));
    for (int id : f) CHECK(seen.insert(id).second);
  }
  CHECK(seen.size() == 7);
  CHECK(folds == assign_folds({1, 2, 3, 4, 5, 6, 7}, 3, 11));
  CHECK_THROWS_AS(assign_folds({1, 2}, 3, 1), Error);
}

TEST_CASE("cross-validation holds out whole images") {
  const auto px = tiny_images(6);
  std::set<int> held_sizes;
  FitPredict fp = [&](const Dataset& train, const Eigen::MatrixXd& held) {
    held_sizes.insert(static_cast<int>(train.size() + held.rows()));
    return std::vector<CloudClass5>(static_cast<std::size_t>(held.rows()), CloudClass5::ClearSky);
  };
  const auto r = cross_validate(fp, px, 3, 2);
  CHECK(r.folds.size() == 3);
  CHECK(r.reports.size() == 3);
  CHECK(held_sizes == std::set<int>{120});
  CHECK(r.mean_accuracy5 == doctest::Approx(0.2));
  CHECK(r.mean_recall5.size() == kClassCount);
}

TEST_CASE("noise has the configured standard deviation and zero sigma is the identity") {
  std::vector<PixelRecord> px;
  for (int i = 0; i < 20000; ++i) {
    PixelRecord p;
    p.image_id = 1 + i / 10000;
    p.row = (i % 10000) / 100;
    p.col = i % 100;
    p.radiance = RadianceVector::Constant(250.0);
    px.push_back(p);
  }
  const auto spec = NoiseSpec::instrument_default(3);
  const auto noisy = apply_noise(px, spec);
  for (BandId b : all_bands()) {
    const int k = static_cast<int>(b);
    double s = 0, ss = 0;
    for (const auto& p : noisy) s += p.radiance[k] - 250.0, ss += (p.radiance[k] - 250.0) * (p.radiance[k] - 250.0);
    const double sd = std::sqrt(ss / px.size() - (s / px.size()) * (s / px.size()));
    CHECK(std::abs(sd / spec.sigma[k] - 1.0) < 0.02);
  }
  const auto clean = apply_noise(px, NoiseSpec::zero(3));
  for (std::size_t i = 0; i < px.size(); ++i) CHECK_FALSE(clean[i].radiance != px[i].radiance);

  // Keyed by pixel identity: order of the input does not matter.
  std::vector<PixelRecord> reversed(px.rbegin(), px.rend());
  const auto noisy_rev = apply_noise(reversed, spec);
  CHECK(noisy_rev.back().radiance == noisy.front().radiance);

  NoiseSpec bad = spec;
  bad.sigma[0] = -1;
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("random targeting spends exactly the budget without repeats") {
  std::vector<CloudClass5> truth(1000, CloudClass5::ClearSky);
  for (int i = 0; i < 50; ++i) truth[static_cast<std::size_t>(i * 20)] = CloudClass5::ConvectionCore;
  TargetingPolicy p;
  p.kind = PolicyKind::Random;
  p.seed = 4;
  const auto r = simulate_targeting(truth, truth, p);
  CHECK(r.budget == 200);
  CHECK(r.sampled == 200);
  CHECK(std::set<std::size_t>(r.selected.begin(), r.selected.end()).size() == 200);
}

TEST_CASE("priority targeting with a perfect predictor fills the budget with storms first") {
  std::vector<CloudClass5> truth(1000, CloudClass5::ClearSky);
  for (int i = 0; i < 50; ++i) truth[static_cast<std::size_t>(i * 20)] = CloudClass5::ConvectionCore;
  for (int i = 0; i < 100; ++i) truth[static_cast<std::size_t>(i * 10 + 5)] = CloudClass5::RainyAnvil;
  TargetingPolicy p;
  const auto r = simulate_targeting(truth, truth, p);
  CHECK(r.sampled == 150);  // leftover budget is left unspent
  CHECK(r.sampled_counts[4] == 50);
  CHECK(*r.yield_factor[4] == doctest::Approx((50.0 / 150) / 0.05));
  CHECK(r.selected.front() == 0);  // cores first, in stream order

  p.budget_fraction = 0.0;
  CHECK_THROWS_AS(validate(p), Error);
  CHECK_THROWS_AS(simulate_targeting(std::vector<CloudClass5>{}, std::vector<CloudClass5>{}, TargetingPolicy{}), Error);
}

TEST_CASE("conditional mix rows sum to one") {
  using C = CloudClass5;
  const std::vector<C> truth = {C::ClearSky, C::RainyAnvil, C::ConvectionCore, C::RainyAnvil};
  const std::vector<C> pred = {C::RainyAnvil, C::RainyAnvil, C::ConvectionCore, C::ConvectionCore};
  const auto m = conditional_mix(truth, pred);
  CHECK_FALSE(m[0].has_value());
  CHECK((*m[3])[0] == doctest::Approx(0.5));
  CHECK((*m[4])[4] == doctest::Approx(0.5));
}

TEST_CASE("scenegen is deterministic and hits the target mix") {
  SceneGenConfig cfg = default_scenegen_config(Region::Tropical);
  cfg.images = 2;
  cfg.seed = 3;
  const auto a = generate_scenes(cfg);
  const auto b = generate_scenes(cfg);
  CHECK(a[1].pixels.back().radiance == b[1].pixels.back().radiance);
  CHECK(a[0].pixels.size() == static_cast<std::size_t>(cfg.height * cfg.width));
  cfg.target_mix = std::array<double, kClassCount>{0.9, 0.025, 0.025, 0.025, 0.025};
  CHECK_THROWS_AS(validate(cfg), Error);
}

TEST_CASE("random targeting yield tends to 1") {
  std::vector<CloudClass5> truth(100000);
  Rng rng(8);
  std::discrete_distribution<int> mix({0.5, 0.2, 0.1, 0.15, 0.05});
  for (auto& t : truth) t = class5_at(mix(rng));
  TargetingPolicy p;
  p.kind = PolicyKind::Random;
  p.seed = 1;
  const auto r = simulate_targeting(truth, truth, p);
  for (int c = 0; c < kClassCount; ++c) CHECK(std::abs(*r.yield_factor[static_cast<std::size_t>(c)] - 1.0) < 0.05);
  double total = 0;
  for (double f : r.sampled_fraction) total += f;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a constant NonStorm predictor selects nothing under priority targeting") {
  std::vector<CloudClass5> truth(100, CloudClass5::ConvectionCore);
  std::vector<CloudClass5> pred(100, CloudClass5::ClearSky);
  const auto r = simulate_targeting(truth, pred, TargetingPolicy{});
  CHECK(r.sampled == 0);
}

TEST_CASE("no anvil is taken while a predicted core remains, and the oracle dominates") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::discrete_distribution<int> mix({0.5, 0.15, 0.1, 0.17, 0.08});
    std::uniform_real_distribution<double> u;
    std::vector<CloudClass5> truth(5000), pred(5000);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      truth[i] = class5_at(mix(rng));
      pred[i] = u(rng) < 0.7 ? truth[i] : class5_at(mix(rng));
    }
    const TargetingPolicy p;
    const auto actual = simulate_targeting(truth, pred, p);
    const auto oracle = simulate_targeting(truth, truth, p);
    CHECK(oracle.sampled_fraction[4] >= actual.sampled_fraction[4]);
    std::size_t cores = std::count(pred.begin(), pred.end(), CloudClass5::ConvectionCore);
    bool anvil_seen = false, core_after_anvil = false;
    for (auto i : actual.selected) {
      if (pred[i] == CloudClass5::RainyAnvil) anvil_seen = true;
      if (pred[i] == CloudClass5::ConvectionCore && anvil_seen) core_after_anvil = true;
    }
    CHECK_FALSE(core_after_anvil);
    CHECK(actual.sampled_counts[0] + actual.sampled_counts[1] + actual.sampled_counts[2] + actual.sampled_counts[3] +
              actual.sampled_counts[4] ==
          actual.sampled);
    CHECK(std::min<std::size_t>(cores, actual.budget) <= actual.sampled);
  }
}
