#include <doctest.h>

#include <sstream>

#include "stormclass/io.hpp"
#include "stormclass/json_io.hpp"
#include "stormclass/pipeline.hpp"

using namespace stormclass;
namespace fs = std::filesystem;

namespace {

std::vector<PixelRecord> random_pixels(std::uint64_t seed, int n) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(150, 300);
  std::vector<PixelRecord> px;
  for (int i = 0; i < n; ++i) {
    PixelRecord p;
    p.image_id = 1 + i / 7;
    p.row = i % 7;
    p.col = i;
    for (int b = 0; b < kBandCount; ++b) p.radiance[b] = u(rng);
    if (i % 3) p.science = ScienceVector{u(rng) / 100, u(rng), u(rng) * 40};
    if (i % 3) p.label = class5_at(i % kClassCount);
    px.push_back(p);
  }
  return px;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stormclass_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("pixel CSV round-trip is lossless") {
  const auto px = random_pixels(1, 50);
  std::stringstream ss;
  write_pixels(ss, px);
  const auto back = read_pixels(ss);
  REQUIRE(back.size() == px.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    CHECK(back[i].radiance == px[i].radiance);
    CHECK(back[i].label == px[i].label);
    CHECK(back[i].science.has_value() == px[i].science.has_value());
    if (px[i].science) CHECK(back[i].science->particle_size == px[i].science->particle_size);
  }
}

TEST_CASE("header-only CSV is an empty dataset") {
  std::stringstream ss(std::string(pixel_csv_header()) + "\n");
  CHECK(read_pixels(ss).empty());
}

TEST_CASE("CSV errors carry kinds and line numbers") {
  std::stringstream bad_header("image_id,row\n");
  try {
    read_pixels(bad_header);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
  }
  std::stringstream ss;
  write_pixels(ss, random_pixels(2, 3));
  std::string text = ss.str() + "1,2,3,oops\n";
  std::stringstream bad_row(text);
  try {
    read_pixels(bad_row);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 273.15, -1e-300, 6.02214076e23}) CHECK(parse_double(format_double(v)) == v);
}

TEST_CASE("sha256 of a known string") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("trained models survive a JSON round-trip") {
  std::vector<PixelRecord> px = random_pixels(3, 200);
  std::erase_if(px, [](const PixelRecord& p) { return !p.label; });
  const Dataset d = to_dataset(px);
  for (Family f : all_families()) {
    auto cfg = TrainerConfig::defaults(f, 2);
    cfg.forest.n_trees = 2;
    cfg.nn_train.epochs = 1;
    const auto clf = train_classifier(cfg, d);
    const auto back = classifier_from_json(parse_json_text(dump(to_json(clf)), "model"));
    CHECK(dump(to_json(back)) == dump(to_json(clf)));
    for (int i = 0; i < 5; ++i) {
      const RadianceVector x = d.features.row(i).transpose();
      CHECK(predict(back, x).scores == predict(clf, x).scores);
    }
  }
}

TEST_CASE("model JSON with an unknown field names it") {
  auto cfg = TrainerConfig::defaults(Family::Gnb, 1);
  std::vector<PixelRecord> px = random_pixels(4, 100);
  std::erase_if(px, [](const PixelRecord& p) { return !p.label; });
  json j = to_json(train_classifier(cfg, to_dataset(px)));
  j["parameters"]["extra"] = 1;
  try {
    classifier_from_json(j);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/parameters/extra") != std::string::npos);
  }
}

TEST_CASE("eval report round-trips") {
  using C = CloudClass5;
  const auto r = evaluate_predictions(std::vector<C>{C::ClearSky, C::RainyAnvil}, std::vector<C>{C::ClearSky, C::ClearSky});
  CHECK(eval_report_from_json(to_json(r)) == r);
}

TEST_CASE("pipeline config errors point at the offending field") {
  auto expect_pointer = [](const std::string& text, const std::string& ptr) {
    try {
      pipeline_config_from_json(parse_json_text(text, "cfg"));
      FAIL("expected a config error for " << text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
      CHECK(std::string(e.what()).find(ptr) != std::string::npos);
    }
  };
  expect_pointer(R"({})", "/seed");
  expect_pointer(R"({"seed": 1, "scenegen": {"images": "three"}})", "/scenegen/images");
  expect_pointer(R"({"seed": 1, "scenegen": {"seed": 4}})", "/scenegen/seed");
  expect_pointer(R"({"seed": 1, "classifiers": [{"family": "rdf", "n_trees": 0.5}]})", "/classifiers/0/n_trees");
  expect_pointer(R"({"seed": 1, "bogus": true})", "/bogus");
  expect_pointer(R"({"seed": 1, "classifiers": [{"family": "gnb"}]})", "/noise_family");
}

TEST_CASE("config seeds derive per stage and the effective config re-reads") {
  const auto cfg = pipeline_config_from_json(parse_json_text(R"({"seed": 5})", "cfg"));
  CHECK(cfg.scenegen.seed == derive_seed(5, "generate"));
  CHECK(cfg.noise.seed == derive_seed(5, "noise-test"));
  const auto again = pipeline_config_from_json(to_json(cfg));
  CHECK(dump(to_json(again)) == dump(to_json(cfg)));
}

TEST_CASE("a tiny pipeline run records seven stages, is repeatable and locks its directory") {
  const json j = parse_json_text(R"({
    "seed": 3,
    "scenegen": {"images": 2, "height": 40, "width": 40, "target_mix": null},
    "clustering": {"k_max": 6, "restarts": 2},
    "split": {"train_image_ids": [1], "test_image_ids": [2]},
    "classifiers": [{"family": "rdf", "n_trees": 2, "max_depth": 6}]
  })", "cfg");
  const auto cfg = pipeline_config_from_json(j);
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const auto ra = run_pipeline(cfg, a);
  run_pipeline(cfg, b);
  CHECK(ra.stages.size() == 7);
  for (const auto& s : ra.stages) CHECK(s.status == "completed");
  CHECK(read_text(a / "manifest.json") == read_text(b / "manifest.json"));
  CHECK(fs::exists(a / "tables" / "targeting.csv"));

  const auto partial = run_pipeline(cfg, scratch("run_c"), "label");
  CHECK(partial.stages[3].status == "not-run");

  write_text(a / ".lock", "");
  CHECK_THROWS_AS(run_pipeline(cfg, a), Error);
  fs::remove_all(a);
  fs::remove_all(b);
}
