// stormclass: command-line front end. Every subcommand is deterministic given its inputs and seed.
#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "stormclass/io.hpp"
#include "stormclass/json_io.hpp"
#include "stormclass/pipeline.hpp"

namespace fs = std::filesystem;
using namespace stormclass;

namespace {

std::vector<fs::path> as_paths(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

std::vector<PixelRecord> load_pixels(const std::vector<std::string>& inputs) {
  const auto paths = as_paths(inputs);
  return read_pixel_inputs(paths);
}

TrainedClassifier load_model(const std::string& path) { return classifier_from_json(read_json(path)); }

void write_report_dir(const fs::path& dir, const EvalReport& r) {
  write_json(dir / "report.json", to_json(r));
  write_text(dir / "confusion_5.csv", confusion_csv(r.cm5));
  write_text(dir / "confusion_3.csv", confusion_csv(r.cm3));
  write_text(dir / "confusion_2.csv", confusion_csv(r.cm2));
}

Eigen::MatrixXd features_of(std::span<const PixelRecord> pixels) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(pixels.size()), kBandCount);
  for (std::size_t i = 0; i < pixels.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = pixels[i].radiance.transpose();
  return x;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "n/a"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Storm cloud classification: scene synthesis, auto-labeling, classifiers, evaluation"};
  app.require_subcommand(1);

  std::string config_path, out_path, model_path, family_text, stage, noise_path, policy_path;
  std::vector<std::string> pixel_inputs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> region_text;
  std::optional<int> images, k, k_min, k_max, folds, restarts;
  std::optional<std::size_t> sample_size;
  std::optional<double> epsilon, budget;
  std::optional<bool> balanced;

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", seed, "Seed (overrides any seed in the config)"); };
  auto add_pixels = [&](CLI::App* c) {
    c->add_option("--pixels", pixel_inputs, "Pixel CSV files or directories of them")->required();
  };

  auto* gen = app.add_subcommand("generate", "Synthesize scenes and write per-image pixel CSVs");
  gen->add_option("--config", config_path, "Scene generator JSON");
  gen->add_option("--region", region_text, "tropical | nontropical (defaults when no config)");
  gen->add_option("--images", images, "Number of images");
  gen->add_option("--out", out_path, "Output directory")->required();
  add_seed(gen);

  auto* clu = app.add_subcommand("cluster", "k-means on the science variables plus a silhouette sweep");
  add_pixels(clu);
  clu->add_option("--k", k, "Clusters in the fitted model (default 5)");
  clu->add_option("--k-min", k_min, "Sweep lower bound (default 2)");
  clu->add_option("--k-max", k_max, "Sweep upper bound (default 17)");
  clu->add_option("--sample-size", sample_size, "Sweep subsample size (default 20000)");
  clu->add_option("--restarts", restarts, "k-means restarts (default 10)");
  clu->add_option("--out", out_path, "Output directory")->required();
  add_seed(clu);

  auto* lab = app.add_subcommand("label", "Map clusters to cloud classes and label pixels");
  lab->add_option("--model", model_path, "ClusterModel JSON")->required();
  add_pixels(lab);
  lab->add_option("--epsilon", epsilon, "Zero-cluster threshold on mean iwp");
  lab->add_option("--out", out_path, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train one classifier on labeled pixels");
  tr->add_option("--family", family_text, "rdf | linear_svm | gnb | ann | cnn");
  tr->add_option("--config", config_path, "Trainer JSON (family-specific hyperparameters)");
  tr->add_option("--balanced", balanced, "Class-balanced weighting (true/false)");
  add_pixels(tr);
  tr->add_option("--out", out_path, "Model JSON path")->required();
  add_seed(tr);

  auto* pr = app.add_subcommand("predict", "Predict pixel classes with a trained model");
  pr->add_option("--model", model_path, "Model JSON")->required();
  add_pixels(pr);
  pr->add_option("--out", out_path, "Predictions CSV path")->required();

  auto* ev = app.add_subcommand("evaluate", "Confusion matrices and recalls at 5, 3 and 2 classes");
  ev->add_option("--model", model_path, "Model JSON")->required();
  add_pixels(ev);
  ev->add_option("--out", out_path, "Output directory")->required();

  auto* cv = app.add_subcommand("crossval", "Image-grouped k-fold cross-validation");
  cv->add_option("--family", family_text, "Classifier family");
  cv->add_option("--config", config_path, "Trainer JSON");
  cv->add_option("--balanced", balanced, "Class-balanced weighting (true/false)");
  cv->add_option("--folds", folds, "Number of folds")->required();
  add_pixels(cv);
  cv->add_option("--out", out_path, "Result JSON path")->required();
  add_seed(cv);

  auto* nt = app.add_subcommand("noise-test", "Clean versus noise-injected evaluation");
  nt->add_option("--model", model_path, "Model JSON")->required();
  add_pixels(nt);
  nt->add_option("--noise", noise_path, "NoiseSpec JSON (default: instrument noise)");
  nt->add_option("--out", out_path, "Output directory")->required();
  add_seed(nt);

  auto* ts = app.add_subcommand("target-sim", "Budgeted sampling: random versus predicted-class priority");
  ts->add_option("--model", model_path, "Model JSON")->required();
  add_pixels(ts);
  ts->add_option("--policy", policy_path, "TargetingPolicy JSON");
  ts->add_option("--budget", budget, "Budget fraction beta");
  ts->add_option("--out", out_path, "Output directory")->required();
  add_seed(ts);

  auto* run = app.add_subcommand("run", "Run the whole pipeline into an artifact directory");
  run->add_option("--config", config_path, "Pipeline JSON")->required();
  run->add_option("--out", out_path, "Artifact directory")->required();
  run->add_option("--stage", stage, "Stop after this stage");
  add_seed(run);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      SceneGenConfig cfg;
      if (!config_path.empty()) cfg = scenegen_config_from_json(read_json(config_path));
      else cfg = default_scenegen_config(region_text ? parse_region(*region_text) : Region::Tropical);
      if (images) cfg.images = *images;
      if (seed) cfg.seed = *seed;
      const auto scenes = generate_scenes(cfg);
      const auto pixels = flatten(scenes);
      fs::create_directories(out_path);
      const auto files = write_image_csvs(out_path, pixels);
      json summary = to_json(cfg);
      summary["realized_mix"] = realized_mix(scenes);
      write_json(fs::path(out_path) / "scenes.json", summary);
      std::cout << "wrote " << files.size() << " images, " << pixels.size() << " pixels to " << out_path << "\n";
    } else if (clu->parsed()) {
      ClusteringConfig cfg;
      if (k) cfg.k = *k;
      if (k_min) cfg.k_min = *k_min;
      if (k_max) cfg.k_max = *k_max;
      if (sample_size) cfg.sample_size = *sample_size;
      if (restarts) cfg.restarts = *restarts;
      const auto pixels = load_pixels(pixel_inputs);
      const auto result = cluster_science(pixels, cfg, derive_seed(seed.value_or(0), "cluster"));
      fs::create_directories(out_path);
      write_json(fs::path(out_path) / "model.json", to_json(result.model));
      write_text(fs::path(out_path) / "silhouette.csv", silhouette_csv(result.curve));
      std::cout << "k=" << result.model.k << " inertia=" << format_double(result.model.inertia) << "\n";
    } else if (lab->parsed()) {
      const auto model = cluster_model_from_json(read_json(model_path));
      const auto pixels = load_pixels(pixel_inputs);
      std::vector<ScienceVector> science;
      for (const auto& p : pixels) {
        if (!p.science) throw Error(ErrorKind::MissingScience, "input pixels lack science columns");
        science.push_back(*p.science);
      }
      const auto map = derive_label_map(model, science, epsilon.value_or(kZeroClusterEpsilon));
      const auto labeled = label_pixels(model, map, pixels);
      fs::create_directories(out_path);
      write_json(fs::path(out_path) / "label_map.json", to_json(map));
      write_image_csvs(out_path, labeled);
      for (const auto& w : map.warnings) std::cerr << "warning: " << w << "\n";
    } else if (tr->parsed() || cv->parsed()) {
      const std::uint64_t s = seed.value_or(0);
      TrainerConfig tc;
      if (!config_path.empty()) {
        tc = trainer_config_from_json(read_json(config_path), "", s);
      } else {
        if (family_text.empty()) throw Error(ErrorKind::Config, "need --family or --config");
        tc = TrainerConfig::defaults(parse_family(family_text), s);
      }
      if (!family_text.empty() && parse_family(family_text) != tc.family)
        throw Error(ErrorKind::Config, "--family disagrees with the family in --config");
      if (balanced) tc.balanced = *balanced;
      if (seed) tc.seed = *seed;
      const auto pixels = load_pixels(pixel_inputs);
      if (tr->parsed()) {
        const auto clf = train_classifier(tc, to_dataset(pixels));
        write_json(out_path, to_json(clf));
        if (!clf.loss_curve.empty())
          write_text(fs::path(out_path).replace_extension(".loss.csv"), loss_curve_csv(clf.loss_curve));
      } else {
        const auto r = cross_validate(tc, pixels, *folds, derive_seed(tc.seed, "crossval"));
        write_json(out_path, to_json(r));
        std::cout << "mean 5-class accuracy " << format_double(r.mean_accuracy5) << "\n";
      }
    } else if (pr->parsed()) {
      const auto clf = load_model(model_path);
      const auto pixels = load_pixels(pixel_inputs);
      const auto predictions = predict_all(clf, features_of(pixels));
      write_text(out_path, predictions_csv(pixels, predictions));
    } else if (ev->parsed()) {
      const auto clf = load_model(model_path);
      const auto pixels = load_pixels(pixel_inputs);
      const EvalReport r = evaluate(clf, pixels);
      fs::create_directories(out_path);
      write_report_dir(out_path, r);
      std::cout << "accuracy5 " << opt(r.accuracy5) << "  nonstorm " << opt(r.nonstorm_recall) << "  storm "
                << opt(r.storm_recall) << "\n";
    } else if (nt->parsed()) {
      const auto clf = load_model(model_path);
      const auto pixels = load_pixels(pixel_inputs);
      NoiseSpec spec = noise_path.empty() ? NoiseSpec::instrument_default() : noise_spec_from_json(read_json(noise_path));
      if (seed) spec.seed = *seed;
      const auto r = noise_experiment(clf, pixels, spec);
      fs::create_directories(out_path);
      write_json(fs::path(out_path) / "report.json", {{"spec", to_json(spec)},
                                                      {"clean", to_json(r.clean)},
                                                      {"noisy", to_json(r.noisy)},
                                                      {"delta_accuracy_3", number(r.delta)}});
      std::cout << "3-class accuracy delta " << format_double(r.delta) << "\n";
    } else if (ts->parsed()) {
      const auto clf = load_model(model_path);
      const auto pixels = load_pixels(pixel_inputs);
      TargetingPolicy policy = policy_path.empty() ? TargetingPolicy{} : targeting_policy_from_json(read_json(policy_path));
      if (budget) policy.budget_fraction = *budget;
      if (seed) policy.seed = *seed;
      validate(policy);
      TargetingPolicy random = policy;
      random.kind = PolicyKind::Random;
      const auto rnd = simulate_targeting(clf, pixels, random);
      const auto chosen = simulate_targeting(clf, pixels, policy);
      fs::create_directories(out_path);
      write_json(fs::path(out_path) / "report.json", {{"random", to_json(rnd)}, {"policy", to_json(chosen)}});
      write_text(fs::path(out_path) / "comparison.csv", targeting_comparison_csv(rnd, chosen));
    } else if (run->parsed()) {
      PipelineConfig cfg = pipeline_config_from_json(read_json(config_path));
      if (seed) cfg.reseed(*seed);
      const auto result = run_pipeline(cfg, out_path, stage);
      for (const auto& s : result.stages) std::cout << s.name << ": " << s.status << (s.note.empty() ? "" : " (" + s.note + ")") << "\n";
      std::cout << "manifest " << result.manifest.string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error " << e.what() << "\n";
    return 1;
  }
  return 0;
}
