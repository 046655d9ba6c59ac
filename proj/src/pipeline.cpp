#include "stormclass/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "stormclass/io.hpp"

namespace stormclass {

namespace fs = std::filesystem;

namespace {

std::string image_file(int image_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pixels_%03d.csv", image_id);
  return buf;
}

std::string trainer_seed_key(Family f) { return "train/" + std::string(family_name(f)); }

void reject_seed(const json& j, const std::string& ptr) {
  if (j.is_object() && j.contains("seed"))
    schema_error(ptr + "/seed", "sub-seeds are derived from the top-level seed and cannot be set here");
}

SplitPlan default_split(const SceneGenConfig& sg) {
  if (sg.images == default_scenegen_config(sg.region).images) return SplitPlan::standard(sg.region);
  const int train = std::max(1, static_cast<int>(std::lround(sg.images * 10.0 / 13.0)));
  return SplitPlan::first_n(sg.region, sg.images, std::min(train, sg.images));
}

// Owns `dir/.lock` for the lifetime of the object.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw Error(ErrorKind::Io, "artifact directory " + dir.string() + " is locked by another run (" +
                                     path_.string() + ")");
  }
  ~DirectoryLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

std::string class_row(const std::string& head, const std::array<double, kClassCount>& values) {
  std::string line = head;
  for (double v : values) line += "," + format_double(v);
  return line + "\n";
}

std::string class_header(const std::string& first) {
  std::string line = first;
  for (const auto& n : class5_names()) line += "," + n;
  return line + "\n";
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

// ---- configuration ----

void PipelineConfig::reseed(std::uint64_t global) {
  seed = global;
  scenegen.seed = derive_seed(global, "generate");
  for (auto& c : classifiers) c.seed = derive_seed(global, trainer_seed_key(c.family));
  noise.seed = derive_seed(global, "noise-test");
  targeting.seed = derive_seed(global, "target-sim");
}

PipelineConfig pipeline_config_from_json(const json& j) {
  ObjectReader r(j, "");
  PipelineConfig c;
  r.required("seed", c.seed);

  if (r.has("scenegen")) {
    reject_seed(r.at("scenegen"), "/scenegen");
    c.scenegen = scenegen_config_from_json(r.at("scenegen"), "/scenegen");
  } else {
    c.scenegen = default_scenegen_config(Region::Tropical);
  }
  try {
    validate(c.scenegen);
  } catch (const Error& e) {
    schema_error("/scenegen", e.what());
  }

  if (r.has("clustering")) {
    ObjectReader cr(r.at("clustering"), "/clustering");
    reject_seed(r.at("clustering"), "/clustering");
    cr.optional("k", c.clustering.k);
    cr.optional("k_min", c.clustering.k_min);
    cr.optional("k_max", c.clustering.k_max);
    cr.optional("sample_size", c.clustering.sample_size);
    cr.optional("silhouette_cap", c.clustering.silhouette_cap);
    cr.optional("restarts", c.clustering.restarts);
    cr.optional("zero_epsilon", c.clustering.zero_epsilon);
    cr.finish();
    if (c.clustering.k < 2) schema_error("/clustering/k", "k must be at least 2");
    if (c.clustering.k_min < 2 || c.clustering.k_max < c.clustering.k_min)
      schema_error("/clustering/k_max", "need 2 <= k_min <= k_max");
    if (c.clustering.restarts < 1) schema_error("/clustering/restarts", "need at least one restart");
    if (c.clustering.sample_size < 3) schema_error("/clustering/sample_size", "sample too small");
  }

  if (r.has("classifiers")) {
    const json& arr = r.at("classifiers");
    if (!arr.is_array() || arr.empty()) schema_error("/classifiers", "expected a nonempty array");
    std::set<Family> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string ptr = "/classifiers/" + std::to_string(i);
      reject_seed(arr[i], ptr);
      TrainerConfig t = trainer_config_from_json(arr[i], ptr, 0);
      if (!seen.insert(t.family).second) schema_error(ptr + "/family", "family listed twice");
      c.classifiers.push_back(t);
    }
  } else {
    for (Family f : all_families()) c.classifiers.push_back(TrainerConfig::defaults(f, 0));
  }

  c.split = default_split(c.scenegen);
  if (r.has("split")) c.split = split_plan_from_json(r.at("split"), "/split");
  c.split.region = c.scenegen.region;
  for (const auto* ids : {&c.split.train_image_ids, &c.split.test_image_ids})
    for (int id : *ids)
      if (id < 1 || id > c.scenegen.images)
        schema_error("/split", "image " + std::to_string(id) + " is outside 1.." + std::to_string(c.scenegen.images));

  r.optional("crossval_folds", c.crossval_folds);
  if (c.crossval_folds < 0 || c.crossval_folds == 1) schema_error("/crossval_folds", "use 0 (off) or at least 2");

  if (r.has("noise")) {
    reject_seed(r.at("noise"), "/noise");
    c.noise = noise_spec_from_json(r.at("noise"), "/noise");
  }
  r.optional("noise_family", c.noise_family);
  if (r.has("targeting")) {
    reject_seed(r.at("targeting"), "/targeting");
    c.targeting = targeting_policy_from_json(r.at("targeting"), "/targeting");
  }
  r.optional("targeting_family", c.targeting_family);
  r.finish();

  auto trained = [&](Family f) {
    return std::any_of(c.classifiers.begin(), c.classifiers.end(), [&](const TrainerConfig& t) { return t.family == f; });
  };
  if (!trained(c.noise_family)) schema_error("/noise_family", "family is not among the trained classifiers");
  if (!trained(c.targeting_family)) schema_error("/targeting_family", "family is not among the trained classifiers");

  c.reseed(c.seed);
  return c;
}

json to_json(const PipelineConfig& c) {
  json sg = to_json(c.scenegen);
  sg.erase("seed");
  json classifiers = json::array();
  for (const auto& t : c.classifiers) classifiers.push_back(to_json(t));
  json noise = to_json(c.noise);
  noise.erase("seed");
  json targeting = to_json(c.targeting);
  targeting.erase("seed");
  json split = to_json(c.split);
  split.erase("region");
  return {{"seed", c.seed},
          {"scenegen", sg},
          {"clustering",
           {{"k", c.clustering.k},
            {"k_min", c.clustering.k_min},
            {"k_max", c.clustering.k_max},
            {"sample_size", c.clustering.sample_size},
            {"silhouette_cap", c.clustering.silhouette_cap},
            {"restarts", c.clustering.restarts},
            {"zero_epsilon", number(c.clustering.zero_epsilon)}}},
          {"classifiers", classifiers},
          {"split", split},
          {"crossval_folds", c.crossval_folds},
          {"noise", noise},
          {"noise_family", family_name(c.noise_family)},
          {"targeting", targeting},
          {"targeting_family", family_name(c.targeting_family)}};
}

// ---- building blocks ----

SweepResult cluster_science(std::span<const PixelRecord> pixels, const ClusteringConfig& cfg, std::uint64_t seed) {
  std::vector<ScienceVector> science;
  science.reserve(pixels.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i].science) science.push_back(*pixels[i].science);
    else if (missing.size() < 10) missing.push_back(i);
  }
  if (!missing.empty()) {
    std::string list;
    for (auto i : missing) list += (list.empty() ? "" : ", ") + std::to_string(i);
    throw Error(ErrorKind::MissingScience, "pixels without science values (first indices: " + list + ")");
  }
  const KMeansOptions options{cfg.restarts, 300};
  SweepResult out;
  out.model = fit_kmeans(science, cfg.k, derive_seed(seed, "fit"), options);

  std::vector<ScienceVector> sample = science;
  if (sample.size() > cfg.sample_size) {
    std::vector<std::size_t> idx(science.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "subsample"));
    for (std::size_t i = 0; i < cfg.sample_size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(cfg.sample_size);
    std::sort(idx.begin(), idx.end());
    sample.clear();
    for (auto i : idx) sample.push_back(science[i]);
  }
  const int k_max = std::min<int>(cfg.k_max, static_cast<int>(sample.size()) - 1);
  if (k_max >= cfg.k_min) out.curve = sweep_k(sample, cfg.k_min, k_max, derive_seed(seed, "sweep"), cfg.silhouette_cap, options);
  return out;
}

std::string silhouette_csv(std::span<const SilhouettePoint> curve) {
  std::string s = "k,score\n";
  for (const auto& p : curve) s += std::to_string(p.k) + "," + format_double(p.score) + "\n";
  return s;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string s = "true\\predicted";
  for (const auto& n : cm.class_names) s += "," + n;
  s += "\n";
  for (int i = 0; i < cm.size(); ++i) {
    s += cm.class_names[static_cast<std::size_t>(i)];
    for (int j = 0; j < cm.size(); ++j) s += "," + std::to_string(cm.counts(i, j));
    s += "\n";
  }
  return s;
}

std::string loss_curve_csv(std::span<const double> losses) {
  std::string s = "epoch,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) s += std::to_string(i + 1) + "," + format_double(losses[i]) + "\n";
  return s;
}

std::string targeting_comparison_csv(const YieldReport& random, const YieldReport& policy) {
  std::string s = "class,random_frac,policy_frac,yield_factor\n";
  const auto names = class5_names();
  for (std::size_t c = 0; c < kClassCount; ++c)
    s += names[c] + "," + format_double(random.sampled_fraction[c]) + "," + format_double(policy.sampled_fraction[c]) +
         "," + optional_cell(policy.yield_factor[c]) + "\n";
  return s;
}

std::string predictions_csv(std::span<const PixelRecord> pixels, std::span<const Prediction> predictions) {
  std::string s = "image_id,row,col,predicted";
  for (const auto& n : class5_names()) s += ",score_" + n;
  s += "\n";
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    s += std::to_string(pixels[i].image_id) + "," + std::to_string(pixels[i].row) + "," + std::to_string(pixels[i].col) +
         "," + std::string(class_name(predictions[i].label));
    for (int c = 0; c < kClassCount; ++c) s += "," + format_double(predictions[i].scores[c]);
    s += "\n";
  }
  return s;
}

std::vector<std::string> write_image_csvs(const fs::path& dir, std::span<const PixelRecord> pixels) {
  std::map<int, std::vector<PixelRecord>> by_image;
  for (const auto& p : pixels) by_image[p.image_id].push_back(p);
  std::vector<std::string> names;
  for (const auto& [id, px] : by_image) {
    names.push_back(image_file(id));
    write_pixels(dir / names.back(), px);
  }
  return names;
}

std::vector<PixelRecord> read_pixel_inputs(std::span<const fs::path> inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  if (files.empty()) throw Error(ErrorKind::EmptyInput, "no pixel CSV inputs");
  std::vector<PixelRecord> out;
  for (const auto& f : files) {
    auto px = read_pixels(f);
    out.insert(out.end(), std::make_move_iterator(px.begin()), std::make_move_iterator(px.end()));
  }
  return out;
}

// ---- the pipeline ----

namespace {

class Run {
 public:
  Run(const PipelineConfig& cfg, fs::path out) : cfg_(cfg), out_(std::move(out)) {}

  PipelineResult execute(std::string_view last_stage) {
    if (!last_stage.empty() && std::find(kStages.begin(), kStages.end(), last_stage) == kStages.end())
      throw Error(ErrorKind::Config, "unknown stage '" + std::string(last_stage) + "'");
    DirectoryLock lock(out_);
    const std::string config_text = dump(to_json(cfg_));
    write_text(out_ / "config.json", config_text);
    config_sha_ = sha256_hex(config_text);

    bool stopped = false;
    for (std::string_view name : kStages) {
      StageRecord rec;
      rec.name = std::string(name);
      if (stopped) {
        rec.status = "not-run";
      } else {
        current_ = &rec;
        try {
          run_stage(name);
        } catch (const Error& e) {
          throw Error(e.kind(), "stage '" + rec.name + "' failed: " + e.what());
        } catch (const std::exception& e) {
          throw Error(ErrorKind::Io, "stage '" + rec.name + "' failed: " + e.what());
        }
        if (rec.status.empty()) rec.status = "completed";
        current_ = nullptr;
      }
      result_.stages.push_back(std::move(rec));
      if (name == last_stage) stopped = true;
    }

    json stages = json::array();
    for (const auto& s : result_.stages) {
      json artifacts = json::object();
      for (const auto& [path, sha] : s.artifacts) artifacts[path] = sha;
      json entry = {{"name", s.name}, {"status", s.status}, {"artifacts", artifacts}};
      if (!s.note.empty()) entry["note"] = s.note;
      stages.push_back(entry);
    }
    const json manifest = {{"config", "config.json"},
                           {"config_sha256", config_sha_},
                           {"seed", cfg_.seed},
                           {"region", region_name(cfg_.scenegen.region)},
                           {"stages", stages}};
    result_.manifest = out_ / "manifest.json";
    write_json(result_.manifest, manifest);
    return result_;
  }

 private:
  void emit(const std::string& rel, const std::string& text) {
    write_text(out_ / rel, text);
    current_->artifacts.emplace_back(rel, sha256_hex(text));
  }

  void emit_pixels(const std::string& dir, std::span<const PixelRecord> pixels) {
    std::map<int, std::vector<PixelRecord>> by_image;
    for (const auto& p : pixels) by_image[p.image_id].push_back(p);
    for (const auto& [id, px] : by_image) {
      std::ostringstream os;
      write_pixels(os, px);
      emit(dir + "/" + image_file(id), os.str());
    }
  }

  void skip(const std::string& why) {
    current_->status = "skipped";
    current_->note = why;
  }

  void run_stage(std::string_view name) {
    if (name == "generate") generate();
    else if (name == "cluster") cluster();
    else if (name == "label") label();
    else if (name == "train") train();
    else if (name == "evaluate") evaluate_models();
    else if (name == "noise-test") noise_test();
    else target_sim();
  }

  void generate() {
    scenes_ = generate_scenes(cfg_.scenegen);
    pixels_ = flatten(scenes_);
    emit_pixels("generate", pixels_);
    json sg = to_json(cfg_.scenegen);
    const json summary = {{"region", region_name(cfg_.scenegen.region)},
                          {"pixel_size_km", number(cfg_.scenegen.pixel_size_km)},
                          {"images", cfg_.scenegen.images},
                          {"height", cfg_.scenegen.height},
                          {"width", cfg_.scenegen.width},
                          {"seed", cfg_.scenegen.seed},
                          {"config_sha256", sha256_hex(dump(sg))},
                          {"expected_mix", expected_mix(cfg_.scenegen)},
                          {"realized_mix", realized_mix(scenes_)}};
    emit("generate/scenes.json", dump(summary));
  }

  void cluster() {
    sweep_ = cluster_science(pixels_, cfg_.clustering, derive_seed(cfg_.seed, "cluster"));
    emit("cluster/model.json", dump(to_json(sweep_.model)));
    emit("cluster/silhouette.csv", silhouette_csv(sweep_.curve));
  }

  void label() {
    std::vector<ScienceVector> science;
    science.reserve(pixels_.size());
    for (const auto& p : pixels_) science.push_back(*p.science);
    label_map_ = derive_label_map(sweep_.model, science, cfg_.clustering.zero_epsilon);
    labeled_ = label_pixels(sweep_.model, label_map_, pixels_);
    emit("label/label_map.json", dump(to_json(label_map_)));
    emit_pixels("label", labeled_);

    // Agreement of the derived labels with the generator's planted classes.
    std::vector<CloudClass5> planted, derived;
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
      planted.push_back(*pixels_[i].label);
      derived.push_back(*labeled_[i].label);
    }
    const EvalReport agreement = evaluate_predictions(planted, derived);
    emit("label/agreement.csv", confusion_csv(agreement.cm5));
    current_->note = "agreement with planted classes: " + format_double(agreement.accuracy5.value_or(0.0));
  }

  void train() {
    split_ = make_split(std::span<const PixelRecord>(labeled_), cfg_.split);
    const Dataset train = to_dataset(split_.train);

    std::string table = class_header("split") ;
    auto counts_row = [&](const std::string& name, std::span<const PixelRecord> px) {
      std::array<double, kClassCount> counts{};
      for (const auto& p : px) counts[static_cast<std::size_t>(index_of(*p.label))] += 1.0;
      table += class_row(name, counts);
    };
    counts_row("train", split_.train);
    counts_row("test", split_.test);
    emit("tables/class_distribution.csv", table);

    for (const auto& tc : cfg_.classifiers) {
      const std::string fam(family_name(tc.family));
      TrainedClassifier clf = train_classifier(tc, train);
      const std::string model_text = dump(to_json(clf));
      emit("train/" + fam + ".json", model_text);
      model_sha_[tc.family] = sha256_hex(model_text);
      if (!clf.loss_curve.empty()) emit("train/" + fam + "_loss.csv", loss_curve_csv(clf.loss_curve));
      if (cfg_.crossval_folds > 0) {
        const auto cv = cross_validate(tc, split_.train, cfg_.crossval_folds, derive_seed(cfg_.seed, "crossval"));
        emit("train/" + fam + "_crossval.json", dump(to_json(cv)));
      }
      models_.emplace(tc.family, std::move(clf));
    }
    if (!split_.warnings.empty()) current_->note = split_.warnings.front();
  }

  std::string test_set_sha() const {
    std::ostringstream os;
    write_pixels(os, split_.test);
    return sha256_hex(os.str());
  }

  void evaluate_models() {
    if (split_.test.empty()) return skip("test set is empty");
    const std::string dataset_sha = test_set_sha();
    std::string table = "family,NonStorm,RainyAnvil,ConvectionCore,accuracy_3,nonstorm_2,storm_2\n";
    for (const auto& tc : cfg_.classifiers) {
      const std::string fam(family_name(tc.family));
      EvalReport r = evaluate(models_.at(tc.family), split_.test);
      r.metadata["model_sha256"] = model_sha_.at(tc.family);
      r.metadata["dataset_sha256"] = dataset_sha;
      emit("evaluate/" + fam + ".json", dump(to_json(r)));
      emit("evaluate/" + fam + "_confusion_5.csv", confusion_csv(r.cm5));
      emit("evaluate/" + fam + "_confusion_3.csv", confusion_csv(r.cm3));
      emit("evaluate/" + fam + "_confusion_2.csv", confusion_csv(r.cm2));
      table += fam;
      for (const auto& v : r.recall3) table += "," + optional_cell(v);
      table += "," + optional_cell(r.accuracy3) + "," + optional_cell(r.nonstorm_recall) + "," +
               optional_cell(r.storm_recall) + "\n";
    }
    emit("tables/recalls.csv", table);
  }

  void noise_test() {
    if (split_.test.empty()) return skip("test set is empty");
    const auto& clf = models_.at(cfg_.noise_family);
    NoiseExperimentResult r = noise_experiment(clf, split_.test, cfg_.noise);
    r.noisy.metadata["noise_spec"] = to_json(cfg_.noise).dump();
    const json report = {{"family", family_name(cfg_.noise_family)},
                         {"spec", to_json(cfg_.noise)},
                         {"clean", to_json(r.clean)},
                         {"noisy", to_json(r.noisy)},
                         {"delta_accuracy_3", number(r.delta)}};
    emit("noise/report.json", dump(report));
    emit("tables/noise.csv", "family,clean_accuracy_3,noisy_accuracy_3,delta\n" +
                                 std::string(family_name(cfg_.noise_family)) + "," +
                                 optional_cell(r.clean.accuracy3) + "," + optional_cell(r.noisy.accuracy3) + "," +
                                 format_double(r.delta) + "\n");
  }

  void target_sim() {
    if (split_.test.empty()) return skip("test set is empty");
    const auto& clf = models_.at(cfg_.targeting_family);
    const Dataset test = to_dataset(split_.test);
    const auto predicted = predict_labels(clf, test.features);

    TargetingPolicy random = cfg_.targeting;
    random.kind = PolicyKind::Random;
    TargetingPolicy priority = cfg_.targeting;
    priority.kind = PolicyKind::PredictedClassPriority;
    const YieldReport rnd = simulate_targeting(test.labels, test.labels, random);
    const YieldReport oracle = simulate_targeting(test.labels, test.labels, priority);
    const YieldReport actual = simulate_targeting(test.labels, predicted, priority);
    const auto conditioned = conditional_mix(test.labels, predicted);

    json cond = json::object();
    for (std::size_t c = 0; c < kClassCount; ++c)
      cond[class5_names()[c]] = conditioned[c] ? json(*conditioned[c]) : json(nullptr);
    const json report = {{"family", family_name(cfg_.targeting_family)},
                         {"policy", to_json(cfg_.targeting)},
                         {"random", to_json(rnd)},
                         {"oracle", to_json(oracle)},
                         {"actual", to_json(actual)},
                         {"sampled_if_predicted", cond}};
    emit("targeting/report.json", dump(report));
    emit("targeting/comparison.csv", targeting_comparison_csv(rnd, actual));

    std::string table = class_header("row");
    table += class_row("random", rnd.sampled_fraction);
    for (CloudClass5 c : {CloudClass5::RainyAnvil, CloudClass5::ConvectionCore}) {
      const auto& row = conditioned[static_cast<std::size_t>(index_of(c))];
      if (row) table += class_row("sample labelled " + std::string(class_name(c)), *row);
    }
    table += class_row("oracle priority", oracle.sampled_fraction);
    table += class_row("actual priority", actual.sampled_fraction);
    emit("tables/targeting.csv", table);
  }

  const PipelineConfig& cfg_;
  fs::path out_;
  PipelineResult result_;
  StageRecord* current_ = nullptr;
  std::string config_sha_;

  std::vector<SceneGrid> scenes_;
  std::vector<PixelRecord> pixels_;
  SweepResult sweep_;
  LabelMap label_map_;
  std::vector<PixelRecord> labeled_;
  Split split_;
  std::map<Family, TrainedClassifier> models_;
  std::map<Family, std::string> model_sha_;
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const fs::path& out, std::string_view last_stage) {
  return Run(config, out).execute(last_stage);
}

}  // namespace stormclass
