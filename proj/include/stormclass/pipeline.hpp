#ifndef STORMCLASS_PIPELINE_HPP
#define STORMCLASS_PIPELINE_HPP

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "stormclass/json_io.hpp"

namespace stormclass {

struct ClusteringConfig {
  int k = 5;
  int k_min = 2;
  int k_max = 17;
  std::size_t sample_size = 20000;  // pixels drawn for the k sweep
  std::size_t silhouette_cap = kDefaultSilhouetteCap;
  int restarts = 10;
  double zero_epsilon = kZeroClusterEpsilon;
};

/// Every seed below is derived from `seed` and the stage name; sections may not carry
/// their own seeds.
struct PipelineConfig {
  std::uint64_t seed = 0;
  SceneGenConfig scenegen;
  ClusteringConfig clustering;
  std::vector<TrainerConfig> classifiers;
  SplitPlan split;
  int crossval_folds = 0;  // 0 disables cross-validation
  NoiseSpec noise = NoiseSpec::instrument_default();
  Family noise_family = Family::Rdf;
  TargetingPolicy targeting;
  Family targeting_family = Family::Rdf;

  /// Re-derives every stage seed from a new global seed.
  void reseed(std::uint64_t global);
};

inline constexpr std::array<std::string_view, 7> kStages = {"generate", "cluster",    "label",     "train",
                                                           "evaluate", "noise-test", "target-sim"};

/// Throws Config (with a JSON pointer) on any schema violation.
PipelineConfig pipeline_config_from_json(const json& j);
json to_json(const PipelineConfig& c);

struct StageRecord {
  std::string name;
  std::string status;  // completed, skipped, not-run
  std::string note;
  std::vector<std::pair<std::string, std::string>> artifacts;  // relative path, sha256
};

struct PipelineResult {
  std::vector<StageRecord> stages;
  std::filesystem::path manifest;
};

/// Runs the stages in order up to and including `last_stage` (all when empty), writing
/// artifacts and manifest.json under `out`. Holds `out/.lock` for the duration. Stage
/// failures are rethrown with the stage name prefixed.
PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& out,
                            std::string_view last_stage = {});

// Building blocks shared with the individual CLI subcommands.
struct SweepResult {
  ClusterModel model;
  std::vector<SilhouettePoint> curve;
};
SweepResult cluster_science(std::span<const PixelRecord> pixels, const ClusteringConfig& cfg, std::uint64_t seed);

std::string silhouette_csv(std::span<const SilhouettePoint> curve);
std::string confusion_csv(const ConfusionMatrix& cm);
std::string loss_curve_csv(std::span<const double> losses);
std::string targeting_comparison_csv(const YieldReport& random, const YieldReport& policy);
std::string predictions_csv(std::span<const PixelRecord> pixels, std::span<const Prediction> predictions);

/// Writes one CSV per image (pixels_001.csv, ...) and returns the file names.
std::vector<std::string> write_image_csvs(const std::filesystem::path& dir, std::span<const PixelRecord> pixels);
/// Expands directories to their *.csv files (sorted) and concatenates the pixels.
std::vector<PixelRecord> read_pixel_inputs(std::span<const std::filesystem::path> inputs);

}  // namespace stormclass

#endif  // STORMCLASS_PIPELINE_HPP
