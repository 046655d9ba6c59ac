#ifndef STORMCLASS_NOISE_HPP
#define STORMCLASS_NOISE_HPP

#include <cstdint>
#include <vector>

#include "stormclass/classifier.hpp"
#include "stormclass/core.hpp"
#include "stormclass/evaluation.hpp"

namespace stormclass {

/// Independent zero-mean Gaussian noise per band, in kelvin.
struct NoiseSpec {
  RadianceVector sigma;
  std::uint64_t seed = 0;

  /// 5 K on every Tb380 sub-band, 1 K on the others.
  static NoiseSpec instrument_default(std::uint64_t seed = 0);
  static NoiseSpec zero(std::uint64_t seed = 0);
  NoiseSpec scaled(double factor) const;
};

/// Throws InvalidSpec on a negative or non-finite sigma.
void validate(const NoiseSpec& spec);

/// Adds sigma_b * z to every band, where z is keyed on (seed, image_id, row, col, band)
/// so the result does not depend on pixel order or scheduling.
std::vector<PixelRecord> apply_noise(std::span<const PixelRecord> pixels, const NoiseSpec& spec);

struct NoiseExperimentResult {
  EvalReport clean;
  EvalReport noisy;
  double delta = 0.0;  // clean minus noisy overall 3-class accuracy
};

/// Trains once on the clean training images and evaluates on the clean and noisy test set.
NoiseExperimentResult noise_experiment(const TrainerConfig& trainer, std::span<const SceneGrid> scenes,
                                       const SplitPlan& plan, const NoiseSpec& spec);
/// Same, reusing an already trained model.
NoiseExperimentResult noise_experiment(const TrainedClassifier& clf, std::span<const PixelRecord> test,
                                       const NoiseSpec& spec);

}  // namespace stormclass

#endif  // STORMCLASS_NOISE_HPP
