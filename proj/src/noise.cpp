#include "stormclass/noise.hpp"

#include <cmath>

#include "stormclass/rng.hpp"

namespace stormclass {

NoiseSpec NoiseSpec::instrument_default(std::uint64_t seed) {
  NoiseSpec s;
  for (BandId b : all_bands()) s.sigma[static_cast<int>(b)] = is_tb380(b) ? 5.0 : 1.0;
  s.seed = seed;
  return s;
}

NoiseSpec NoiseSpec::zero(std::uint64_t seed) {
  NoiseSpec s;
  s.sigma.setZero();
  s.seed = seed;
  return s;
}

NoiseSpec NoiseSpec::scaled(double factor) const {
  NoiseSpec s = *this;
  s.sigma *= factor;
  return s;
}

void validate(const NoiseSpec& spec) {
  for (BandId b : all_bands()) {
    const double s = spec.sigma[static_cast<int>(b)];
    if (!(std::isfinite(s) && s >= 0.0))
      throw Error(ErrorKind::InvalidSpec, "noise sigma for " + std::string(band_name(b)) + " must be >= 0");
  }
}

std::vector<PixelRecord> apply_noise(std::span<const PixelRecord> pixels, const NoiseSpec& spec) {
  validate(spec);
  std::vector<PixelRecord> out(pixels.begin(), pixels.end());
  for (auto& p : out)
    for (int b = 0; b < kBandCount; ++b) {
      if (spec.sigma[b] == 0.0) continue;
      const std::uint64_t key =
          derive_seed(spec.seed, {static_cast<std::uint64_t>(p.image_id), static_cast<std::uint64_t>(p.row),
                                  static_cast<std::uint64_t>(p.col), static_cast<std::uint64_t>(b)});
      p.radiance[b] += spec.sigma[b] * keyed_standard_normal(key);
    }
  return out;
}

NoiseExperimentResult noise_experiment(const TrainedClassifier& clf, std::span<const PixelRecord> test,
                                       const NoiseSpec& spec) {
  NoiseExperimentResult r;
  r.clean = evaluate(clf, test);
  const auto noisy = apply_noise(test, spec);
  r.noisy = evaluate(clf, noisy);
  r.delta = r.clean.accuracy3.value_or(0.0) - r.noisy.accuracy3.value_or(0.0);
  return r;
}

NoiseExperimentResult noise_experiment(const TrainerConfig& trainer, std::span<const SceneGrid> scenes,
                                       const SplitPlan& plan, const NoiseSpec& spec) {
  validate(spec);
  const Split split = make_split(scenes, plan);
  const TrainedClassifier clf = train_classifier(trainer, to_dataset(split.train));
  return noise_experiment(clf, split.test, spec);
}

}  // namespace stormclass
