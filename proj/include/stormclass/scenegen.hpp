#ifndef STORMCLASS_SCENEGEN_HPP
#define STORMCLASS_SCENEGEN_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stormclass/core.hpp"

namespace stormclass {

struct LogNormalParams {
  double median = 1.0;  // exp(location)
  double sigma = 0.0;   // scale of the underlying normal
};

struct NormalParams {
  double mean = 0.0;
  double sd = 0.0;
};

struct ClassScienceParams {
  LogNormalParams iwp;
  LogNormalParams particle_size;
  NormalParams cloud_top_height;
};

/// Ring radii in pixels, measured from the nearest storm-cell center.
struct StormRadii {
  double core = 0.0;
  double anvil = 0.0;
  double cirrus = 0.0;
  double thin_cirrus = 0.0;
};

/// Parameters of the statistical scene surrogate. Cloudy-class science parameters are
/// indexed ThinCirrus, Cirrus, RainyAnvil, ConvectionCore.
struct SceneGenConfig {
  Region region = Region::Tropical;
  std::uint64_t seed = 0;
  int images = 13;
  int height = 119;
  int width = 208;
  double pixel_size_km = 15.0;
  double cells_per_image_mean = 0.0;
  StormRadii radii;
  std::array<ClassScienceParams, 4> class_science{};
  double separability = 1.0;
  RadianceVector band_gain = RadianceVector::Ones();
  RadianceVector clear_sky_tb = RadianceVector::Constant(250.0);
  double nuisance_sd = 0.0;
  double image_offset_sd = 0.0;
  double particle_size_ref = 100.0;  // micrometers, sets where the size modifier saturates
  std::optional<std::array<double, kClassCount>> target_mix;
};

/// Committed defaults for each region. The non-tropical variant halves the separability,
/// uses fewer and tighter storm systems and the cutout geometry.
SceneGenConfig default_scenegen_config(Region region);

/// Throws Config on any violated invariant, including an unreachable target mix.
void validate(const SceneGenConfig& cfg);

/// Class proportions implied by a Poisson field of cells with the configured radii.
std::array<double, kClassCount> expected_mix(const SceneGenConfig& cfg);
std::array<double, kClassCount> realized_mix(std::span<const SceneGrid> scenes);

/// Bounded, positive and increasing in particle size: 0.5 + 0.5 tanh(size / ref).
double particle_size_modifier(double particle_size, double ref);

/// Depression model: tb = clear - gain * separability * ln(1 + iwp) * g(size) + nuisance,
/// clamped to [100, 350] K.
RadianceVector forward_radiance(const ScienceVector& science, const SceneGenConfig& cfg,
                                const RadianceVector& nuisance);

/// Image ids are 1-based; each image uses a sub-seed of (seed, image_id).
SceneGrid generate_image(const SceneGenConfig& cfg, int image_id);
std::vector<SceneGrid> generate_scenes(const SceneGenConfig& cfg);

inline constexpr double kMinTb = 100.0;
inline constexpr double kMaxTb = 350.0;
inline constexpr double kMixTolerance = 0.10;

}  // namespace stormclass

#endif  // STORMCLASS_SCENEGEN_HPP
