#ifndef STORMCLASS_AUTOLABEL_HPP
#define STORMCLASS_AUTOLABEL_HPP

#include <span>
#include <string>
#include <vector>

#include "stormclass/clustering.hpp"
#include "stormclass/core.hpp"

namespace stormclass {

struct ClusterDiagnostics {
  int cluster = 0;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();  // raw science units
  std::size_t members = 0;
  Eigen::Vector3d feature_sd = Eigen::Vector3d::Zero();
};

/// Cluster index -> cloud class, with the evidence used to derive it.
struct LabelMap {
  std::vector<CloudClass5> assignments;
  std::vector<ClusterDiagnostics> diagnostics;
  std::vector<std::string> warnings;

  CloudClass5 operator[](int cluster) const { return assignments.at(static_cast<std::size_t>(cluster)); }
};

inline constexpr double kZeroClusterEpsilon = 1e-6;

/// The cluster whose raw centroid is (numerically) zero becomes ClearSky; the rest are
/// ordered by centroid IWP and mapped onto the cloudy classes by increasing intensity.
/// With more than four cloudy clusters, contiguous runs (split at the three widest gaps
/// in ln(1 + iwp)) share a class. Orderings contradicted by particle size or cloud-top
/// height are reported as warnings, never reconciled.
LabelMap derive_label_map(const ClusterModel& model, std::span<const ScienceVector> points,
                          double zero_epsilon = kZeroClusterEpsilon);

/// Throws MissingScience naming the offending pixel indices.
std::vector<PixelRecord> label_pixels(const ClusterModel& model, const LabelMap& map,
                                      std::span<const PixelRecord> pixels);

}  // namespace stormclass

#endif  // STORMCLASS_AUTOLABEL_HPP
