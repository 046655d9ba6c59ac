#ifndef STORMCLASS_CLUSTERING_HPP
#define STORMCLASS_CLUSTERING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stormclass/core.hpp"

namespace stormclass {

/// K-means result in standardized science space. The standardization is stored so that
/// assignment of new points is self-contained.
struct ClusterModel {
  int k = 0;
  Eigen::Vector3d feature_means = Eigen::Vector3d::Zero();
  Eigen::Vector3d feature_sds = Eigen::Vector3d::Ones();
  Eigen::MatrixX3d centroids;  // k x 3, standardized
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // per Lloyd iteration of the winning restart
  std::vector<std::string> warnings;

  Eigen::Vector3d standardize(const ScienceVector& s) const {
    return (s.as_vector() - feature_means).cwiseQuotient(feature_sds);
  }
  /// Centroid in raw science units.
  Eigen::Vector3d destandardized_centroid(int cluster) const {
    return centroids.row(cluster).transpose().cwiseProduct(feature_sds) + feature_means;
  }
};

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

/// Per-feature mean and population sd; zero-variance features get sd = 1.
struct Standardizer {
  Eigen::Vector3d means;
  Eigen::Vector3d sds;
  std::vector<std::string> warnings;
};
Standardizer fit_standardizer(std::span<const ScienceVector> points);
Eigen::MatrixX3d standardize(std::span<const ScienceVector> points, const Standardizer& st);

/// k-means++ seeding, Lloyd iterations to an assignment fixpoint, best restart by inertia.
/// Throws DegenerateInput when fewer than k distinct points exist.
ClusterModel fit_kmeans(std::span<const ScienceVector> points, int k, std::uint64_t seed,
                        const KMeansOptions& options = {});

/// Nearest centroid in standardized space; ties go to the lowest index.
int assign(const ClusterModel& model, const ScienceVector& point);
std::vector<int> assign_all(const ClusterModel& model, std::span<const ScienceVector> points);

inline constexpr std::size_t kDefaultSilhouetteCap = 10000;

/// Mean silhouette over up to `sample_cap` uniformly sampled points, each scored against
/// the full point set. Points in singleton clusters score 0. Throws UndefinedScore when
/// fewer than two clusters are present.
double silhouette_score(std::span<const ScienceVector> points, std::span<const int> assignments,
                        std::size_t sample_cap, std::uint64_t seed);

struct SilhouettePoint {
  int k = 0;
  double score = 0.0;
};

std::vector<SilhouettePoint> sweep_k(std::span<const ScienceVector> points, int k_min, int k_max,
                                     std::uint64_t seed, std::size_t sample_cap = kDefaultSilhouetteCap,
                                     const KMeansOptions& options = {});

}  // namespace stormclass

#endif  // STORMCLASS_CLUSTERING_HPP
