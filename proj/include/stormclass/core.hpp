#ifndef STORMCLASS_CORE_HPP
#define STORMCLASS_CORE_HPP

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stormclass/error.hpp"

namespace stormclass {

inline constexpr int kBandCount = 8;
inline constexpr int kClassCount = 5;

// Radiometer channels in instrument order. The order is part of every model file.
enum class BandId : std::uint8_t {
  Tb250p00,
  Tb310p25,
  Tb380m08,
  Tb380m18,
  Tb380m33,
  Tb380m62,
  Tb380m95,
  Tb670p00,
};

const std::array<BandId, kBandCount>& all_bands();
std::string_view band_name(BandId band);    // "Tb380-0.8"
std::string_view band_column(BandId band);  // "tb380_m08"
bool is_tb380(BandId band);
std::vector<std::string> canonical_band_order();

template <typename Scalar>
using RadianceT = Eigen::Matrix<Scalar, kBandCount, 1>;

/// Brightness temperatures in kelvin, indexed by BandId ordinal.
using RadianceVector = RadianceT<double>;

/// Hidden science variables. IWP is treated as a unitless nonnegative magnitude,
/// particle size is in micrometers and cloud-top height in meters.
struct ScienceVector {
  double iwp = 0.0;
  double particle_size = 0.0;
  double cloud_top_height = 0.0;

  Eigen::Vector3d as_vector() const { return {iwp, particle_size, cloud_top_height}; }
  static ScienceVector from_vector(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
  bool is_zero() const { return iwp == 0.0 && particle_size == 0.0 && cloud_top_height == 0.0; }
  bool valid() const;

  friend bool operator==(const ScienceVector&, const ScienceVector&) = default;
};

// Ordered by storm intensity.
enum class CloudClass5 : std::uint8_t { ClearSky, ThinCirrus, Cirrus, RainyAnvil, ConvectionCore };
enum class CloudClass3 : std::uint8_t { NonStorm, RainyAnvil, ConvectionCore };
enum class CloudClass2 : std::uint8_t { NonStorm, Storm };

const std::array<CloudClass5, kClassCount>& all_classes5();
std::string_view class_name(CloudClass5 c);
std::string_view class_name(CloudClass3 c);
std::string_view class_name(CloudClass2 c);
std::optional<CloudClass5> parse_class5(std::string_view name);
std::vector<std::string> class5_names();
std::vector<std::string> class3_names();
std::vector<std::string> class2_names();

constexpr int index_of(CloudClass5 c) { return static_cast<int>(c); }
constexpr CloudClass5 class5_at(int i) { return static_cast<CloudClass5>(i); }

CloudClass3 collapse5to3(CloudClass5 label);
CloudClass2 collapse3to2(CloudClass3 label);
inline CloudClass2 collapse5to2(CloudClass5 label) { return collapse3to2(collapse5to3(label)); }
inline bool is_storm(CloudClass5 label) { return collapse5to2(label) == CloudClass2::Storm; }

/// Index of the largest score; ties go to the stronger storm class.
template <typename Derived>
int argmax_prefer_storm(const Eigen::DenseBase<Derived>& scores) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores(i) >= scores(best)) best = i;
  return best;
}

enum class Region : std::uint8_t { Tropical, NonTropical };
std::string_view region_name(Region r);
Region parse_region(std::string_view name);

struct GridGeometry {
  int height = 0;
  int width = 0;
  double pixel_size_km = 0.0;
};

/// 119x208 at 15 km for the tropical scenes, 1998x270 cutouts at 1.33 km otherwise.
GridGeometry default_geometry(Region region);

struct PixelRecord {
  int image_id = 0;
  int row = 0;
  int col = 0;
  RadianceVector radiance = RadianceVector::Zero();
  std::optional<ScienceVector> science;
  std::optional<CloudClass5> label;
};

struct SceneGrid {
  Region region = Region::Tropical;
  double pixel_size_km = 0.0;
  int height = 0;
  int width = 0;
  std::vector<PixelRecord> pixels;  // row-major

  int image_id() const { return pixels.empty() ? 0 : pixels.front().image_id; }
  const PixelRecord& at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  /// Throws Schema when the pixel count or coordinates disagree with the geometry.
  void validate() const;
};

std::vector<PixelRecord> flatten(std::span<const SceneGrid> scenes);

/// Dense training view: one row per pixel, columns in band order.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<CloudClass5> labels;

  Eigen::Index size() const { return features.rows(); }
};

/// Throws MissingLabel listing the first unlabeled pixels.
Dataset to_dataset(std::span<const PixelRecord> pixels);
std::array<std::size_t, kClassCount> class_counts(std::span<const CloudClass5> labels);

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<std::string> class_names;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> names);

  int size() const { return static_cast<int>(class_names.size()); }
  void add(int truth, int predicted, std::int64_t n = 1) { counts(truth, predicted) += n; }
  std::int64_t total() const { return counts.sum(); }
  std::int64_t row_total(int truth) const { return counts.row(truth).sum(); }
  /// Diagonal over row sum; empty for classes with no true members.
  std::optional<double> recall(int truth) const;
  std::vector<std::optional<double>> recalls() const;
  std::optional<double> accuracy() const;
  int index_of(std::string_view name) const;

  friend bool operator==(const ConfusionMatrix& a, const ConfusionMatrix& b) {
    return a.class_names == b.class_names && a.counts.rows() == b.counts.rows() &&
           a.counts.cols() == b.counts.cols() && a.counts == b.counts;
  }
};

/// Surjection from source class names onto an ordered list of target names.
struct ClassMapping {
  std::vector<std::string> targets;
  std::map<std::string, std::string> assign;

  static ClassMapping five_to_three();
  static ClassMapping three_to_two();
  static ClassMapping five_to_two();
  /// (second after first)
  static ClassMapping compose(const ClassMapping& first, const ClassMapping& second);
};

/// Sums counts over preimage blocks. Throws InvalidMapping if a class is not covered.
ConfusionMatrix collapse_matrix(const ConfusionMatrix& cm, const ClassMapping& mapping);

}  // namespace stormclass

#endif  // STORMCLASS_CORE_HPP
