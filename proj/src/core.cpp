#include "stormclass/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stormclass/rng.hpp"

namespace stormclass {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMapping: return "invalid-mapping";
    case ErrorKind::Config: return "config";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::UndefinedScore: return "undefined-score";
    case ErrorKind::InsufficientClusters: return "insufficient-clusters";
    case ErrorKind::MissingScience: return "missing-science";
    case ErrorKind::DegenerateModel: return "degenerate-model";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::NumericOverflow: return "numeric-overflow";
    case ErrorKind::DivergedTraining: return "diverged-training";
    case ErrorKind::InvalidPlan: return "invalid-plan";
    case ErrorKind::InfeasibleFolds: return "infeasible-folds";
    case ErrorKind::MissingLabel: return "missing-label";
    case ErrorKind::InvalidSpec: return "invalid-spec";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::BandOrder: return "band-order";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

double keyed_standard_normal(std::uint64_t key) {
  // Box-Muller on two 53-bit uniforms drawn from consecutive splitmix outputs.
  const std::uint64_t a = splitmix64(key);
  const std::uint64_t b = splitmix64(a ^ 0xd1b54a32d192ed03ULL);
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

namespace {

struct BandInfo {
  std::string_view name;
  std::string_view column;
};

constexpr std::array<BandInfo, kBandCount> kBands{{
    {"Tb250+0.0", "tb250_00"},
    {"Tb310+2.5", "tb310_p25"},
    {"Tb380-0.8", "tb380_m08"},
    {"Tb380-1.8", "tb380_m18"},
    {"Tb380-3.3", "tb380_m33"},
    {"Tb380-6.2", "tb380_m62"},
    {"Tb380-9.5", "tb380_m95"},
    {"Tb670+0.0", "tb670_00"},
}};

constexpr std::array<std::string_view, kClassCount> kClass5Names{
    "ClearSky", "ThinCirrus", "Cirrus", "RainyAnvil", "ConvectionCore"};
constexpr std::array<std::string_view, 3> kClass3Names{"NonStorm", "RainyAnvil", "ConvectionCore"};
constexpr std::array<std::string_view, 2> kClass2Names{"NonStorm", "Storm"};

template <std::size_t N>
std::vector<std::string> to_strings(const std::array<std::string_view, N>& names) {
  return {names.begin(), names.end()};
}

}  // namespace

const std::array<BandId, kBandCount>& all_bands() {
  static const std::array<BandId, kBandCount> bands{
      BandId::Tb250p00, BandId::Tb310p25, BandId::Tb380m08, BandId::Tb380m18,
      BandId::Tb380m33, BandId::Tb380m62, BandId::Tb380m95, BandId::Tb670p00};
  return bands;
}

std::string_view band_name(BandId band) { return kBands[static_cast<std::size_t>(band)].name; }
std::string_view band_column(BandId band) { return kBands[static_cast<std::size_t>(band)].column; }
bool is_tb380(BandId band) { return band_name(band).starts_with("Tb380"); }

std::vector<std::string> canonical_band_order() {
  std::vector<std::string> out;
  for (BandId b : all_bands()) out.emplace_back(band_name(b));
  return out;
}

bool ScienceVector::valid() const {
  return std::isfinite(iwp) && std::isfinite(particle_size) && std::isfinite(cloud_top_height) &&
         iwp >= 0.0 && particle_size >= 0.0 && cloud_top_height >= 0.0;
}

const std::array<CloudClass5, kClassCount>& all_classes5() {
  static const std::array<CloudClass5, kClassCount> classes{
      CloudClass5::ClearSky, CloudClass5::ThinCirrus, CloudClass5::Cirrus, CloudClass5::RainyAnvil,
      CloudClass5::ConvectionCore};
  return classes;
}

std::string_view class_name(CloudClass5 c) { return kClass5Names[static_cast<std::size_t>(c)]; }
std::string_view class_name(CloudClass3 c) { return kClass3Names[static_cast<std::size_t>(c)]; }
std::string_view class_name(CloudClass2 c) { return kClass2Names[static_cast<std::size_t>(c)]; }

std::optional<CloudClass5> parse_class5(std::string_view name) {
  for (std::size_t i = 0; i < kClass5Names.size(); ++i)
    if (kClass5Names[i] == name) return static_cast<CloudClass5>(i);
  return std::nullopt;
}

std::vector<std::string> class5_names() { return to_strings(kClass5Names); }
std::vector<std::string> class3_names() { return to_strings(kClass3Names); }
std::vector<std::string> class2_names() { return to_strings(kClass2Names); }

CloudClass3 collapse5to3(CloudClass5 label) {
  switch (label) {
    case CloudClass5::RainyAnvil: return CloudClass3::RainyAnvil;
    case CloudClass5::ConvectionCore: return CloudClass3::ConvectionCore;
    default: return CloudClass3::NonStorm;
  }
}

CloudClass2 collapse3to2(CloudClass3 label) {
  return label == CloudClass3::NonStorm ? CloudClass2::NonStorm : CloudClass2::Storm;
}

std::string_view region_name(Region r) { return r == Region::Tropical ? "tropical" : "nontropical"; }

Region parse_region(std::string_view name) {
  if (name == "tropical") return Region::Tropical;
  if (name == "nontropical") return Region::NonTropical;
  throw Error(ErrorKind::Config, "unknown region '" + std::string(name) + "'");
}

GridGeometry default_geometry(Region region) {
  if (region == Region::Tropical) return {119, 208, 15.0};
  return {1998, 270, 1.33};
}

void SceneGrid::validate() const {
  if (height <= 0 || width <= 0 || !(pixel_size_km > 0.0))
    throw Error(ErrorKind::Schema, "scene geometry must be positive");
  if (pixels.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
    throw Error(ErrorKind::Schema, "scene has " + std::to_string(pixels.size()) + " pixels, expected " +
                                       std::to_string(height * width));
  for (const auto& p : pixels)
    if (p.row < 0 || p.row >= height || p.col < 0 || p.col >= width)
      throw Error(ErrorKind::Schema, "pixel (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                                         ") outside grid");
}

std::vector<PixelRecord> flatten(std::span<const SceneGrid> scenes) {
  std::size_t n = 0;
  for (const auto& s : scenes) n += s.pixels.size();
  std::vector<PixelRecord> out;
  out.reserve(n);
  for (const auto& s : scenes) out.insert(out.end(), s.pixels.begin(), s.pixels.end());
  return out;
}

Dataset to_dataset(std::span<const PixelRecord> pixels) {
  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(pixels.size()), kBandCount);
  data.labels.reserve(pixels.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    data.features.row(static_cast<Eigen::Index>(i)) = pixels[i].radiance.transpose();
    if (!pixels[i].label) {
      missing.push_back(i);
      continue;
    }
    data.labels.push_back(*pixels[i].label);
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << missing.size() << " unlabeled pixel(s), first indices:";
    for (std::size_t j = 0; j < std::min<std::size_t>(missing.size(), 10); ++j) msg << ' ' << missing[j];
    throw Error(ErrorKind::MissingLabel, msg.str());
  }
  return data;
}

std::array<std::size_t, kClassCount> class_counts(std::span<const CloudClass5> labels) {
  std::array<std::size_t, kClassCount> counts{};
  for (CloudClass5 c : labels) ++counts[static_cast<std::size_t>(index_of(c))];
  return counts;
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> names) : class_names(std::move(names)) {
  const auto n = static_cast<Eigen::Index>(class_names.size());
  counts.setZero(n, n);
}

std::optional<double> ConfusionMatrix::recall(int truth) const {
  const std::int64_t row = row_total(truth);
  if (row == 0) return std::nullopt;
  return static_cast<double>(counts(truth, truth)) / static_cast<double>(row);
}

std::vector<std::optional<double>> ConfusionMatrix::recalls() const {
  std::vector<std::optional<double>> out;
  for (int i = 0; i < size(); ++i) out.push_back(recall(i));
  return out;
}

std::optional<double> ConfusionMatrix::accuracy() const {
  const std::int64_t n = total();
  if (n == 0) return std::nullopt;
  return static_cast<double>(counts.diagonal().sum()) / static_cast<double>(n);
}

int ConfusionMatrix::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i)
    if (class_names[static_cast<std::size_t>(i)] == name) return i;
  return -1;
}

ClassMapping ClassMapping::five_to_three() {
  ClassMapping m{class3_names(), {}};
  for (CloudClass5 c : all_classes5()) m.assign[std::string(class_name(c))] = class_name(collapse5to3(c));
  return m;
}

ClassMapping ClassMapping::three_to_two() {
  ClassMapping m{class2_names(), {}};
  for (auto c : {CloudClass3::NonStorm, CloudClass3::RainyAnvil, CloudClass3::ConvectionCore})
    m.assign[std::string(class_name(c))] = class_name(collapse3to2(c));
  return m;
}

ClassMapping ClassMapping::five_to_two() { return compose(five_to_three(), three_to_two()); }

ClassMapping ClassMapping::compose(const ClassMapping& first, const ClassMapping& second) {
  ClassMapping out{second.targets, {}};
  for (const auto& [from, mid] : first.assign) {
    auto it = second.assign.find(mid);
    if (it == second.assign.end())
      throw Error(ErrorKind::InvalidMapping, "composition leaves '" + mid + "' unmapped");
    out.assign[from] = it->second;
  }
  return out;
}

ConfusionMatrix collapse_matrix(const ConfusionMatrix& cm, const ClassMapping& mapping) {
  std::vector<int> target_of(cm.class_names.size());
  for (std::size_t i = 0; i < cm.class_names.size(); ++i) {
    auto it = mapping.assign.find(cm.class_names[i]);
    if (it == mapping.assign.end())
      throw Error(ErrorKind::InvalidMapping, "mapping does not cover class '" + cm.class_names[i] + "'");
    auto pos = std::find(mapping.targets.begin(), mapping.targets.end(), it->second);
    if (pos == mapping.targets.end())
      throw Error(ErrorKind::InvalidMapping, "mapping target '" + it->second + "' is not a declared class");
    target_of[i] = static_cast<int>(pos - mapping.targets.begin());
  }
  ConfusionMatrix out(mapping.targets);
  for (int t = 0; t < cm.size(); ++t)
    for (int p = 0; p < cm.size(); ++p) out.add(target_of[t], target_of[p], cm.counts(t, p));
  return out;
}

}  // namespace stormclass
