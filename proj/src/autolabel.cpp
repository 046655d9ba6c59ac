#include "stormclass/autolabel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace stormclass {

namespace {

constexpr std::array<CloudClass5, 4> kCloudy{CloudClass5::ThinCirrus, CloudClass5::Cirrus,
                                             CloudClass5::RainyAnvil, CloudClass5::ConvectionCore};

// Group boundaries for m > 4 sorted clusters: cut after the three widest gaps.
std::vector<int> group_sorted(const std::vector<double>& log_iwp) {
  const int m = static_cast<int>(log_iwp.size());
  std::vector<int> groups(static_cast<std::size_t>(m), 0);
  if (m <= 4) {
    std::iota(groups.begin(), groups.end(), 0);
    return groups;
  }
  std::vector<int> gap_idx(static_cast<std::size_t>(m - 1));
  std::iota(gap_idx.begin(), gap_idx.end(), 0);
  std::stable_sort(gap_idx.begin(), gap_idx.end(), [&](int a, int b) {
    return log_iwp[static_cast<std::size_t>(a) + 1] - log_iwp[static_cast<std::size_t>(a)] >
           log_iwp[static_cast<std::size_t>(b) + 1] - log_iwp[static_cast<std::size_t>(b)];
  });
  std::vector<int> cuts(gap_idx.begin(), gap_idx.begin() + 3);
  std::sort(cuts.begin(), cuts.end());
  int g = 0;
  for (int i = 0; i < m; ++i) {
    groups[static_cast<std::size_t>(i)] = g;
    if (g < 3 && i == cuts[static_cast<std::size_t>(g)]) ++g;
  }
  return groups;
}

}  // namespace

LabelMap derive_label_map(const ClusterModel& model, std::span<const ScienceVector> points, double zero_epsilon) {
  if (model.k < 2) throw Error(ErrorKind::InsufficientClusters, "label derivation needs k >= 2");
  const auto k = static_cast<std::size_t>(model.k);

  LabelMap map;
  map.assignments.assign(k, CloudClass5::ClearSky);
  map.diagnostics.resize(k);
  std::vector<Eigen::Vector3d> sums(k, Eigen::Vector3d::Zero());
  std::vector<Eigen::Vector3d> sq(k, Eigen::Vector3d::Zero());
  for (const auto& p : points) {
    const auto c = static_cast<std::size_t>(assign(model, p));
    const Eigen::Vector3d v = p.as_vector();
    sums[c] += v;
    sq[c] += v.cwiseAbs2();
    ++map.diagnostics[c].members;
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto& d = map.diagnostics[c];
    d.cluster = static_cast<int>(c);
    d.centroid = model.destandardized_centroid(static_cast<int>(c));
    if (d.members > 0) {
      const double n = static_cast<double>(d.members);
      const Eigen::Vector3d mean = sums[c] / n;
      d.feature_sd = (sq[c] / n - mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
    }
  }

  // Clear sky: the numerically-zero centroid, else the lowest-IWP centroid.
  int clear = -1;
  for (std::size_t c = 0; c < k; ++c)
    if (map.diagnostics[c].centroid.norm() < zero_epsilon) {
      clear = static_cast<int>(c);
      break;
    }
  if (clear < 0) {
    clear = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (map.diagnostics[c].centroid[0] < map.diagnostics[static_cast<std::size_t>(clear)].centroid[0])
        clear = static_cast<int>(c);
    map.warnings.push_back("no zero-valued cluster; cluster " + std::to_string(clear) +
                           " (lowest iwp) assigned ClearSky");
  }

  std::vector<int> order;
  for (std::size_t c = 0; c < k; ++c)
    if (static_cast<int>(c) != clear) order.push_back(static_cast<int>(c));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return map.diagnostics[static_cast<std::size_t>(a)].centroid[0] <
           map.diagnostics[static_cast<std::size_t>(b)].centroid[0];
  });
  if (order.size() < kCloudy.size())
    map.warnings.push_back("only " + std::to_string(order.size()) +
                           " cloudy cluster(s); classes above " +
                           std::string(class_name(kCloudy[order.size() - 1])) + " are unrepresented");

  std::vector<double> log_iwp;
  for (int c : order) log_iwp.push_back(std::log1p(std::max(0.0, map.diagnostics[static_cast<std::size_t>(c)].centroid[0])));
  const std::vector<int> groups = group_sorted(log_iwp);
  for (std::size_t i = 0; i < order.size(); ++i)
    map.assignments[static_cast<std::size_t>(order[i])] = kCloudy[static_cast<std::size_t>(groups[i])];

  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& lo = map.diagnostics[static_cast<std::size_t>(order[i - 1])].centroid;
    const auto& hi = map.diagnostics[static_cast<std::size_t>(order[i])].centroid;
    if (!(hi[1] > lo[1])) {
      std::ostringstream msg;
      msg << "particle_size not ascending between clusters " << order[i - 1] << " and " << order[i] << " ("
          << lo[1] << " -> " << hi[1] << ")";
      map.warnings.push_back(msg.str());
    }
    if (!(hi[2] < lo[2])) {
      std::ostringstream msg;
      msg << "cloud_top_height not descending between clusters " << order[i - 1] << " and " << order[i] << " ("
          << lo[2] << " -> " << hi[2] << ")";
      map.warnings.push_back(msg.str());
    }
  }
  map.assignments[static_cast<std::size_t>(clear)] = CloudClass5::ClearSky;
  return map;
}

std::vector<PixelRecord> label_pixels(const ClusterModel& model, const LabelMap& map,
                                      std::span<const PixelRecord> pixels) {
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < pixels.size(); ++i)
    if (!pixels[i].science) missing.push_back(i);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << missing.size() << " pixel(s) without science values at indices:";
    for (std::size_t j = 0; j < std::min<std::size_t>(missing.size(), 20); ++j) msg << ' ' << missing[j];
    if (missing.size() > 20) msg << " ...";
    throw Error(ErrorKind::MissingScience, msg.str());
  }
  std::vector<PixelRecord> out(pixels.begin(), pixels.end());
  for (auto& p : out) p.label = map[assign(model, *p.science)];
  return out;
}

}  // namespace stormclass
