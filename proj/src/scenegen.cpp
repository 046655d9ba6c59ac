#include "stormclass/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "stormclass/rng.hpp"

namespace stormclass {

namespace {

// Cloudy classes in science-parameter order.
constexpr std::array<CloudClass5, 4> kCloudy{CloudClass5::ThinCirrus, CloudClass5::Cirrus,
                                             CloudClass5::RainyAnvil, CloudClass5::ConvectionCore};

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct Cell {
  double y;
  double x;
};

// Buckets cell centers on a square lattice so that the nearest-center query only needs
// the 3x3 neighborhood of a pixel's bucket when the query radius is <= bucket size.
class CellIndex {
 public:
  CellIndex(std::vector<Cell> cells, double bucket) : cells_(std::move(cells)), bucket_(bucket) {
    for (std::size_t i = 0; i < cells_.size(); ++i) buckets_[key(cell_of(cells_[i].y), cell_of(cells_[i].x))].push_back(i);
  }

  /// Distance to the nearest center, or +inf when none lies within one bucket.
  double nearest(double y, double x) const {
    const long by = cell_of(y);
    const long bx = cell_of(x);
    double best = std::numeric_limits<double>::infinity();
    for (long dy = -1; dy <= 1; ++dy)
      for (long dx = -1; dx <= 1; ++dx) {
        auto it = buckets_.find(key(by + dy, bx + dx));
        if (it == buckets_.end()) continue;
        for (std::size_t i : it->second) best = std::min(best, std::hypot(cells_[i].y - y, cells_[i].x - x));
      }
    return best;
  }

 private:
  long cell_of(double v) const { return static_cast<long>(std::floor(v / bucket_)); }
  static std::int64_t key(long a, long b) { return (static_cast<std::int64_t>(a) << 32) ^ static_cast<std::uint32_t>(b); }

  std::vector<Cell> cells_;
  double bucket_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets_;
};

CloudClass5 ring_class(double distance, const StormRadii& r) {
  if (distance <= r.core) return CloudClass5::ConvectionCore;
  if (distance <= r.anvil) return CloudClass5::RainyAnvil;
  if (distance <= r.cirrus) return CloudClass5::Cirrus;
  if (distance <= r.thin_cirrus) return CloudClass5::ThinCirrus;
  return CloudClass5::ClearSky;
}

}  // namespace

SceneGenConfig default_scenegen_config(Region region) {
  SceneGenConfig cfg;
  cfg.region = region;
  cfg.seed = 20230101;
  cfg.class_science = {{
      {{0.05, 0.3}, {20.0, 0.15}, {13000.0, 400.0}},
      {{0.2, 0.3}, {60.0, 0.15}, {10000.0, 400.0}},
      {{0.8, 0.25}, {150.0, 0.15}, {7000.0, 400.0}},
      {{2.0, 0.15}, {300.0, 0.12}, {4000.0, 400.0}},
  }};
  cfg.band_gain << 0.5, 0.6, 0.9, 1.0, 1.1, 1.2, 1.3, 0.4;
  cfg.clear_sky_tb << 270.0, 265.0, 255.0, 250.0, 245.0, 240.0, 235.0, 275.0;
  cfg.nuisance_sd = 12.0;
  cfg.image_offset_sd = 0.5;
  cfg.particle_size_ref = 100.0;

  const GridGeometry geom = default_geometry(region);
  cfg.height = geom.height;
  cfg.width = geom.width;
  cfg.pixel_size_km = geom.pixel_size_km;
  if (region == Region::Tropical) {
    cfg.images = 13;
    cfg.cells_per_image_mean = 73.0;
    cfg.radii = {3.0, 6.45, 8.65, 11.4};
    cfg.separability = 34.0;
    cfg.target_mix = std::array<double, kClassCount>{0.30, 0.20, 0.18, 0.24, 0.08};
  } else {
    cfg.images = 29;
    // Same cell density per pixel as a 222x90 cutout with 34 cells.
    cfg.cells_per_image_mean = 0.0017 * geom.height * geom.width;
    cfg.radii = {3.0, 6.45, 7.5, 9.0};
    cfg.separability = 17.0;
    cfg.target_mix = std::array<double, kClassCount>{0.65, 0.09, 0.06, 0.15, 0.05};
  }
  return cfg;
}

std::array<double, kClassCount> expected_mix(const SceneGenConfig& cfg) {
  const double density = cfg.cells_per_image_mean / (static_cast<double>(cfg.height) * cfg.width);
  auto outside = [&](double r) { return std::exp(-density * std::numbers::pi * r * r); };
  const double c = outside(cfg.radii.core);
  const double a = outside(cfg.radii.anvil);
  const double ci = outside(cfg.radii.cirrus);
  const double t = outside(cfg.radii.thin_cirrus);
  return {t, ci - t, a - ci, c - a, 1.0 - c};
}

std::array<double, kClassCount> realized_mix(std::span<const SceneGrid> scenes) {
  std::array<double, kClassCount> mix{};
  double n = 0.0;
  for (const auto& s : scenes)
    for (const auto& p : s.pixels) {
      if (!p.label) continue;
      mix[static_cast<std::size_t>(index_of(*p.label))] += 1.0;
      n += 1.0;
    }
  if (n > 0.0)
    for (double& m : mix) m /= n;
  return mix;
}

void validate(const SceneGenConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (cfg.images < 1) fail("images must be >= 1");
  if (cfg.height < 1 || cfg.width < 1) fail("height and width must be positive");
  if (!(cfg.pixel_size_km > 0.0)) fail("pixel_size_km must be positive");
  if (!(cfg.cells_per_image_mean >= 0.0) || !std::isfinite(cfg.cells_per_image_mean))
    fail("cells_per_image_mean must be finite and nonnegative");
  const auto& r = cfg.radii;
  if (!(0.0 < r.core && r.core < r.anvil && r.anvil < r.cirrus && r.cirrus < r.thin_cirrus))
    fail("radii must satisfy 0 < core < anvil < cirrus < thin_cirrus");
  for (std::size_t i = 0; i < cfg.class_science.size(); ++i) {
    const auto& p = cfg.class_science[i];
    if (!(p.iwp.median > 0.0 && p.particle_size.median > 0.0 && p.cloud_top_height.mean > 0.0))
      fail("class science medians must be positive");
    if (!(p.iwp.sigma >= 0.0 && p.particle_size.sigma >= 0.0 && p.cloud_top_height.sd >= 0.0))
      fail("class science scales must be nonnegative");
    if (i == 0) continue;
    const auto& q = cfg.class_science[i - 1];
    if (!(p.iwp.median > q.iwp.median)) fail("iwp medians must strictly increase with storm intensity");
    if (!(p.particle_size.median > q.particle_size.median))
      fail("particle_size medians must strictly increase with storm intensity");
    if (!(p.cloud_top_height.mean < q.cloud_top_height.mean))
      fail("cloud_top_height means must strictly decrease with storm intensity");
  }
  if (!(cfg.separability > 0.0)) fail("separability must be positive");
  double min380 = std::numeric_limits<double>::infinity();
  double max_other = -std::numeric_limits<double>::infinity();
  for (BandId b : all_bands()) {
    const double g = cfg.band_gain[static_cast<int>(b)];
    if (!(g > 0.0)) fail("band_gain must be strictly positive");
    if (is_tb380(b))
      min380 = std::min(min380, g);
    else
      max_other = std::max(max_other, g);
    const double tb = cfg.clear_sky_tb[static_cast<int>(b)];
    if (!(tb >= kMinTb && tb <= kMaxTb)) fail("clear_sky_tb must lie in [100, 350] K");
  }
  if (!(min380 > max_other)) fail("Tb380 band gains must exceed every other band gain");
  if (!(cfg.nuisance_sd >= 0.0) || !(cfg.image_offset_sd >= 0.0)) fail("nuisance sds must be nonnegative");
  if (!(cfg.particle_size_ref > 0.0)) fail("particle_size_ref must be positive");

  if (cfg.target_mix) {
    const auto& target = *cfg.target_mix;
    double sum = 0.0;
    for (double t : target) {
      if (!(t >= 0.0)) fail("target_mix entries must be nonnegative");
      sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-6) fail("target_mix must sum to 1");
    const auto expected = expected_mix(cfg);
    for (std::size_t c = 0; c < expected.size(); ++c)
      if (std::abs(expected[c] - target[c]) > kMixTolerance)
        fail("target_mix unreachable: " + std::string(class_name(class5_at(static_cast<int>(c)))) +
             " target " + fmt(target[c]) + " but cell density and radii give " + fmt(expected[c]));
  }
}

double particle_size_modifier(double particle_size, double ref) {
  return 0.5 + 0.5 * std::tanh(particle_size / ref);
}

RadianceVector forward_radiance(const ScienceVector& science, const SceneGenConfig& cfg,
                                const RadianceVector& nuisance) {
  const double depth = cfg.separability * std::log1p(science.iwp) *
                       particle_size_modifier(science.particle_size, cfg.particle_size_ref);
  RadianceVector tb = cfg.clear_sky_tb - depth * cfg.band_gain + nuisance;
  return tb.cwiseMax(kMinTb).cwiseMin(kMaxTb);
}

SceneGrid generate_image(const SceneGenConfig& cfg, int image_id) {
  Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(image_id)}));
  std::normal_distribution<double> normal(0.0, 1.0);

  // Centers fall in the image padded by the outermost radius, so every pixel sees a
  // homogeneous Poisson field within that radius.
  const double pad = cfg.radii.thin_cirrus;
  const double ext_h = cfg.height + 2.0 * pad;
  const double ext_w = cfg.width + 2.0 * pad;
  const double rate = cfg.cells_per_image_mean * ext_h * ext_w / (static_cast<double>(cfg.height) * cfg.width);
  std::vector<Cell> cells;
  if (rate > 0.0) {
    const int count = std::poisson_distribution<int>(rate)(rng);
    std::uniform_real_distribution<double> uy(-pad, cfg.height + pad);
    std::uniform_real_distribution<double> ux(-pad, cfg.width + pad);
    cells.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const double y = uy(rng);
      const double x = ux(rng);
      cells.push_back({y, x});
    }
  }
  const CellIndex index(std::move(cells), std::max(pad, 1.0));

  RadianceVector offset;
  for (int b = 0; b < kBandCount; ++b) offset[b] = cfg.image_offset_sd * normal(rng);

  SceneGrid grid;
  grid.region = cfg.region;
  grid.pixel_size_km = cfg.pixel_size_km;
  grid.height = cfg.height;
  grid.width = cfg.width;
  grid.pixels.reserve(static_cast<std::size_t>(cfg.height) * cfg.width);
  for (int row = 0; row < cfg.height; ++row) {
    for (int col = 0; col < cfg.width; ++col) {
      PixelRecord p;
      p.image_id = image_id;
      p.row = row;
      p.col = col;
      const CloudClass5 label = ring_class(index.nearest(row, col), cfg.radii);
      ScienceVector sci;
      if (label != CloudClass5::ClearSky) {
        const auto& params = cfg.class_science[static_cast<std::size_t>(index_of(label) - 1)];
        sci.iwp = params.iwp.median * std::exp(params.iwp.sigma * normal(rng));
        sci.particle_size = params.particle_size.median * std::exp(params.particle_size.sigma * normal(rng));
        sci.cloud_top_height =
            std::max(0.0, params.cloud_top_height.mean + params.cloud_top_height.sd * normal(rng));
      }
      RadianceVector nuisance;
      for (int b = 0; b < kBandCount; ++b) nuisance[b] = cfg.nuisance_sd * normal(rng) + offset[b];
      p.radiance = forward_radiance(sci, cfg, nuisance);
      p.science = sci;
      p.label = label;
      grid.pixels.push_back(std::move(p));
    }
  }
  return grid;
}

std::vector<SceneGrid> generate_scenes(const SceneGenConfig& cfg) {
  validate(cfg);
  std::vector<SceneGrid> scenes;
  scenes.reserve(static_cast<std::size_t>(cfg.images));
  for (int id = 1; id <= cfg.images; ++id) scenes.push_back(generate_image(cfg, id));
  if (cfg.target_mix) {
    const auto mix = realized_mix(scenes);
    for (std::size_t c = 0; c < mix.size(); ++c)
      if (std::abs(mix[c] - (*cfg.target_mix)[c]) > kMixTolerance)
        throw Error(ErrorKind::Config, "realized mix for " + std::string(class_name(class5_at(static_cast<int>(c)))) +
                                           " is " + fmt(mix[c]) + ", outside +/-0.10 of the target");
  }
  return scenes;
}

}  // namespace stormclass
