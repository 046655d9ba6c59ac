#include "stormclass/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "stormclass/rng.hpp"

namespace stormclass {

namespace {

struct LloydResult {
  Eigen::MatrixX3d centroids;
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> trace;
};

// Squared distances of every point to every centroid (n x k).
Eigen::MatrixXd squared_distances(const Eigen::MatrixX3d& x, const Eigen::MatrixX3d& c) {
  Eigen::MatrixXd d(x.rows(), c.rows());
  for (Eigen::Index j = 0; j < c.rows(); ++j) d.col(j) = (x.rowwise() - c.row(j)).rowwise().squaredNorm();
  return d;
}

double assign_nearest(const Eigen::MatrixXd& d2, std::vector<int>& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < d2.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < d2.cols(); ++j)
      if (d2(i, j) < d2(i, best)) best = j;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    inertia += d2(i, best);
  }
  return inertia;
}

Eigen::MatrixX3d kmeans_pp(const Eigen::MatrixX3d& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixX3d c(k, 3);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  c.row(0) = x.row(pick(rng));
  Eigen::VectorXd nearest = (x.rowwise() - c.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int j = 1; j < k; ++j) {
    const double total = nearest.sum();
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0 && nearest[i] > 0.0) {
          chosen = i;
          break;
        }
      }
      // Rounding can leave target >= 0 after the loop; take the last point with mass.
      if (nearest[chosen] == 0.0)
        for (Eigen::Index i = n - 1; i >= 0; --i)
          if (nearest[i] > 0.0) {
            chosen = i;
            break;
          }
    }
    c.row(j) = x.row(chosen);
    nearest = nearest.cwiseMin((x.rowwise() - c.row(j)).rowwise().squaredNorm());
  }
  return c;
}

LloydResult lloyd(const Eigen::MatrixX3d& x, Eigen::MatrixX3d centroids, int max_iterations) {
  const Eigen::Index n = x.rows();
  const auto k = static_cast<int>(centroids.rows());
  LloydResult r;
  r.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> next(static_cast<std::size_t>(n));
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::MatrixXd d2 = squared_distances(x, centroids);
    const double inertia = assign_nearest(d2, next);
    r.trace.push_back(inertia);
    r.inertia = inertia;
    if (next == r.labels) break;
    r.labels = next;

    Eigen::MatrixX3d sums = Eigen::MatrixX3d::Zero(k, 3);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(r.labels[static_cast<std::size_t>(i)]) += x.row(i);
      counts[r.labels[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0.0) {
        centroids.row(j) = sums.row(j) / counts[j];
        continue;
      }
      // Empty cluster: move it onto the point currently worst served.
      Eigen::Index far = 0;
      double worst = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double di = d2(i, r.labels[static_cast<std::size_t>(i)]);
        if (di > worst) {
          worst = di;
          far = i;
        }
      }
      centroids.row(j) = x.row(far);
      r.labels[static_cast<std::size_t>(far)] = j;
    }
  }
  r.centroids = std::move(centroids);
  return r;
}

std::size_t count_distinct(const Eigen::MatrixX3d& x, std::size_t enough) {
  std::set<std::array<double, 3>> seen;
  for (Eigen::Index i = 0; i < x.rows() && seen.size() < enough; ++i) seen.insert({x(i, 0), x(i, 1), x(i, 2)});
  return seen.size();
}

}  // namespace

Standardizer fit_standardizer(std::span<const ScienceVector> points) {
  Standardizer st;
  st.means.setZero();
  st.sds.setOnes();
  if (points.empty()) return st;
  const double n = static_cast<double>(points.size());
  for (const auto& p : points) st.means += p.as_vector();
  st.means /= n;
  Eigen::Vector3d var = Eigen::Vector3d::Zero();
  for (const auto& p : points) var += (p.as_vector() - st.means).cwiseAbs2();
  var /= n;
  static constexpr std::array<const char*, 3> kNames{"iwp", "particle_size", "cloud_top_height"};
  for (int f = 0; f < 3; ++f) {
    if (var[f] > 0.0) {
      st.sds[f] = std::sqrt(var[f]);
    } else {
      st.sds[f] = 1.0;
      st.warnings.push_back(std::string("feature ") + kNames[static_cast<std::size_t>(f)] +
                            " has zero variance; using sd = 1");
    }
  }
  return st;
}

Eigen::MatrixX3d standardize(std::span<const ScienceVector> points, const Standardizer& st) {
  Eigen::MatrixX3d x(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = (points[i].as_vector() - st.means).cwiseQuotient(st.sds).transpose();
  return x;
}

ClusterModel fit_kmeans(std::span<const ScienceVector> points, int k, std::uint64_t seed,
                        const KMeansOptions& options) {
  if (k < 1) throw Error(ErrorKind::DegenerateInput, "k must be >= 1");
  if (points.size() < static_cast<std::size_t>(k))
    throw Error(ErrorKind::DegenerateInput, "need at least k points");
  const Standardizer st = fit_standardizer(points);
  const Eigen::MatrixX3d x = standardize(points, st);
  if (count_distinct(x, static_cast<std::size_t>(k)) < static_cast<std::size_t>(k))
    throw Error(ErrorKind::DegenerateInput, "fewer distinct points than k = " + std::to_string(k));

  LloydResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(restart)}));
    LloydResult r = lloyd(x, kmeans_pp(x, k, rng), options.max_iterations);
    if (r.inertia < best.inertia) best = std::move(r);
  }

  ClusterModel model;
  model.k = k;
  model.feature_means = st.means;
  model.feature_sds = st.sds;
  model.centroids = std::move(best.centroids);
  model.inertia = best.inertia;
  model.inertia_trace = std::move(best.trace);
  model.warnings = st.warnings;
  return model;
}

int assign(const ClusterModel& model, const ScienceVector& point) {
  const Eigen::RowVector3d z = model.standardize(point).transpose();
  int best = 0;
  double best_d = (model.centroids.row(0) - z).squaredNorm();
  for (int j = 1; j < model.k; ++j) {
    const double d = (model.centroids.row(j) - z).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::vector<int> assign_all(const ClusterModel& model, std::span<const ScienceVector> points) {
  std::vector<int> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(assign(model, p));
  return out;
}

double silhouette_score(std::span<const ScienceVector> points, std::span<const int> assignments,
                        std::size_t sample_cap, std::uint64_t seed) {
  if (points.size() != assignments.size())
    throw Error(ErrorKind::DegenerateInput, "points and assignments differ in length");
  if (points.empty()) throw Error(ErrorKind::UndefinedScore, "no points");
  const int k = *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<double> sizes(static_cast<std::size_t>(k), 0.0);
  for (int a : assignments) {
    if (a < 0) throw Error(ErrorKind::DegenerateInput, "negative cluster index");
    sizes[static_cast<std::size_t>(a)] += 1.0;
  }
  if (std::count_if(sizes.begin(), sizes.end(), [](double s) { return s > 0.0; }) < 2)
    throw Error(ErrorKind::UndefinedScore, "silhouette needs at least two non-empty clusters");

  const Eigen::MatrixX3d x = standardize(points, fit_standardizer(points));
  const std::size_t n = points.size();
  std::vector<std::size_t> sample(n);
  std::iota(sample.begin(), sample.end(), 0);
  if (sample_cap < n) {
    Rng rng(seed);
    // Partial Fisher-Yates: the first sample_cap entries are a uniform subset.
    for (std::size_t i = 0; i < sample_cap; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(sample[i], sample[pick(rng)]);
    }
    sample.resize(sample_cap);
    std::sort(sample.begin(), sample.end());
  }

  std::vector<double> sums(static_cast<std::size_t>(k));
  double total = 0.0;
  for (std::size_t i : sample) {
    const int own = assignments[i];
    if (sizes[static_cast<std::size_t>(own)] <= 1.0) continue;  // singleton scores 0
    std::fill(sums.begin(), sums.end(), 0.0);
    const Eigen::RowVector3d xi = x.row(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < n; ++j)
      sums[static_cast<std::size_t>(assignments[j])] += (x.row(static_cast<Eigen::Index>(j)) - xi).norm();
    const double a = sums[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != own && sizes[static_cast<std::size_t>(c)] > 0.0)
        b = std::min(b, sums[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(sample.size());
}

std::vector<SilhouettePoint> sweep_k(std::span<const ScienceVector> points, int k_min, int k_max,
                                     std::uint64_t seed, std::size_t sample_cap, const KMeansOptions& options) {
  if (k_min < 2 || k_max < k_min || static_cast<std::size_t>(k_max) >= points.size())
    throw Error(ErrorKind::DegenerateInput, "k range must lie within [2, number of points)");
  std::vector<SilhouettePoint> curve;
  for (int k = k_min; k <= k_max; ++k) {
    const std::uint64_t sub = derive_seed(seed, {static_cast<std::uint64_t>(k)});
    const ClusterModel model = fit_kmeans(points, k, sub, options);
    const std::vector<int> labels = assign_all(model, points);
    curve.push_back({k, silhouette_score(points, labels, sample_cap, derive_seed(sub, "silhouette"))});
  }
  return curve;
}

}  // namespace stormclass
