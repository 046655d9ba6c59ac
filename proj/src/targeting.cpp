#include "stormclass/targeting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stormclass/rng.hpp"

namespace stormclass {

std::string_view policy_name(PolicyKind k) {
  return k == PolicyKind::Random ? "random" : "predicted_class_priority";
}

PolicyKind parse_policy(std::string_view name) {
  if (name == "random") return PolicyKind::Random;
  if (name == "predicted_class_priority") return PolicyKind::PredictedClassPriority;
  throw Error(ErrorKind::Config, "unknown targeting policy '" + std::string(name) + "'");
}

void validate(const TargetingPolicy& policy) {
  if (!(policy.budget_fraction > 0.0 && policy.budget_fraction <= 1.0))
    throw Error(ErrorKind::Config, "budget fraction must lie in (0, 1]");
  std::array<bool, kClassCount> seen{};
  for (CloudClass5 c : policy.priority) {
    auto& s = seen[static_cast<std::size_t>(index_of(c))];
    if (s) throw Error(ErrorKind::Config, "priority class listed twice: " + std::string(class_name(c)));
    s = true;
  }
}

YieldReport simulate_targeting(std::span<const CloudClass5> truth, std::span<const CloudClass5> predicted,
                               const TargetingPolicy& policy) {
  validate(policy);
  if (truth.empty()) throw Error(ErrorKind::EmptyInput, "targeting stream is empty");
  if (truth.size() != predicted.size()) throw Error(ErrorKind::Schema, "truth and prediction counts differ");
  const std::size_t n = truth.size();

  YieldReport r;
  r.policy = std::string(policy_name(policy.kind));
  r.stream_size = n;
  r.budget = std::min(n, static_cast<std::size_t>(std::floor(policy.budget_fraction * static_cast<double>(n))));

  if (policy.kind == PolicyKind::Random) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(policy.seed);
    for (std::size_t i = 0; i < r.budget; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    r.selected.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(r.budget));
  } else {
    for (CloudClass5 c : policy.priority)
      for (std::size_t i = 0; i < n && r.selected.size() < r.budget; ++i)
        if (predicted[i] == c) r.selected.push_back(i);
  }

  r.sampled = r.selected.size();
  const auto baseline = class_counts(truth);
  for (std::size_t i : r.selected) ++r.sampled_counts[static_cast<std::size_t>(index_of(truth[i]))];
  for (std::size_t c = 0; c < kClassCount; ++c) {
    r.baseline_fraction[c] = static_cast<double>(baseline[c]) / static_cast<double>(n);
    r.sampled_fraction[c] = r.sampled > 0 ? static_cast<double>(r.sampled_counts[c]) / static_cast<double>(r.sampled) : 0.0;
    if (baseline[c] > 0) r.yield_factor[c] = r.sampled_fraction[c] / r.baseline_fraction[c];
  }
  return r;
}

YieldReport simulate_targeting(const TrainedClassifier& clf, std::span<const PixelRecord> pixels,
                               const TargetingPolicy& policy) {
  if (pixels.empty()) throw Error(ErrorKind::EmptyInput, "targeting stream is empty");
  const Dataset d = to_dataset(pixels);
  const auto predicted = policy.kind == PolicyKind::Random ? d.labels : predict_labels(clf, d.features);
  return simulate_targeting(d.labels, predicted, policy);
}

OracleComparison oracle_vs_actual(const TrainedClassifier& clf, std::span<const PixelRecord> pixels,
                                  const TargetingPolicy& policy) {
  if (pixels.empty()) throw Error(ErrorKind::EmptyInput, "targeting stream is empty");
  const Dataset d = to_dataset(pixels);
  OracleComparison out;
  out.oracle = simulate_targeting(d.labels, d.labels, policy);
  out.actual = simulate_targeting(d.labels, predict_labels(clf, d.features), policy);
  return out;
}

std::array<std::optional<ClassFractions>, kClassCount> conditional_mix(std::span<const CloudClass5> truth,
                                                                       std::span<const CloudClass5> predicted) {
  if (truth.size() != predicted.size()) throw Error(ErrorKind::Schema, "truth and prediction counts differ");
  std::array<std::array<double, kClassCount>, kClassCount> counts{};
  for (std::size_t i = 0; i < truth.size(); ++i)
    counts[static_cast<std::size_t>(index_of(predicted[i]))][static_cast<std::size_t>(index_of(truth[i]))] += 1.0;
  std::array<std::optional<ClassFractions>, kClassCount> out;
  for (std::size_t p = 0; p < kClassCount; ++p) {
    const double total = std::accumulate(counts[p].begin(), counts[p].end(), 0.0);
    if (total == 0.0) continue;
    ClassFractions f{};
    for (std::size_t t = 0; t < kClassCount; ++t) f[t] = counts[p][t] / total;
    out[p] = f;
  }
  return out;
}

}  // namespace stormclass
