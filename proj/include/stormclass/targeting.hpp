#ifndef STORMCLASS_TARGETING_HPP
#define STORMCLASS_TARGETING_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stormclass/classifier.hpp"
#include "stormclass/core.hpp"

namespace stormclass {

enum class PolicyKind : std::uint8_t { Random, PredictedClassPriority };
std::string_view policy_name(PolicyKind k);  // "random", "predicted_class_priority"
PolicyKind parse_policy(std::string_view name);

struct TargetingPolicy {
  PolicyKind kind = PolicyKind::PredictedClassPriority;
  std::vector<CloudClass5> priority = {CloudClass5::ConvectionCore, CloudClass5::RainyAnvil};
  double budget_fraction = 0.2;  // duty cycle beta in (0, 1]
  std::uint64_t seed = 0;        // used by the random policy
};

/// Throws Config on a budget outside (0, 1] or a repeated priority class.
void validate(const TargetingPolicy& policy);

using ClassFractions = std::array<double, kClassCount>;

struct YieldReport {
  std::string policy;
  std::size_t stream_size = 0;
  std::size_t budget = 0;
  std::size_t sampled = 0;
  std::array<std::size_t, kClassCount> sampled_counts{};
  ClassFractions sampled_fraction{};   // true-class mix among sampled pixels
  ClassFractions baseline_fraction{};  // true-class mix of the whole stream
  std::array<std::optional<double>, kClassCount> yield_factor{};  // undefined when absent from the stream
  std::vector<std::size_t> selected;   // stream indices, in selection order
};

/// Selects floor(beta * N) pixels. Random draws them uniformly without replacement;
/// PredictedClassPriority takes every pixel predicted as the first priority class in
/// stream order, then the next class, and leaves any remaining budget unspent.
/// Throws EmptyInput on an empty stream.
YieldReport simulate_targeting(std::span<const CloudClass5> truth, std::span<const CloudClass5> predicted,
                               const TargetingPolicy& policy);
YieldReport simulate_targeting(const TrainedClassifier& clf, std::span<const PixelRecord> pixels,
                               const TargetingPolicy& policy);

struct OracleComparison {
  YieldReport oracle;  // ground truth used as the prediction
  YieldReport actual;
};
OracleComparison oracle_vs_actual(const TrainedClassifier& clf, std::span<const PixelRecord> pixels,
                                  const TargetingPolicy& policy);

/// Row p: true-class mix among pixels predicted as class p (empty row when never predicted).
std::array<std::optional<ClassFractions>, kClassCount> conditional_mix(std::span<const CloudClass5> truth,
                                                                       std::span<const CloudClass5> predicted);

}  // namespace stormclass

#endif  // STORMCLASS_TARGETING_HPP
