#ifndef STORMCLASS_JSON_IO_HPP
#define STORMCLASS_JSON_IO_HPP

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "stormclass/autolabel.hpp"
#include "stormclass/classifier.hpp"
#include "stormclass/clustering.hpp"
#include "stormclass/evaluation.hpp"
#include "stormclass/noise.hpp"
#include "stormclass/scenegen.hpp"
#include "stormclass/targeting.hpp"

namespace stormclass {

using json = nlohmann::json;

/// Strict view of a JSON object: every key must be consumed, and every error names the
/// offending JSON pointer.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string pointer);

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& at(const std::string& key);
  std::string path(const std::string& key) const { return pointer_ + "/" + key; }
  const std::string& pointer() const { return pointer_; }

  /// Reads `key` into `out` if present; leaves the default otherwise.
  template <typename T>
  void optional(const std::string& key, T& out);
  template <typename T>
  void required(const std::string& key, T& out);

  /// Throws Config naming the first key nobody asked for.
  void finish() const;

 private:
  const json& j_;
  std::string pointer_;
  std::set<std::string> seen_;
};

[[noreturn]] void schema_error(const std::string& pointer, const std::string& what);

// Scalar and container readers used by ObjectReader.
void read_value(const json& j, const std::string& ptr, bool& out);
void read_value(const json& j, const std::string& ptr, int& out);
void read_value(const json& j, const std::string& ptr, std::uint64_t& out);
void read_value(const json& j, const std::string& ptr, std::int64_t& out);
void read_value(const json& j, const std::string& ptr, double& out);
void read_value(const json& j, const std::string& ptr, std::string& out);
void read_value(const json& j, const std::string& ptr, Region& out);
void read_value(const json& j, const std::string& ptr, CloudClass5& out);
void read_value(const json& j, const std::string& ptr, Family& out);

template <typename T>
void read_value(const json& j, const std::string& ptr, std::vector<T>& out);
template <typename T, std::size_t N>
void read_value(const json& j, const std::string& ptr, std::array<T, N>& out);
template <typename T>
void read_value(const json& j, const std::string& ptr, std::optional<T>& out);
template <typename Scalar, int R, int C, int O, int MR, int MC>
void read_value(const json& j, const std::string& ptr, Eigen::Matrix<Scalar, R, C, O, MR, MC>& out);

template <typename T>
void read_value(const json& j, const std::string& ptr, std::vector<T>& out) {
  if (!j.is_array()) schema_error(ptr, "expected an array");
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    T v{};
    read_value(j[i], ptr + "/" + std::to_string(i), v);
    out.push_back(std::move(v));
  }
}

template <typename T, std::size_t N>
void read_value(const json& j, const std::string& ptr, std::array<T, N>& out) {
  if (!j.is_array() || j.size() != N) schema_error(ptr, "expected an array of " + std::to_string(N));
  for (std::size_t i = 0; i < N; ++i) read_value(j[i], ptr + "/" + std::to_string(i), out[i]);
}

template <typename T>
void read_value(const json& j, const std::string& ptr, std::optional<T>& out) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  T v{};
  read_value(j, ptr, v);
  out = std::move(v);
}

/// Fixed or dynamic Eigen vector/matrix from a flat array (vectors) or nested rows.
template <typename Scalar, int R, int C, int O, int MR, int MC>
void read_value(const json& j, const std::string& ptr, Eigen::Matrix<Scalar, R, C, O, MR, MC>& out) {
  if (!j.is_array()) schema_error(ptr, "expected an array");
  if constexpr (C == 1) {
    if (R != Eigen::Dynamic && static_cast<int>(j.size()) != R)
      schema_error(ptr, "expected " + std::to_string(R) + " values");
    out.resize(static_cast<Eigen::Index>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) read_value(j[i], ptr + "/" + std::to_string(i), out(static_cast<Eigen::Index>(i)));
  } else {
    if (R != Eigen::Dynamic && static_cast<int>(j.size()) != R)
      schema_error(ptr, "expected " + std::to_string(R) + " rows");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = C != Eigen::Dynamic ? C : (rows > 0 && j[0].is_array() ? static_cast<Eigen::Index>(j[0].size()) : 0);
    out.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const json& row = j[static_cast<std::size_t>(r)];
      const std::string rp = ptr + "/" + std::to_string(r);
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
        schema_error(rp, "expected a row of " + std::to_string(cols));
      for (Eigen::Index c = 0; c < cols; ++c)
        read_value(row[static_cast<std::size_t>(c)], rp + "/" + std::to_string(c), out(r, c));
    }
  }
}

template <typename T>
void ObjectReader::optional(const std::string& key, T& out) {
  if (!j_.contains(key)) return;
  seen_.insert(key);
  read_value(j_.at(key), path(key), out);
}

template <typename T>
void ObjectReader::required(const std::string& key, T& out) {
  if (!j_.contains(key)) schema_error(path(key), "missing required field");
  optional(key, out);
}

/// Non-finite doubles are written as the strings "inf", "-inf" and "nan".
json number(double v);
template <typename Derived>
json to_json_array(const Eigen::DenseBase<Derived>& m) {
  json out = json::array();
  if (m.cols() == 1) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(number(static_cast<double>(m(i, 0))));
    return out;
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(static_cast<double>(m(r, c))));
    out.push_back(std::move(row));
  }
  return out;
}

json to_json(const SceneGenConfig& cfg);
SceneGenConfig scenegen_config_from_json(const json& j, const std::string& ptr = "");

json to_json(const ClusterModel& m);
ClusterModel cluster_model_from_json(const json& j, const std::string& ptr = "");
json to_json(const LabelMap& m);
LabelMap label_map_from_json(const json& j, const std::string& ptr = "");

json to_json(const ClassWeights& w);
json to_json(const TrainerConfig& c);
/// Starts from TrainerConfig::defaults(family) and applies the fields present.
TrainerConfig trainer_config_from_json(const json& j, const std::string& ptr, std::uint64_t seed);
json to_json(const TrainedClassifier& clf);
TrainedClassifier classifier_from_json(const json& j, const std::string& ptr = "");

json to_json(const ConfusionMatrix& cm);
json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const json& j, const std::string& ptr = "");
json to_json(const CrossValResult& r);

json to_json(const SplitPlan& p);
SplitPlan split_plan_from_json(const json& j, const std::string& ptr = "");
json to_json(const NoiseSpec& s);
NoiseSpec noise_spec_from_json(const json& j, const std::string& ptr = "");
json to_json(const TargetingPolicy& p);
TargetingPolicy targeting_policy_from_json(const json& j, const std::string& ptr = "");
json to_json(const YieldReport& r);

/// Pretty-printed with a trailing newline; keys are sorted, so output is deterministic.
std::string dump(const json& j);
json parse_json_text(std::string_view text, const std::string& origin);
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace stormclass

#endif  // STORMCLASS_JSON_IO_HPP
