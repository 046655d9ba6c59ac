#include "stormclass/json_io.hpp"

#include <cmath>
#include <limits>

#include "stormclass/io.hpp"

namespace stormclass {

namespace {

const char* kScienceKeys[4] = {"ThinCirrus", "Cirrus", "RainyAnvil", "ConvectionCore"};

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

json optional_numbers(const std::vector<std::optional<double>>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(optional_number(x));
  return out;
}

json string_array(const std::vector<std::string>& xs) { return json(xs); }

void read_lognormal(ObjectReader& parent, const std::string& key, LogNormalParams& out) {
  if (!parent.has(key)) return;
  ObjectReader r(parent.at(key), parent.path(key));
  r.optional("median", out.median);
  r.optional("sigma", out.sigma);
  r.finish();
}

ConfusionMatrix confusion_from_json(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  std::vector<std::string> names;
  r.required("classes", names);
  ConfusionMatrix cm(names);
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  r.required("counts", counts);
  if (counts.rows() != cm.size() || counts.cols() != cm.size())
    schema_error(r.path("counts"), "matrix size does not match the class list");
  cm.counts = counts;
  r.finish();
  return cm;
}

json forest_to_json(const ForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) {
    json band = json::array(), thr = json::array(), left = json::array(), right = json::array(), hist = json::array();
    for (const auto& n : t.nodes) {
      band.push_back(n.band);
      thr.push_back(number(n.threshold));
      left.push_back(n.left);
      right.push_back(n.right);
      hist.push_back(to_json_array(n.histogram));
    }
    trees.push_back({{"band", band}, {"threshold", thr}, {"left", left}, {"right", right}, {"histogram", hist}});
  }
  return {{"trees", trees}};
}

ForestModel forest_from_json(ObjectReader& params, const json& p, const std::string& ptr) {
  ForestModel m;
  params.optional("n_trees", m.params.n_trees);
  params.optional("max_depth", m.params.max_depth);
  params.optional("max_features", m.params.max_features);
  params.optional("bootstrap", m.params.bootstrap);
  ObjectReader r(p, ptr);
  if (!r.has("trees") || !r.at("trees").is_array()) schema_error(r.path("trees"), "expected an array");
  const json& trees = r.at("trees");
  for (std::size_t t = 0; t < trees.size(); ++t) {
    ObjectReader tr(trees[t], r.path("trees") + "/" + std::to_string(t));
    std::vector<int> band, left, right;
    std::vector<double> thr;
    std::vector<Eigen::Matrix<double, kClassCount, 1>> hist;
    tr.required("band", band);
    tr.required("threshold", thr);
    tr.required("left", left);
    tr.required("right", right);
    tr.required("histogram", hist);
    tr.finish();
    const std::size_t n = band.size();
    if (thr.size() != n || left.size() != n || right.size() != n || hist.size() != n || n == 0)
      schema_error(tr.pointer(), "node columns differ in length");
    DecisionTree tree;
    for (std::size_t i = 0; i < n; ++i) {
      TreeNode node;
      node.band = band[i];
      node.threshold = thr[i];
      node.left = left[i];
      node.right = right[i];
      node.histogram = hist[i];
      if (!node.is_leaf()) {
        const auto limit = static_cast<int>(n);
        if (node.band >= kBandCount || node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i) ||
            node.left >= limit || node.right >= limit || !std::isfinite(node.threshold))
          schema_error(tr.pointer() + "/band/" + std::to_string(i), "malformed split node");
      }
      tree.nodes.push_back(node);
    }
    m.trees.push_back(std::move(tree));
  }
  r.finish();
  return m;
}

json tensor_list(const std::vector<Tensor>& params) {
  json out = json::array();
  for (const auto& t : params) out.push_back({{"shape", t.shape}, {"values", to_json_array(t.values)}});
  return out;
}

json nn_config_to_json(const NnConfig& c) {
  return {{"arch", architecture_name(c.arch)},
          {"input_dim", c.input_dim},
          {"hidden", c.hidden},
          {"n_classes", c.n_classes},
          {"dropout", number(c.dropout)},
          {"hidden_activation", activation_name(c.hidden_activation)},
          {"conv_filters", c.conv_filters},
          {"kernel", c.kernel}};
}

void read_nn_config(ObjectReader& r, NnConfig& c) {
  std::string s;
  if (r.has("arch")) {
    r.optional("arch", s);
    try {
      c.arch = parse_architecture(s);
    } catch (const Error& e) {
      schema_error(r.path("arch"), e.what());
    }
  }
  r.optional("input_dim", c.input_dim);
  r.optional("hidden", c.hidden);
  r.optional("n_classes", c.n_classes);
  r.optional("dropout", c.dropout);
  if (r.has("hidden_activation")) {
    r.optional("hidden_activation", s);
    try {
      c.hidden_activation = parse_activation(s);
    } catch (const Error& e) {
      schema_error(r.path("hidden_activation"), e.what());
    }
  }
  r.optional("conv_filters", c.conv_filters);
  r.optional("kernel", c.kernel);
}

json nn_train_to_json(const NnTrainConfig& t) {
  return {{"epochs", t.epochs}, {"batch_size", t.batch_size}, {"lr", number(t.lr)}, {"class_weighted", t.class_weighted}};
}

void read_nn_train(ObjectReader& r, NnTrainConfig& t) {
  r.optional("epochs", t.epochs);
  r.optional("batch_size", t.batch_size);
  r.optional("lr", t.lr);
  r.optional("class_weighted", t.class_weighted);
}

ClassWeights weights_from_json(const json& j, const std::string& ptr) {
  ClassWeights w;
  read_value(j, ptr, w.weights);
  return w;
}

}  // namespace

ObjectReader::ObjectReader(const json& j, std::string pointer) : j_(j), pointer_(std::move(pointer)) {
  if (!j_.is_object()) schema_error(pointer_, "expected an object");
}

const json& ObjectReader::at(const std::string& key) {
  if (!j_.contains(key)) schema_error(path(key), "missing required field");
  seen_.insert(key);
  return j_.at(key);
}

void ObjectReader::finish() const {
  for (const auto& [key, value] : j_.items())
    if (!seen_.count(key)) schema_error(path(key), "unknown field");
}

void schema_error(const std::string& pointer, const std::string& what) {
  throw Error(ErrorKind::Config, (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

void read_value(const json& j, const std::string& ptr, bool& out) {
  if (!j.is_boolean()) schema_error(ptr, "expected a boolean");
  out = j.get<bool>();
}

void read_value(const json& j, const std::string& ptr, int& out) {
  if (!j.is_number_integer()) schema_error(ptr, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
    schema_error(ptr, "integer out of range");
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) schema_error(ptr, "integer out of range");
  out = static_cast<int>(v);
}

void read_value(const json& j, const std::string& ptr, std::int64_t& out) {
  if (!j.is_number_integer()) schema_error(ptr, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    schema_error(ptr, "integer out of range");
  out = j.get<std::int64_t>();
}

void read_value(const json& j, const std::string& ptr, std::uint64_t& out) {
  if (!j.is_number_unsigned()) schema_error(ptr, "expected a nonnegative integer");
  out = j.get<std::uint64_t>();
}

void read_value(const json& j, const std::string& ptr, double& out) {
  if (j.is_number()) {
    out = j.get<double>();
    return;
  }
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") out = std::numeric_limits<double>::infinity();
    else if (s == "-inf") out = -std::numeric_limits<double>::infinity();
    else if (s == "nan") out = std::numeric_limits<double>::quiet_NaN();
    else schema_error(ptr, "expected a number");
    return;
  }
  schema_error(ptr, "expected a number");
}

void read_value(const json& j, const std::string& ptr, std::string& out) {
  if (!j.is_string()) schema_error(ptr, "expected a string");
  out = j.get<std::string>();
}

void read_value(const json& j, const std::string& ptr, Region& out) {
  std::string s;
  read_value(j, ptr, s);
  try {
    out = parse_region(s);
  } catch (const Error& e) {
    schema_error(ptr, e.what());
  }
}

void read_value(const json& j, const std::string& ptr, CloudClass5& out) {
  std::string s;
  read_value(j, ptr, s);
  const auto c = parse_class5(s);
  if (!c) schema_error(ptr, "unknown class '" + s + "'");
  out = *c;
}

void read_value(const json& j, const std::string& ptr, Family& out) {
  std::string s;
  read_value(j, ptr, s);
  try {
    out = parse_family(s);
  } catch (const Error& e) {
    schema_error(ptr, e.what());
  }
}

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

// ---- scene generation ----

json to_json(const SceneGenConfig& cfg) {
  json science = json::object();
  for (int c = 0; c < 4; ++c) {
    const auto& p = cfg.class_science[static_cast<std::size_t>(c)];
    science[kScienceKeys[c]] = {
        {"iwp", {{"median", number(p.iwp.median)}, {"sigma", number(p.iwp.sigma)}}},
        {"particle_size", {{"median", number(p.particle_size.median)}, {"sigma", number(p.particle_size.sigma)}}},
        {"cloud_top_height", {{"mean", number(p.cloud_top_height.mean)}, {"sd", number(p.cloud_top_height.sd)}}}};
  }
  json j = {{"region", region_name(cfg.region)},
            {"seed", cfg.seed},
            {"images", cfg.images},
            {"height", cfg.height},
            {"width", cfg.width},
            {"pixel_size_km", number(cfg.pixel_size_km)},
            {"cells_per_image_mean", number(cfg.cells_per_image_mean)},
            {"radii",
             {{"core", number(cfg.radii.core)},
              {"anvil", number(cfg.radii.anvil)},
              {"cirrus", number(cfg.radii.cirrus)},
              {"thin_cirrus", number(cfg.radii.thin_cirrus)}}},
            {"class_science", science},
            {"separability", number(cfg.separability)},
            {"band_gain", to_json_array(cfg.band_gain)},
            {"clear_sky_tb", to_json_array(cfg.clear_sky_tb)},
            {"nuisance_sd", number(cfg.nuisance_sd)},
            {"image_offset_sd", number(cfg.image_offset_sd)},
            {"particle_size_ref", number(cfg.particle_size_ref)}};
  j["target_mix"] = cfg.target_mix ? json(*cfg.target_mix) : json(nullptr);
  return j;
}

SceneGenConfig scenegen_config_from_json(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  Region region = Region::Tropical;
  r.optional("region", region);
  SceneGenConfig cfg = default_scenegen_config(region);
  const double default_area = static_cast<double>(cfg.height) * cfg.width;
  r.optional("seed", cfg.seed);
  r.optional("images", cfg.images);
  r.optional("height", cfg.height);
  r.optional("width", cfg.width);
  r.optional("pixel_size_km", cfg.pixel_size_km);
  // A resized grid keeps the default storm density unless the rate is given explicitly.
  if (r.has("cells_per_image_mean")) r.optional("cells_per_image_mean", cfg.cells_per_image_mean);
  else cfg.cells_per_image_mean *= static_cast<double>(cfg.height) * cfg.width / default_area;
  if (r.has("radii")) {
    ObjectReader rr(r.at("radii"), r.path("radii"));
    rr.optional("core", cfg.radii.core);
    rr.optional("anvil", cfg.radii.anvil);
    rr.optional("cirrus", cfg.radii.cirrus);
    rr.optional("thin_cirrus", cfg.radii.thin_cirrus);
    rr.finish();
  }
  if (r.has("class_science")) {
    ObjectReader cs(r.at("class_science"), r.path("class_science"));
    for (int c = 0; c < 4; ++c) {
      if (!cs.has(kScienceKeys[c])) continue;
      auto& p = cfg.class_science[static_cast<std::size_t>(c)];
      ObjectReader one(cs.at(kScienceKeys[c]), cs.path(kScienceKeys[c]));
      read_lognormal(one, "iwp", p.iwp);
      read_lognormal(one, "particle_size", p.particle_size);
      if (one.has("cloud_top_height")) {
        ObjectReader h(one.at("cloud_top_height"), one.path("cloud_top_height"));
        h.optional("mean", p.cloud_top_height.mean);
        h.optional("sd", p.cloud_top_height.sd);
        h.finish();
      }
      one.finish();
    }
    cs.finish();
  }
  r.optional("separability", cfg.separability);
  r.optional("band_gain", cfg.band_gain);
  r.optional("clear_sky_tb", cfg.clear_sky_tb);
  r.optional("nuisance_sd", cfg.nuisance_sd);
  r.optional("image_offset_sd", cfg.image_offset_sd);
  r.optional("particle_size_ref", cfg.particle_size_ref);
  r.optional("target_mix", cfg.target_mix);
  r.finish();
  return cfg;
}

// ---- clustering ----

json to_json(const ClusterModel& m) {
  return {{"k", m.k},
          {"feature_means", to_json_array(m.feature_means)},
          {"feature_sds", to_json_array(m.feature_sds)},
          {"centroids", to_json_array(m.centroids)},
          {"inertia", number(m.inertia)},
          {"inertia_trace", m.inertia_trace},
          {"warnings", string_array(m.warnings)}};
}

ClusterModel cluster_model_from_json(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  ClusterModel m;
  r.required("k", m.k);
  r.required("feature_means", m.feature_means);
  r.required("feature_sds", m.feature_sds);
  Eigen::MatrixXd c;
  r.required("centroids", c);
  if (m.k < 1 || c.rows() != m.k || (m.k > 0 && c.cols() != 3)) schema_error(r.path("centroids"), "expected k rows of 3");
  m.centroids = c;
  if ((m.feature_sds.array() <= 0.0).any()) schema_error(r.path("feature_sds"), "standard deviations must be positive");
  r.optional("inertia", m.inertia);
  r.optional("inertia_trace", m.inertia_trace);
  r.optional("warnings", m.warnings);
  r.finish();
  return m;
}

json to_json(const LabelMap& m) {
  json assignments = json::array();
  for (auto c : m.assignments) assignments.push_back(class_name(c));
  json diag = json::array();
  for (const auto& d : m.diagnostics)
    diag.push_back({{"cluster", d.cluster},
                    {"centroid", to_json_array(d.centroid)},
                    {"members", d.members},
                    {"feature_sd", to_json_array(d.feature_sd)}});
  return {{"assignments", assignments}, {"diagnostics", diag}, {"warnings", string_array(m.warnings)}};
}

LabelMap label_map_from_json(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  LabelMap m;
  r.required("assignments", m.assignments);
  if (r.has("diagnostics")) {
    const json& d = r.at("diagnostics");
    if (!d.is_array()) schema_error(r.path("diagnostics"), "expected an array");
    for (std::size_t i = 0; i < d.size(); ++i) {
      ObjectReader dr(d[i], r.path("diagnostics") + "/" + std::to_string(i));
      ClusterDiagnostics cd;
      std::uint64_t members = 0;
      dr.required("cluster", cd.cluster);
      dr.required("centroid", cd.centroid);
      dr.required("members", members);
      dr.required("feature_sd", cd.feature_sd);
      dr.finish();
      cd.members = members;
      m.diagnostics.push_back(cd);
    }
  }
  r.optional("warnings", m.warnings);
  r.finish();
  return m;
}

// ---- classifiers ----

json to_json(const ClassWeights& w) {
  json out = json::array();
  for (const auto& v : w.weights) out.push_back(v ? number(*v) : json(nullptr));
  return out;
}

json to_json(const TrainerConfig& c) {
  json j = {{"family", family_name(c.family)}, {"balanced", c.balanced}};
  switch (c.family) {
    case Family::Rdf:
      j["n_trees"] = c.forest.n_trees;
      j["max_depth"] = c.forest.max_depth;
      j["max_features"] = c.forest.max_features;
      j["bootstrap"] = c.forest.bootstrap;
      break;
    case Family::LinearSvm:
      j["reg"] = number(c.svm.reg);
      j["epochs"] = c.svm.epochs;
      j["restarts"] = c.svm.restarts;
      break;
    case Family::Gnb:
      break;
    case Family::Ann:
    case Family::Cnn: {
      json net = nn_config_to_json(c.nn);
      net.erase("arch");
      j["network"] = net;
      j["training"] = nn_train_to_json(c.nn_train);
      j["training"].erase("class_weighted");
      break;
    }
  }
  return j;
}

TrainerConfig trainer_config_from_json(const json& j, const std::string& ptr, std::uint64_t seed) {
  ObjectReader r(j, ptr);
  Family family = Family::Rdf;
  r.required("family", family);
  TrainerConfig c = TrainerConfig::defaults(family, seed);
  r.optional("balanced", c.balanced);
  switch (family) {
    case Family::Rdf:
      r.optional("n_trees", c.forest.n_trees);
      r.optional("max_depth", c.forest.max_depth);
      r.optional("max_features", c.forest.max_features);
      r.optional("bootstrap", c.forest.bootstrap);
      break;
    case Family::LinearSvm:
      r.optional("reg", c.svm.reg);
      r.optional("epochs", c.svm.epochs);
      r.optional("restarts", c.svm.restarts);
      break;
    case Family::Gnb:
      break;
    case Family::Ann:
    case Family::Cnn:
      if (r.has("network")) {
        ObjectReader n(r.at("network"), r.path("network"));
        read_nn_config(n, c.nn);
        n.finish();
        c.nn.arch = family == Family::Cnn ? Architecture::Cnn : Architecture::Mlp;
      }
      if (r.has("training")) {
        ObjectReader t(r.at("training"), r.path("training"));
        read_nn_train(t, c.nn_train);
        t.finish();
      }
      break;
  }
  r.finish();
  return c;
}

json to_json(const TrainedClassifier& clf) {
  json j = {{"family", family_name(clf.family)},
            {"seed", clf.seed},
            {"band_order", clf.band_order},
            {"classes", clf.classes}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ForestModel>) {
          j["hyperparameters"] = {{"n_trees", m.params.n_trees},
                                  {"max_depth", m.params.max_depth},
                                  {"max_features", m.params.max_features},
                                  {"bootstrap", m.params.bootstrap}};
          j["class_weights"] = to_json(m.weights);
          j["parameters"] = forest_to_json(m);
        } else if constexpr (std::is_same_v<T, LinearSvmModel>) {
          j["hyperparameters"] = {{"reg", number(m.params.reg)}, {"epochs", m.params.epochs}, {"restarts", m.params.restarts}};
          j["class_weights"] = to_json(m.weights);
          j["parameters"] = {{"feature_mean", to_json_array(m.feature_mean)},
                             {"feature_sd", to_json_array(m.feature_sd)},
                             {"coef", to_json_array(m.coef)},
                             {"intercept", to_json_array(m.intercept)},
                             {"present", m.present},
                             {"objective", to_json_array(m.objective)}};
        } else if constexpr (std::is_same_v<T, GnbModel>) {
          j["hyperparameters"] = json::object();
          j["parameters"] = {{"prior", to_json_array(m.prior)},
                             {"mean", to_json_array(m.mean)},
                             {"var", to_json_array(m.var)},
                             {"present", m.present},
                             {"var_floor", number(m.var_floor)}};
        } else {
          j["hyperparameters"] = {{"network", nn_config_to_json(m.config)}, {"training", nn_train_to_json(m.training)}};
          j["parameters"] = {{"init_seed", m.init_seed}, {"tensors", tensor_list(m.params)}};
        }
      },
      clf.model);
  if (!clf.loss_curve.empty()) j["loss_curve"] = clf.loss_curve;
  return j;
}

TrainedClassifier classifier_from_json(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  TrainedClassifier clf;
  r.required("family", clf.family);
  r.required("seed", clf.seed);
  r.required("band_order", clf.band_order);
  r.required("classes", clf.classes);
  if (clf.classes != class5_names()) schema_error(r.path("classes"), "unexpected class list");
  r.optional("loss_curve", clf.loss_curve);
  ObjectReader hp(r.at("hyperparameters"), r.path("hyperparameters"));
  const json& params = r.at("parameters");
  const std::string pptr = r.path("parameters");
  switch (clf.family) {
    case Family::Rdf: {
      ForestModel m = forest_from_json(hp, params, pptr);
      m.params.seed = clf.seed;
      m.weights = weights_from_json(r.at("class_weights"), r.path("class_weights"));
      clf.model = std::move(m);
      break;
    }
    case Family::LinearSvm: {
      LinearSvmModel m;
      hp.optional("reg", m.params.reg);
      hp.optional("epochs", m.params.epochs);
      hp.optional("restarts", m.params.restarts);
      m.params.seed = clf.seed;
      m.weights = weights_from_json(r.at("class_weights"), r.path("class_weights"));
      ObjectReader p(params, pptr);
      p.required("feature_mean", m.feature_mean);
      p.required("feature_sd", m.feature_sd);
      p.required("coef", m.coef);
      p.required("intercept", m.intercept);
      p.required("present", m.present);
      p.optional("objective", m.objective);
      p.finish();
      clf.model = std::move(m);
      break;
    }
    case Family::Gnb: {
      GnbModel m;
      ObjectReader p(params, pptr);
      p.required("prior", m.prior);
      p.required("mean", m.mean);
      p.required("var", m.var);
      p.required("present", m.present);
      p.required("var_floor", m.var_floor);
      p.finish();
      clf.model = std::move(m);
      break;
    }
    case Family::Ann:
    case Family::Cnn: {
      NnModel m;
      if (hp.has("network")) {
        ObjectReader n(hp.at("network"), hp.path("network"));
        read_nn_config(n, m.config);
        n.finish();
      }
      if (hp.has("training")) {
        ObjectReader t(hp.at("training"), hp.path("training"));
        read_nn_train(t, m.training);
        t.finish();
      }
      m.training.seed = clf.seed;
      ObjectReader p(params, pptr);
      p.required("init_seed", m.init_seed);
      const json& tensors = p.at("tensors");
      if (!tensors.is_array()) schema_error(p.path("tensors"), "expected an array");
      for (std::size_t i = 0; i < tensors.size(); ++i) {
        ObjectReader tr(tensors[i], p.path("tensors") + "/" + std::to_string(i));
        Tensor t;
        tr.required("shape", t.shape);
        tr.required("values", t.values);
        tr.finish();
        m.params.push_back(std::move(t));
      }
      p.finish();
      try {
        validate(m);
      } catch (const Error& e) {
        schema_error(pptr, e.what());
      }
      clf.model = std::move(m);
      break;
    }
  }
  hp.finish();
  r.finish();
  return clf;
}

// ---- reports ----

json to_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < cm.counts.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < cm.counts.cols(); ++k) row.push_back(cm.counts(i, k));
    rows.push_back(row);
  }
  return {{"classes", cm.class_names}, {"counts", rows}};
}

json to_json(const EvalReport& r) {
  return {{"confusion_5", to_json(r.cm5)},
          {"confusion_3", to_json(r.cm3)},
          {"confusion_2", to_json(r.cm2)},
          {"recall_5", optional_numbers(r.recall5)},
          {"recall_3", optional_numbers(r.recall3)},
          {"recall_2", optional_numbers(r.recall2)},
          {"accuracy_5", optional_number(r.accuracy5)},
          {"accuracy_3", optional_number(r.accuracy3)},
          {"accuracy_2", optional_number(r.accuracy2)},
          {"nonstorm_recall", optional_number(r.nonstorm_recall)},
          {"storm_recall", optional_number(r.storm_recall)},
          {"metadata", r.metadata}};
}

EvalReport eval_report_from_json(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  EvalReport out;
  out.cm5 = confusion_from_json(r.at("confusion_5"), r.path("confusion_5"));
  out.cm3 = confusion_from_json(r.at("confusion_3"), r.path("confusion_3"));
  out.cm2 = confusion_from_json(r.at("confusion_2"), r.path("confusion_2"));
  r.required("recall_5", out.recall5);
  r.required("recall_3", out.recall3);
  r.required("recall_2", out.recall2);
  r.required("accuracy_5", out.accuracy5);
  r.required("accuracy_3", out.accuracy3);
  r.required("accuracy_2", out.accuracy2);
  r.required("nonstorm_recall", out.nonstorm_recall);
  r.required("storm_recall", out.storm_recall);
  if (r.has("metadata")) {
    const json& m = r.at("metadata");
    if (!m.is_object()) schema_error(r.path("metadata"), "expected an object");
    for (const auto& [k, v] : m.items()) {
      if (!v.is_string()) schema_error(r.path("metadata") + "/" + k, "expected a string");
      out.metadata[k] = v.get<std::string>();
    }
  }
  r.finish();
  return out;
}

json to_json(const CrossValResult& r) {
  json reports = json::array();
  for (const auto& rep : r.reports) reports.push_back(to_json(rep));
  return {{"folds", r.folds},
          {"reports", reports},
          {"mean_recall_5", optional_numbers(r.mean_recall5)},
          {"sd_recall_5", optional_numbers(r.sd_recall5)},
          {"mean_recall_2", optional_numbers(r.mean_recall2)},
          {"sd_recall_2", optional_numbers(r.sd_recall2)},
          {"mean_accuracy_5", number(r.mean_accuracy5)},
          {"mean_accuracy_3", number(r.mean_accuracy3)}};
}

json to_json(const SplitPlan& p) {
  return {{"region", region_name(p.region)}, {"train_image_ids", p.train_image_ids}, {"test_image_ids", p.test_image_ids}};
}

SplitPlan split_plan_from_json(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  SplitPlan p;
  r.optional("region", p.region);
  r.required("train_image_ids", p.train_image_ids);
  r.required("test_image_ids", p.test_image_ids);
  r.finish();
  return p;
}

json to_json(const NoiseSpec& s) {
  json sigma = json::object();
  for (BandId b : all_bands()) sigma[std::string(band_name(b))] = number(s.sigma[static_cast<int>(b)]);
  return {{"sigma", sigma}, {"seed", s.seed}};
}

NoiseSpec noise_spec_from_json(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  NoiseSpec s = NoiseSpec::instrument_default();
  r.optional("seed", s.seed);
  if (r.has("sigma")) {
    ObjectReader sg(r.at("sigma"), r.path("sigma"));
    for (BandId b : all_bands()) sg.optional(std::string(band_name(b)), s.sigma[static_cast<int>(b)]);
    sg.finish();
  }
  r.finish();
  try {
    validate(s);
  } catch (const Error& e) {
    schema_error(r.path("sigma"), e.what());
  }
  return s;
}

json to_json(const TargetingPolicy& p) {
  json prio = json::array();
  for (auto c : p.priority) prio.push_back(class_name(c));
  return {{"kind", policy_name(p.kind)}, {"priority", prio}, {"budget_fraction", number(p.budget_fraction)}, {"seed", p.seed}};
}

TargetingPolicy targeting_policy_from_json(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  TargetingPolicy p;
  if (r.has("kind")) {
    std::string s;
    r.optional("kind", s);
    try {
      p.kind = parse_policy(s);
    } catch (const Error& e) {
      schema_error(r.path("kind"), e.what());
    }
  }
  r.optional("priority", p.priority);
  r.optional("budget_fraction", p.budget_fraction);
  r.optional("seed", p.seed);
  r.finish();
  try {
    validate(p);
  } catch (const Error& e) {
    schema_error(r.pointer(), e.what());
  }
  return p;
}

json to_json(const YieldReport& r) {
  json factors = json::array();
  for (const auto& f : r.yield_factor) factors.push_back(optional_number(f));
  return {{"policy", r.policy},
          {"stream_size", r.stream_size},
          {"budget", r.budget},
          {"sampled", r.sampled},
          {"classes", class5_names()},
          {"sampled_counts", r.sampled_counts},
          {"sampled_fraction", r.sampled_fraction},
          {"baseline_fraction", r.baseline_fraction},
          {"yield_factor", factors}};
}

// ---- files ----

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json_text(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, origin + ": " + e.what());
  }
}

json read_json(const std::filesystem::path& path) { return parse_json_text(read_text(path), path.string()); }

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, dump(j)); }

}  // namespace stormclass
