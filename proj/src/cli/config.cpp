#include "dabag/cli/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "dabag/error.hpp"

namespace dabag::cli {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw UsageError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(where + "." + key + ": " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw UsageError(where + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

ClassifierSpec parse_base(const json& j, const std::string& where) {
  if (j.is_string()) return classifier_from_name(j.get<std::string>());
  only_keys(j, {"kind", "k", "max_iter", "l2", "tol", "ridge", "max_depth", "min_leaf", "max_features"}, where);
  const auto kind = get<std::string>(j, "kind", "", where);
  if (kind == "knn") {
    only_keys(j, {"kind", "k"}, where);
    return KnnSpec{get_count(j, "k", 0, where)};
  }
  if (kind == "logistic") {
    only_keys(j, {"kind", "max_iter", "l2", "tol"}, where);
    LogisticSpec s;
    s.max_iter = get_count(j, "max_iter", s.max_iter, where);
    s.l2 = get<double>(j, "l2", s.l2, where);
    s.tol = get<double>(j, "tol", s.tol, where);
    return s;
  }
  if (kind == "lda") {
    only_keys(j, {"kind", "ridge"}, where);
    return LdaSpec{get<double>(j, "ridge", LdaSpec{}.ridge, where)};
  }
  if (kind == "tree") {
    only_keys(j, {"kind", "max_depth", "min_leaf", "max_features"}, where);
    TreeSpec s;
    s.max_depth = get_count(j, "max_depth", s.max_depth, where);
    s.min_leaf = get_count(j, "min_leaf", s.min_leaf, where);
    s.max_features = get_count(j, "max_features", s.max_features, where);
    return s;
  }
  throw UsageError(where + ".kind: unknown classifier '" + kind + "'");
}

ResampleConfig parse_resample(const json& j, const std::string& where) {
  only_keys(j, {"k", "per_test_draws", "eps_stop", "t_max", "subsample_guides"}, where);
  ResampleConfig r;
  r.k = get_count(j, "k", r.k, where);
  if (j.contains("per_test_draws")) r.per_test_draws = get_count(j, "per_test_draws", 1, where);
  r.eps_stop = get<double>(j, "eps_stop", r.eps_stop, where);
  r.t_max = get_count(j, "t_max", r.t_max, where);
  r.subsample_guides = get<bool>(j, "subsample_guides", r.subsample_guides, where);
  return r;
}

MethodConfig parse_method(const json& j, const std::string& where) {
  only_keys(j, {"tag", "mode", "base", "replicates", "resample"}, where);
  MethodConfig m;
  m.kind = method_kind_from_string(get<std::string>(j, "mode", "da", where));
  if (j.contains("base")) m.base = parse_base(j.at("base"), where + ".base");
  m.replicates = get_count(j, "replicates", m.replicates, where);
  if (j.contains("resample")) m.resample = parse_resample(j.at("resample"), where + ".resample");
  m.tag = get<std::string>(j, "tag", to_string(m.kind) + "-" + kind_name(m.base), where);
  return m;
}

}  // namespace

ClassifierSpec classifier_from_name(const std::string& name) {
  if (name == "knn") return KnnSpec{};
  if (name == "logistic") return LogisticSpec{};
  if (name == "lda") return LdaSpec{};
  if (name == "tree") return TreeSpec{};
  throw UsageError("unknown base classifier '" + name + "' (expected knn, logistic, lda or tree)");
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(source + ": " + e.what());
  }
  only_keys(root,
            {"scenario", "n_train", "n_test", "q_grid", "q1_grid", "epsilon_out", "methods", "reps", "seed",
             "threads", "anomaly", "description"},
            source);

  ExperimentConfig cfg;
  cfg.scenario = scenario_from_string(get<std::string>(root, "scenario", "setting1", source));
  cfg.n_train = get_count(root, "n_train", cfg.n_train, source);
  cfg.n_test = get_count(root, "n_test", cfg.n_test, source);
  cfg.epsilon_out = get<double>(root, "epsilon_out", cfg.epsilon_out, source);
  cfg.reps = get_count(root, "reps", cfg.reps, source);
  cfg.seed = get<std::uint64_t>(root, "seed", cfg.seed, source);
  cfg.threads = get_count(root, "threads", cfg.threads, source);

  if (root.contains("q_grid") && root.contains("q1_grid")) {
    throw UsageError(source + ": give either q_grid or q1_grid, not both");
  }
  if (root.contains("q_grid")) {
    cfg.q_grid = get<std::vector<std::vector<double>>>(root, "q_grid", {}, source);
  } else if (root.contains("q1_grid")) {
    for (double q1 : get<std::vector<double>>(root, "q1_grid", {}, source)) cfg.q_grid.push_back({q1, 1.0 - q1});
  }

  if (root.contains("methods")) {
    const auto& methods = root.at("methods");
    if (!methods.is_array()) throw UsageError(source + ".methods: expected an array");
    for (std::size_t i = 0; i < methods.size(); ++i) {
      cfg.methods.push_back(parse_method(methods[i], source + ".methods[" + std::to_string(i) + "]"));
    }
  }

  if (root.contains("anomaly") && !root.at("anomaly").is_null()) {
    const auto& a = root.at("anomaly");
    const std::string where = source + ".anomaly";
    only_keys(a, {"k", "alpha", "split_fraction"}, where);
    AnomalyConfig ac;
    ac.k = get_count(a, "k", ac.k, where);
    ac.alpha = get<double>(a, "alpha", ac.alpha, where);
    ac.split_fraction = get<double>(a, "split_fraction", ac.split_fraction, where);
    cfg.anomaly = ac;
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(path + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path);
}

}  // namespace dabag::cli
