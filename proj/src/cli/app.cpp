#include "dabag/cli/app.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "dabag/anomaly.hpp"
#include "dabag/cli/config.hpp"
#include "dabag/cli/csv.hpp"
#include "dabag/cli/output.hpp"
#include "dabag/ensemble.hpp"
#include "dabag/error.hpp"
#include "dabag/eval.hpp"
#include "dabag/simgen.hpp"

namespace dabag::cli {

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

struct DataOptions {
  std::string train;
  std::string test;
  std::string out;
  std::string label = "label";
  std::vector<std::string> ignore;
  bool standardize = false;
};

struct FitPredictOptions {
  std::string mode = "da";
  std::string base = "tree";
  std::size_t b = 50;
  std::size_t k = 1;
  std::size_t knn_k = 0;
  std::size_t max_features = 0;
  double eps_stop = 0.01;
  std::size_t t_max = 50;
  bool detect = false;
  double alpha = 0.1;
  std::size_t anomaly_k = 5;
};

struct DetectOptions {
  double alpha = 0.1;
  std::size_t k = 5;
  double split_fraction = 0.5;
};

struct SimulateOptions {
  std::string config;
  std::string out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> b;
  std::optional<std::size_t> k;
  std::optional<std::string> base;
  std::optional<std::string> mode;
  std::optional<double> eps_stop;
  std::optional<std::size_t> t_max;
  std::optional<double> alpha;
  std::optional<std::size_t> max_features;
  bool timing = false;
  bool quiet = false;
};

struct GenerateOptions {
  std::string scenario = "setting1";
  std::size_t n = 500;
  std::size_t m = 500;
  std::vector<double> q = {0.5};
  double epsilon = 0.0;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

ClassifierSpec base_spec(const std::string& name, std::size_t knn_k, std::size_t max_features) {
  auto spec = classifier_from_name(name);
  if (auto* knn = std::get_if<KnnSpec>(&spec)) knn->k = knn_k;
  if (auto* tree = std::get_if<TreeSpec>(&spec)) tree->max_features = max_features;
  return spec;
}

// Divides every column by its training standard deviation. Distances then
// match Metric::standardized, and every base classifier sees the same scale.
void standardize(Dataset& train, std::optional<Dataset>& test) {
  const auto scale = Metric::standardized(train).inverse_scale();
  auto rescale = [&](const Dataset& d) {
    Matrix x = d.features();
    for (Eigen::Index c = 0; c < x.cols(); ++c) x.col(c) *= scale[static_cast<std::size_t>(c)];
    if (!d.has_labels()) return Dataset(std::move(x));
    return Dataset(std::move(x), d.labels(), d.n_classes(), d.label_names());
  };
  train = rescale(train);
  if (test) test = rescale(*test);
}

struct LoadedData {
  Dataset train;
  std::optional<Dataset> test;
  std::size_t test_rows = 0;
  bool test_has_header = false;
};

LoadedData load(const DataOptions& o) {
  const ColumnChoice columns{o.label, o.ignore};
  auto tr = training_table(read_csv_file(o.train), columns);
  const auto test_csv = read_csv_file(o.test);
  auto te = test_table(test_csv, tr.feature_names);
  LoadedData d{std::move(*tr.data), std::move(te.data), te.rows, !test_csv.header.empty()};
  if (o.standardize) standardize(d.train, d.test);
  return d;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    atomic_write(path, content);
  }
}

int cmd_fit_predict(const Common& common, const DataOptions& data, const FitPredictOptions& o, std::ostream& out) {
  const auto kind = method_kind_from_string(o.mode);
  const auto spec = base_spec(o.base, o.knn_k, o.max_features);
  validate(spec);
  const LoadedData d = load(data);
  const RngStream master(common.seed);

  std::vector<std::string> labels(d.test_rows);
  std::vector<std::size_t> kept(d.test_rows);
  std::iota(kept.begin(), kept.end(), 0);
  if (o.detect && d.test) {
    AnomalyConfig ac;
    ac.k = o.anomaly_k;
    ac.alpha = o.alpha;
    const auto cal = calibrate(d.train, ac, master.derive(Purpose::kSplit));
    auto part = filter_anomalies(d.test->features(), d.train, cal);
    for (std::size_t i : part.anomalies) labels[i] = "anomaly";
    kept = std::move(part.inliers);
  }

  if (!kept.empty()) {
    const Dataset points = d.test->subset(kept);
    std::vector<Label> pred;
    if (kind == MethodKind::kSingle) {
      const auto model = fit(spec, d.train, master.derive(Purpose::kFit));
      pred = predict_all(model, points, master.derive(Purpose::kPredict));
    } else {
      DaBaggingConfig cfg;
      cfg.replicates = o.b;
      cfg.resample.k = o.k;
      cfg.resample.eps_stop = o.eps_stop;
      cfg.resample.t_max = o.t_max;
      cfg.base = spec;
      cfg.mode = kind == MethodKind::kDomainAdaptive ? EnsembleMode::kDomainAdaptive : EnsembleMode::kClassicalBootstrap;
      cfg.threads = common.threads;
      const auto model = fit_ensemble(d.train, &points, cfg, master.derive(Purpose::kFit));
      pred = vote_table(model, points, master.derive(Purpose::kPredict)).majority();
    }
    for (std::size_t i = 0; i < kept.size(); ++i) {
      labels[kept[i]] = d.train.label_names()[static_cast<std::size_t>(pred[i] - 1)];
    }
  }

  std::string text = "row,prediction\n";
  for (std::size_t i = 0; i < labels.size(); ++i) text += std::to_string(i) + "," + csv_escape(labels[i]) + "\n";
  emit(data.out, text, out);
  return kSuccess;
}

int cmd_detect(const Common& common, const DataOptions& data, const DetectOptions& o, std::ostream& out) {
  AnomalyConfig ac;
  ac.k = o.k;
  ac.alpha = o.alpha;
  ac.split_fraction = o.split_fraction;
  ac.validate();
  const LoadedData d = load(data);
  const auto cal = calibrate(d.train, ac, RngStream(common.seed).derive(Purpose::kSplit));

  std::string text;
  if (d.test_has_header) {
    text = "row,T";
    for (const auto& name : d.train.label_names()) text += "," + csv_escape("dtm_" + name);
    text += "\n";
  }
  if (d.test) {
    const auto part = filter_anomalies(d.test->features(), d.train, cal);
    std::vector<int> flag(d.test_rows, 0);
    for (std::size_t i : part.anomalies) flag[i] = 1;
    for (std::size_t i = 0; i < d.test_rows; ++i) {
      text += std::to_string(i) + "," + std::to_string(flag[i]);
      for (double s : part.scores[i]) text += "," + format_number(s);
      text += "\n";
    }
  }
  emit(data.out, text, out);
  return kSuccess;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  auto cfg = load_experiment_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.reps) cfg.reps = *o.reps;
  if (o.alpha) {
    if (!cfg.anomaly) cfg.anomaly = AnomalyConfig{};
    cfg.anomaly->alpha = *o.alpha;
  }
  for (auto& m : cfg.methods) {
    bool retag = false;
    if (o.mode) {
      m.kind = method_kind_from_string(*o.mode);
      retag = true;
    }
    if (o.base) {
      m.base = classifier_from_name(*o.base);
      retag = true;
    }
    if (o.max_features) {
      if (auto* tree = std::get_if<TreeSpec>(&m.base)) tree->max_features = *o.max_features;
    }
    if (o.b) m.replicates = *o.b;
    if (o.k) m.resample.k = *o.k;
    if (o.eps_stop) m.resample.eps_stop = *o.eps_stop;
    if (o.t_max) m.resample.t_max = *o.t_max;
    if (retag) m.tag = to_string(m.kind) + "-" + kind_name(m.base);
  }

  const auto result = run_experiment(cfg);
  const std::filesystem::path dir(o.out_dir);
  atomic_write((dir / "records.csv").string(), records_csv(result.records, o.timing));
  atomic_write((dir / "aggregates.json").string(), aggregates_json(cfg, result.aggregates));
  if (!o.quiet) out << aggregates_table(result.aggregates);
  return kSuccess;
}

std::string dataset_csv(const Dataset& d, const std::vector<std::string>& labels) {
  std::ostringstream ss;
  for (std::size_t c = 0; c < d.dim(); ++c) ss << 'x' << (c + 1) << ',';
  ss << "label\n";
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (double v : d.row(i)) ss << format_number(v) << ',';
    ss << labels[i] << '\n';
  }
  return ss.str();
}

int cmd_generate(const GenerateOptions& o) {
  ScenarioSpec spec;
  spec.scenario = scenario_from_string(o.scenario);
  spec.n_train = o.n;
  spec.n_test = o.m;
  spec.q = o.q;
  if (spec.scenario != Scenario::kToy3 && spec.q.size() == 1) spec.q = {o.q[0], 1.0 - o.q[0]};
  spec.epsilon_out = o.epsilon;
  spec.seed = o.seed;
  const auto gt = generate(spec);

  std::vector<std::string> train_labels, test_labels;
  for (Label y : gt.train.labels()) train_labels.push_back(std::to_string(y));
  for (Label y : gt.test_labels) test_labels.push_back(y == 0 ? "anomaly" : std::to_string(y));
  const std::filesystem::path dir(o.out_dir);
  atomic_write((dir / "train.csv").string(), dataset_csv(gt.train, train_labels));
  atomic_write((dir / "test.csv").string(), dataset_csv(gt.test, test_labels));
  return kSuccess;
}

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--train", d.train, "Training CSV with a header row")->required();
  cmd->add_option("--test", d.test, "Test CSV; the label column may be absent")->required();
  cmd->add_option("--out,-o", d.out, "Output CSV (stdout when omitted)");
  cmd->add_option("--label", d.label, "Name of the label column")->capture_default_str();
  cmd->add_option("--ignore", d.ignore, "Columns to leave out of the features")->delimiter(',');
  cmd->add_flag("--standardize", d.standardize, "Scale features by their training standard deviation");
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->envname("DABAG_THREADS");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Domain adaptive bagging under label shift"};
  app.name("dabag");
  app.require_subcommand(1);

  Common common;
  DataOptions data;
  FitPredictOptions fp;
  DetectOptions det;
  SimulateOptions sim;
  GenerateOptions gen;
  const std::vector<std::string> bases = {"knn", "logistic", "lda", "tree"};
  const std::vector<std::string> modes = {"da", "classical", "none"};

  auto* fit_cmd = app.add_subcommand("fit-predict", "Fit on a training CSV and label a test CSV");
  add_data_options(fit_cmd, data);
  add_common(fit_cmd, common);
  fit_cmd->add_option("--mode", fp.mode, "da, classical or none")->check(CLI::IsMember(modes))->capture_default_str();
  fit_cmd->add_option("--base", fp.base, "Base classifier")->check(CLI::IsMember(bases))->capture_default_str();
  fit_cmd->add_option("--b", fp.b, "Ensemble size")->capture_default_str();
  fit_cmd->add_option("--k", fp.k, "Neighbors used by the resampler")->capture_default_str();
  fit_cmd->add_option("--knn-k", fp.knn_k, "Neighbors of the knn base (0 = n^(4/(p+4)))")->capture_default_str();
  fit_cmd->add_option("--max-features", fp.max_features, "Features tried per tree split (0 = all)");
  fit_cmd->add_option("--eps-stop", fp.eps_stop, "Resampler stopping threshold")->capture_default_str();
  fit_cmd->add_option("--t-max", fp.t_max, "Resampler iteration cap")->capture_default_str();
  fit_cmd->add_flag("--detect-anomalies", fp.detect, "Remove anomalies before fitting and mark them");
  fit_cmd->add_option("--alpha", fp.alpha, "Anomaly test level")->capture_default_str();
  fit_cmd->add_option("--anomaly-k", fp.anomaly_k, "Neighbors in the distance to measure")->capture_default_str();

  auto* det_cmd = app.add_subcommand("detect", "Flag test rows far from every training class");
  add_data_options(det_cmd, data);
  add_common(det_cmd, common);
  det_cmd->add_option("--alpha", det.alpha, "Nominal level")->capture_default_str();
  det_cmd->add_option("--k", det.k, "Neighbors in the distance to measure")->capture_default_str();
  det_cmd->add_option("--split-fraction", det.split_fraction, "Share of each class used for scoring")
      ->capture_default_str();

  auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation study from a JSON config");
  sim_cmd->add_option("config", sim.config, "Experiment config")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--out-dir", sim.out_dir, "Directory for records.csv and aggregates.json")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Override the master seed");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")->envname("DABAG_THREADS");
  sim_cmd->add_option("--reps", sim.reps, "Override repetitions");
  sim_cmd->add_option("--b", sim.b, "Override ensemble size of every method");
  sim_cmd->add_option("--k", sim.k, "Override resampler neighbors of every method");
  sim_cmd->add_option("--base", sim.base, "Override the base classifier")->check(CLI::IsMember(bases));
  sim_cmd->add_option("--mode", sim.mode, "Override the method mode")->check(CLI::IsMember(modes));
  sim_cmd->add_option("--eps-stop", sim.eps_stop, "Override the stopping threshold");
  sim_cmd->add_option("--t-max", sim.t_max, "Override the iteration cap");
  sim_cmd->add_option("--alpha", sim.alpha, "Anomaly level (enables filtering)");
  sim_cmd->add_option("--max-features", sim.max_features, "Features tried per tree split");
  sim_cmd->add_flag("--timing", sim.timing, "Add a runtime column to records.csv");
  sim_cmd->add_flag("--quiet", sim.quiet, "Do not print the summary table");

  auto* gen_cmd = app.add_subcommand("generate", "Write a simulated train/test pair as CSV");
  gen_cmd->add_option("--scenario", gen.scenario, "toy3, setting1 or setting2")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Training rows")->capture_default_str();
  gen_cmd->add_option("--m", gen.m, "Test rows")->capture_default_str();
  gen_cmd->add_option("--q", gen.q, "Test class proportions among inliers (q1 alone for two classes)")
      ->delimiter(',');
  gen_cmd->add_option("--epsilon", gen.epsilon, "Anomaly share of the test set")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir, "Directory for train.csv and test.csv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "dabag: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit_predict(common, data, fp, out);
    if (det_cmd->parsed()) return cmd_detect(common, data, det, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out);
    if (gen_cmd->parsed()) return cmd_generate(gen);
  } catch (const UsageError& e) {
    err << "dabag: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "dabag: " << e.what() << "\n";
    return kData;
  } catch (const NumericError& e) {
    err << "dabag: numerical failure: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "dabag: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "dabag: internal error: " << e.what() << "\n";
    return kInternal;
  }
  err << "dabag: no subcommand\n";
  return kUsage;
}

}  // namespace dabag::cli
