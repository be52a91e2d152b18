#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "dabag/anomaly.hpp"
#include "dabag/cli/app.hpp"
#include "dabag/cli/config.hpp"
#include "dabag/cli/csv.hpp"
#include "dabag/cli/output.hpp"
#include "dabag/ensemble.hpp"
#include "dabag/error.hpp"
#include "dabag/simgen.hpp"

using namespace dabag;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "dabag");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

cli::CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return cli::read_csv(in, "t.csv");
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("dabag_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("csv reader handles quoting, CRLF, BOM and embedded newlines") {
  const auto t = parse("\xEF\xBB\xBF" "a,\"b,c\",d\r\n1,\"say \"\"hi\"\"\",\"two\nlines\"\r\n\r\n3,4,5");
  CHECK(t.header == std::vector<std::string>{"a", "b,c", "d"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"1", "say \"hi\"", "two\nlines"});
  CHECK(t.rows[1] == std::vector<std::string>{"3", "4", "5"});
  CHECK(t.lines == std::vector<std::size_t>{2, 5});
  CHECK(parse("").header.empty());
}

TEST_CASE("csv diagnostics carry file and line") {
  CHECK_THROWS_WITH_AS(parse("a,b\n1,2\n3\n"), doctest::Contains("t.csv:3:"), DataError);
  CHECK_THROWS_WITH_AS(parse("a,b\n1,\"2\n"), doctest::Contains("t.csv:2: unterminated"), DataError);
  CHECK_THROWS_WITH_AS(parse("a,b\n1,x\"y\n"), doctest::Contains("t.csv:2:"), DataError);
  CHECK_THROWS_WITH_AS(cli::read_csv_file("/nonexistent/file.csv"), doctest::Contains("cannot open"), DataError);
}

TEST_CASE("csv_escape quotes only when needed") {
  CHECK(cli::csv_escape("plain") == "plain");
  CHECK(cli::csv_escape("a,b") == "\"a,b\"");
  CHECK(cli::csv_escape("say \"x\"") == "\"say \"\"x\"\"\"");
  const auto back = parse("h\n" + cli::csv_escape("x,\"y\"\nz") + "\n");
  CHECK(back.rows[0][0] == "x,\"y\"\nz");
}

TEST_CASE("label ordering") {
  CHECK(cli::ordered_labels({"10", "2", "1", "2"}) == std::vector<std::string>{"1", "2", "10"});
  CHECK(cli::ordered_labels({"M", "B", "M"}) == std::vector<std::string>{"B", "M"});
  CHECK(cli::ordered_labels({"2", "a"}) == std::vector<std::string>{"2", "a"});
}

TEST_CASE("training and test tables") {
  const auto train = cli::training_table(parse("id,x,y,class\n7,1.5,2,B\n8,-1,0.5,M\n9,0,0,B\n"), {"class", {"id"}});
  CHECK(train.feature_names == std::vector<std::string>{"x", "y"});
  REQUIRE(train.data);
  CHECK(train.data->labels() == std::vector<Label>{1, 2, 1});
  CHECK(train.data->label_names() == std::vector<std::string>{"B", "M"});
  CHECK(train.data->features()(1, 0) == -1.0);

  CHECK_THROWS_WITH_AS(cli::training_table(parse("x,y\n1,2\n"), {"label", {}}), doctest::Contains("no label column"),
                       DataError);
  CHECK_THROWS_WITH_AS(cli::training_table(parse("x,label\n1,a\nfoo,b\n"), {"label", {}}),
                       doctest::Contains("t.csv:3: column 'x'"), DataError);
  CHECK_THROWS_AS(cli::training_table(parse("x,label\n1,a\n2,a\n"), {"label", {}}), DataError);
  CHECK_THROWS_AS(cli::training_table(parse("x,label\n1,a\n2,b\n"), {"label", {"nope"}}), DataError);

  const auto test = cli::test_table(parse("y,x,label\n3,4,?\n"), train.feature_names);
  REQUIRE(test.data);
  CHECK(test.data->features()(0, 0) == 4.0);
  CHECK(test.data->features()(0, 1) == 3.0);
  const auto header_only = cli::test_table(parse("x,y\n"), train.feature_names);
  CHECK_FALSE(header_only.data);
  CHECK(header_only.rows == 0);
  CHECK_THROWS_WITH_AS(cli::test_table(parse("x\n1\n"), train.feature_names), doctest::Contains("missing feature column 'y'"),
                       DataError);
}

TEST_CASE("format_number reads back exactly") {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 12345.678, 0.0}) CHECK(std::stod(cli::format_number(v)) == v);
  CHECK(cli::format_number(0.5) == "0.5");
  CHECK(cli::format_optional(std::nullopt).empty());
}

TEST_CASE("bundled configs load") {
  const fs::path dir = fs::path(DABAG_SOURCE_DIR) / "configs";
  std::size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    const auto cfg = cli::load_experiment_config(entry.path().string());
    CHECK_NOTHROW(cfg.validate());
    ++seen;
  }
  CHECK(seen >= 5);
}

TEST_CASE("config parsing") {
  const auto cfg = cli::parse_experiment_config(R"({
    "scenario": "setting1", "q1_grid": [0.5, 0.1], "reps": 2, "seed": 4,
    "methods": [{"tag": "da-knn", "mode": "da", "base": {"kind": "knn", "k": 3}, "replicates": 5,
                 "resample": {"k": 2, "t_max": 7}},
                {"tag": "tree", "mode": "none", "base": "tree"}]
  })", "inline");
  REQUIRE(cfg.q_grid.size() == 2);
  CHECK(cfg.q_grid[1] == std::vector<double>{0.1, 0.9});
  CHECK(cfg.methods[0].replicates == 5);
  CHECK(std::get<KnnSpec>(cfg.methods[0].base).k == 3);
  CHECK(cfg.methods[0].resample.k == 2);
  CHECK(cfg.methods[0].resample.t_max == 7);
  CHECK(cfg.methods[1].kind == MethodKind::kSingle);

  CHECK_THROWS_WITH_AS(cli::parse_experiment_config(R"({"scenario": "setting1", "q1_grid": [0.5], "method": []})", "c.json"),
                       doctest::Contains("unknown key 'method'"), UsageError);
  CHECK_THROWS_AS(cli::parse_experiment_config("{not json", "c.json"), UsageError);
  CHECK_THROWS_AS(cli::parse_experiment_config(R"({"scenario": "setting1", "q_grid": [[0.5,0.5]], "q1_grid": [0.5],
                  "methods": [{"tag": "t", "mode": "none", "base": "tree"}]})", "c.json"), UsageError);
}

TEST_CASE("fit-predict matches the library pipeline on the same seed") {
  Scratch s;
  REQUIRE(run({"generate", "--scenario", "setting1", "--n", "120", "--m", "80", "--q", "0.2", "--seed", "3", "--out-dir",
               s.dir.string()}).code == 0);
  const auto gt = generate(ScenarioSpec{Scenario::kSetting1, 120, 80, {0.2, 0.8}, 0.0, 3});

  for (const std::string mode : {"da", "classical", "none"}) {
    INFO(mode);
    const auto r = run({"fit-predict", "--train", s / "train.csv", "--test", s / "test.csv", "--mode", mode, "--base",
                        "knn", "--knn-k", "5", "--b", "7", "--k", "2", "--seed", "11"});
    REQUIRE(r.code == 0);

    const RngStream master(11);
    std::vector<Label> pred;
    if (mode == "none") {
      const auto model = fit(KnnSpec{5}, gt.train, master.derive(Purpose::kFit));
      pred = predict_all(model, gt.test, master.derive(Purpose::kPredict));
    } else {
      DaBaggingConfig cfg;
      cfg.replicates = 7;
      cfg.resample.k = 2;
      cfg.base = KnnSpec{5};
      cfg.mode = mode == "da" ? EnsembleMode::kDomainAdaptive : EnsembleMode::kClassicalBootstrap;
      const auto model = fit_ensemble(gt.train, &gt.test, cfg, master.derive(Purpose::kFit));
      pred = vote_table(model, gt.test, master.derive(Purpose::kPredict)).majority();
    }
    std::string expected = "row,prediction\n";
    for (std::size_t i = 0; i < pred.size(); ++i) expected += std::to_string(i) + "," + std::to_string(pred[i]) + "\n";
    CHECK(r.out == expected);
  }
}

TEST_CASE("fit-predict with anomaly detection matches the library") {
  Scratch s;
  REQUIRE(run({"generate", "--n", "200", "--m", "100", "--q", "0.3", "--epsilon", "0.1", "--seed", "5", "--out-dir",
               s.dir.string()}).code == 0);
  const auto gt = generate(ScenarioSpec{Scenario::kSetting1, 200, 100, {0.3, 0.7}, 0.1, 5});
  const auto r = run({"fit-predict", "--train", s / "train.csv", "--test", s / "test.csv", "--b", "5", "--seed", "2",
                      "--detect-anomalies", "--out", s / "pred.csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());

  const RngStream master(2);
  const auto cal = calibrate(gt.train, AnomalyConfig{}, master.derive(Purpose::kSplit));
  const auto part = filter_anomalies(gt.test.features(), gt.train, cal);
  const auto points = gt.test.subset(part.inliers);
  DaBaggingConfig cfg;
  cfg.replicates = 5;
  const auto model = fit_ensemble(gt.train, &points, cfg, master.derive(Purpose::kFit));
  const auto pred = vote_table(model, points, master.derive(Purpose::kPredict)).majority();
  std::vector<std::string> labels(100);
  for (std::size_t i : part.anomalies) labels[i] = "anomaly";
  for (std::size_t i = 0; i < part.inliers.size(); ++i) labels[part.inliers[i]] = std::to_string(pred[i]);
  std::string expected = "row,prediction\n";
  for (std::size_t i = 0; i < 100; ++i) expected += std::to_string(i) + "," + labels[i] + "\n";
  CHECK(slurp(s / "pred.csv") == expected);
  CHECK_FALSE(part.anomalies.empty());
}

TEST_CASE("CLI output is byte-identical across thread counts") {
  Scratch s;
  REQUIRE(run({"generate", "--n", "100", "--m", "60", "--q", "0.2", "--epsilon", "0.1", "--seed", "8", "--out-dir",
               s.dir.string()}).code == 0);
  std::vector<std::string> outputs;
  for (const std::string threads : {"1", "4"}) {
    const auto fp = run({"fit-predict", "--train", s / "train.csv", "--test", s / "test.csv", "--b", "6", "--threads",
                         threads, "--detect-anomalies"});
    REQUIRE(fp.code == 0);
    outputs.push_back(fp.out);
  }
  CHECK(outputs[0] == outputs[1]);

  const std::string config = std::string(DABAG_SOURCE_DIR) + "/configs/setting1_anomaly.json";
  for (const std::string threads : {"1", "4"}) {
    const auto r = run({"simulate", config, "--reps", "2", "--b", "2", "--threads", threads, "--quiet", "--out-dir",
                        s / ("sim" + threads)});
    REQUIRE(r.code == 0);
  }
  CHECK(slurp(s / "sim1/records.csv") == slurp(s / "sim4/records.csv"));
  CHECK(slurp(s / "sim1/aggregates.json") == slurp(s / "sim4/aggregates.json"));
}

TEST_CASE("simulate smoke run") {
  Scratch s;
  const std::string config = std::string(DABAG_SOURCE_DIR) + "/configs/setting1.json";
  const auto r = run({"simulate", config, "--reps", "1", "--b", "1", "--out-dir", s.dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("accuracy") != std::string::npos);
  const auto records = cli::read_csv_file(s / "records.csv");
  CHECK(records.header.back() == "failure");
  CHECK(std::find(records.header.begin(), records.header.end(), "runtime_seconds") == records.header.end());
  CHECK(records.rows.size() == 9 * 11);
  const auto first = slurp(s / "records.csv");
  REQUIRE(run({"simulate", config, "--reps", "1", "--b", "1", "--quiet", "--out-dir", s.dir.string()}).code == 0);
  CHECK(slurp(s / "records.csv") == first);

  REQUIRE(run({"simulate", config, "--reps", "1", "--b", "1", "--quiet", "--timing", "--mode", "classical", "--base",
               "lda", "--out-dir", s / "t"}).code == 0);
  const auto timed = cli::read_csv_file(s / "t/records.csv");
  CHECK(std::find(timed.header.begin(), timed.header.end(), "runtime_seconds") != timed.header.end());
  CHECK(timed.rows[0][5] == "classical-lda");
}

TEST_CASE("detect writes T and per-class scores") {
  Scratch s;
  REQUIRE(run({"generate", "--n", "100", "--m", "50", "--epsilon", "0.2", "--seed", "9", "--out-dir", s.dir.string()})
              .code == 0);
  const auto r = run({"detect", "--train", s / "train.csv", "--test", s / "test.csv", "--k", "3", "--seed", "4"});
  REQUIRE(r.code == 0);
  const auto t = parse(r.out);
  CHECK(t.header == std::vector<std::string>{"row", "T", "dtm_1", "dtm_2"});
  REQUIRE(t.rows.size() == 50);

  const auto gt = generate(ScenarioSpec{Scenario::kSetting1, 100, 50, {0.5, 0.5}, 0.2, 9});
  AnomalyConfig ac;
  ac.k = 3;
  const auto cal = calibrate(gt.train, ac, RngStream(4).derive(Purpose::kSplit));
  const auto groups = gt.train.rows_by_class();
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t l = 0; l < 2; ++l) {
      CHECK(std::stod(t.rows[i][2 + l]) == dtm_hat(gt.test.row(i), gt.train.subset(groups[l]), 3));
    }
    CHECK(std::stoi(t.rows[i][1]) == test_statistic(gt.test.row(i), gt.train, cal));
  }
}

TEST_CASE("empty and single-row test files") {
  Scratch s;
  write(s / "train.csv", "x,label\n0,a\n0.1,a\n0.2,a\n0.3,a\n5,b\n5.1,b\n5.2,b\n5.3,b\n");
  write(s / "empty.csv", "");
  write(s / "header.csv", "x\n");
  write(s / "one.csv", "x\n4.9\n");

  auto r = run({"detect", "--train", s / "train.csv", "--test", s / "empty.csv", "--k", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  r = run({"detect", "--train", s / "train.csv", "--test", s / "header.csv", "--k", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "row,T,dtm_a,dtm_b\n");
  r = run({"fit-predict", "--train", s / "train.csv", "--test", s / "header.csv", "--base", "knn", "--knn-k", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "row,prediction\n");
  r = run({"fit-predict", "--train", s / "train.csv", "--test", s / "one.csv", "--base", "knn", "--knn-k", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "row,prediction\n0,b\n");
}

TEST_CASE("exit codes") {
  Scratch s;
  write(s / "train.csv", "x,label\n0,a\n1,b\n");
  write(s / "bad.csv", "x\n1\nfoo\n");
  CHECK(run({"fit-predict", "--bogus"}).code == cli::kUsage);
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"fit-predict", "--train", s / "train.csv", "--test", s / "bad.csv"}).code == cli::kData);
  const auto missing = run({"fit-predict", "--train", s / "nope.csv", "--test", s / "bad.csv"});
  CHECK(missing.code == cli::kData);
  CHECK(missing.err.find("nope.csv") != std::string::npos);
  const auto bad = run({"fit-predict", "--train", s / "train.csv", "--test", s / "bad.csv", "--base", "knn"});
  CHECK(bad.err.find("bad.csv:3:") != std::string::npos);
  CHECK(run({"fit-predict", "--train", s / "train.csv", "--test", s / "bad.csv", "--base", "svm"}).code == cli::kUsage);
  CHECK(run({"detect", "--train", s / "train.csv", "--test", s / "bad.csv", "--alpha", "2"}).code == cli::kUsage);
  write(s / "cfg.json", R"({"scenario": "setting1", "q1_grid": [0.5], "methods": [], "extra": 1})");
  CHECK(run({"simulate", s / "cfg.json"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == cli::kSuccess);
}

TEST_CASE("generate writes labeled train and test files") {
  Scratch s;
  REQUIRE(run({"generate", "--scenario", "toy3", "--n", "30", "--m", "21", "--q", "0.5,0.25,0.25", "--out-dir",
               s.dir.string()}).code == 0);
  const auto train = cli::read_csv_file(s / "train.csv");
  CHECK(train.header == std::vector<std::string>{"x1", "x2", "label"});
  CHECK(train.rows.size() == 30);
  REQUIRE(run({"generate", "--m", "20", "--epsilon", "0.25", "--out-dir", s / "anom"}).code == 0);
  const auto test = cli::read_csv_file(s / "anom/test.csv");
  CHECK(std::count_if(test.rows.begin(), test.rows.end(), [](const auto& r) { return r.back() == "anomaly"; }) == 5);
}
