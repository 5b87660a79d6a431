#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cyclecast/dataset.hpp"
#include "test_support.hpp"

using cyclecast::read_file;
using cyclecast::write_file_atomic;
using testing::TempDir;
using json = nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with `args`, capturing stdout and stderr. `env` is prepended as
// shell variable assignments.
Result cli(const TempDir& dir, const std::string& args, const std::string& env = "") {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = env + " \"" + CYCLECAST_BIN + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

// A synthetic data set plus its run configuration, generated once per test.
struct SynthDir {
  TempDir tmp;
  std::filesystem::path data = tmp / "data";
  std::string config = "--config " + q(data / "run_config.json");

  explicit SynthDir(const std::string& extra = "") {
    auto r = cli(tmp, "-q --seed 1 synth --out " + q(data) + " " + extra);
    REQUIRE(r.code == 0);
  }
};

}  // namespace

TEST_CASE("synth, train and evaluate write their artefacts") {
  SynthDir s;
  CHECK(std::filesystem::exists(s.data / "manifest.json"));
  CHECK(std::filesystem::exists(s.data / "labels.csv"));
  CHECK(std::filesystem::exists(s.data / "series/growth_00.csv"));

  auto train = cli(s.tmp, s.config + " --model mlr train");
  REQUIRE(train.code == 0);
  CHECK(std::filesystem::exists(s.data / "out/model.json"));
  CHECK(train.out.find("final fit on train+validation") != std::string::npos);
  CHECK(train.out.find("training_log_loss=") != std::string::npos);
  CHECK(read_file(s.data / "out/train_log.txt") == train.out);

  auto eval = cli(s.tmp, s.config + " evaluate");
  REQUIRE(eval.code == 0);
  CHECK(eval.out.find("confusion matrix (rows = predicted, columns = true label)") != std::string::npos);
  CHECK(eval.out == read_file(s.data / "out/report.txt"));
  auto svg = read_file(s.data / "out/plot.svg");
  CHECK(svg.rfind("<svg", 0) == 0);

  auto report = json::parse(read_file(s.data / "out/report.json"));
  CHECK(report.at("top1").get<double>() >= 0.9);

  // JSON and CSV renderings carry the same numbers.
  std::istringstream csv(read_file(s.data / "out/report.csv"));
  std::string line;
  std::getline(csv, line);
  std::map<std::string, double> values;
  while (std::getline(csv, line)) {
    auto a = line.find(','), b = line.find(',', a + 1);
    values[line.substr(0, a)] = std::stod(line.substr(a + 1, b - a - 1));
  }
  CHECK(values.at("top1") == report.at("top1").get<double>());
  CHECK(values.at("top2") == report.at("top2").get<double>());
  CHECK(values.at("macro") == report.at("f_macro").get<double>());
  CHECK(values.at("weighted") == report.at("f_weighted").get<double>());
  CHECK(values.at("two_label") == report.at("two_label_accuracy").get<double>());
  for (const char* phase : {"recovery", "expansion", "slowdown", "recession"}) {
    CHECK(values.at(phase) == report.at("f_score").at(phase).get<double>());
  }

  auto as_json = cli(s.tmp, s.config + " --format json evaluate");
  REQUIRE(as_json.code == 0);
  CHECK(json::parse(as_json.out) == report);
}

TEST_CASE("reruns produce byte-identical outputs") {
  SynthDir s;
  const auto out = s.data / "out";
  std::map<std::string, std::string> first;
  for (const char* cmd : {"build-indices", "features", "train", "evaluate"}) REQUIRE(cli(s.tmp, s.config + " -q " + cmd).code == 0);
  for (const char* f : {"growth.csv", "inflation.csv", "loadings.json", "features.csv", "model.json", "report.json",
                        "report.csv", "plot.svg"}) {
    first[f] = read_file(out / f);
  }
  std::filesystem::remove_all(out);
  for (const char* cmd : {"build-indices", "features", "train", "evaluate"}) REQUIRE(cli(s.tmp, s.config + " -q " + cmd).code == 0);
  for (const auto& [f, bytes] : first) {
    INFO(f);
    CHECK(read_file(out / f) == bytes);
  }
}

TEST_CASE("a 60-month panel yields exactly one index row") {
  SynthDir s("--months 60 --duration 10 --series 6");
  auto r = cli(s.tmp, s.config + " -q build-indices");
  REQUIRE(r.code == 0);
  for (const char* f : {"growth.csv", "inflation.csv"}) {
    auto text = read_file(s.data / "out" / f);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);  // header + one row
    CHECK(text.find("\n1974,12,") != std::string::npos);
  }
}

TEST_CASE("rbbcp needs no training but snapshots its configuration") {
  SynthDir s;
  auto r = cli(s.tmp, s.config + " --model rbbcp train");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("final fit") == std::string::npos);
  auto snapshot = json::parse(read_file(s.data / "out/run_config.json"));
  CHECK(snapshot.at("model") == "rbbcp");
  auto model = json::parse(read_file(s.data / "out/model.json"));
  CHECK(model.at("kind") == "rbbcp");

  auto pred = cli(s.tmp, s.config + " --format csv predict --month 2010-06");
  REQUIRE(pred.code == 0);
  int ones = 0;
  std::istringstream in(pred.out);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) ones += line.substr(line.rfind(',') + 1) == "1";
  CHECK(ones == 1);
}

TEST_CASE("predict prints a distribution and its top two phases") {
  SynthDir s;
  REQUIRE(cli(s.tmp, s.config + " -q train").code == 0);
  auto r = cli(s.tmp, s.config + " --format json predict --month 2015-03");
  REQUIRE(r.code == 0);
  auto doc = json::parse(r.out);
  CHECK(doc.at("month") == "2015-04");
  double sum = 0;
  for (const auto& [k, v] : doc.at("probabilities").items()) sum += v.get<double>();
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(doc.at("top2").size() == 2);

  auto text = cli(s.tmp, s.config + " predict --month 2015-03");
  CHECK(text.out.find("top-2: ") != std::string::npos);

  // The synthetic months start in 1970-01; no window ends this early.
  auto early = cli(s.tmp, s.config + " predict --month 1970-02");
  CHECK(early.code == 3);
  CHECK(early.err.find("1970-02") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir tmp;
  auto missing = cli(tmp, "--data-dir " + q(tmp / "nowhere") + " build-indices");
  CHECK(missing.code == 3);
  CHECK(missing.err.find((tmp / "nowhere").string()) != std::string::npos);

  write_file_atomic(tmp / "bad.json", R"({"window": 4, "colour": "blue"})");
  auto bad_config = cli(tmp, "--config " + q(tmp / "bad.json") + " train");
  CHECK(bad_config.code == 2);
  CHECK(bad_config.err.find("colour") != std::string::npos);

  CHECK(cli(tmp, "--config " + q(tmp / "absent.json") + " train").code == 2);
  CHECK(cli(tmp, "--no-such-flag train").code == 4);
  CHECK(cli(tmp, "launch").code == 4);
  CHECK(cli(tmp, "").code == 4);
  CHECK(cli(tmp, "--region uk train").code == 4);
  CHECK(cli(tmp, "--help").code == 0);

  SynthDir s;
  CHECK(cli(s.tmp, s.config + " --window 1 train").code == 2);
  CHECK(cli(s.tmp, s.config + " predict --month June").code == 2);
  CHECK(cli(s.tmp, s.config + " evaluate --model-file " + q(tmp / "none.json")).code == 3);
}

TEST_CASE("flags override the config file") {
  SynthDir s;
  REQUIRE(cli(s.tmp, s.config + " --window 6 --seed 5 -q train").code == 0);
  auto snapshot = json::parse(read_file(s.data / "out/run_config.json"));
  CHECK(snapshot.at("window") == 6);
  CHECK(snapshot.at("seed") == 5);
  CHECK(json::parse(read_file(s.data / "out/model.json")).at("window") == 6);
}

TEST_CASE("fetch reads through a provider mirror and the cache") {
  TempDir tmp;
  const auto data = tmp / "data";
  write_file_atomic(tmp / "mirror/fred/series/observations",
                    R"({"observations":[{"date":"2020-01-01","value":"1.5"},{"date":"2020-02-01","value":"."},)"
                    R"({"date":"2020-03-01","value":"2"}]})");
  write_file_atomic(data / "manifest.json",
                    R"({"region":"us","series":[{"id":"cpi","file":"series/cpi.csv","category":"inflation",)"
                    R"("provider":"fred","provider_series":"CPIAUCSL"}]})");
  write_file_atomic(tmp / "config.json", R"({"paths":{"data_dir":")" + data.string() + R"(","cache_dir":")" +
                                             (tmp / "cache").string() + R"("}})");
  const std::string config = "--config " + q(tmp / "config.json");

  auto offline = cli(tmp, config + " --offline fetch");
  CHECK(offline.code == 3);
  CHECK(offline.err.find("CPIAUCSL") != std::string::npos);

  const std::string mirror = "CYCLECAST_FRED_URL=file://" + (tmp / "mirror").string();
  REQUIRE(cli(tmp, config + " -q fetch", mirror).code == 0);
  CHECK(read_file(data / "series/cpi.csv") == "year,month,value\n2020,1,1.5\n2020,3,2\n");

  std::filesystem::remove(data / "series/cpi.csv");
  REQUIRE(cli(tmp, config + " -q --offline fetch").code == 0);
  CHECK(read_file(data / "series/cpi.csv") == "year,month,value\n2020,1,1.5\n2020,3,2\n");
}
