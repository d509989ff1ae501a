#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "audit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("fairaudit_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  static int counter = 0;
  auto out = scratch() / ("out" + std::to_string(counter) + ".txt");
  auto err = scratch() / ("err" + std::to_string(counter++) + ".txt");
  std::string cmd = std::string("\"") + FAIRAUDIT_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                    err.string() + "\"";
  int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string data(const std::string& name) { return (fs::path(FAIRAUDIT_DATA_DIR) / name).string(); }

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// 2000-row synthetic file shared by the end-to-end cases.
fs::path synth_csv() {
  static const fs::path p = [] {
    auto path = scratch() / "synth.csv";
    auto r = run("synth --n 2000 --seed 3 -o " + q(path));
    REQUIRE(r.code == 0);
    return path;
  }();
  return p;
}

}  // namespace

TEST_CASE("registry is the implemented metric set") {
  std::set<std::string> names;
  for (const auto& m : fairaudit::cli::metric_registry()) names.insert(m.name);
  const std::set<std::string> expected{"dp",  "cdp", "eo",  "pe",          "eop", "pp",
                                       "suff", "acc", "bal_pos", "bal_neg", "auc", "calib",
                                       "consistency", "swd", "lipschitz", "flip", "gaps"};
  CHECK(names == expected);
  CHECK(fairaudit::cli::parse_metric_list("all").size() == expected.size());
  CHECK(fairaudit::cli::parse_metric_list("dp, eo") == std::vector<std::string>{"dp", "eo"});
  CHECK_THROWS_AS(fairaudit::cli::parse_metric_list("dp,nope"), std::invalid_argument);
}

TEST_CASE("help lists every metric") {
  auto r = run("--help");
  CHECK(r.code == 0);
  auto audit = run("audit --help");
  for (const auto& m : fairaudit::cli::metric_registry()) {
    CHECK_MESSAGE(r.out.find(m.name) != std::string::npos, m.name);
    CHECK_MESSAGE(audit.out.find(m.name) != std::string::npos, m.name);
  }
}

TEST_CASE("synth output") {
  auto r = run("synth --n 10 --seed 5");
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "A,X1,X2,X3,Y");
  int rows = 0;
  while (std::getline(in, line)) rows += !line.empty();
  CHECK(rows == 10);
  CHECK(run("synth --n 10 --seed 5").out == r.out);
  CHECK(run("synth --n 10 --seed 6").out != r.out);

  auto full = run("synth");
  CHECK(std::count(full.out.begin(), full.out.end(), '\n') == 15001);
}

TEST_CASE("exit codes") {
  CHECK(run("").code == 64);
  CHECK(run("bogus").code == 64);
  CHECK(run("synth --n 0").code == 64);
  CHECK(run("audit --data " + q(synth_csv()) + " --schema " + data("synth.schema") + " --metrics nope").code == 64);

  // A file without the target column cannot serve eo.
  auto no_target = scratch() / "no_target.csv";
  std::ofstream(no_target) << "A,X1,d\n0,0.5,1\n1,0.7,0\n";
  auto schema = scratch() / "no_target.schema";
  std::ofstream(schema) << "sensitive = A\ncontinuous = X1\n";
  auto eo = run("audit --data " + q(no_target) + " --schema " + q(schema) + " --predictions decision=d --metrics eo");
  CHECK(eo.code == 65);
  CHECK(eo.err.find("target") != std::string::npos);

  auto bad = scratch() / "bad.csv";
  std::ofstream(bad) << "A,X1,X2,X3,Y,d\n0,abc,0,0,1,1\n1,0,0,1,0,1\n";
  CHECK(run("audit --data " + q(bad) + " --schema " + data("synth.schema") +
            " --predictions decision=d --metrics dp").code == 65);
  // Neither predictions nor a model: usage error.
  CHECK(run("audit --data " + q(synth_csv()) + " --schema " + data("synth.schema") + " --metrics dp").code == 64);
}

TEST_CASE("audit reports and partial results") {
  auto csv = synth_csv();
  auto preds = scratch() / "preds.csv";
  {
    // Decisions equal to X3 on the synthetic rows.
    std::ifstream in(csv);
    std::ofstream out(preds);
    std::string line;
    std::getline(in, line);
    out << line << ",d\n";
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string c;
      while (std::getline(ss, c, ',')) cells.push_back(c);
      out << line << "," << cells[3] << "\n";
    }
  }
  auto r = run("audit --data " + q(preds) + " --schema " + data("synth.schema") +
               " --predictions decision=d --metrics dp");
  REQUIRE(r.code == 0);
  auto doc = json::parse(r.out);
  CHECK(doc["metrics"]["dp"].contains("gap"));
  CHECK(doc["metrics"]["dp"].contains("ratio"));

  auto all = run("audit --data " + q(preds) + " --schema " + data("synth.schema") +
                 " --predictions decision=d --condition-on X3");
  auto alldoc = json::parse(all.out);
  // Scores and a model are absent, so some metrics are skipped: partial.
  CHECK(all.code == 2);
  for (const auto& m : fairaudit::cli::metric_registry())
    CHECK_MESSAGE((alldoc["metrics"].contains(m.name) || alldoc["skipped"].contains(m.name)), m.name);
  CHECK(alldoc["metrics"].contains("consistency"));

  auto csv_out = run("--format csv audit --data " + q(preds) + " --schema " + data("synth.schema") +
                     " --predictions decision=d --metrics dp");
  CHECK(csv_out.out.find("metrics.dp.gap,") != std::string::npos);
}

TEST_CASE("train then audit") {
  auto csv = synth_csv();
  auto ftu = scratch() / "ftu.json";
  REQUIRE(run("train --data " + q(csv) + " --schema " + data("synth.schema") + " --strategy ftu --model-out " + q(ftu)).code == 0);
  auto flip = json::parse(run("audit --data " + q(csv) + " --schema " + data("synth.schema") + " --model " + q(ftu) +
                              " --metrics flip")
                              .out);
  CHECK(flip["metrics"]["flip"]["flip_consistency"].get<double>() == 1.0);

  auto supp = run("train --data " + q(csv) + " --schema " + data("synth.schema") + " --strategy supp:0.05 --model-out " +
                  q(scratch() / "supp.json"));
  CHECK(supp.code == 0);
  CHECK(supp.err.find("dropped: X1, X3") != std::string::npos);

  auto dp = scratch() / "dp.json";
  REQUIRE(run("train --data " + q(csv) + " --schema " + data("synth.schema") + " --strategy dp --model-out " + q(dp)).code == 0);
  auto rep = json::parse(run("audit --data " + q(csv) + " --schema " + data("synth.schema") + " --model " + q(dp) +
                             " --metrics dp")
                             .out);
  CHECK(rep["metrics"]["dp"]["ratio"].get<double>() >= 0.95);

  auto again = scratch() / "dp2.json";
  run("train --data " + q(csv) + " --schema " + data("synth.schema") + " --strategy dp --model-out " + q(again));
  CHECK(slurp(dp) == slurp(again));
}

TEST_CASE("counterfactual subcommand") {
  auto scm = data("x_equals_a_plus_u.json");
  auto r = run("counterfactual --scm " + scm + " --unit A=1,X=1.5 --do A=0");
  REQUIRE(r.code == 0);
  auto doc = json::parse(r.out);
  CHECK(doc["counterfactual"]["means"]["X"].get<double>() == 0.5);

  auto echo = json::parse(run("counterfactual --scm " + scm + " --unit A=1,X=1.5 --do A=1").out);
  CHECK(echo["counterfactual"]["means"]["X"].get<double>() == 1.5);

  auto held = json::parse(run("counterfactual --scm " + scm + " --unit A=1,X=1.5 --do A=0 --hold all-descendants").out);
  CHECK(held["counterfactual"]["means"]["X"].get<double>() == 1.5);

  CHECK(run("counterfactual --scm " + scm + " --unit A=1,X=1.5 --do Q=0").code == 65);

  // Gap mode: an FTU model on the synthetic structural model.
  auto csv = synth_csv();
  auto ftu = scratch() / "ftu_gap.json";
  REQUIRE(run("train --data " + q(csv) + " --schema " + data("synth.schema") + " --strategy ftu --model-out " + q(ftu)).code == 0);
  auto small = scratch() / "small.csv";
  REQUIRE(run("synth --n 40 --seed 8 -o " + q(small)).code == 0);
  auto gap = run("counterfactual --scm " + data("synth_high.json") + " --data " + q(small) + " --schema " +
                 data("synth.schema") + " --model " + q(ftu) + " --a 1 --b 0 --budget 200 --hold all-descendants");
  REQUIRE(gap.code == 0);
  auto gdoc = json::parse(gap.out);
  CHECK(gdoc.dump().find("cff_gap") != std::string::npos);
}

TEST_CASE("experiment writes both files deterministically") {
  auto a = scratch() / "exp_a";
  auto b = scratch() / "exp_b";
  REQUIRE(run("experiment --n 3000 --seed 2 --out " + q(a)).code == 0);
  REQUIRE(run("experiment --n 3000 --seed 2 --out " + q(b)).code == 0);
  auto csv = slurp(a.string() + ".csv");
  CHECK(csv == slurp(b.string() + ".csv"));
  CHECK(slurp(a.string() + ".json") == slurp(b.string() + ".json"));
  auto doc = json::parse(slurp(a.string() + ".json"));
  CHECK(doc["datasets"].size() == 2);
}
