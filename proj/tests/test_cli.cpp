#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "oracles.hpp"

using namespace bowsp;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("bowsp_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string(BOWSP_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out)};
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

int csv_rows(const std::string& csv) {
  return static_cast<int>(std::count(csv.begin(), csv.end(), '\n')) - 1;  // minus header
}

}  // namespace

TEST(Cli, FixtureMatchesCheckedInFile) {
  ASSERT_EQ(cli("fixture --out " + path("po.json")).status, 0);
  EXPECT_EQ(slurp(path("po.json")), slurp(std::string(BOWSP_DATA_DIR) + "/purchase_order.json"));
}

TEST(Cli, SolveFixture) {
  ASSERT_EQ(cli("fixture --out " + path("po.json")).status, 0);
  const CliRun r = cli("solve " + path("po.json") + " --out -");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out, front_csv(pbb_front(purchase_order_fixture())));
  EXPECT_NE(r.out.find("\n0,0,"), std::string::npos);
}

TEST(Cli, EmptyFrontExitsWithTwo) {
  ASSERT_EQ(cli("fixture --variant unsatisfiable --out " + path("bad.json")).status, 0);
  const CliRun r = cli("solve " + path("bad.json") + " --ba 0 --bc 0 --out -");
  EXPECT_EQ(r.status, 2) << r.out;
}

TEST(Cli, ErrorsExitWithOneAndNameTheCode) {
  const CliRun missing = cli("solve " + path("nope.json"));
  EXPECT_EQ(missing.status, 1);
  EXPECT_NE(missing.out.find("unreadable-file"), std::string::npos) << missing.out;
  {
    std::ofstream bad(path("broken.json"));
    bad << "{\"k\": 3,";
  }
  const CliRun broken = cli("solve " + path("broken.json"));
  EXPECT_EQ(broken.status, 1);
  EXPECT_NE(broken.out.find("parse-error"), std::string::npos) << broken.out;
}

TEST(Cli, GenerateIsDeterministic) {
  ASSERT_EQ(cli("generate --k 8 --d 10% --e 0.3 --seed 5 --out " + path("g1.json")).status, 0);
  ASSERT_EQ(cli("generate --k 8 --d 10% --e 0.3 --seed 5 --out " + path("g2.json")).status, 0);
  ASSERT_EQ(cli("generate --k 8 --d 10% --e 0.3 --seed 6 --out " + path("g3.json")).status, 0);
  EXPECT_EQ(slurp(path("g1.json")), slurp(path("g2.json")));
  EXPECT_NE(slurp(path("g1.json")), slurp(path("g3.json")));
  GenParams p;
  p.k = 8;
  p.d = 0.8;
  p.e = 0.3;
  p.seed = 5;
  EXPECT_EQ(slurp(path("g1.json")), save_instance(generate(p)));
}

TEST(Cli, WorstCaseFrontHasBellManyRows) {
  ASSERT_EQ(cli("worstcase --k 4 --out " + path("wc.json")).status, 0);
  const CliRun r = cli("solve " + path("wc.json") + " --out -");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(csv_rows(r.out), 15);
}

TEST(Cli, SolversAgree) {
  ASSERT_EQ(cli("generate --k 5 --scaled --d 1 --e 0.3 --seed 3 --out " + path("s.json")).status, 0);
  const std::string pbb = cli("solve " + path("s.json") + " --out -").out;
  for (const char* other : {"--solver oracle", "--solver enum", "--solver eps", "--solver eps --backend oracle"}) {
    const CliRun r = cli("solve " + path("s.json") + " " + other + " --out -");
    ASSERT_EQ(r.status, 0) << other;
    // weight columns must match; witnesses may differ between solvers
    auto weights = [](const std::string& csv) {
      std::vector<std::string> out;
      std::istringstream in(csv);
      std::string line;
      while (std::getline(in, line)) out.push_back(line.substr(0, line.find(',', line.find(',') + 1)));
      return out;
    };
    EXPECT_EQ(weights(r.out), weights(pbb)) << other;
  }
}

TEST(Cli, CsvIdenticalAcrossThreadCounts) {
  ASSERT_EQ(cli("generate --k 7 --scaled --d 1 --e 0.3 --seed 4 --out " + path("t.json")).status, 0);
  const std::string one = cli("solve " + path("t.json") + " --threads 1 --out -").out;
  for (int t : {2, 3, 4}) EXPECT_EQ(cli("solve " + path("t.json") + " --threads " + std::to_string(t) + " --out -").out, one);
}

TEST(Cli, ReportHasDigestAndStats) {
  ASSERT_EQ(cli("fixture --out " + path("po.json")).status, 0);
  ASSERT_EQ(cli("solve " + path("po.json") + " --out " + path("f.csv") + " --report " + path("r.json")).status, 0);
  const Json j = parse_json_text(slurp(path("r.json")));
  EXPECT_EQ(j["solver"], "pbb");
  EXPECT_EQ(j["front"].size(), 1U);
  EXPECT_TRUE(j.contains("stats"));
  EXPECT_EQ(j["digest"].get<std::string>().rfind("fnv1a64:", 0), 0U);
}

TEST(Cli, BenchWritesOneRowPerCell) {
  const CliRun r = cli("bench --k-range 8..9 --reps 2 --solver pbb,eps --d 10% --seed 1 --timeout 30 --out " + path("bench.csv"));
  ASSERT_EQ(r.status, 0) << r.out;
  const std::string csv = slurp(path("bench.csv"));
  EXPECT_EQ(csv.rfind("k,d,e,solver,reps,completed,censored,failed,median_ms,median_front\n", 0), 0U) << csv;
  EXPECT_EQ(csv_rows(csv), 4);
  EXPECT_NE(csv.find("\n8,0.8,0.3,pbb,2,2,0,0,"), std::string::npos) << csv;
}

TEST(Cli, ApplicationCommands) {
  ASSERT_EQ(cli("fixture --out " + path("po.json")).status, 0);
  const CliRun cmup = cli("cmup " + path("po.json"));
  ASSERT_EQ(cmup.status, 0) << cmup.out;
  EXPECT_EQ(parse_json_text(cmup.out)["users"], 3);

  const CliRun res = cli("resilient " + path("po.json") + " --t 1 --flavor static");
  ASSERT_EQ(res.status, 0) << res.out;
  EXPECT_EQ(parse_json_text(res.out)["resilient"], false);

  ASSERT_EQ(cli("fixture --variant availability --out " + path("av.json") + " --availability " + path("av_side.json")).status, 0);
  const CliRun rp = cli("resilient-plan " + path("av.json") + " --availability " + path("av_side.json") + " --budget 1");
  ASSERT_EQ(rp.status, 0) << rp.out;
  EXPECT_NE(rp.out.find("0.9"), std::string::npos) << rp.out;
}

TEST(Cli, LpAndImport) {
  ASSERT_EQ(cli("fixture --out " + path("po.json")).status, 0);
  const CliRun lp = cli("lp " + path("po.json") + " --out -");
  ASSERT_EQ(lp.status, 0);
  EXPECT_EQ(lp.out, emit_lp(purchase_order_fixture(), {0, 0, purchase_order_fixture().bounds.auth, 0, purchase_order_fixture().bounds.cons}));
  {
    std::ofstream sol(path("sol.txt"));
    sol << "x_s1_u1 1\n";
  }
  const CliRun im = cli("import " + path("po.json") + " --solution " + path("sol.txt"));
  EXPECT_EQ(im.status, 1);
  EXPECT_NE(im.out.find("infeasible-solution-file"), std::string::npos) << im.out;
}
