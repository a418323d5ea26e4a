#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include "support.hpp"

using namespace testing_support;
namespace fs = std::filesystem;

namespace {

struct Result {
  int exit = -1;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(PUZZNIC_CLI) + "' " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  int status = pclose(p);
  r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("puzznic-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string corpus_file(const std::string& name) { return (fs::path(PUZZNIC_CORPUS_DIR) / (name + ".lvl")).string(); }
std::string golden(const std::string& name) { return read_file(fs::path(PUZZNIC_GOLDEN_DIR) / name); }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(Cli, SolveSolvedLevel) {
  Result r = run("solve " + write("empty.lvl", "#####\n#...#\n#####\n"));
  EXPECT_EQ(r.exit, 0);
  EXPECT_EQ(r.out, "");
}

TEST_F(Cli, SolveSingletonIsUnsolvable) { EXPECT_EQ(run("solve " + corpus_file("singleton")).exit, 2); }

TEST_F(Cli, SolveA13AndCheck) {
  Result r = run("solve " + corpus_file("5x7-ps1-a13"));
  ASSERT_EQ(r.exit, 0);
  EXPECT_EQ(r.out, golden("a13.plan"));
  Result c = run("check " + corpus_file("5x7-ps1-a13") + " " + write("a13.plan", r.out));
  EXPECT_EQ(c.exit, 0);
  EXPECT_EQ(c.out, "ok: 4 moves, 3 matches\n");
}

TEST_F(Cli, EverySolvedPlanChecks) {
  for (const auto& lvl : corpus()) {
    bool solvable = false;
    for (const char* algo : {"bfs", "astar", "sat-varmoves"}) {
      const bool sat = std::string(algo) == "sat-varmoves";
      if (sat && (!solvable || lvl.name == "shelves")) continue;
      Result r = run("solve --algo " + std::string(algo) + " --timeout 60 " + corpus_file(lvl.name));
      ASSERT_NE(r.exit, 1) << lvl.name << " " << algo;
      if (r.exit != 0) continue;
      solvable = true;
      EXPECT_EQ(run("check " + corpus_file(lvl.name) + " " + write("p.plan", r.out)).exit, 0) << lvl.name << " " << algo;
    }
  }
}

TEST_F(Cli, SolveBudgetExhausted) {
  EXPECT_EQ(run("solve --algo bfs --timeout 0.000001 " + corpus_file("shelves")).exit, 3);
}

TEST_F(Cli, SolveRejectsBadInput) {
  EXPECT_EQ(run("solve " + write("bad.lvl", "#####\n#.X.#\n#####\n")).exit, 1);
  EXPECT_EQ(run("solve " + path("missing.lvl")).exit, 1);
  EXPECT_EQ(run("solve --algo dijkstra " + corpus_file("one-move")).exit, 1);
}

TEST_F(Cli, SolvePreResolve) {
  std::string lvl = write("pending.lvl", "#####\n#R..#\n#B..#\n#BR.#\n#####\n");
  EXPECT_EQ(run("solve " + lvl).exit, 1);
  EXPECT_EQ(run("solve --pre-resolve " + lvl).exit, 0);
}

TEST_F(Cli, CheckReportsIllegalStep) {
  Result r = run("check " + corpus_file("one-move") + " " + write("bad.plan", "3 4 R\n"));
  EXPECT_EQ(r.exit, 2);
  EXPECT_EQ(r.out, "illegal move at step 1: 3 4 R\n");
  Result second = run("check " + corpus_file("5x7-ps1-a13") + " " + write("bad2.plan", "3 2 R\n2 1 R\n"));
  EXPECT_EQ(second.exit, 2);
  EXPECT_EQ(second.out.rfind("illegal move at step 2", 0), 0u);
}

TEST_F(Cli, CheckEmptyPlanOnUnsolvedLevel) {
  Result r = run("check " + corpus_file("one-move") + " " + write("empty.plan", ""));
  EXPECT_EQ(r.exit, 2);
  EXPECT_EQ(r.out, "plan ends with 2 blocks remaining\n");
}

TEST_F(Cli, ShowIsDeterministic) {
  std::string cmd = "show " + corpus_file("5x7-ps1-a13") + " " + write("a13.plan", golden("a13.plan"));
  Result a = run(cmd), b = run(cmd);
  EXPECT_EQ(a.exit, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, golden("a13.trace"));
}

TEST_F(Cli, EncodeHeaderAndDeterminism) {
  Result a = run("encode --horizon 1 -o " + path("a.cnf") + " " + corpus_file("one-move"));
  Result b = run("encode --horizon 1 -o " + path("b.cnf") + " " + corpus_file("one-move"));
  ASSERT_EQ(a.exit, 0);
  std::string text = read_file(path("a.cnf"));
  EXPECT_EQ(text, read_file(path("b.cnf")));
  sat::Dimacs d = sat::parse_dimacs(text);
  EXPECT_EQ(a.out, "variables: " + std::to_string(d.num_vars) + "\nclauses: " + std::to_string(d.clauses.size()) + "\n");
  EXPECT_NE(text.find("\np cnf " + std::to_string(d.num_vars) + " " + std::to_string(d.clauses.size()) + "\n"),
            std::string::npos);
}

TEST_F(Cli, EncodeA13BelowMinimalHorizonIsUnsat) {
  int n = 1;
  while (!clears_in_exactly(parse_level(read_file(corpus_file("5x7-ps1-a13"))).grid, n)) ++n;
  ASSERT_EQ(run("encode --horizon " + std::to_string(n - 1) + " -o " + path("below.cnf") + " " + corpus_file("5x7-ps1-a13")).exit, 0);
  ASSERT_EQ(run("encode --horizon " + std::to_string(n) + " -o " + path("at.cnf") + " " + corpus_file("5x7-ps1-a13")).exit, 0);
  EXPECT_EQ(run("sat " + path("below.cnf")).exit, 20);
  Result at = run("sat " + path("at.cnf"));
  EXPECT_EQ(at.exit, 10);
  EXPECT_EQ(at.out.rfind("s SATISFIABLE\n", 0), 0u);
}

TEST_F(Cli, EncodeRejectsBadHorizon) {
  EXPECT_EQ(run("encode --horizon 0 " + corpus_file("one-move")).exit, 1);
  EXPECT_EQ(run("encode --mode sideways " + corpus_file("one-move")).exit, 1);
}

TEST_F(Cli, ExportGoldens) {
  EXPECT_EQ(run("export domain").out, golden("domain.pddl"));
  Result p = run("export problem " + corpus_file("5x7-ps1-a13"));
  EXPECT_EQ(p.exit, 0);
  EXPECT_EQ(p.out, golden("a13.pddl"));
  EXPECT_EQ(run("export problem").exit, 1);
}

TEST_F(Cli, BenchEmptyCorpus) {
  fs::create_directories(path("empty"));
  Result table = run("bench " + path("empty"));
  EXPECT_EQ(table.exit, 0);
  EXPECT_EQ(lines(table.out), 1u);
  EXPECT_EQ(run("bench --tsv - " + path("empty")).out, "instance\tmethod\toutcome\tcost\tmeasure\tseconds\n");
}

TEST_F(Cli, BenchOneInstanceTwoMethods) {
  fs::create_directories(path("one"));
  fs::copy_file(corpus_file("5x7-ps1-a13"), path("one/a13.lvl"));
  Result r = run("bench --methods astar,sat-varmoves --tsv - " + path("one"));
  ASSERT_EQ(r.exit, 0);
  ASSERT_EQ(lines(r.out), 3u);
  std::istringstream in(r.out);
  std::string header, astar, varmoves;
  std::getline(in, header);
  std::getline(in, astar);
  std::getline(in, varmoves);
  EXPECT_EQ(astar.rfind("a13\tastar\tY\t4\tmoves\t", 0), 0u) << astar;
  EXPECT_EQ(varmoves.rfind("a13\tsat-varmoves\tY\t4\tmoves\t", 0), 0u) << varmoves;
}

TEST_F(Cli, BenchUnreadableInstanceGetsRow) {
  fs::create_directories(path("broken"));
  write("broken/bad.lvl", "#####\n#.X.#\n#####\n");
  Result r = run("bench --tsv - " + path("broken"));
  EXPECT_EQ(r.exit, 0);
  EXPECT_EQ(lines(r.out), 2u);
  EXPECT_NE(r.out.find("bad\t-\tE\t-\terror: "), std::string::npos) << r.out;
}

TEST_F(Cli, ExternalBackend) {
  std::string env = std::string("PUZZNIC_SAT_BACKEND=\"'") + PUZZNIC_CLI + "' sat\"";
  Result r = run("solve --algo sat-varmoves " + corpus_file("5x7-ps1-a13"), env);
  ASSERT_EQ(r.exit, 0);
  EXPECT_EQ(lines(r.out), 4u);
  EXPECT_EQ(run("check " + corpus_file("5x7-ps1-a13") + " " + write("ext.plan", r.out)).exit, 0);
  EXPECT_EQ(run("solve --algo sat-varmoves --max-moves 5 " + corpus_file("singleton"), env).exit, 2);
}
