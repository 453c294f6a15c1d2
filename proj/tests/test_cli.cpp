#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(BMLP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof buf, pipe))
    r.output.append(buf, got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bmlp_cli_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_file(const std::string& name, const std::string& text) {
    fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  fs::path dir_;
};

const char* kExample3 =
    "flight(c0,c1). flight(c1,c2).\n"
    "route(X,Y):-flight(X,Y).\n"
    "route(X,Y):-flight(X,Z),route(Z,Y).\n";

TEST_F(CliTest, ParseValidProgram) {
  std::string in = write_file("p.pl", kExample3);
  RunResult r = run_cli("parse " + in);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("flight(c0,c1)."), std::string::npos);
}

TEST_F(CliTest, ParseErrorExitCode) {
  std::string in = write_file("bad.pl", "flight(c0,.\n");
  EXPECT_EQ(run_cli("parse " + in).exit_code, 1);
}

TEST_F(CliTest, ClassifyErrorExitCode) {
  std::string in = write_file("nonlir.pl",
                              "e(a,b).\nr(X,Y):-e(X,Z),e(Z,Y).\n");
  EXPECT_EQ(run_cli("compile " + in).exit_code, 2);
}

TEST_F(CliTest, RangeErrorExitCode) {
  EXPECT_EQ(run_cli("gen --n 8 --pt 1.5 --seed 1").exit_code, 4);
}

TEST_F(CliTest, EmptyProgramSolveFails) {
  std::string in = write_file("empty.pl", "");
  EXPECT_EQ(run_cli("solve " + in).exit_code, 1);
}

TEST_F(CliTest, CompileWritesMatrixFile) {
  std::string in = write_file("p.pl", kExample3);
  std::string out = path("m.txt");
  RunResult r = run_cli("compile " + in + " --out " + out);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  std::string text = slurp(out);
  EXPECT_NE(text.find("cton(0,c0).\n"), std::string::npos);
  EXPECT_NE(text.find("v(0,2).\n"), std::string::npos);
  EXPECT_NE(text.find("v(2,0).\n"), std::string::npos);
}

TEST_F(CliTest, SolveRmsReflexiveRows) {
  std::string in = write_file("p.pl", kExample3);
  std::string out = path("closure.txt");
  RunResult r =
      run_cli("solve " + in + " --algorithm rms --reflexive --out " + out);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  std::string text = slurp(out);
  EXPECT_NE(text.find("v(0,7).\n"), std::string::npos);
  EXPECT_NE(text.find("v(1,6).\n"), std::string::npos);
  EXPECT_NE(text.find("v(2,4).\n"), std::string::npos);
}

TEST_F(CliTest, SolveFactsListsDerivedPairs) {
  std::string in = write_file("p.pl", kExample3);
  RunResult r = run_cli("solve " + in + " --algorithm rms --facts");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("route(c0,c2)."), std::string::npos);
  EXPECT_EQ(r.output.find("route(c2,"), std::string::npos);
}

TEST_F(CliTest, SolveIeFromSource) {
  std::string in = write_file("p.pl",
                              "flight(c1,c2). flight(c2,c3).\n"
                              "route(X,Y):-flight(X,Y).\n"
                              "route(X,Y):-flight(X,Z),route(Z,Y).\n");
  RunResult r = run_cli("solve " + in + " --algorithm ie --source c1");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("v(0,7).\n"), std::string::npos);
}

TEST_F(CliTest, SolveUnknownSourceExitCode) {
  std::string in = write_file("p.pl", kExample3);
  EXPECT_EQ(run_cli("solve " + in + " --algorithm ie --source zz").exit_code, 3);
}

TEST_F(CliTest, SolveBinarySidecarWritten) {
  std::string in = write_file("p.pl", kExample3);
  std::string out = path("closure.txt");
  RunResult r = run_cli("solve " + in + " --algorithm rms --binary --out " + out);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  std::ifstream bin(out + ".bin", std::ios::binary);
  char magic[8] = {};
  bin.read(magic, 8);
  EXPECT_EQ(std::string(magic, 8), "BMLPBIN1");
}

TEST_F(CliTest, TransformAndReach) {
  std::string net = write_file(
      "net.txt",
      "transition flight_1: berlin paris -> london toronto.\n"
      "transition flight_2: london toronto -> new_york.\n"
      "transition flight_3: new_york -> london.\n");
  RunResult t = run_cli("transform " + net + " --marking berlin,paris");
  EXPECT_EQ(t.exit_code, 0) << t.output;
  EXPECT_NE(t.output.find("berlin_paris"), std::string::npos);

  RunResult r = run_cli("reach " + net + " --marking berlin,paris");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  for (const char* place :
       {"berlin", "paris", "london", "toronto", "new_york"})
    EXPECT_NE(r.output.find(place), std::string::npos) << place;
}

TEST_F(CliTest, ReachUnknownPlaceExitCode) {
  std::string net = write_file("net.txt", "transition t: a -> b.\n");
  EXPECT_EQ(run_cli("reach " + net + " --marking zz").exit_code, 3);
}

TEST_F(CliTest, GenIsDeterministic) {
  std::string a = path("a.txt"), b = path("b.txt");
  EXPECT_EQ(run_cli("gen --n 32 --pt 0.1 --seed 5 --out " + a).exit_code, 0);
  EXPECT_EQ(run_cli("gen --n 32 --pt 0.1 --seed 5 --out " + b).exit_code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

TEST_F(CliTest, BenchWritesCsv) {
  std::string out = path("bench.csv");
  RunResult r = run_cli(
      "bench --n 16 --pt 0.1 --seed 3 --methods bmlp_ie,bmlp_rms --out " + out);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  std::string text = slurp(out);
  EXPECT_EQ(text.rfind("method,n,p_t,seed,repeat,", 0), 0u);
  EXPECT_NE(text.find("\nbmlp_ie,16,"), std::string::npos);
  EXPECT_NE(text.find("\nbmlp_rms,16,"), std::string::npos);
}

TEST_F(CliTest, CheckAgreesOnConsistentNet) {
  std::string net = write_file("net.txt",
                               "transition t1: a -> b.\ntransition t2: b -> c.\n");
  RunResult r = run_cli("check " + net + " --marking a");
  EXPECT_EQ(r.exit_code, 0) << r.output;
}

TEST_F(CliTest, FailedWriteLeavesNoPartialFile) {
  std::string in = write_file("p.pl", kExample3);
  std::string out = (dir_ / "missing_dir" / "m.txt").string();
  RunResult r = run_cli("compile " + in + " --out " + out);
  EXPECT_NE(r.exit_code, 0);
  EXPECT_FALSE(fs::exists(out));
}

}  // namespace
