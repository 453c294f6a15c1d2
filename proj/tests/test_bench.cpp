#include "bmlp/bench.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace bmlp;

namespace {

TEST(GenNet, ZeroDensityHasNoTransitions) {
  ElementaryNet net = gen_net({16, 0.0, 7, NetKind::Pairwise});
  EXPECT_EQ(net.places.size(), 16u);
  EXPECT_TRUE(net.transitions.empty());
}

TEST(GenNet, FullDensityHasAllOrderedPairs) {
  ElementaryNet net = gen_net({4, 1.0, 7, NetKind::Pairwise});
  EXPECT_EQ(net.transitions.size(), 12u);  // 4 * 3 ordered pairs
  for (const auto& t : net.transitions) {
    EXPECT_EQ(t.inputs.size(), 1u);
    EXPECT_EQ(t.outputs.size(), 1u);
  }
}

TEST(GenNet, DensityMatchesExpectationWithinThreeSigma) {
  GenSpec spec{1000, 0.001, 11, NetKind::Pairwise};
  double trials = 1000.0 * 999.0;
  double mean = trials * spec.p_t;
  double sigma = std::sqrt(trials * spec.p_t * (1.0 - spec.p_t));
  double got = static_cast<double>(gen_net(spec).transitions.size());
  EXPECT_NEAR(got, mean, 3.0 * sigma);
}

TEST(GenNet, DeterministicForSeed) {
  GenSpec spec{64, 0.05, 99, NetKind::Pairwise};
  EXPECT_EQ(render_net(gen_net(spec)), render_net(gen_net(spec)));
  GenSpec other = spec;
  other.seed = 100;
  EXPECT_NE(render_net(gen_net(spec)), render_net(gen_net(other)));
}

TEST(GenNet, HypernodeKindProducesMultiInputTransitions) {
  ElementaryNet net = gen_net({40, 0.8, 5, NetKind::Hypernode});
  bool any_pair_input = false;
  for (const auto& t : net.transitions)
    if (t.inputs.size() == 2) any_pair_input = true;
  EXPECT_TRUE(any_pair_input);
}

TEST(Reactions, ParsesStoichiometryAndCase) {
  ReactionList rl = parse_reactions("2 H2 + O2 -> 2 H2O\n");
  ASSERT_EQ(rl.reactions.size(), 1u);
  EXPECT_EQ(rl.reactions[0].lhs, (std::vector<std::string>{"h2", "o2"}));
  EXPECT_EQ(rl.reactions[0].rhs, (std::vector<std::string>{"h2o"}));
}

TEST(Reactions, ReversibleExpandsToTwoTransitions) {
  ReactionList rl = parse_reactions("a <-> b\nc + d -> e\n");
  ElementaryNet net = reactions_to_net(rl);
  EXPECT_EQ(net.transitions.size(), 3u);
  Marking fwd = reachable_places(net, {"a"});
  EXPECT_TRUE(fwd.count("b"));
  Marking bwd = reachable_places(net, {"b"});
  EXPECT_TRUE(bwd.count("a"));
}

TEST(Reactions, BadLineReportsLineNumber) {
  try {
    parse_reactions("a -> b\n-> c\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(RunBench, ClosurePopcountsAgreeAcrossMethods) {
  Workload w = workload_from_spec({64, 0.05, 3, NetKind::Pairwise});
  BenchConfig cfg;
  cfg.methods = {Algorithm::IE, Algorithm::RMS, Algorithm::Naive,
                 Algorithm::SemiNaive};
  std::vector<BenchRecord> rows = run_bench({w}, cfg);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.popcount, rows[0].popcount) << r.method;
    EXPECT_FALSE(r.timeout);
    EXPECT_GE(r.iterations, 1u);
  }
}

TEST(RunBench, MarkingWorkloadPopcountsAgree) {
  Workload w = workload_from_spec({32, 0.08, 9, NetKind::Pairwise});
  w.marking = Marking{*w.net.places.begin()};
  BenchConfig cfg;
  cfg.methods = {Algorithm::IE, Algorithm::RMS, Algorithm::SemiNaive};
  std::vector<BenchRecord> rows = run_bench({w}, cfg);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) EXPECT_EQ(r.popcount, rows[0].popcount) << r.method;
}

TEST(RunBench, EmptyNetYieldsZeroPopcount) {
  Workload w = workload_from_spec({8, 0.0, 1, NetKind::Pairwise});
  BenchConfig cfg;
  cfg.methods = {Algorithm::RMS};
  std::vector<BenchRecord> rows = run_bench({w}, cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].popcount, 0u);
}

TEST(Csv, HeaderAndRowShape) {
  Workload w = workload_from_spec({16, 0.2, 2, NetKind::Pairwise});
  BenchConfig cfg;
  cfg.methods = {Algorithm::RMS};
  std::ostringstream os;
  write_csv(os, run_bench({w}, cfg));
  std::string text = os.str();
  std::istringstream is(text);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header,
            "method,n,p_t,seed,repeat,phase_seconds_compile,"
            "phase_seconds_solve,iterations,popcount,timeout_flag");
  std::string row;
  ASSERT_TRUE(static_cast<bool>(std::getline(is, row)));
  EXPECT_EQ(row.rfind("bmlp_rms,16,0.2,2,0,", 0), 0u);
}

TEST(Csv, RunsAreDeterministicInContent) {
  // Timing columns vary; everything else must be byte-identical across runs.
  Workload w = workload_from_spec({48, 0.1, 17, NetKind::Pairwise});
  BenchConfig cfg;
  cfg.methods = {Algorithm::IE, Algorithm::RMS};
  auto strip_times = [](std::vector<BenchRecord> rows) {
    for (auto& r : rows) {
      r.compile_seconds = 0;
      r.solve_seconds = 0;
    }
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
  };
  EXPECT_EQ(strip_times(run_bench({w}, cfg)), strip_times(run_bench({w}, cfg)));
}

}  // namespace
