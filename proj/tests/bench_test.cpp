#include "satlab/bench.hpp"

#include "gtest/gtest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace satlab;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const CnfFormula> singleClause() {
  return std::make_shared<const CnfFormula>(
      CnfFormula(3, {{Literal(0, false), Literal(1, false), Literal(2, false)}}));
}

std::shared_ptr<const CnfFormula> allEightClauses() {
  std::vector<Clause> cls;
  for (int s = 0; s < 8; ++s)
    cls.push_back({Literal(0, s & 1), Literal(1, s & 2), Literal(2, s & 4)});
  return std::make_shared<const CnfFormula>(CnfFormula(3, cls));
}

CompareSpec fromText(const std::string &text, const fs::path &base = {}) {
  std::istringstream in(text);
  return readCompareSpec(in, base);
}

std::string convergenceCsv(const CompareReport &rep) {
  std::ostringstream os;
  writeConvergenceCsv(os, rep);
  return os.str();
}

fs::path freshDir(const std::string &name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kSmallSpec = "name small\n"
                               "random 60 4.0 3 100\n"
                               "policies walksat walksatpp support01 textbook\n"
                               "init maj\n"
                               "T 400\n"
                               "repetitions 2\n"
                               "seed 9\n";

} // namespace

TEST(ParallelForTest, CoversEveryIndexAndPropagatesErrors) {
  std::vector<int> hits(100, 0);
  parallelFor(100, 4, [&](std::size_t i) { hits[i] += 1; });
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 100);
  EXPECT_THROW(parallelFor(10, 3,
                           [](std::size_t i) {
                             if (i == 7)
                               throw std::runtime_error("boom");
                           }),
               std::runtime_error);
}

TEST(MedianTest, InfinityForUnsolved) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(medianWithInfinity({3, 1, 2}), 2);
  EXPECT_EQ(medianWithInfinity({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(medianWithInfinity({1, inf, inf}), inf);
  EXPECT_EQ(medianWithInfinity({1, 2, inf}), 2);
  EXPECT_EQ(medianWithInfinity({}), inf);
}

TEST(CompareTest, SingleClauseSolvesAtIterationOne) {
  CompareSpec spec;
  spec.instances.push_back({"one", singleClause()});
  for (Policy p : {Policy::WalkSat, Policy::WalkSatPP, Policy::Support01, Policy::Textbook}) {
    SolverConfig cfg;
    cfg.maxIters = 5;
    cfg.init = InitMode::Given;
    cfg.initial = Assignment(3, false);
    cfg.warmupIters = 0;
    cfg.flips = FlipDistribution(std::vector<FlipRow>{{1, {1.0, 0.0, 0.0}}});
    spec.policies.push_back(p);
    spec.configs[p] = cfg;
  }
  auto rep = compareSolvers(spec);
  ASSERT_EQ(rep.horizon, 5u);
  for (const auto &pr : rep.policies) {
    EXPECT_EQ(pr.meanUnsat, std::vector<double>(5, 0.0)) << toString(pr.policy);
    EXPECT_EQ(pr.medianItersToSolve, 1.0);
    EXPECT_EQ(pr.solved, 1u);
  }
  auto csv = convergenceCsv(rep);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 * 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n', 25) + 1), "iter,policy,mean_unsat\n1,walksat,0\n");
}

TEST(CompareTest, UnsolvableEverywhereReportsNoSolves) {
  CompareSpec spec;
  spec.instances.push_back({"unsat", allEightClauses()});
  spec.policies = {Policy::WalkSat, Policy::Support01};
  SolverConfig cfg;
  cfg.maxIters = 50;
  spec.configs[Policy::WalkSat] = spec.configs[Policy::Support01] = cfg;
  spec.repetitions = 3;
  auto rep = compareSolvers(spec);
  for (const auto &pr : rep.policies) {
    EXPECT_EQ(pr.solved, 0u);
    EXPECT_EQ(pr.solvedFraction(), 0.0);
    EXPECT_TRUE(std::isinf(pr.medianItersToSolve));
    EXPECT_EQ(pr.meanUnsat.size(), 50u);
    EXPECT_GE(pr.meanUnsat.back(), 1.0);
  }
  EXPECT_FALSE(rep.speedup(Policy::Support01));
}

TEST(CompareTest, ClampAndDropModes) {
  auto spec = fromText(kSmallSpec);
  auto clamp = compareSolvers(spec);
  spec.curve = CurveMode::Drop;
  auto drop = compareSolvers(spec);
  for (std::size_t p = 0; p < clamp.policies.size(); ++p) {
    const auto &c = clamp.policies[p], &d = drop.policies[p];
    // Every run has solved or is unsolved: clamp averages over all of them.
    for (std::size_t k = 0; k < c.meanUnsat.size(); ++k) {
      if (std::isnan(d.meanUnsat[k]))
        EXPECT_EQ(c.meanUnsat[k], 0.0);
      else
        EXPECT_GE(d.meanUnsat[k], c.meanUnsat[k]);
    }
    if (c.solved == c.runs.size()) {
      EXPECT_EQ(c.meanUnsat.back(), 0.0);
    }
  }
}

TEST(CompareTest, DeterministicAcrossInvocationsAndThreads) {
  auto spec = fromText(kSmallSpec);
  ::setenv("SATLAB_THREADS", "1", 1);
  auto serial = convergenceCsv(compareSolvers(spec));
  auto again = convergenceCsv(compareSolvers(fromText(kSmallSpec)));
  ::setenv("SATLAB_THREADS", "4", 1);
  auto parallel = convergenceCsv(compareSolvers(spec));
  ::unsetenv("SATLAB_THREADS");
  EXPECT_EQ(serial, again);
  EXPECT_EQ(serial, parallel);
}

TEST(CompareTest, PoliciesShareRunSeeds) {
  auto rep = compareSolvers(fromText(kSmallSpec));
  for (std::size_t k = 0; k < rep.policies[0].runs.size(); ++k)
    for (const auto &pr : rep.policies)
      EXPECT_EQ(pr.runs[k].seed, rep.policies[0].runs[k].seed);
  EXPECT_NE(runSeed(9, 0, 0), runSeed(9, 0, 1));
  EXPECT_NE(runSeed(9, 0, 1), runSeed(9, 1, 0));
}

TEST(SpecTest, ParsesKeysAndPerPolicyOverrides) {
  auto dir = freshDir("satlab_spec_test");
  {
    std::ofstream(dir / "tiny.cnf") << "p cnf 3 1\n1 2 3 0\n";
    std::ofstream(dir / "flips.txt") << "1 0.4 0.3 0.2\n";
  }
  auto spec = fromText("name fig  # trailing comment\n"
                       "cnf tiny.cnf\n"
                       "planted 20 5 2 7\n"
                       "policies walksat textbook\n"
                       "T 1000\n"
                       "textbook:T 80\n"
                       "p 0.3\n"
                       "greedy break_count\n"
                       "walksat:init random\n"
                       "textbook:flips flips.txt\n"
                       "curve drop\n"
                       "out results\n",
                       dir);
  EXPECT_EQ(spec.name, "fig");
  ASSERT_EQ(spec.instances.size(), 3u);
  EXPECT_EQ(spec.instances[1].label, "planted_n20_c5_i0");
  EXPECT_EQ(spec.instances[1].formula->numClauses(), 100u);
  EXPECT_EQ(spec.config(Policy::WalkSat).maxIters, 1000u);
  EXPECT_EQ(spec.config(Policy::Textbook).maxIters, 80u);
  EXPECT_EQ(spec.config(Policy::WalkSat).noise, 0.3);
  EXPECT_EQ(spec.config(Policy::WalkSat).greedy, Greedy::BreakCount);
  EXPECT_EQ(spec.config(Policy::WalkSat).init, InitMode::Random);
  EXPECT_EQ(spec.config(Policy::Textbook).init, InitMode::Maj);
  EXPECT_EQ(spec.config(Policy::Textbook).flips.at(1)[0], 0.4);
  EXPECT_EQ(spec.curve, CurveMode::Drop);
  EXPECT_EQ(spec.outDir, dir / "results");
  fs::remove_all(dir);
}

TEST(SpecTest, Errors) {
  EXPECT_THROW(fromText("random 60 4 1 0\n"), std::invalid_argument);   // no policy
  EXPECT_THROW(fromText("policies walksat\n"), std::invalid_argument);  // no instance
  EXPECT_THROW(fromText("policies gsat\nrandom 60 4 1 0\n"), ParseError);
  EXPECT_THROW(fromText("colour blue\n"), ParseError);
  EXPECT_THROW(fromText("random 60 4 1\n"), ParseError);
  EXPECT_THROW(fromText("random 2 4 1 0\npolicies walksat\n"), ParseError);
  EXPECT_THROW(fromText("cnf /nonexistent/x.cnf\npolicies walksat\n"), ParseError);
  EXPECT_THROW(fromText("random 60 4 1 0\npolicies walksat\np 2\n"), std::invalid_argument);
  EXPECT_THROW(fromText("random 60 4 1 0\npolicies walksat\ngreedy fastest\n"), ParseError);
}

TEST(OutputTest, ConvergenceCsvRoundTripIsExact) {
  auto spec = fromText(kSmallSpec);
  spec.curve = CurveMode::Drop;
  auto rep = compareSolvers(spec);
  std::istringstream in(convergenceCsv(rep));
  auto table = readConvergenceCsv(in);
  ASSERT_EQ(table.policies.size(), rep.policies.size());
  for (const auto &pr : rep.policies) {
    const auto &curve = table.curves.at(toString(pr.policy));
    ASSERT_EQ(curve.size(), pr.meanUnsat.size());
    for (std::size_t k = 0; k < curve.size(); ++k) {
      if (std::isnan(pr.meanUnsat[k]))
        EXPECT_TRUE(std::isnan(curve[k]));
      else
        EXPECT_EQ(curve[k], pr.meanUnsat[k]);
    }
  }
}

TEST(OutputTest, ReadRejectsMalformed) {
  std::istringstream wrongHeader("iteration,policy,value\n");
  EXPECT_THROW(readConvergenceCsv(wrongHeader), FormatError);
  std::istringstream gap("iter,policy,mean_unsat\n1,walksat,3\n3,walksat,2\n");
  EXPECT_THROW(readConvergenceCsv(gap), ParseError);
  EXPECT_EQ(formatNumber(0.1), "0.10000000000000001");
  EXPECT_EQ(formatNumber(std::numeric_limits<double>::infinity()), "inf");
}

TEST(ReportTest, WritesCsvAndSvg) {
  auto dir = freshDir("satlab_report_test");
  auto spec = fromText(kSmallSpec);
  auto rep = compareSolvers(spec);
  writeCompareResults(rep, spec, dir);
  EXPECT_TRUE(fs::exists(dir / "small.summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "small.runs.csv"));
  auto svgs = reportDirectory(dir);
  ASSERT_EQ(svgs.size(), 1u);
  EXPECT_EQ(svgs[0], dir / "small.svg");
  std::ifstream svg(svgs[0]);
  std::string text((std::istreambuf_iterator<char>(svg)), {});
  EXPECT_NE(text.find("<svg"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n') > 4, true);
  EXPECT_NE(text.find("support01"), std::string::npos);

  std::ifstream csv(dir / "small.csv");
  std::string all((std::istreambuf_iterator<char>(csv)), {});
  EXPECT_EQ(std::count(all.begin(), all.end(), '\n'), 1 + 400 * 4);
  fs::remove_all(dir);
}

TEST(ReportTest, EmptyOrMissingDirectoryFails) {
  auto dir = freshDir("satlab_report_empty");
  EXPECT_THROW(reportDirectory(dir), std::runtime_error);
  EXPECT_THROW(reportDirectory(dir / "missing"), std::runtime_error);
  fs::remove_all(dir);
}
