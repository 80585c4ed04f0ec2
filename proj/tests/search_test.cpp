#include "satlab/gen.hpp"
#include "satlab/search.hpp"

#include "gtest/gtest.h"

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace satlab;

namespace {

CnfFormula formula(std::size_t n, std::initializer_list<std::initializer_list<int>> cls) {
  std::vector<Clause> out;
  for (auto c : cls) {
    Clause cl;
    for (int l : c)
      cl.push_back(Literal::fromDimacs(l));
    out.push_back(cl);
  }
  return CnfFormula(n, out, 0);
}

/// Single unsat clause (x1 ∨ x2 ∨ x3) under all-False, with the given
/// supports built from clauses (¬xi ∨ x4 ∨ x5).
CnfFormula withSupports(std::array<int, 3> supports) {
  std::vector<Clause> cls{{Literal(0, false), Literal(1, false), Literal(2, false)}};
  for (Var v = 0; v < 3; ++v)
    for (int s = 0; s < supports[v]; ++s)
      cls.push_back({Literal(v, true), Literal(3, false), Literal(4, false)});
  return CnfFormula(5, cls);
}

template <class Pick>
std::map<Var, double> frequencies(const SupportState &st, int draws, std::uint64_t seed,
                                  Pick pick) {
  Rng rng(seed);
  std::map<Var, double> freq;
  for (int i = 0; i < draws; ++i)
    freq[pick(st, rng)] += 1.0 / draws;
  return freq;
}

SolverConfig quick(std::uint64_t seed, std::size_t maxIters = 100000) {
  SolverConfig cfg;
  cfg.seed = seed;
  cfg.maxIters = maxIters;
  return cfg;
}

constexpr Policy kAllPolicies[] = {Policy::WalkSat, Policy::WalkSatPP, Policy::Support01,
                                   Policy::Textbook};

} // namespace

TEST(PolicyNamesTest, RoundTrip) {
  for (Policy p : kAllPolicies)
    EXPECT_EQ(parsePolicy(toString(p)), p);
  EXPECT_THROW(parsePolicy("gsat"), std::invalid_argument);
  EXPECT_EQ(parseInitMode("maj"), InitMode::Maj);
  EXPECT_THROW(parseInitMode("zeros"), std::invalid_argument);
}

TEST(WalksatPickTest, EmptyUnsatSetIsAnError) {
  auto f = formula(3, {{1, 2, 3}});
  SupportState st(f, Assignment(3, true));
  Rng rng(1);
  EXPECT_THROW(pickFlipWalksat(st, rng, 0.1), std::logic_error);
  EXPECT_THROW(pickFlipSupport01(st, rng, 0.1), std::logic_error);
}

TEST(WalksatPickTest, PureNoiseIsUniform) {
  auto f = withSupports({0, 2, 3});
  SupportState st(f, Assignment(5));
  auto freq = frequencies(st, 100000, 3, [](auto &s, Rng &r) { return pickFlipWalksat(s, r, 1.0); });
  double x2 = 0;
  for (Var v = 0; v < 3; ++v)
    x2 += std::pow(freq[v] * 100000 - 100000.0 / 3, 2) / (100000.0 / 3);
  EXPECT_LT(x2, 13.82); // chi-square df 2, 0.999
}

TEST(WalksatPickTest, GreedyTakesLeastSupport) {
  auto f = withSupports({0, 2, 3});
  SupportState st(f, Assignment(5));
  Rng rng(4);
  for (int i = 0; i < 1000; ++i)
    ASSERT_EQ(pickFlipWalksat(st, rng, 0.0), 0u);
}

TEST(WalksatPickTest, NoiseMixture) {
  auto f = withSupports({1, 1, 5});
  SupportState st(f, Assignment(5));
  auto freq = frequencies(st, 1000000, 5, [](auto &s, Rng &r) { return pickFlipWalksat(s, r, 0.1); });
  const double expected = 0.1 / 3 + 0.9 / 2;
  EXPECT_NEAR(freq[0], expected, 0.003);
  EXPECT_NEAR(freq[1], expected, 0.003);
  EXPECT_NEAR(freq[2], 0.1 / 3, 0.002);
}

TEST(WalksatPickTest, ZeroNoiseAttainsClauseMinimum) {
  Rng rng(6);
  auto f = random3Sat(60, 260, 2);
  Assignment a(60);
  for (Var v = 0; v < 60; ++v)
    a.set(v, rng.below(2));
  SupportState st(f, a);
  for (int i = 0; i < 2000; ++i) {
    Var v = pickFlipWalksat(st, rng, 0.0);
    // v must be a least-support variable of some unsat clause.
    bool attained = false;
    for (auto c : st.unsat().items()) {
      bool contains = false;
      std::uint32_t lo = UINT32_MAX;
      for (Literal l : f.clause(c)) {
        contains |= l.var() == v;
        lo = std::min(lo, st.support(l.var()));
      }
      attained |= contains && lo == st.support(v);
    }
    ASSERT_TRUE(attained);
  }
}

TEST(WalksatPPPickTest, PrefersSupportZero) {
  auto f = withSupports({0, 0, 4});
  SupportState st(f, Assignment(5));
  auto freq = frequencies(st, 100000, 7, [](auto &s, Rng &r) { return pickFlipWalksatPP(s, r, 0.1); });
  EXPECT_NEAR(freq[0], 0.5, 0.01);
  EXPECT_NEAR(freq[1], 0.5, 0.01);
  EXPECT_EQ(freq.count(2), 0u);
}

TEST(WalksatPPPickTest, FallsBackToWalksat) {
  auto f = withSupports({1, 1, 5});
  SupportState st(f, Assignment(5));
  auto pp = frequencies(st, 200000, 8, [](auto &s, Rng &r) { return pickFlipWalksatPP(s, r, 0.1); });
  auto ws = frequencies(st, 200000, 8, [](auto &s, Rng &r) { return pickFlipWalksat(s, r, 0.1); });
  for (Var v = 0; v < 3; ++v)
    EXPECT_DOUBLE_EQ(pp[v], ws[v]);
}

TEST(WalksatPPPickTest, SupportZeroChosenWheneverPresent) {
  Rng rng(9);
  auto f = random3Sat(80, 340, 3);
  Assignment a(80);
  for (Var v = 0; v < 80; ++v)
    a.set(v, rng.below(2));
  SupportState st(f, a);
  for (int i = 0; i < 3000 && !st.satisfied(); ++i) {
    bool zeroPresent = !st.unsatPool(0).empty();
    Var v = pickFlipWalksatPP(st, rng, 0.1);
    if (zeroPresent) {
      ASSERT_EQ(st.support(v), 0u);
    }
    st.flip(v);
  }
}

TEST(Support01PickTest, ClassProbabilities) {
  // a = x1 support 0, b = x2 support 1, x3 support 2.
  auto f = withSupports({0, 1, 2});
  SupportState st(f, Assignment(5));
  auto freq = frequencies(st, 1000000, 10, [](auto &s, Rng &r) { return pickFlipSupport01(s, r, 0.1); });
  EXPECT_NEAR(freq[0], 2.0 / 3, 0.003);
  EXPECT_NEAR(freq[1], 1.0 / 3, 0.003);
  EXPECT_EQ(freq.count(2), 0u);
}

TEST(Support01PickTest, EmptyZeroPoolFallsBackToOne) {
  auto f = withSupports({3, 1, 1});
  SupportState st(f, Assignment(5));
  auto freq = frequencies(st, 100000, 11, [](auto &s, Rng &r) { return pickFlipSupport01(s, r, 0.1); });
  EXPECT_NEAR(freq[1], 0.5, 0.01);
  EXPECT_NEAR(freq[2], 0.5, 0.01);
  EXPECT_EQ(freq.count(0), 0u);
}

TEST(Support01PickTest, BothPoolsEmptyMatchesWalksat) {
  auto f = withSupports({2, 2, 3});
  SupportState st(f, Assignment(5));
  auto freq = frequencies(st, 1000000, 12, [](auto &s, Rng &r) { return pickFlipSupport01(s, r, 0.1); });
  EXPECT_NEAR(freq[0], 0.1 / 3 + 0.9 / 2, 0.003);
  EXPECT_NEAR(freq[1], 0.1 / 3 + 0.9 / 2, 0.003);
  EXPECT_NEAR(freq[2], 0.1 / 3, 0.002);
}

TEST(Support01PickTest, AllPoolReachesSatisfiedClauses) {
  // x6 has support 1 but occurs in no unsat clause.
  auto f = formula(6, {{1, 2, 3}, {-6, 4, 5}});
  Assignment a(6);
  SupportState st(f, a);
  ASSERT_EQ(st.support(5), 1u);
  ASSERT_EQ(st.unsatOccurrences(5), 0u);
  std::set<Var> restricted, all;
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    restricted.insert(pickFlipSupport01(st, rng, 0.1, Support1Pool::UnsatClauses));
    all.insert(pickFlipSupport01(st, rng, 0.1, Support1Pool::All));
  }
  EXPECT_FALSE(restricted.count(5));
  EXPECT_TRUE(all.count(5));
}

TEST(LocalSearchTest, OneFlipSolvesSingleClause) {
  auto f = formula(3, {{1, 2, 3}});
  for (Policy p : kAllPolicies) {
    auto cfg = quick(1);
    cfg.init = InitMode::Given;
    cfg.initial = Assignment(3, false);
    cfg.warmupIters = 0;
    cfg.flips = FlipDistribution(std::vector<FlipRow>{{1, {1.0, 0.0, 0.0}}});
    auto out = runLocalSearch(f, cfg, p);
    ASSERT_EQ(out.result.status, SolveStatus::Sat) << toString(p);
    EXPECT_EQ(out.trace.numFlips, 1u) << toString(p);
    EXPECT_EQ(out.trace.solvedAt, 1u);
    EXPECT_EQ(out.trace.unsat, (std::vector<std::uint32_t>{1, 0}));
  }
}

TEST(LocalSearchTest, AlreadySatisfiedTakesNoFlip) {
  auto f = formula(3, {{1, 2, 3}});
  auto cfg = quick(1);
  cfg.init = InitMode::Maj;
  auto out = runLocalSearch(f, cfg, Policy::WalkSat);
  EXPECT_EQ(out.result.status, SolveStatus::Sat);
  EXPECT_EQ(out.trace.solvedAt, 0u);
  EXPECT_EQ(out.trace.numFlips, 0u);
}

TEST(LocalSearchTest, WitnessesSatisfy) {
  std::array<int, 3> solved{};
  for (int run = 0; run < 1000; ++run) {
    auto p = planted3Sat(40, 160, 2000 + run);
    Policy policy = kAllPolicies[run % 3];
    auto out = runLocalSearch(p.formula, quick(run, 20000), policy);
    if (out.result.status == SolveStatus::Sat) {
      ASSERT_TRUE(evaluate(p.formula, out.result.witness).satisfied);
      ++solved[run % 3];
    }
  }
  EXPECT_GT(solved[0], 320);
  EXPECT_GT(solved[1], 320);
  // support01 never breaks two clauses at once and stalls on plateaus
  EXPECT_GT(solved[2], 50);
}

TEST(LocalSearchTest, UnsatisfiableInputExhaustsBudget) {
  std::vector<Clause> cls;
  for (int s = 0; s < 8; ++s)
    cls.push_back({Literal(0, s & 1), Literal(1, s & 2), Literal(2, s & 4)});
  CnfFormula f(3, cls);
  for (Policy p : kAllPolicies) {
    auto out = runLocalSearch(f, quick(2, 200), p);
    EXPECT_EQ(out.result.status, SolveStatus::BudgetExhausted);
    EXPECT_EQ(out.trace.size(), 201u);
    EXPECT_FALSE(out.trace.solvedAt);
  }
}

TEST(LocalSearchTest, DeterministicPerPolicy) {
  auto f = random3Sat(150, 630, 21);
  for (Policy p : kAllPolicies) {
    auto cfg = quick(77, 3000);
    auto a = runLocalSearch(f, cfg, p);
    auto b = runLocalSearch(f, cfg, p);
    std::ostringstream ta, tb;
    writeTraceCsv(ta, a.trace);
    writeTraceCsv(tb, b.trace);
    EXPECT_EQ(ta.str(), tb.str()) << toString(p);
    EXPECT_EQ(a.result.witness, b.result.witness);
  }
}

TEST(LocalSearchTest, TraceReplayMatchesRecount) {
  auto f = random3Sat(100, 420, 31);
  Assignment ref(100, true);
  for (Policy p : kAllPolicies) {
    auto cfg = quick(5, 2000);
    cfg.reference = ref;
    cfg.init = InitMode::Random;
    auto out = runLocalSearch(f, cfg, p);
    Rng rng(cfg.seed);
    Assignment a = initialAssignment(f, cfg, rng);
    const auto &tr = out.trace;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (i % 50 == 0 || i + 1 == tr.size()) {
        ASSERT_EQ(tr.unsat[i], evaluate(f, a).unsatClauses.size()) << toString(p) << " " << i;
        ASSERT_EQ(std::size_t(tr.hamming[i]), hammingDistance(a, ref));
      }
      if (tr.flipped[i] != SolverTrace::kNone)
        a.flip(Var(tr.flipped[i]));
    }
  }
}

TEST(LocalSearchTest, ConfigValidation) {
  auto f = formula(3, {{1, 2, 3}});
  auto cfg = quick(0);
  cfg.noise = 1.5;
  EXPECT_THROW(runLocalSearch(f, cfg, Policy::WalkSat), std::invalid_argument);
  cfg = quick(0, 0);
  EXPECT_THROW(runLocalSearch(f, cfg, Policy::WalkSat), std::invalid_argument);
  cfg = quick(0);
  cfg.init = InitMode::Given;
  EXPECT_THROW(runLocalSearch(f, cfg, Policy::WalkSat), std::invalid_argument);
}

TEST(FlipDistributionTest, Validation) {
  EXPECT_THROW(FlipDistribution(std::vector<FlipRow>{{1, {0.6, 0.3, 0.2}}}), std::invalid_argument);
  EXPECT_THROW(FlipDistribution(std::vector<FlipRow>{{1, {0.2, 0.3, 0.1}}}), std::invalid_argument);
  EXPECT_THROW(FlipDistribution(std::vector<FlipRow>{}), std::invalid_argument);
  FlipDistribution d({{1, {0.5, 0.2, 0.1}}, {100, {0.3, 0.2, 0.0}}});
  EXPECT_EQ(d.at(1)[0], 0.5);
  EXPECT_EQ(d.at(99)[0], 0.5);
  EXPECT_EQ(d.at(100)[0], 0.3);
  EXPECT_EQ(d.at(100000)[0], 0.3);
}

TEST(FlipDistributionTest, TextRoundTrip) {
  FlipDistribution d({{1, {0.5, 0.25, 0.125}}, {50, {0.25, 0.25, 0.0}}});
  std::stringstream ss;
  writeFlipDistribution(ss, d);
  auto e = readFlipDistribution(ss);
  ASSERT_EQ(e.rows().size(), 2u);
  EXPECT_EQ(e.at(60), d.at(60));
  std::istringstream bad("1 0.5 0.2\n");
  EXPECT_THROW(readFlipDistribution(bad), ParseError);
}

TEST(FlipDistributionTest, SamplingFrequencies) {
  FlipDistribution d;
  Rng rng(14);
  std::array<int, 4> counts{};
  for (int i = 0; i < 200000; ++i)
    ++counts[d.sampleClass(40, rng) + 1];
  EXPECT_NEAR(counts[0] / 200000.0, 0.10, 0.005);
  EXPECT_NEAR(counts[1] / 200000.0, 0.55, 0.005);
  EXPECT_NEAR(counts[2] / 200000.0, 0.25, 0.005);
  EXPECT_NEAR(counts[3] / 200000.0, 0.10, 0.005);
}

TEST(TextbookTest, TraceContract) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto f = random3Sat(300, 1230, 100 + seed);
    auto cfg = SolverConfig::defaultsFor(Policy::Textbook);
    cfg.seed = seed;
    auto out = textbookNeuroSat(f, cfg);
    const auto &tr = out.trace;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (i < 30) {
        ASSERT_EQ(tr.flipped[i], SolverTrace::kNone) << "warm-up flip at t=" << i + 1;
      }
      if (tr.flipped[i] != SolverTrace::kNone) {
        ASSERT_EQ(tr.supportClass[i], tr.sampledClass[i]);
      }
    }
    EXPECT_LE(tr.size(), 501u);
    EXPECT_LE(meanFlipsAfterWarmup(tr, 30), 1.0);
  }
}

TEST(TextbookTest, StartsFromMajority) {
  auto f = random3Sat(100, 400, 3);
  auto cfg = SolverConfig::defaultsFor(Policy::Textbook);
  cfg.init = InitMode::Random;
  cfg.reference = majorityAssignment(f);
  auto out = textbookNeuroSat(f, cfg);
  EXPECT_EQ(out.trace.hamming.front(), 0);
}

TEST(TraceCsvTest, Format) {
  auto f = formula(3, {{1, 2, 3}});
  auto cfg = quick(1);
  cfg.init = InitMode::Given;
  cfg.initial = Assignment(3, false);
  cfg.reference = Assignment(3, false);
  auto out = runLocalSearch(f, cfg, Policy::WalkSat);
  std::ostringstream os;
  writeTraceCsv(os, out.trace);
  std::string expectedVar = std::to_string(out.trace.flipped[0] + 1);
  EXPECT_EQ(os.str(), "iter,unsat,flipped_var,support_class,hamming_ref\n"
                      "0,1," + expectedVar + ",0,0\n"
                      "1,0,,,1\n");
}
