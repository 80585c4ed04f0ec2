#ifndef SATLAB_SEARCH_HPP
#define SATLAB_SEARCH_HPP

// Stochastic local search over SupportState with pluggable flip policies:
//
//   walksat    pick a uniform unsat clause; with probability p flip a uniform
//              variable of it, otherwise its least-support variable.
//   walksatpp  flip a uniform support-0 variable from the unsat clauses when
//              one exists, otherwise make a walksat move.
//   support01  with probability 2/3 flip a support-0 variable from the unsat
//              clauses, otherwise a support-1 variable.
//   textbook   MAJ start, a warm-up without flips, then one flip per
//              iteration sampled by support class from a FlipDistribution.

#include "satlab/cnf.hpp"
#include "satlab/exact.hpp"
#include "satlab/rng.hpp"
#include "satlab/support.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace satlab {

enum class Policy { WalkSat, WalkSatPP, Support01, Textbook };

inline const char *toString(Policy p) {
  switch (p) {
  case Policy::WalkSat:
    return "walksat";
  case Policy::WalkSatPP:
    return "walksatpp";
  case Policy::Support01:
    return "support01";
  case Policy::Textbook:
    return "textbook";
  }
  return "?";
}

inline Policy parsePolicy(const std::string &s) {
  for (Policy p : {Policy::WalkSat, Policy::WalkSatPP, Policy::Support01, Policy::Textbook})
    if (s == toString(p))
      return p;
  throw std::invalid_argument("unknown policy '" + s + "'");
}

enum class InitMode { Random, Maj, Given };

inline InitMode parseInitMode(const std::string &s) {
  if (s == "random")
    return InitMode::Random;
  if (s == "maj")
    return InitMode::Maj;
  if (s == "given")
    return InitMode::Given;
  throw std::invalid_argument("unknown init mode '" + s + "'");
}

/// Greedy leg of a walksat move.
enum class Greedy {
  LeastSupport, ///< least-support variable of the clause
  BreakCount,   ///< classic SKC: zero-break move first, then noise, then min break
};

/// Which support-1 variables SupportSAT-01 may flip.
enum class Support1Pool { UnsatClauses, All };

//------------------------------------------------------------------------------
// Flip distribution (textbook policy)
//------------------------------------------------------------------------------

struct FlipRow {
  std::size_t iter = 1;
  std::array<double, 3> p{}; // support classes 0, 1, 2
};

/// Per-iteration flip probabilities by support class. The row for iteration
/// j is the last row whose iter <= j (the first row before that); leftover
/// mass means "no flip".
class FlipDistribution {
public:
  FlipDistribution() : rows_{{1, {0.55, 0.25, 0.10}}} {}
  explicit FlipDistribution(std::vector<FlipRow> rows) : rows_(std::move(rows)) {
    if (rows_.empty())
      throw std::invalid_argument("flip distribution needs at least one row");
    std::stable_sort(rows_.begin(), rows_.end(),
                     [](const FlipRow &a, const FlipRow &b) { return a.iter < b.iter; });
    for (const auto &r : rows_) {
      double sum = 0;
      for (double q : r.p) {
        if (!(q >= 0.0))
          throw std::invalid_argument("flip probabilities must be >= 0");
        sum += q;
      }
      if (sum > 1.0 + 1e-12)
        throw std::invalid_argument("flip probabilities of iteration " +
                                    std::to_string(r.iter) + " sum above 1");
      if (r.p[0] < r.p[1] || r.p[1] < r.p[2])
        throw std::invalid_argument("flip probabilities must not increase with "
                                    "support (iteration " +
                                    std::to_string(r.iter) + ")");
    }
  }

  const std::array<double, 3> &at(std::size_t iter) const {
    auto it = std::upper_bound(rows_.begin(), rows_.end(), iter,
                               [](std::size_t j, const FlipRow &r) { return j < r.iter; });
    return it == rows_.begin() ? rows_.front().p : std::prev(it)->p;
  }

  const std::vector<FlipRow> &rows() const { return rows_; }

  /// Sampled class in {0, 1, 2}, or -1 for the residual "no flip" mass.
  int sampleClass(std::size_t iter, Rng &rng) const {
    const auto &p = at(iter);
    double u = rng.uniform();
    double acc = 0;
    for (int k = 0; k < 3; ++k) {
      acc += p[k];
      if (u < acc)
        return k;
    }
    return -1;
  }

private:
  std::vector<FlipRow> rows_;
};

/// Table file: rows `iter p0 p1 p2`, '#' comments.
inline FlipDistribution readFlipDistribution(std::istream &in) {
  std::vector<FlipRow> rows;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
      continue;
    std::istringstream ls(line);
    FlipRow r;
    std::string extra;
    if (!(ls >> r.iter >> r.p[0] >> r.p[1] >> r.p[2]) || (ls >> extra))
      throw ParseError("flip distribution row must be 'iter p0 p1 p2'", lineNo);
    rows.push_back(r);
  }
  return FlipDistribution(std::move(rows));
}

inline void writeFlipDistribution(std::ostream &out, const FlipDistribution &d) {
  out << "# iter p0 p1 p2\n";
  for (const auto &r : d.rows())
    out << r.iter << ' ' << r.p[0] << ' ' << r.p[1] << ' ' << r.p[2] << '\n';
}

//------------------------------------------------------------------------------
// Configuration and trace
//------------------------------------------------------------------------------

struct SolverConfig {
  std::size_t maxIters = 1'000'000;
  double noise = 0.1;
  std::uint64_t seed = 0;
  InitMode init = InitMode::Random;
  std::optional<Assignment> initial; ///< required for InitMode::Given
  Greedy greedy = Greedy::LeastSupport;
  Support1Pool support1Pool = Support1Pool::UnsatClauses;
  FlipDistribution flips;         ///< textbook only
  std::size_t warmupIters = 30;   ///< textbook only: iterations without flips
  std::optional<Assignment> reference; ///< for the hamming_ref trace column
  bool recordTrace = true;        ///< false keeps only the unsat curve

  static SolverConfig defaultsFor(Policy p) {
    SolverConfig cfg;
    if (p == Policy::Textbook) {
      cfg.maxIters = 500;
      cfg.init = InitMode::Maj;
    }
    return cfg;
  }

  void validate() const {
    if (!(noise >= 0.0 && noise <= 1.0))
      throw std::invalid_argument("noise p must be in [0, 1]");
    if (maxIters < 1)
      throw std::invalid_argument("max iterations T must be >= 1");
    if (init == InitMode::Given && !initial)
      throw std::invalid_argument("init mode 'given' needs an initial assignment");
  }
};

/// Per-iteration record. Row i describes iteration i (0-based): the unsat
/// count of the assignment it starts from and the flip it made, if any.
struct SolverTrace {
  static constexpr std::int32_t kNone = -1;

  std::vector<std::uint32_t> unsat;
  std::vector<std::int32_t> flipped;     ///< variable or kNone
  std::vector<std::int8_t> supportClass; ///< class of flipped variable or kNone
  std::vector<std::int8_t> sampledClass; ///< textbook: sampled class or kNone
  std::vector<std::int32_t> hamming;     ///< distance to reference, if any
  std::optional<std::size_t> solvedAt;   ///< iteration whose assignment satisfies F
  std::size_t numFlips = 0;

  std::size_t size() const { return unsat.size(); }
};

struct SearchOutcome {
  SolveResult result; ///< Sat with witness, or BudgetExhausted
  SolverTrace trace;
};

//------------------------------------------------------------------------------
// Flip selection
//------------------------------------------------------------------------------

inline void requireUnsat(const SupportState &st) {
  if (st.unsat().empty())
    throw std::logic_error("flip selection called with no unsatisfied clause");
}

/// WalkSAT move on a uniformly chosen unsat clause.
inline Var pickFlipWalksat(const SupportState &st, Rng &rng, double p,
                           Greedy greedy = Greedy::LeastSupport) {
  requireUnsat(st);
  const auto &unsat = st.unsat();
  const Clause &cl = st.formula().clause(unsat[rng.below(unsat.size())]);

  auto argminSupport = [&](bool onlyZero) -> std::optional<Var> {
    std::uint32_t best = UINT32_MAX;
    Var chosen = 0;
    std::uint64_t ties = 0;
    for (Literal l : cl) {
      std::uint32_t s = st.support(l.var());
      if (onlyZero && s != 0)
        continue;
      if (s < best) {
        best = s;
        chosen = l.var();
        ties = 1;
      } else if (s == best && rng.below(++ties) == 0) {
        chosen = l.var();
      }
    }
    if (ties == 0)
      return std::nullopt;
    return chosen;
  };

  if (greedy == Greedy::BreakCount)
    if (auto v = argminSupport(true))
      return *v;
  if (rng.bernoulli(p))
    return cl[rng.below(cl.size())].var();
  return *argminSupport(false);
}

/// Support-0 variable from the unsat clauses when one exists, else walksat.
inline Var pickFlipWalksatPP(const SupportState &st, Rng &rng, double p,
                             Greedy greedy = Greedy::LeastSupport) {
  requireUnsat(st);
  const auto &zero = st.unsatPool(0);
  if (!zero.empty())
    return zero[rng.below(zero.size())];
  return pickFlipWalksat(st, rng, p, greedy);
}

/// SupportSAT-01: class 0 with probability 2/3, class 1 with probability 1/3;
/// an empty pool falls back to the other class, then to a walksat move.
inline Var pickFlipSupport01(const SupportState &st, Rng &rng, double p,
                             Support1Pool pool1 = Support1Pool::UnsatClauses,
                             Greedy greedy = Greedy::LeastSupport) {
  requireUnsat(st);
  const IndexedSet &zero = st.unsatPool(0);
  const IndexedSet &one = pool1 == Support1Pool::UnsatClauses ? st.unsatPool(1) : st.pool(1);
  bool wantZero = rng.below(3) < 2;
  const IndexedSet *first = wantZero ? &zero : &one;
  const IndexedSet *second = wantZero ? &one : &zero;
  if (!first->empty())
    return (*first)[rng.below(first->size())];
  if (!second->empty())
    return (*second)[rng.below(second->size())];
  return pickFlipWalksat(st, rng, p, greedy);
}

//------------------------------------------------------------------------------
// Driver
//------------------------------------------------------------------------------

inline Assignment initialAssignment(const CnfFormula &f, const SolverConfig &cfg,
                                    Rng &rng) {
  switch (cfg.init) {
  case InitMode::Maj:
    return majorityAssignment(f);
  case InitMode::Given:
    requireSize(f, *cfg.initial);
    return *cfg.initial;
  case InitMode::Random:
    break;
  }
  Assignment a(f.numVars());
  for (Var v = 0; v < f.numVars(); ++v)
    a.set(v, rng.below(2));
  return a;
}

/// Runs up to cfg.maxIters iterations. Returns Sat with the satisfying
/// assignment as soon as one is reached, BudgetExhausted otherwise; never
/// claims UNSAT.
inline SearchOutcome runLocalSearch(const CnfFormula &f, const SolverConfig &cfg,
                                    Policy policy) {
  cfg.validate();
  if (cfg.reference)
    requireSize(f, *cfg.reference);
  Rng rng(cfg.seed);
  SupportState st(f, initialAssignment(f, cfg, rng));

  SearchOutcome out;
  SolverTrace &tr = out.trace;
  std::int32_t dist = cfg.reference
                          ? std::int32_t(hammingDistance(st.assignment(), *cfg.reference))
                          : SolverTrace::kNone;

  auto record = [&](std::int32_t var, std::int8_t cls, std::int8_t sampled) {
    tr.unsat.push_back(std::uint32_t(st.numUnsat()));
    if (!cfg.recordTrace)
      return;
    tr.flipped.push_back(var);
    tr.supportClass.push_back(cls);
    tr.sampledClass.push_back(sampled);
    if (cfg.reference)
      tr.hamming.push_back(dist);
  };

  for (std::size_t it = 0;; ++it) {
    if (st.satisfied()) {
      record(SolverTrace::kNone, SolverTrace::kNone, SolverTrace::kNone);
      tr.solvedAt = it;
      out.result = {SolveStatus::Sat, st.assignment()};
      return out;
    }
    if (it == cfg.maxIters) {
      record(SolverTrace::kNone, SolverTrace::kNone, SolverTrace::kNone);
      out.result.status = SolveStatus::BudgetExhausted;
      return out;
    }

    std::optional<Var> pick;
    std::int8_t sampled = SolverTrace::kNone;
    switch (policy) {
    case Policy::WalkSat:
      pick = pickFlipWalksat(st, rng, cfg.noise, cfg.greedy);
      break;
    case Policy::WalkSatPP:
      pick = pickFlipWalksatPP(st, rng, cfg.noise, cfg.greedy);
      break;
    case Policy::Support01:
      pick = pickFlipSupport01(st, rng, cfg.noise, cfg.support1Pool, cfg.greedy);
      break;
    case Policy::Textbook:
      // Iteration numbers are 1-based here: t = it + 1.
      if (it + 1 > cfg.warmupIters) {
        int k = cfg.flips.sampleClass(it + 1, rng);
        sampled = std::int8_t(k);
        if (k >= 0) {
          const IndexedSet &candidates = st.unsatPool(k);
          if (!candidates.empty())
            pick = candidates[rng.below(candidates.size())];
        }
      }
      break;
    }

    if (!pick) {
      record(SolverTrace::kNone, SolverTrace::kNone, sampled);
      continue;
    }
    Var v = *pick;
    auto cls = std::int8_t(supportClass(st.support(v)));
    record(std::int32_t(v), cls, sampled);
    if (cfg.reference)
      dist += st.assignment()[v] == (*cfg.reference)[v] ? 1 : -1;
    st.flip(v);
    ++tr.numFlips;
  }
}

/// Textbook NeuroSAT: MAJ start, cfg.warmupIters iterations that only
/// compute support, then flips sampled from cfg.flips.
inline SearchOutcome textbookNeuroSat(const CnfFormula &f, SolverConfig cfg) {
  cfg.init = InitMode::Maj;
  return runLocalSearch(f, cfg, Policy::Textbook);
}

/// Mean number of flips per iteration after the warm-up.
inline double meanFlipsAfterWarmup(const SolverTrace &tr, std::size_t warmup) {
  std::size_t iters = 0, flips = 0;
  for (std::size_t i = warmup; i < tr.flipped.size(); ++i) {
    ++iters;
    flips += tr.flipped[i] != SolverTrace::kNone;
  }
  return iters ? double(flips) / double(iters) : 0.0;
}

/// CSV with columns iter,unsat,flipped_var,support_class,hamming_ref.
/// Variables are 1-based; empty fields mean "no flip" / "no reference".
inline void writeTraceCsv(std::ostream &out, const SolverTrace &tr) {
  out << "iter,unsat,flipped_var,support_class,hamming_ref\n";
  for (std::size_t i = 0; i < tr.unsat.size(); ++i) {
    out << i << ',' << tr.unsat[i] << ',';
    if (i < tr.flipped.size() && tr.flipped[i] != SolverTrace::kNone)
      out << tr.flipped[i] + 1 << ',' << int(tr.supportClass[i]);
    else
      out << ',';
    out << ',';
    if (i < tr.hamming.size())
      out << tr.hamming[i];
    out << '\n';
  }
}

} // namespace satlab

#endif // SATLAB_SEARCH_HPP
