#ifndef SATLAB_EXACT_HPP
#define SATLAB_EXACT_HPP

// Complete DPLL solver and exact backbone computation for small instances.

#include "satlab/cnf.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace satlab {

enum class SolveStatus { Sat, Unsat, BudgetExhausted };

inline const char *toString(SolveStatus s) {
  switch (s) {
  case SolveStatus::Sat:
    return "SAT";
  case SolveStatus::Unsat:
    return "UNSAT";
  case SolveStatus::BudgetExhausted:
    return "UNKNOWN";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::BudgetExhausted;
  Assignment witness; // meaningful only when status == Sat
};

class BudgetExhausted : public std::runtime_error {
public:
  BudgetExhausted() : std::runtime_error("DPLL node budget exhausted") {}
};

struct DpllOptions {
  /// Maximum number of branching decisions; 0 means unlimited.
  std::uint64_t nodeBudget = 0;
};

namespace detail {

/// DPLL over counter-based clause states: unit propagation, pure-literal
/// elimination, branching on the lowest unassigned variable with True first.
class Dpll {
public:
  Dpll(const CnfFormula &f, DpllOptions opt)
      : f_(f), opt_(opt), value_(f.numVars(), kUnassigned),
        satCount_(f.numClauses(), 0), falseCount_(f.numClauses(), 0),
        activeOcc_(2 * f.numVars(), 0) {
    for (std::uint32_t code = 0; code < activeOcc_.size(); ++code)
      activeOcc_[code] = std::uint32_t(f.occurrences(Literal::fromCode(code)).size());
  }

  SolveResult solve(std::span<const Literal> assumptions) {
    SolveResult r;
    bool ok = true;
    for (Literal l : assumptions) {
      if (l.var() >= f_.numVars())
        throw std::invalid_argument("assumption variable out of range");
      if (valueOf(l) == kFalse || (valueOf(l) == kUnassigned && !assign(l))) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      r.status = SolveStatus::Unsat;
      return r;
    }
    switch (search()) {
    case Outcome::Sat:
      r.status = SolveStatus::Sat;
      r.witness = Assignment(f_.numVars());
      for (Var v = 0; v < f_.numVars(); ++v)
        r.witness.set(v, value_[v] != kFalse);
      break;
    case Outcome::Unsat:
      r.status = SolveStatus::Unsat;
      break;
    case Outcome::Budget:
      r.status = SolveStatus::BudgetExhausted;
      break;
    }
    return r;
  }

  std::uint64_t nodes() const { return nodes_; }

private:
  static constexpr std::int8_t kUnassigned = -1, kFalse = 0, kTrue = 1;
  enum class Outcome { Sat, Unsat, Budget };

  std::int8_t valueOf(Literal l) const {
    std::int8_t v = value_[l.var()];
    if (v == kUnassigned)
      return v;
    return std::int8_t(l.eval(v == kTrue) ? kTrue : kFalse);
  }

  /// Makes `l` true; returns false on an immediately falsified clause. The
  /// assignment is recorded on the trail either way.
  bool assign(Literal l) {
    value_[l.var()] = l.negated() ? kFalse : kTrue;
    trail_.push_back(l);
    bool ok = true;
    for (Occurrence o : f_.occurrences(l))
      if (satCount_[o.clause]++ == 0)
        for (Literal x : f_.clause(o.clause))
          --activeOcc_[x.code()];
    for (Occurrence o : f_.occurrences(~l)) {
      std::uint32_t fc = ++falseCount_[o.clause];
      if (satCount_[o.clause] > 0)
        continue;
      std::size_t width = f_.clause(o.clause).size();
      if (fc == width)
        ok = false;
      else if (fc + 1 == width)
        units_.push_back(o.clause);
    }
    return ok;
  }

  void undoTo(std::size_t mark) {
    while (trail_.size() > mark) {
      Literal l = trail_.back();
      trail_.pop_back();
      for (Occurrence o : f_.occurrences(~l))
        --falseCount_[o.clause];
      for (Occurrence o : f_.occurrences(l))
        if (--satCount_[o.clause] == 0)
          for (Literal x : f_.clause(o.clause))
            ++activeOcc_[x.code()];
      value_[l.var()] = kUnassigned;
    }
    units_.clear();
  }

  /// Unit propagation and pure-literal elimination to a fixpoint.
  bool propagate() {
    for (;;) {
      while (!units_.empty()) {
        std::uint32_t c = units_.back();
        units_.pop_back();
        if (satCount_[c] > 0)
          continue;
        std::optional<Literal> open;
        for (Literal x : f_.clause(c))
          if (valueOf(x) == kUnassigned)
            open = x;
        if (!open)
          return false;
        if (!assign(*open))
          return false;
      }
      bool assignedPure = false;
      for (Var v = 0; v < f_.numVars(); ++v) {
        if (value_[v] != kUnassigned)
          continue;
        Literal pos(v, false);
        std::uint32_t p = activeOcc_[pos.code()], q = activeOcc_[(~pos).code()];
        if ((p == 0) != (q == 0)) {
          if (!assign(p ? pos : ~pos))
            return false;
          assignedPure = true;
        }
      }
      if (!assignedPure && units_.empty())
        return true;
    }
  }

  Outcome search() {
    std::size_t mark = trail_.size();
    if (!propagate()) {
      undoTo(mark);
      return Outcome::Unsat;
    }
    Var branch = Var(f_.numVars());
    for (Var v = 0; v < f_.numVars(); ++v)
      if (value_[v] == kUnassigned && activeOcc_[2 * v] + activeOcc_[2 * v + 1] > 0) {
        branch = v;
        break;
      }
    if (branch == f_.numVars())
      return Outcome::Sat;
    if (opt_.nodeBudget && nodes_ >= opt_.nodeBudget) {
      undoTo(mark);
      return Outcome::Budget;
    }
    ++nodes_;
    for (bool polarity : {true, false}) {
      std::size_t inner = trail_.size();
      Outcome o = assign(Literal(branch, !polarity)) ? search() : Outcome::Unsat;
      if (o == Outcome::Sat)
        return o;
      undoTo(inner);
      if (o == Outcome::Budget) {
        undoTo(mark);
        return o;
      }
    }
    undoTo(mark);
    return Outcome::Unsat;
  }

  const CnfFormula &f_;
  DpllOptions opt_;
  std::vector<std::int8_t> value_;
  std::vector<std::uint32_t> satCount_;
  std::vector<std::uint32_t> falseCount_;
  std::vector<std::uint32_t> activeOcc_; // per literal: unsatisfied clauses containing it
  std::vector<Literal> trail_;
  std::vector<std::uint32_t> units_;
  std::uint64_t nodes_ = 0;
};

} // namespace detail

/// Decides satisfiability; never answers wrongly, reports BudgetExhausted
/// instead when the node budget runs out.
inline SolveResult dpllSolve(const CnfFormula &f, std::span<const Literal> assumptions = {},
                             DpllOptions opt = {}) {
  detail::Dpll solver(f, opt);
  return solver.solve(assumptions);
}

inline SolveResult dpllSolve(const CnfFormula &f, DpllOptions opt) {
  return dpllSolve(f, {}, opt);
}

struct BackboneLiteral {
  Var var;
  bool value;
  friend bool operator==(const BackboneLiteral &, const BackboneLiteral &) = default;
};

/// Backbone of a satisfiable formula: (v, b) is reported iff F ∧ (v = ¬b) is
/// UNSAT. Witnesses found along the way rule out further candidates.
/// Throws std::invalid_argument for UNSAT input and BudgetExhausted when any
/// underlying solve runs out of budget.
inline std::vector<BackboneLiteral> backboneExact(const CnfFormula &f,
                                                  DpllOptions opt = {}) {
  SolveResult base = dpllSolve(f, opt);
  if (base.status == SolveStatus::BudgetExhausted)
    throw BudgetExhausted();
  if (base.status == SolveStatus::Unsat)
    throw std::invalid_argument("no backbone of unsatisfiable formula");
  const Assignment &w = base.witness;
  std::vector<bool> free(f.numVars(), false);
  std::vector<BackboneLiteral> backbone;
  for (Var v = 0; v < f.numVars(); ++v) {
    if (free[v])
      continue;
    Literal flipped(v, w[v]); // true iff v = ¬w[v]
    SolveResult r = dpllSolve(f, std::span<const Literal>(&flipped, 1), opt);
    if (r.status == SolveStatus::BudgetExhausted)
      throw BudgetExhausted();
    if (r.status == SolveStatus::Unsat) {
      backbone.push_back({v, w[v]});
      continue;
    }
    for (Var u = v; u < f.numVars(); ++u)
      if (r.witness[u] != w[u])
        free[u] = true;
  }
  return backbone;
}

} // namespace satlab

#endif // SATLAB_EXACT_HPP
