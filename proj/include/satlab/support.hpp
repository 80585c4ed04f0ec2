#ifndef SATLAB_SUPPORT_HPP
#define SATLAB_SUPPORT_HPP

// Incrementally maintained support counts.
//
// A variable supports a clause when its literal is the only True literal of
// that clause. SupportState keeps, for one (formula, assignment) pair:
//   - per-clause True-literal counts and the slot of the supporting literal,
//   - per-variable support counts,
//   - the set of unsatisfied clauses,
//   - per-variable counts of unsatisfied clauses it occurs in,
//   - variable pools keyed by support class (0, 1, 2, 3+), both restricted to
//     variables occurring in unsatisfied clauses and unrestricted.
// flip(v) updates all of it in O(sum of clause widths over v's occurrences).

#include "satlab/cnf.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace satlab {

/// Set of small integers with O(1) insert, erase and indexed access.
class IndexedSet {
public:
  static constexpr std::uint32_t npos = UINT32_MAX;

  IndexedSet() = default;
  explicit IndexedSet(std::size_t universe) : pos_(universe, npos) {}

  bool contains(std::uint32_t x) const { return pos_[x] != npos; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::uint32_t operator[](std::size_t i) const { return items_[i]; }
  const std::vector<std::uint32_t> &items() const { return items_; }

  void insert(std::uint32_t x) {
    if (pos_[x] != npos)
      return;
    pos_[x] = std::uint32_t(items_.size());
    items_.push_back(x);
  }
  void erase(std::uint32_t x) {
    std::uint32_t p = pos_[x];
    if (p == npos)
      return;
    std::uint32_t last = items_.back();
    items_[p] = last;
    pos_[last] = p;
    items_.pop_back();
    pos_[x] = npos;
  }

  std::vector<std::uint32_t> sorted() const {
    auto v = items_;
    std::sort(v.begin(), v.end());
    return v;
  }

private:
  std::vector<std::uint32_t> items_;
  std::vector<std::uint32_t> pos_;
};

/// Support class of a support count: 0, 1, 2, or 3 for "3 or more".
constexpr int supportClass(std::uint32_t support) {
  return support >= 3 ? 3 : int(support);
}

inline constexpr int kSupportClasses = 4;

class SupportState {
public:
  SupportState(const CnfFormula &f, Assignment a)
      : f_(&f), a_(std::move(a)) {
    requireSize(f, a_);
    const std::size_t n = f.numVars(), m = f.numClauses();
    trueCount_.assign(m, 0);
    supportSlot_.assign(m, 0);
    support_.assign(n, 0);
    unsatOcc_.assign(n, 0);
    unsat_ = IndexedSet(m);
    unsatClass_.assign(n, -1);
    allClass_.assign(n, -1);
    for (auto &p : unsatPools_)
      p = IndexedSet(n);
    for (auto &p : allPools_)
      p = IndexedSet(n);

    for (std::uint32_t c = 0; c < m; ++c) {
      const Clause &cl = f.clause(c);
      for (std::uint32_t s = 0; s < cl.size(); ++s)
        if (a_.eval(cl[s])) {
          ++trueCount_[c];
          supportSlot_[c] = s;
        }
      if (trueCount_[c] == 1)
        ++support_[cl[supportSlot_[c]].var()];
      else if (trueCount_[c] == 0) {
        unsat_.insert(c);
        for (Literal l : cl)
          ++unsatOcc_[l.var()];
      }
    }
    for (Var v = 0; v < n; ++v)
      refresh(v);
  }

  const CnfFormula &formula() const { return *f_; }
  const Assignment &assignment() const { return a_; }

  std::uint32_t trueCount(std::size_t c) const { return trueCount_[c]; }
  std::uint32_t support(Var v) const { return support_[v]; }
  const std::vector<std::uint32_t> &supports() const { return support_; }
  const std::vector<std::uint32_t> &trueCounts() const { return trueCount_; }
  /// Number of unsatisfied clauses containing v.
  std::uint32_t unsatOccurrences(Var v) const { return unsatOcc_[v]; }

  const IndexedSet &unsat() const { return unsat_; }
  std::size_t numUnsat() const { return unsat_.size(); }
  bool satisfied() const { return unsat_.empty(); }

  /// Variable supporting clause c, if trueCount(c) == 1.
  Var supporter(std::size_t c) const {
    assert(trueCount_[c] == 1);
    return f_->clause(c)[supportSlot_[c]].var();
  }

  /// Variables of support class k that occur in some unsatisfied clause.
  const IndexedSet &unsatPool(int k) const { return unsatPools_[k]; }
  /// All variables of support class k.
  const IndexedSet &pool(int k) const { return allPools_[k]; }

  /// Flips variable v and updates every statistic.
  void flip(Var v) {
    if (v >= f_->numVars())
      throw std::out_of_range("flip: variable " + std::to_string(v) +
                              " >= n = " + std::to_string(f_->numVars()));
    a_.flip(v);
    const Literal nowTrue(v, !a_[v]);
    for (Occurrence o : f_->occurrences(nowTrue)) {
      const Clause &cl = f_->clause(o.clause);
      std::uint32_t before = trueCount_[o.clause]++;
      if (before == 0) {
        unsat_.erase(o.clause);
        for (Literal l : cl) {
          --unsatOcc_[l.var()];
          refresh(l.var());
        }
        supportSlot_[o.clause] = o.slot;
        ++support_[v];
      } else if (before == 1) {
        Var w = cl[supportSlot_[o.clause]].var();
        --support_[w];
        refresh(w);
      }
    }
    for (Occurrence o : f_->occurrences(~nowTrue)) {
      const Clause &cl = f_->clause(o.clause);
      std::uint32_t before = trueCount_[o.clause]--;
      if (before == 1) {
        --support_[v];
        unsat_.insert(o.clause);
        for (Literal l : cl) {
          ++unsatOcc_[l.var()];
          refresh(l.var());
        }
      } else if (before == 2) {
        for (std::uint32_t s = 0; s < cl.size(); ++s)
          if (a_.eval(cl[s])) {
            supportSlot_[o.clause] = s;
            break;
          }
        Var w = cl[supportSlot_[o.clause]].var();
        ++support_[w];
        refresh(w);
      }
    }
    refresh(v);
  }

  /// True when all maintained statistics equal those of `other`.
  bool sameStatistics(const SupportState &other) const {
    if (a_ != other.a_ || trueCount_ != other.trueCount_ ||
        support_ != other.support_ || unsatOcc_ != other.unsatOcc_ ||
        unsat_.sorted() != other.unsat_.sorted())
      return false;
    for (std::size_t c = 0; c < trueCount_.size(); ++c)
      if (trueCount_[c] == 1 && supporter(c) != other.supporter(c))
        return false;
    for (int k = 0; k < kSupportClasses; ++k)
      if (unsatPools_[k].sorted() != other.unsatPools_[k].sorted() ||
          allPools_[k].sorted() != other.allPools_[k].sorted())
        return false;
    return true;
  }

private:
  void refresh(Var v) {
    int cls = supportClass(support_[v]);
    if (allClass_[v] != cls) {
      if (allClass_[v] >= 0)
        allPools_[allClass_[v]].erase(v);
      allPools_[cls].insert(v);
      allClass_[v] = std::int8_t(cls);
    }
    int ucls = unsatOcc_[v] > 0 ? cls : -1;
    if (unsatClass_[v] != ucls) {
      if (unsatClass_[v] >= 0)
        unsatPools_[unsatClass_[v]].erase(v);
      if (ucls >= 0)
        unsatPools_[ucls].insert(v);
      unsatClass_[v] = std::int8_t(ucls);
    }
  }

  const CnfFormula *f_;
  Assignment a_;
  std::vector<std::uint32_t> trueCount_;
  std::vector<std::uint32_t> supportSlot_;
  std::vector<std::uint32_t> support_;
  std::vector<std::uint32_t> unsatOcc_;
  IndexedSet unsat_;
  std::vector<std::int8_t> unsatClass_;
  std::vector<std::int8_t> allClass_;
  std::array<IndexedSet, kSupportClasses> unsatPools_;
  std::array<IndexedSet, kSupportClasses> allPools_;
};

inline SupportState supportInit(const CnfFormula &f, const Assignment &a) {
  return SupportState(f, a);
}

inline void supportFlip(SupportState &state, Var v) { state.flip(v); }

} // namespace satlab

#endif // SATLAB_SUPPORT_HPP
