#ifndef SATLAB_CNF_HPP
#define SATLAB_CNF_HPP

// CNF data model, DIMACS I/O and assignment evaluation.

#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace satlab {

using Var = std::uint32_t;

/// Thrown for malformed DIMACS input.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Thrown for malformed binary or tabular result files.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A literal encoded as 2*var + negated; its negation is code ^ 1.
class Literal {
public:
  constexpr Literal() = default;
  constexpr Literal(Var var, bool negated)
      : code_(2 * var + (negated ? 1u : 0u)) {}

  static constexpr Literal fromCode(std::uint32_t code) {
    Literal l;
    l.code_ = code;
    return l;
  }
  /// DIMACS signed integer (1-based, negative = negated).
  static Literal fromDimacs(int lit) {
    return lit > 0 ? Literal(Var(lit - 1), false) : Literal(Var(-lit - 1), true);
  }

  constexpr Var var() const { return code_ >> 1; }
  constexpr bool negated() const { return code_ & 1u; }
  constexpr std::uint32_t code() const { return code_; }
  constexpr Literal operator~() const { return fromCode(code_ ^ 1u); }
  int toDimacs() const {
    int v = int(var()) + 1;
    return negated() ? -v : v;
  }

  /// Value of the literal under a variable assignment.
  bool eval(bool varValue) const { return varValue != negated(); }

  friend constexpr bool operator==(Literal, Literal) = default;
  friend constexpr auto operator<=>(Literal, Literal) = default;

private:
  std::uint32_t code_ = 0;
};

using Clause = std::vector<Literal>;

/// Boolean assignment; values[v] is the value of variable v.
struct Assignment {
  std::vector<bool> values;

  Assignment() = default;
  explicit Assignment(std::size_t n, bool init = false) : values(n, init) {}
  explicit Assignment(std::vector<bool> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  bool operator[](Var v) const { return values[v]; }
  void set(Var v, bool b) { values[v] = b; }
  void flip(Var v) { values[v] = !values[v]; }
  bool eval(Literal l) const { return l.eval(values[l.var()]); }

  friend bool operator==(const Assignment &, const Assignment &) = default;
};

/// Position of a literal inside a clause.
struct Occurrence {
  std::uint32_t clause;
  std::uint32_t slot;
  friend bool operator==(Occurrence, Occurrence) = default;
};

/// k-CNF formula with a per-literal occurrence index (the factor graph).
class CnfFormula {
public:
  CnfFormula() = default;

  /// Builds a formula over n variables. Every clause must have exactly k
  /// literals (any non-zero count when k == 0) on distinct variables below n.
  CnfFormula(std::size_t n, std::vector<Clause> clauses, std::size_t k = 3)
      : n_(n), k_(k), clauses_(std::move(clauses)) {
    for (std::size_t c = 0; c < clauses_.size(); ++c)
      validateClause(clauses_[c]);
    rebuildOccurrences();
  }

  std::size_t numVars() const { return n_; }
  std::size_t numClauses() const { return clauses_.size(); }
  /// Uniform clause width, or 0 for mixed-width formulas.
  std::size_t width() const { return k_; }
  double density() const { return n_ ? double(clauses_.size()) / double(n_) : 0.0; }

  const std::vector<Clause> &clauses() const { return clauses_; }
  const Clause &clause(std::size_t c) const { return clauses_[c]; }

  /// Occurrences of a literal, in clause order.
  std::span<const Occurrence> occurrences(Literal l) const {
    return occ_[l.code()];
  }

  void addClause(Clause clause) {
    validateClause(clause);
    auto idx = std::uint32_t(clauses_.size());
    for (std::uint32_t s = 0; s < clause.size(); ++s)
      occ_[clause[s].code()].push_back({idx, s});
    clauses_.push_back(std::move(clause));
  }

  friend bool operator==(const CnfFormula &a, const CnfFormula &b) {
    return a.n_ == b.n_ && a.k_ == b.k_ && a.clauses_ == b.clauses_;
  }

private:
  void validateClause(const Clause &clause) const {
    if (clause.empty())
      throw std::invalid_argument("empty clause");
    if (k_ != 0 && clause.size() != k_)
      throw std::invalid_argument("clause width " + std::to_string(clause.size()) +
                                  " != " + std::to_string(k_));
    for (std::size_t i = 0; i < clause.size(); ++i) {
      if (clause[i].var() >= n_)
        throw std::invalid_argument("literal references variable " +
                                    std::to_string(clause[i].var() + 1) +
                                    " > n = " + std::to_string(n_));
      for (std::size_t j = 0; j < i; ++j)
        if (clause[j].var() == clause[i].var())
          throw std::invalid_argument("duplicate variable " +
                                      std::to_string(clause[i].var() + 1) +
                                      " in clause");
    }
  }

  void rebuildOccurrences() {
    occ_.assign(2 * n_, {});
    for (std::uint32_t c = 0; c < clauses_.size(); ++c)
      for (std::uint32_t s = 0; s < clauses_[c].size(); ++s)
        occ_[clauses_[c][s].code()].push_back({c, s});
  }

  std::size_t n_ = 0;
  std::size_t k_ = 3;
  std::vector<Clause> clauses_;
  std::vector<std::vector<Occurrence>> occ_;
};

//------------------------------------------------------------------------------
// DIMACS
//------------------------------------------------------------------------------

/// Parses DIMACS CNF. The formula width is the common clause length (3 when
/// there are no clauses, 0 when lengths differ).
inline CnfFormula parseDimacs(std::istream &in) {
  std::string line;
  std::size_t lineNo = 0;
  long long n = -1, m = -1;
  std::vector<Clause> clauses;
  std::vector<int> current;
  std::size_t currentLine = 0;
  std::size_t width = 0;
  bool mixed = false;

  auto finishClause = [&] {
    Clause clause;
    clause.reserve(current.size());
    for (int lit : current) {
      if (std::abs(lit) > n)
        throw ParseError("literal " + std::to_string(lit) +
                             " references variable > n = " + std::to_string(n),
                         currentLine);
      clause.push_back(Literal::fromDimacs(lit));
    }
    for (std::size_t i = 0; i < clause.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (clause[i].var() == clause[j].var())
          throw ParseError("duplicate variable " +
                               std::to_string(clause[i].var() + 1) + " in clause",
                           currentLine);
    if (clause.empty())
      throw ParseError("empty clause", currentLine);
    if (width == 0)
      width = clause.size();
    else if (clause.size() != width)
      mixed = true;
    clauses.push_back(std::move(clause));
    current.clear();
  };

  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos)
      continue;
    char lead = line[first];
    if (lead == 'c')
      continue;
    if (lead == '%') // SATLIB trailer
      break;
    if (lead == 'p') {
      if (n >= 0)
        throw ParseError("duplicate header", lineNo);
      std::istringstream hs(line.substr(first));
      std::string p, fmt, extra;
      if (!(hs >> p >> fmt >> n >> m) || p != "p" || fmt != "cnf" || n < 0 ||
          m < 0 || (hs >> extra))
        throw ParseError("malformed header: '" + line + "'", lineNo);
      continue;
    }
    if (n < 0)
      throw ParseError("clause data before header", lineNo);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t pos = 0;
      long long lit = 0;
      try {
        lit = std::stoll(tok, &pos);
      } catch (const std::exception &) {
        throw ParseError("bad token '" + tok + "'", lineNo);
      }
      if (pos != tok.size() || lit > std::numeric_limits<int>::max() ||
          lit < -std::numeric_limits<int>::max())
        throw ParseError("bad token '" + tok + "'", lineNo);
      if (current.empty())
        currentLine = lineNo;
      if (lit == 0)
        finishClause();
      else
        current.push_back(int(lit));
    }
  }
  if (n < 0)
    throw ParseError("missing 'p cnf' header", lineNo);
  if (!current.empty())
    throw ParseError("last clause is missing its terminating 0", currentLine);
  if (clauses.size() != std::size_t(m))
    throw ParseError("header declares " + std::to_string(m) + " clauses, found " +
                         std::to_string(clauses.size()),
                     lineNo);
  std::size_t k = mixed ? 0 : (width ? width : 3);
  return CnfFormula(std::size_t(n), std::move(clauses), k);
}

inline CnfFormula parseDimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parseDimacs(in);
}

inline void writeDimacs(std::ostream &out, const CnfFormula &f) {
  out << "p cnf " << f.numVars() << ' ' << f.numClauses() << '\n';
  for (const auto &clause : f.clauses()) {
    for (Literal l : clause)
      out << l.toDimacs() << ' ';
    out << "0\n";
  }
}

inline std::string writeDimacs(const CnfFormula &f) {
  std::ostringstream out;
  writeDimacs(out, f);
  return out.str();
}

//------------------------------------------------------------------------------
// Evaluation and static statistics
//------------------------------------------------------------------------------

struct Evaluation {
  bool satisfied = false;
  std::vector<std::uint32_t> unsatClauses; // ascending
};

inline void requireSize(const CnfFormula &f, const Assignment &a) {
  if (a.size() != f.numVars())
    throw std::invalid_argument("assignment length " + std::to_string(a.size()) +
                                " != n = " + std::to_string(f.numVars()));
}

inline Evaluation evaluate(const CnfFormula &f, const Assignment &a) {
  requireSize(f, a);
  Evaluation e;
  for (std::uint32_t c = 0; c < f.numClauses(); ++c) {
    bool sat = false;
    for (Literal l : f.clause(c))
      sat = sat || a.eval(l);
    if (!sat)
      e.unsatClauses.push_back(c);
  }
  e.satisfied = e.unsatClauses.empty();
  return e;
}

/// Majority vote: v is True iff its positive occurrences are at least its
/// negative ones.
inline Assignment majorityAssignment(const CnfFormula &f) {
  Assignment a(f.numVars());
  for (Var v = 0; v < f.numVars(); ++v)
    a.set(v, f.occurrences(Literal(v, false)).size() >=
                 f.occurrences(Literal(v, true)).size());
  return a;
}

/// Number of clauses each variable appears in, either polarity.
inline std::vector<std::uint32_t> appearanceCounts(const CnfFormula &f) {
  std::vector<std::uint32_t> counts(f.numVars());
  for (Var v = 0; v < f.numVars(); ++v)
    counts[v] = std::uint32_t(f.occurrences(Literal(v, false)).size() +
                              f.occurrences(Literal(v, true)).size());
  return counts;
}

inline std::size_t hammingDistance(const Assignment &a, const Assignment &b) {
  if (a.size() != b.size())
    throw std::invalid_argument("assignment lengths differ");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d += a.values[i] != b.values[i];
  return d;
}

} // namespace satlab

#endif // SATLAB_CNF_HPP
