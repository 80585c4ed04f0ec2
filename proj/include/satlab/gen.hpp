#ifndef SATLAB_GEN_HPP
#define SATLAB_GEN_HPP

// Random and planted 3-SAT generators, dataset manifests and the backbone
// clause injection used by the backbone experiment.

#include "satlab/cnf.hpp"
#include "satlab/rng.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace satlab {

namespace detail {

inline void requireGeneratorArgs(std::size_t n, std::size_t m) {
  if (n < 3)
    throw std::invalid_argument("3-SAT generator needs n >= 3, got " +
                                std::to_string(n));
  if (m < 1)
    throw std::invalid_argument("3-SAT generator needs m >= 1");
}

} // namespace detail

/// One clause uniform over the 8 * C(n,3) configurations: three distinct
/// variables, independent polarities.
inline Clause sampleClause(Rng &rng, std::size_t n) {
  Var a = Var(rng.below(n)), b, c;
  do
    b = Var(rng.below(n));
  while (b == a);
  do
    c = Var(rng.below(n));
  while (c == a || c == b);
  std::uint64_t signs = rng.below(8);
  return {Literal(a, signs & 1), Literal(b, signs & 2), Literal(c, signs & 4)};
}

/// Random 3-SAT R(m, n); clauses drawn independently with replacement.
inline CnfFormula random3Sat(std::size_t n, std::size_t m, std::uint64_t seed) {
  detail::requireGeneratorArgs(n, m);
  Rng rng(seed);
  std::vector<Clause> clauses;
  clauses.reserve(m);
  for (std::size_t i = 0; i < m; ++i)
    clauses.push_back(sampleClause(rng, n));
  return CnfFormula(n, std::move(clauses), 3);
}

struct PlantedInstance {
  CnfFormula formula;
  Assignment planted;
};

/// Planted 3-SAT with a given hidden assignment: each clause is uniform over
/// the 7 * C(n,3) configurations satisfied by `planted` (rejection sampling).
inline CnfFormula planted3SatWith(const Assignment &planted, std::size_t m,
                                  std::uint64_t seed) {
  const std::size_t n = planted.size();
  detail::requireGeneratorArgs(n, m);
  Rng rng(seed);
  std::vector<Clause> clauses;
  clauses.reserve(m);
  while (clauses.size() < m) {
    Clause cl = sampleClause(rng, n);
    if (planted.eval(cl[0]) || planted.eval(cl[1]) || planted.eval(cl[2]))
      clauses.push_back(std::move(cl));
  }
  return CnfFormula(n, std::move(clauses), 3);
}

/// Planted 3-SAT P(m, n); the hidden assignment is uniform.
inline PlantedInstance planted3Sat(std::size_t n, std::size_t m,
                                   std::uint64_t seed) {
  detail::requireGeneratorArgs(n, m);
  Rng rng(seed);
  Assignment planted(n);
  for (Var v = 0; v < n; ++v)
    planted.set(v, rng.below(2));
  return {planted3SatWith(planted, m, deriveSeed(seed, 0)), std::move(planted)};
}

/// Appends the clause whose three literals are all falsified by `planted`:
/// (¬x ∨ ¬y ∨ ¬z) when x, y, z are True, polarities flipped otherwise.
inline CnfFormula injectBackboneClause(const CnfFormula &f,
                                       const Assignment &planted,
                                       const std::array<Var, 3> &triple) {
  requireSize(f, planted);
  if (triple[0] == triple[1] || triple[0] == triple[2] || triple[1] == triple[2])
    throw std::invalid_argument("backbone triple must have distinct variables");
  for (Var v : triple)
    if (v >= f.numVars())
      throw std::invalid_argument("backbone triple variable out of range");
  if (f.width() != 3)
    throw std::invalid_argument("backbone injection needs a 3-CNF formula");
  CnfFormula out = f;
  out.addClause({Literal(triple[0], planted[triple[0]]),
                 Literal(triple[1], planted[triple[1]]),
                 Literal(triple[2], planted[triple[2]])});
  return out;
}

//------------------------------------------------------------------------------
// Dataset manifests
//------------------------------------------------------------------------------

enum class Distribution { Random, Planted };

struct ManifestEntry {
  std::size_t n = 0;
  double c = 0.0;
  std::size_t count = 0;
  std::uint64_t seedBase = 0;

  std::size_t numClauses() const { return std::size_t(std::llround(c * double(n))); }
  friend bool operator==(const ManifestEntry &, const ManifestEntry &) = default;
};

struct DatasetManifest {
  std::string name;
  std::vector<ManifestEntry> entries;

  std::size_t totalInstances() const {
    std::size_t t = 0;
    for (const auto &e : entries)
      t += e.count;
    return t;
  }
  /// PLANTED manifests sample planted instances, everything else R(m, n).
  Distribution distribution() const {
    return name == "PLANTED" ? Distribution::Planted : Distribution::Random;
  }
  friend bool operator==(const DatasetManifest &, const DatasetManifest &) = default;
};

inline void validateManifest(const DatasetManifest &mf) {
  for (const auto &e : mf.entries) {
    if (!(e.c > 0.0))
      throw std::invalid_argument("manifest entry density must be > 0");
    if (e.n < 3)
      throw std::invalid_argument("manifest entry needs n >= 3");
    if (e.numClauses() < 1)
      throw std::invalid_argument("manifest entry has round(c*n) < 1");
    if (e.count == 0)
      throw std::invalid_argument("manifest entry count must be > 0");
  }
}

/// Reduces per-entry counts round-robin (last entries first) until the total
/// is at most `cap`; entries that reach zero are dropped.
inline void capManifest(DatasetManifest &mf, std::size_t cap) {
  std::size_t total = mf.totalInstances();
  while (total > cap) {
    bool progressed = false;
    for (auto it = mf.entries.rbegin(); it != mf.entries.rend() && total > cap; ++it)
      if (it->count > 0) {
        --it->count;
        --total;
        progressed = true;
      }
    if (!progressed)
      break;
  }
  std::erase_if(mf.entries, [](const ManifestEntry &e) { return e.count == 0; });
}

/// The SPARSE, DENSE and PLANTED grids: n in {500,1000,1500,2000}, 100
/// instances per (n, c).
inline DatasetManifest buildManifest(const std::string &name,
                                     std::optional<std::size_t> totalCap = {}) {
  std::vector<double> densities;
  std::uint64_t datasetId = 0;
  if (name == "SPARSE") {
    densities = {0.5, 0.8, 1.0, 1.25, 1.3, 1.5, 1.6};
    datasetId = 1;
  } else if (name == "DENSE") {
    densities = {3.75, 4.0, 4.1, 4.2, 4.25};
    datasetId = 2;
  } else if (name == "PLANTED") {
    for (int half = 9; half <= 31; ++half)
      densities.push_back(half * 0.5);
    datasetId = 3;
  } else {
    throw std::invalid_argument("unknown manifest '" + name +
                                "' (expected SPARSE, DENSE or PLANTED)");
  }
  DatasetManifest mf{name, {}};
  std::uint64_t idx = 0;
  for (std::size_t n : {500, 1000, 1500, 2000})
    for (double c : densities)
      mf.entries.push_back({n, c, 100, (datasetId << 40) + (idx++ << 20)});
  if (totalCap)
    capManifest(mf, *totalCap);
  return mf;
}

/// Density as written in manifests and file names ("4.1", "1", "15.5").
inline std::string formatDensity(double c) {
  std::ostringstream os;
  os << c;
  return os.str();
}

/// Line-oriented manifest: `name n c count seed_base`, '#' comments.
inline void writeManifest(std::ostream &out, const DatasetManifest &mf) {
  for (const auto &e : mf.entries)
    out << mf.name << ' ' << e.n << ' ' << formatDensity(e.c) << ' ' << e.count
        << ' ' << e.seedBase << '\n';
}

inline DatasetManifest readManifest(std::istream &in) {
  DatasetManifest mf;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
      continue;
    std::istringstream ls(line);
    std::string name, extra;
    ManifestEntry e;
    if (!(ls >> name >> e.n >> e.c >> e.count >> e.seedBase) || (ls >> extra))
      throw ParseError("manifest line must be 'name n c count seed_base'", lineNo);
    if (mf.name.empty())
      mf.name = name;
    else if (name != mf.name)
      throw ParseError("manifest mixes dataset names", lineNo);
    mf.entries.push_back(e);
  }
  validateManifest(mf);
  return mf;
}

struct GeneratedInstance {
  CnfFormula formula;
  std::optional<Assignment> planted;
};

/// Instance `idx` of a manifest entry; seed = seed_base + idx.
inline GeneratedInstance generateInstance(Distribution dist,
                                          const ManifestEntry &e,
                                          std::size_t idx) {
  std::uint64_t seed = e.seedBase + idx;
  if (dist == Distribution::Planted) {
    auto p = planted3Sat(e.n, e.numClauses(), seed);
    return {std::move(p.formula), std::move(p.planted)};
  }
  return {random3Sat(e.n, e.numClauses(), seed), std::nullopt};
}

inline std::string instanceFileStem(const std::string &name,
                                    const ManifestEntry &e, std::size_t idx) {
  return name + "_n" + std::to_string(e.n) + "_c" + formatDensity(e.c) + "_i" +
         std::to_string(idx);
}

/// One 0/1 character per variable, newline-terminated.
inline void writeAssignment(std::ostream &out, const Assignment &a) {
  for (std::size_t v = 0; v < a.size(); ++v)
    out << (a.values[v] ? '1' : '0');
  out << '\n';
}

inline Assignment readAssignment(std::istream &in) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("empty assignment file", 1);
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  Assignment a(line.size());
  for (std::size_t v = 0; v < line.size(); ++v) {
    if (line[v] != '0' && line[v] != '1')
      throw ParseError("assignment must contain only '0'/'1'", 1);
    a.set(Var(v), line[v] == '1');
  }
  return a;
}

/// Writes every instance of the manifest (plus planted `.assign` sidecars and
/// `manifest.txt`) into `dir`. Returns the number of instances written.
inline std::size_t materializeManifest(const DatasetManifest &mf,
                                       const std::filesystem::path &dir) {
  validateManifest(mf);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.txt");
    writeManifest(out, mf);
    if (!out)
      throw std::runtime_error("cannot write " + (dir / "manifest.txt").string());
  }
  std::size_t written = 0;
  for (const auto &e : mf.entries)
    for (std::size_t i = 0; i < e.count; ++i) {
      auto inst = generateInstance(mf.distribution(), e, i);
      auto stem = instanceFileStem(mf.name, e, i);
      std::ofstream cnf(dir / (stem + ".cnf"));
      writeDimacs(cnf, inst.formula);
      if (!cnf)
        throw std::runtime_error("cannot write " + (dir / (stem + ".cnf")).string());
      if (inst.planted) {
        std::ofstream as(dir / (stem + ".assign"));
        writeAssignment(as, *inst.planted);
      }
      ++written;
    }
  return written;
}

} // namespace satlab

#endif // SATLAB_GEN_HPP
