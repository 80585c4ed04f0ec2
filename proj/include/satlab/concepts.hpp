#ifndef SATLAB_CONCEPTS_HPP
#define SATLAB_CONCEPTS_HPP

// Concept statistics over embedding trajectories: averaged covariance, top-2
// PCA, sparse PCs, and the assignment / support / appearance measurements
// made on PC projections.

#include "satlab/cnf.hpp"
#include "satlab/embed.hpp"
#include "satlab/support.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace satlab {

enum class Entity { Literal, Clause };

inline const EmbeddingMatrix &entityMatrix(const EmbeddingStep &s, Entity e) {
  return e == Entity::Literal ? s.literals : s.clauses;
}

//------------------------------------------------------------------------------
// Covariance
//------------------------------------------------------------------------------

/// Mean-centered population covariance (divides by the row count).
inline Eigen::MatrixXd populationCovariance(const EmbeddingMatrix &X) {
  if (X.rows() == 0)
    throw std::invalid_argument("covariance of an empty matrix");
  Eigen::MatrixXd Xd = X.cast<double>();
  Eigen::RowVectorXd mean = Xd.colwise().mean();
  Xd.rowwise() -= mean;
  Eigen::MatrixXd S = (Xd.transpose() * Xd) / double(X.rows());
  return (S + S.transpose()) * 0.5;
}

/// Running sum of per-(instance, iteration) covariance matrices. Merging two
/// accumulators is exact addition, so partial sums can be combined in any
/// grouping.
class CovarianceAccumulator {
public:
  explicit CovarianceAccumulator(Eigen::Index d = 0)
      : d_(d), sum_(Eigen::MatrixXd::Zero(d, d)) {}

  Eigen::Index dim() const { return d_; }
  std::size_t count() const { return count_; }
  const Eigen::MatrixXd &sum() const { return sum_; }

  void add(const EmbeddingMatrix &X) {
    if (X.cols() != d_)
      throw std::invalid_argument("covariance dimension mismatch: " +
                                  std::to_string(X.cols()) + " vs " + std::to_string(d_));
    sum_ += populationCovariance(X);
    ++count_;
  }

  void add(const EmbeddingTrajectory &traj, Entity e) {
    for (const auto &s : traj.steps)
      add(entityMatrix(s, e));
  }

  void merge(const CovarianceAccumulator &other) {
    if (other.d_ != d_)
      throw std::invalid_argument("cannot merge accumulators of different dimension");
    sum_ += other.sum_;
    count_ += other.count_;
  }

  Eigen::MatrixXd mean() const {
    if (count_ == 0)
      throw std::invalid_argument("averaged covariance of no matrices");
    return sum_ / double(count_);
  }

private:
  Eigen::Index d_;
  Eigen::MatrixXd sum_;
  std::size_t count_ = 0;
};

/// Mean over all (trajectory, iteration) pairs of the per-iteration
/// covariance of the literal or clause embedding.
inline Eigen::MatrixXd averagedCovariance(std::span<const EmbeddingTrajectory> trajectories,
                                          Entity e) {
  if (trajectories.empty())
    throw std::invalid_argument("averaged covariance of no trajectories");
  CovarianceAccumulator acc(trajectories.front().dim);
  for (const auto &t : trajectories)
    acc.add(t, e);
  return acc.mean();
}

//------------------------------------------------------------------------------
// PCA
//------------------------------------------------------------------------------

struct PcaResult {
  Eigen::VectorXd pc1, pc2;
  double lambda1 = 0, lambda2 = 0;
  double explained1 = 0, explained2 = 0; // fraction of the trace
};

/// Flips v so that its largest-magnitude entry (first one on ties) is positive.
inline void orientBySign(Eigen::VectorXd &v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(best)))
      best = i;
  if (v(best) < 0)
    v = -v;
}

inline PcaResult pcaTop2(const Eigen::MatrixXd &S) {
  if (S.rows() != S.cols() || S.rows() < 2)
    throw std::invalid_argument("PCA needs a square matrix with d >= 2");
  if (!S.allFinite())
    throw std::invalid_argument("PCA input contains NaN or infinite entries");
  Eigen::MatrixXd sym = (S + S.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigendecomposition failed");
  const Eigen::Index d = sym.rows();
  // Eigenvalues come in ascending order.
  PcaResult r;
  r.lambda1 = es.eigenvalues()(d - 1);
  r.lambda2 = es.eigenvalues()(d - 2);
  r.pc1 = es.eigenvectors().col(d - 1).normalized();
  r.pc2 = es.eigenvectors().col(d - 2).normalized();
  orientBySign(r.pc1);
  orientBySign(r.pc2);
  double trace = sym.trace();
  if (trace > 0) {
    r.explained1 = r.lambda1 / trace;
    r.explained2 = r.lambda2 / trace;
  }
  return r;
}

/// Keeps the k largest-magnitude entries (lower index wins ties), zeroes the
/// rest and rescales to unit length.
inline Eigen::VectorXd sparsifyPc(const Eigen::VectorXd &pc, std::size_t k = 16) {
  const auto d = std::size_t(pc.size());
  if (k < 1 || k > d)
    throw std::invalid_argument("sparsify keep count must be in [1, d]");
  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(pc(a)) > std::abs(pc(b));
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(pc.size());
  for (std::size_t i = 0; i < k; ++i)
    out(order[i]) = pc(order[i]);
  double norm = out.norm();
  if (norm > 0)
    out /= norm;
  return out;
}

/// Projection of each row, centered by the matrix's column mean, onto pc.
inline std::vector<double> projectRows(const EmbeddingMatrix &X, const Eigen::VectorXd &pc) {
  if (X.cols() != pc.size())
    throw std::invalid_argument("projection dimension mismatch");
  Eigen::MatrixXd Xd = X.cast<double>();
  Eigen::RowVectorXd mean = Xd.colwise().mean();
  Xd.rowwise() -= mean;
  Eigen::VectorXd p = Xd * pc;
  return {p.data(), p.data() + p.size()};
}

//------------------------------------------------------------------------------
// Assignment concept
//------------------------------------------------------------------------------

struct PcAssignment {
  Assignment assignment;
  std::size_t contradictions = 0;
};

/// Paired literal projections (v at i, ¬v at n + i) to an assignment. A pair
/// on strictly opposite sides of 0 is consistent; otherwise it counts as a
/// contradiction. Either way the literal with the larger projection is True
/// (the positive literal on ties).
inline PcAssignment assignmentFromProjections(std::span<const double> proj) {
  if (proj.size() % 2 != 0)
    throw std::invalid_argument("literal projections need an even count");
  const std::size_t n = proj.size() / 2;
  PcAssignment r{Assignment(n), 0};
  for (std::size_t v = 0; v < n; ++v) {
    double pos = proj[v], neg = proj[n + v];
    bool consistent = (pos > 0 && neg < 0) || (pos < 0 && neg > 0);
    if (!consistent)
      ++r.contradictions;
    r.assignment.set(Var(v), pos >= neg);
  }
  return r;
}

inline PcAssignment assignmentFromPc1(const EmbeddingMatrix &L, const Eigen::VectorXd &pc1) {
  if (L.rows() % 2 != 0)
    throw std::invalid_argument("literal embedding needs an even row count");
  auto proj = projectRows(L, pc1);
  return assignmentFromProjections(proj);
}

/// Mean over iterations of contradictions / n, in percent.
inline double contradictionRate(const EmbeddingTrajectory &traj, const Eigen::VectorXd &pc1) {
  traj.validate();
  double sum = 0;
  for (const auto &s : traj.steps)
    sum += double(assignmentFromPc1(s.literals, pc1).contradictions) / double(traj.numVars());
  return 100.0 * sum / double(traj.steps.size());
}

/// Per-iteration assignments decoded from the literal side.
inline std::vector<Assignment> assignmentsFromTrajectory(const EmbeddingTrajectory &traj,
                                                         const Eigen::VectorXd &pc1) {
  std::vector<Assignment> out;
  out.reserve(traj.steps.size());
  for (const auto &s : traj.steps)
    out.push_back(assignmentFromPc1(s.literals, pc1).assignment);
  return out;
}

inline void requireTrajectoryMatches(const EmbeddingTrajectory &traj, const CnfFormula &f,
                                     std::span<const Assignment> phis) {
  traj.validate();
  if (traj.numLiterals != 2 * f.numVars() || traj.numClauses != f.numClauses())
    throw std::invalid_argument("trajectory shape does not match the formula");
  if (phis.size() != traj.steps.size())
    throw std::invalid_argument("need one assignment per iteration");
}

//------------------------------------------------------------------------------
// Support concepts
//------------------------------------------------------------------------------

/// Among support clauses (exactly one True literal) of each iteration, the
/// percentage with positive clause-PC1 projection, averaged over iterations
/// that have support clauses. nullopt when no iteration has any.
inline std::optional<double> conceptAbidingRate(const EmbeddingTrajectory &traj,
                                                const Eigen::VectorXd &clausePc1,
                                                const CnfFormula &f,
                                                std::span<const Assignment> phis) {
  requireTrajectoryMatches(traj, f, phis);
  double sum = 0;
  std::size_t iters = 0;
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    SupportState st(f, phis[t]);
    auto proj = projectRows(traj.steps[t].clauses, clausePc1);
    std::size_t support = 0, abiding = 0;
    for (std::size_t c = 0; c < f.numClauses(); ++c)
      if (st.trueCount(c) == 1) {
        ++support;
        abiding += proj[c] > 0;
      }
    if (support) {
      sum += double(abiding) / double(support);
      ++iters;
    }
  }
  if (!iters)
    return std::nullopt;
  return 100.0 * sum / double(iters);
}

/// Symmetric PC1 interval ±[lo, hi] = [-hi, -lo] ∪ [lo, hi].
struct SymmetricInterval {
  double lo = 0, hi = 0;
  bool contains(double x) const {
    double a = std::abs(x);
    return a >= lo && a <= hi;
  }
};

/// PC1 zone per literal support class 0, 1, 2, 3+.
struct SupportZoneConfig {
  std::array<SymmetricInterval, 4> zones;

  void validate() const {
    for (const auto &z : zones)
      if (!(z.lo <= z.hi) || z.lo < 0)
        throw std::invalid_argument("support zone needs 0 <= a <= b");
  }

  static SupportZoneConfig sparse() { return {{{{0, 2}, {2.1, 3.3}, {2.7, 3.5}, {3, 3.7}}}}; }
  static SupportZoneConfig dense() { return {{{{0, 1.5}, {1.6, 2.8}, {2.4, 3.0}, {2.6, 3.2}}}}; }
  /// Zero-support zone ±[0, 2], remaining classes as for SPARSE.
  static SupportZoneConfig defaults() { return sparse(); }

  static SupportZoneConfig preset(const std::string &name) {
    if (name == "SPARSE")
      return sparse();
    if (name == "DENSE")
      return dense();
    throw std::invalid_argument("unknown zone preset '" + name + "'");
  }
};

/// Lines `class a b` for class 0..3; unspecified classes keep the defaults.
inline SupportZoneConfig readZoneConfig(std::istream &in) {
  SupportZoneConfig cfg = SupportZoneConfig::defaults();
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
      continue;
    std::istringstream ls(line);
    int cls = -1;
    SymmetricInterval z;
    std::string extra;
    if (!(ls >> cls >> z.lo >> z.hi) || (ls >> extra) || cls < 0 || cls > 3)
      throw ParseError("zone line must be 'class a b' with class in 0..3", lineNo);
    cfg.zones[std::size_t(cls)] = z;
  }
  cfg.validate();
  return cfg;
}

/// Support of each literal in paired layout: the variable's support for its
/// True literal, 0 for the False one.
inline std::vector<std::uint32_t> literalSupports(const SupportState &st) {
  const std::size_t n = st.formula().numVars();
  std::vector<std::uint32_t> out(2 * n, 0);
  for (Var v = 0; v < n; ++v)
    out[literalRow(Literal(v, !st.assignment()[v]), n)] = st.support(v);
  return out;
}

/// For each support class, the percentage of literals of that class whose
/// PC1 projection lies in the class's zone, averaged over the iterations in
/// which the class is non-empty. nullopt for classes that never occur.
inline std::array<std::optional<double>, 4>
supportZoneStats(const EmbeddingTrajectory &traj, const Eigen::VectorXd &pc1,
                 const CnfFormula &f, std::span<const Assignment> phis,
                 const SupportZoneConfig &zones) {
  requireTrajectoryMatches(traj, f, phis);
  zones.validate();
  std::array<double, 4> sum{};
  std::array<std::size_t, 4> iters{};
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    SupportState st(f, phis[t]);
    auto sup = literalSupports(st);
    auto proj = projectRows(traj.steps[t].literals, pc1);
    std::array<std::size_t, 4> total{}, inside{};
    for (std::size_t r = 0; r < proj.size(); ++r) {
      auto cls = std::size_t(supportClass(sup[r]));
      ++total[cls];
      inside[cls] += zones.zones[cls].contains(proj[r]);
    }
    for (std::size_t k = 0; k < 4; ++k)
      if (total[k]) {
        sum[k] += double(inside[k]) / double(total[k]);
        ++iters[k];
      }
  }
  std::array<std::optional<double>, 4> out;
  for (std::size_t k = 0; k < 4; ++k)
    if (iters[k])
      out[k] = 100.0 * sum[k] / double(iters[k]);
  return out;
}

/// Fraction of variables where phi differs from MAJ(F).
inline double majDistance(const Assignment &phi, const CnfFormula &f) {
  requireSize(f, phi);
  if (f.numVars() == 0)
    return 0.0;
  return double(hammingDistance(phi, majorityAssignment(f))) / double(f.numVars());
}

//------------------------------------------------------------------------------
// Appearance-count concept
//------------------------------------------------------------------------------

/// Appearance buckets: 1, 2, 3-5, 6+.
inline constexpr std::array<const char *, 4> kAppearanceBuckets = {"1", "2", "3-5", ">=6"};

/// Bucket of an appearance count, or -1 for 0.
constexpr int appearanceBucket(std::uint32_t count) {
  if (count == 0)
    return -1;
  if (count <= 2)
    return int(count) - 1;
  return count <= 5 ? 2 : 3;
}

struct QuadraticFit {
  double c0 = 0, c1 = 0, c2 = 0;
  double operator()(double x) const { return c0 + x * (c1 + x * c2); }
};

/// Least-squares y = c0 + c1 x + c2 x^2; nullopt when fewer than 3 distinct x.
inline std::optional<QuadraticFit> fitQuadratic(std::span<const double> x,
                                                std::span<const double> y) {
  std::vector<double> distinct(x.begin(), x.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    return std::nullopt;
  Eigen::MatrixXd A(Eigen::Index(x.size()), 3);
  Eigen::VectorXd b(Eigen::Index(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    A(Eigen::Index(i), 0) = 1;
    A(Eigen::Index(i), 1) = x[i];
    A(Eigen::Index(i), 2) = x[i] * x[i];
    b(Eigen::Index(i)) = y[i];
  }
  Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
  return QuadraticFit{c(0), c(1), c(2)};
}

struct AppearanceReport {
  std::array<std::optional<double>, 4> bucketAccuracy; // percent
  std::vector<std::uint32_t> skippedCohorts;           // degenerate fits
  std::vector<std::pair<std::uint32_t, std::uint32_t>> coincidentCohorts;
  bool degenerate() const { return !skippedCohorts.empty() || !coincidentCohorts.empty(); }
};

/// Fits pc2 = f_i(pc1) per appearance cohort i, assigns each point to the
/// cohort whose curve is vertically closest, and reports per bucket the
/// percentage of points whose nearest curve belongs to a cohort of their own
/// bucket. Cohorts with fewer than 3 distinct pc1 values are skipped;
/// cohorts with (numerically) identical curves are reported as coincident.
inline AppearanceReport appearanceRegressionAccuracy(std::span<const double> pc1,
                                                     std::span<const double> pc2,
                                                     std::span<const std::uint32_t> counts) {
  if (pc1.size() != pc2.size() || pc1.size() != counts.size())
    throw std::invalid_argument("appearance regression inputs differ in length");
  std::map<std::uint32_t, std::vector<std::size_t>> cohorts;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0)
      cohorts[counts[i]].push_back(i);

  AppearanceReport rep;
  std::vector<std::pair<std::uint32_t, QuadraticFit>> curves;
  for (const auto &[count, members] : cohorts) {
    std::vector<double> x, y;
    for (std::size_t i : members) {
      x.push_back(pc1[i]);
      y.push_back(pc2[i]);
    }
    if (auto fit = fitQuadratic(x, y))
      curves.emplace_back(count, *fit);
    else
      rep.skippedCohorts.push_back(count);
  }
  for (std::size_t a = 0; a < curves.size(); ++a)
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      const auto &p = curves[a].second, &q = curves[b].second;
      double scale = 1 + std::abs(p.c0) + std::abs(p.c1) + std::abs(p.c2);
      if (std::abs(p.c0 - q.c0) + std::abs(p.c1 - q.c1) + std::abs(p.c2 - q.c2) <
          1e-9 * scale)
        rep.coincidentCohorts.emplace_back(curves[a].first, curves[b].first);
    }
  if (curves.empty())
    return rep;

  std::array<std::size_t, 4> total{}, correct{};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    int bucket = appearanceBucket(counts[i]);
    if (bucket < 0)
      continue;
    std::uint32_t nearest = curves.front().first;
    double best = INFINITY;
    for (const auto &[count, fit] : curves) {
      double dist = std::abs(pc2[i] - fit(pc1[i]));
      if (dist < best) {
        best = dist;
        nearest = count;
      }
    }
    ++total[std::size_t(bucket)];
    correct[std::size_t(bucket)] += appearanceBucket(nearest) == bucket;
  }
  for (std::size_t k = 0; k < 4; ++k)
    if (total[k])
      rep.bucketAccuracy[k] = 100.0 * double(correct[k]) / double(total[k]);
  return rep;
}

/// Literal rows of an iteration projected on pc1/pc2 with each literal
/// labeled by its variable's appearance count.
inline AppearanceReport appearanceRegressionAccuracy(const EmbeddingMatrix &L,
                                                     const Eigen::VectorXd &pc1,
                                                     const Eigen::VectorXd &pc2,
                                                     std::span<const std::uint32_t> varCounts) {
  if (L.rows() != Eigen::Index(2 * varCounts.size()))
    throw std::invalid_argument("literal embedding must have 2n rows for n counts");
  auto x = projectRows(L, pc1);
  auto y = projectRows(L, pc2);
  std::vector<std::uint32_t> labels(2 * varCounts.size());
  for (std::size_t v = 0; v < varCounts.size(); ++v)
    labels[v] = labels[varCounts.size() + v] = varCounts[v];
  return appearanceRegressionAccuracy(x, y, labels);
}

//------------------------------------------------------------------------------
// Reporting
//------------------------------------------------------------------------------

struct StatSummary {
  double mean = 0, stddev = 0;
  std::size_t samples = 0;
};

/// Mean and population standard deviation.
inline StatSummary summarize(std::span<const double> xs) {
  StatSummary s;
  s.samples = xs.size();
  if (xs.empty())
    return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  double var = 0;
  for (double x : xs)
    var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / double(xs.size()));
  return s;
}

/// CSV header for statistic tables.
inline void writeStatCsvHeader(std::ostream &out) { out << "dataset,statistic,mean,stddev\n"; }

inline void writeStatCsvRow(std::ostream &out, const std::string &dataset,
                            const std::string &statistic, const StatSummary &s) {
  out << dataset << ',' << statistic << ',' << s.mean << ',' << s.stddev << '\n';
}

} // namespace satlab

#endif // SATLAB_CONCEPTS_HPP
