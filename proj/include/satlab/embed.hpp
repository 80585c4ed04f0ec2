#ifndef SATLAB_EMBED_HPP
#define SATLAB_EMBED_HPP

// Embedding trajectories, the EMB1 dump format, the Flip row operator and the
// detangled message-passing forward pass:
//
//   C' = tanh(FC_C(clause <- sum of its literal rows of L))
//   L' = tanh(FC_LC(literal <- sum of its clause rows of C) + FC_LL(L - Flip(L)))
//
// Literal rows use the paired layout: variable v at row v, its negation at
// row n + v.

#include "satlab/cnf.hpp"
#include "satlab/rng.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace satlab {

using EmbeddingMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row of a literal in the paired layout.
inline Eigen::Index literalRow(Literal l, std::size_t n) {
  return Eigen::Index(l.var() + (l.negated() ? n : 0));
}

/// Swaps row i with row n + i of a 2n-row matrix.
inline EmbeddingMatrix flipRows(const EmbeddingMatrix &L) {
  if (L.rows() % 2 != 0)
    throw std::invalid_argument("flipRows needs an even row count, got " +
                                std::to_string(L.rows()));
  const Eigen::Index n = L.rows() / 2;
  EmbeddingMatrix out(L.rows(), L.cols());
  out.topRows(n) = L.bottomRows(n);
  out.bottomRows(n) = L.topRows(n);
  return out;
}

/// Affine map x -> W x + b applied to every row.
struct AffineMap {
  Eigen::MatrixXf weight; // d_out x d_in
  Eigen::VectorXf bias;   // d_out

  EmbeddingMatrix apply(const EmbeddingMatrix &X) const {
    EmbeddingMatrix Y = X * weight.transpose();
    Y.rowwise() += bias.transpose();
    return Y;
  }
};

struct DetangledWeights {
  AffineMap clause;          // FC on the clause aggregation of literals
  AffineMap literalMessage;  // FC on the literal aggregation of clauses
  AffineMap literalFlipDiff; // FC on L - Flip(L)

  Eigen::Index dim() const { return clause.weight.rows(); }

  void validate() const {
    const Eigen::Index d = dim();
    for (const AffineMap *m : {&clause, &literalMessage, &literalFlipDiff}) {
      if (m->weight.rows() != d || m->weight.cols() != d || m->bias.size() != d)
        throw std::invalid_argument("detangled weights must be d x d with d-vector biases");
      if (!m->weight.allFinite() || !m->bias.allFinite())
        throw std::invalid_argument("detangled weights must be finite");
    }
    if (d == 0)
      throw std::invalid_argument("detangled weights have dimension 0");
  }

  static DetangledWeights zeros(Eigen::Index d) {
    AffineMap z{Eigen::MatrixXf::Zero(d, d), Eigen::VectorXf::Zero(d)};
    return {z, z, z};
  }

  /// Entries uniform in [-scale, scale].
  static DetangledWeights random(Eigen::Index d, float scale, std::uint64_t seed) {
    Rng rng(seed);
    auto draw = [&] { return float((2.0 * rng.uniform() - 1.0) * scale); };
    auto map = [&] {
      AffineMap m{Eigen::MatrixXf(d, d), Eigen::VectorXf(d)};
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          m.weight(i, j) = draw();
      for (Eigen::Index i = 0; i < d; ++i)
        m.bias(i) = draw();
      return m;
    };
    DetangledWeights w;
    w.clause = map();
    w.literalMessage = map();
    w.literalFlipDiff = map();
    return w;
  }
};

/// Per-clause sum of its literal rows.
inline EmbeddingMatrix aggregateLiteralsToClauses(const CnfFormula &f,
                                                  const EmbeddingMatrix &L) {
  EmbeddingMatrix out = EmbeddingMatrix::Zero(Eigen::Index(f.numClauses()), L.cols());
  for (std::size_t c = 0; c < f.numClauses(); ++c)
    for (Literal l : f.clause(c))
      out.row(Eigen::Index(c)) += L.row(literalRow(l, f.numVars()));
  return out;
}

/// Per-literal sum of the rows of clauses it occurs in.
inline EmbeddingMatrix aggregateClausesToLiterals(const CnfFormula &f,
                                                  const EmbeddingMatrix &C) {
  const std::size_t n = f.numVars();
  EmbeddingMatrix out = EmbeddingMatrix::Zero(Eigen::Index(2 * n), C.cols());
  for (std::size_t c = 0; c < f.numClauses(); ++c)
    for (Literal l : f.clause(c))
      out.row(literalRow(l, n)) += C.row(Eigen::Index(c));
  return out;
}

struct EmbeddingStep {
  EmbeddingMatrix literals; // 2n x d
  EmbeddingMatrix clauses;  // m x d
};

inline EmbeddingStep detangledStep(const CnfFormula &f, const EmbeddingMatrix &L,
                                   const EmbeddingMatrix &C, const DetangledWeights &w) {
  const auto d = w.dim();
  if (L.rows() != Eigen::Index(2 * f.numVars()) || L.cols() != d)
    throw std::invalid_argument("literal embedding must be 2n x d");
  if (C.rows() != Eigen::Index(f.numClauses()) || C.cols() != d)
    throw std::invalid_argument("clause embedding must be m x d");
  EmbeddingStep next;
  next.clauses = w.clause.apply(aggregateLiteralsToClauses(f, L)).array().tanh().matrix();
  EmbeddingMatrix diff = L - flipRows(L);
  next.literals = (w.literalMessage.apply(aggregateClausesToLiterals(f, C)) +
                   w.literalFlipDiff.apply(diff))
                      .array()
                      .tanh()
                      .matrix();
  return next;
}

struct EmbeddingTrajectory {
  std::uint32_t numLiterals = 0; // 2n
  std::uint32_t numClauses = 0;  // m
  std::uint32_t dim = 0;         // d
  std::vector<EmbeddingStep> steps;

  std::size_t numVars() const { return numLiterals / 2; }
  std::size_t iterations() const { return steps.size(); }

  void validate() const {
    if (steps.empty())
      throw std::invalid_argument("trajectory has no iterations");
    if (numLiterals == 0 || numLiterals % 2 != 0)
      throw std::invalid_argument("trajectory literal row count must be even and > 0");
    if (numClauses == 0 || dim == 0)
      throw std::invalid_argument("trajectory clause rows and dimension must be > 0");
    for (const auto &s : steps)
      if (s.literals.rows() != numLiterals || s.literals.cols() != dim ||
          s.clauses.rows() != numClauses || s.clauses.cols() != dim)
        throw std::invalid_argument("trajectory step shape mismatch");
  }

  friend bool operator==(const EmbeddingTrajectory &a, const EmbeddingTrajectory &b) {
    if (a.numLiterals != b.numLiterals || a.numClauses != b.numClauses ||
        a.dim != b.dim || a.steps.size() != b.steps.size())
      return false;
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
      const auto &x = a.steps[t], &y = b.steps[t];
      if (std::memcmp(x.literals.data(), y.literals.data(),
                      sizeof(float) * std::size_t(x.literals.size())) != 0 ||
          std::memcmp(x.clauses.data(), y.clauses.data(),
                      sizeof(float) * std::size_t(x.clauses.size())) != 0)
        return false;
    }
    return true;
  }
};

/// Starting embeddings for runDetangled.
struct EmbeddingInit {
  EmbeddingMatrix literals;
  EmbeddingMatrix clauses;

  /// Every literal row equal to `literal`, every clause row to `clause`.
  static EmbeddingInit tiled(const CnfFormula &f, const Eigen::VectorXf &literal,
                             const Eigen::VectorXf &clause) {
    if (literal.size() != clause.size())
      throw std::invalid_argument("init vectors differ in dimension");
    EmbeddingInit init;
    init.literals = literal.transpose().replicate(Eigen::Index(2 * f.numVars()), 1);
    init.clauses = clause.transpose().replicate(Eigen::Index(f.numClauses()), 1);
    return init;
  }
};

/// T detangled steps; steps[t] holds the embeddings after step t + 1.
inline EmbeddingTrajectory runDetangled(const CnfFormula &f, const DetangledWeights &w,
                                        std::size_t T, const EmbeddingInit &init) {
  if (T < 1)
    throw std::invalid_argument("runDetangled needs T >= 1");
  w.validate();
  EmbeddingTrajectory traj;
  traj.numLiterals = std::uint32_t(2 * f.numVars());
  traj.numClauses = std::uint32_t(f.numClauses());
  traj.dim = std::uint32_t(w.dim());
  traj.steps.reserve(T);
  const EmbeddingMatrix *L = &init.literals, *C = &init.clauses;
  for (std::size_t t = 0; t < T; ++t) {
    traj.steps.push_back(detangledStep(f, *L, *C, w));
    L = &traj.steps.back().literals;
    C = &traj.steps.back().clauses;
  }
  return traj;
}

//------------------------------------------------------------------------------
// EMB1 dump: "EMB1", u32 T, u32 2n, u32 m, u32 d, then per step L (2n*d) and
// C (m*d) as row-major little-endian float32.
//------------------------------------------------------------------------------

namespace detail {

inline std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0xff00u) | ((x << 8) & 0xff0000u) | (x << 24);
}

inline void putU32(std::ostream &out, std::uint32_t x) {
  if constexpr (std::endian::native == std::endian::big)
    x = byteswap32(x);
  out.write(reinterpret_cast<const char *>(&x), 4);
}

inline std::uint32_t getU32(std::istream &in) {
  std::uint32_t x = 0;
  if (!in.read(reinterpret_cast<char *>(&x), 4))
    throw FormatError("EMB1: truncated header");
  if constexpr (std::endian::native == std::endian::big)
    x = byteswap32(x);
  return x;
}

inline void putFloats(std::ostream &out, const float *data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char *>(data), std::streamsize(count * 4));
  } else {
    for (std::size_t i = 0; i < count; ++i)
      putU32(out, std::bit_cast<std::uint32_t>(data[i]));
  }
}

inline void getFloats(std::istream &in, float *data, std::size_t count) {
  if (!in.read(reinterpret_cast<char *>(data), std::streamsize(count * 4)))
    throw FormatError("EMB1: payload shorter than the header declares");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < count; ++i)
      data[i] = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(data[i])));
}

} // namespace detail

inline void writeTrajectory(std::ostream &out, const EmbeddingTrajectory &traj) {
  traj.validate();
  out.write("EMB1", 4);
  detail::putU32(out, std::uint32_t(traj.steps.size()));
  detail::putU32(out, traj.numLiterals);
  detail::putU32(out, traj.numClauses);
  detail::putU32(out, traj.dim);
  for (const auto &s : traj.steps) {
    detail::putFloats(out, s.literals.data(), std::size_t(s.literals.size()));
    detail::putFloats(out, s.clauses.data(), std::size_t(s.clauses.size()));
  }
}

inline EmbeddingTrajectory readTrajectory(std::istream &in) {
  char magic[4];
  if (!in.read(magic, 4))
    throw FormatError("EMB1: truncated header");
  if (std::memcmp(magic, "EMB1", 4) != 0)
    throw FormatError("EMB1: bad magic");
  EmbeddingTrajectory traj;
  std::uint32_t T = detail::getU32(in);
  traj.numLiterals = detail::getU32(in);
  traj.numClauses = detail::getU32(in);
  traj.dim = detail::getU32(in);
  if (T == 0)
    throw FormatError("EMB1: header declares zero iterations");
  if (traj.numLiterals == 0 || traj.numLiterals % 2 != 0 || traj.numClauses == 0 ||
      traj.dim == 0)
    throw FormatError("EMB1: invalid shape header");

  // Check the payload length before allocating anything large.
  const std::uint64_t perStep =
      (std::uint64_t(traj.numLiterals) + traj.numClauses) * traj.dim * 4;
  const auto start = in.tellg();
  if (start != std::istream::pos_type(-1)) {
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(start);
    if (std::uint64_t(end - start) != perStep * T)
      throw FormatError("EMB1: payload length " + std::to_string(end - start) +
                        " inconsistent with header (" + std::to_string(perStep * T) +
                        " bytes)");
  }
  traj.steps.resize(T);
  for (auto &s : traj.steps) {
    s.literals.resize(traj.numLiterals, traj.dim);
    s.clauses.resize(traj.numClauses, traj.dim);
    detail::getFloats(in, s.literals.data(), std::size_t(s.literals.size()));
    detail::getFloats(in, s.clauses.data(), std::size_t(s.clauses.size()));
  }
  return traj;
}

inline void saveTrajectory(const std::filesystem::path &path,
                           const EmbeddingTrajectory &traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  writeTrajectory(out, traj);
  if (!out)
    throw std::runtime_error("write failed: " + path.string());
}

inline EmbeddingTrajectory loadTrajectory(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  return readTrajectory(in);
}

} // namespace satlab

#endif // SATLAB_EMBED_HPP
