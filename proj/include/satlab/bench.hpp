#ifndef SATLAB_BENCH_HPP
#define SATLAB_BENCH_HPP

// Solver comparison runs (mean unsat-count convergence curves, median
// iterations to solve) and CSV/SVG reporting.

#include "satlab/cnf.hpp"
#include "satlab/gen.hpp"
#include "satlab/rng.hpp"
#include "satlab/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace satlab {

/// Worker count: SATLAB_THREADS when set, else hardware concurrency.
inline unsigned workerCount() {
  if (const char *env = std::getenv("SATLAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1)
      return unsigned(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks pull
/// indices from a shared counter; results must be written by index.
template <typename Task>
void parallelFor(std::size_t count, unsigned workers, Task &&task) {
  workers = unsigned(std::min<std::size_t>(std::max(1u, workers), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        if (failed)
          return;
        try {
          task(i);
        } catch (...) {
          if (!failed.exchange(true))
            failure = std::current_exception();
        }
      }
    });
  for (auto &t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

enum class CurveMode {
  Clamp, ///< solved runs contribute 0 after their solve iteration
  Drop,  ///< mean over runs still unsolved at each iteration
};

struct CompareInstance {
  std::string label;
  std::shared_ptr<const CnfFormula> formula;
};

struct CompareSpec {
  std::string name = "compare";
  std::vector<CompareInstance> instances;
  std::vector<Policy> policies;
  std::map<Policy, SolverConfig> configs; ///< per-policy; seeds are overwritten per run
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  CurveMode curve = CurveMode::Clamp;
  std::filesystem::path outDir;

  const SolverConfig &config(Policy p) const {
    auto it = configs.find(p);
    if (it == configs.end())
      throw std::invalid_argument(std::string("no configuration for policy ") + toString(p));
    return it->second;
  }

  void validate() const {
    if (policies.empty())
      throw std::invalid_argument("compare spec needs at least one policy");
    if (instances.empty())
      throw std::invalid_argument("compare spec needs at least one instance");
    if (repetitions < 1)
      throw std::invalid_argument("compare spec needs repetitions >= 1");
    for (Policy p : policies)
      config(p).validate();
  }
};

/// Seed of run (instance, repetition); shared by all policies so they face
/// the same random initial assignments.
inline std::uint64_t runSeed(std::uint64_t base, std::size_t instance, std::size_t rep) {
  return deriveSeed(deriveSeed(base, instance), rep);
}

struct RunRecord {
  std::size_t instance = 0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> solvedAt;
  std::size_t flips = 0;
};

struct PolicyResult {
  Policy policy{};
  std::vector<RunRecord> runs;
  std::vector<double> meanUnsat; ///< NaN where undefined (drop mode, all solved)
  double medianItersToSolve = std::numeric_limits<double>::infinity();
  std::size_t solved = 0;

  double solvedFraction() const { return runs.empty() ? 0.0 : double(solved) / double(runs.size()); }
};

struct CompareReport {
  std::string name;
  std::size_t horizon = 0; ///< curve length, identical for all policies
  std::vector<PolicyResult> policies;

  const PolicyResult *find(Policy p) const {
    for (const auto &r : policies)
      if (r.policy == p)
        return &r;
    return nullptr;
  }

  /// median(baseline) / median(policy); nullopt unless both are finite.
  std::optional<double> speedup(Policy policy, Policy baseline = Policy::WalkSat) const {
    const auto *a = find(policy), *b = find(baseline);
    if (!a || !b || !std::isfinite(a->medianItersToSolve) ||
        !std::isfinite(b->medianItersToSolve) || a->medianItersToSolve <= 0)
      return std::nullopt;
    return b->medianItersToSolve / a->medianItersToSolve;
  }
};

/// Median with +infinity for unsolved runs; the mean of the two middle
/// values for even counts.
inline double medianWithInfinity(std::vector<double> xs) {
  if (xs.empty())
    return std::numeric_limits<double>::infinity();
  std::sort(xs.begin(), xs.end());
  std::size_t mid = xs.size() / 2;
  if (xs.size() % 2)
    return xs[mid];
  return (xs[mid - 1] + xs[mid]) / 2;
}

/// Runs every (policy, instance, repetition) and aggregates the unsat curves.
/// Curve entry t - 1 is the unsat count after iteration t, for t = 1..H with
/// H the largest T among the policies. A solved run counts 0 from its solve
/// iteration on (clamp) or leaves the average (drop); an unsolved run holds
/// its last value past its own T.
inline CompareReport compareSolvers(const CompareSpec &spec) {
  spec.validate();
  const std::size_t P = spec.policies.size(), I = spec.instances.size(),
                    R = spec.repetitions;
  CompareReport rep;
  rep.name = spec.name;
  for (Policy p : spec.policies)
    rep.horizon = std::max(rep.horizon, spec.config(p).maxIters);
  const std::size_t H = rep.horizon;

  // Integer sums are exact in double, so accumulation order cannot change
  // the result and parallel runs stay bit-identical to serial ones.
  std::vector<std::vector<double>> sum(P, std::vector<double>(H, 0.0));
  std::vector<std::vector<std::uint32_t>> active(P, std::vector<std::uint32_t>(H, 0));
  std::vector<std::mutex> locks(P);
  std::vector<RunRecord> records(P * I * R);

  parallelFor(records.size(), workerCount(), [&](std::size_t t) {
    std::size_t p = t / (I * R), i = (t / R) % I, r = t % R;
    SolverConfig cfg = spec.config(spec.policies[p]);
    cfg.seed = runSeed(spec.seed, i, r);
    cfg.recordTrace = false;
    auto res = runLocalSearch(*spec.instances[i].formula, cfg, spec.policies[p]);
    records[t] = {i, r, cfg.seed, res.trace.solvedAt, res.trace.numFlips};
    const auto &curve = res.trace.unsat; // curve[k]: unsat after k iterations
    std::lock_guard<std::mutex> guard(locks[p]);
    for (std::size_t k = 1; k <= H; ++k) {
      if (res.trace.solvedAt && k >= *res.trace.solvedAt) {
        if (spec.curve == CurveMode::Clamp)
          ++active[p][k - 1];
        continue;
      }
      sum[p][k - 1] += curve[std::min(k, curve.size() - 1)];
      ++active[p][k - 1];
    }
  });

  for (std::size_t p = 0; p < P; ++p) {
    PolicyResult pr;
    pr.policy = spec.policies[p];
    std::vector<double> iters;
    for (std::size_t k = p * I * R; k < (p + 1) * I * R; ++k) {
      const auto &rec = records[k];
      if (rec.solvedAt) {
        ++pr.solved;
        iters.push_back(double(*rec.solvedAt));
      } else {
        iters.push_back(std::numeric_limits<double>::infinity());
      }
      pr.runs.push_back(rec);
    }
    pr.meanUnsat.resize(H);
    for (std::size_t k = 0; k < H; ++k)
      pr.meanUnsat[k] = active[p][k] ? sum[p][k] / double(active[p][k])
                                     : std::numeric_limits<double>::quiet_NaN();
    pr.medianItersToSolve = medianWithInfinity(std::move(iters));
    rep.policies.push_back(std::move(pr));
  }
  return rep;
}

//------------------------------------------------------------------------------
// Compare spec file
//------------------------------------------------------------------------------
//
//   # comment
//   name       fig10
//   random     N C COUNT SEED_BASE     R(m, n) instances, m = round(C * N)
//   planted    N C COUNT SEED_BASE
//   manifest   SPARSE|DENSE|PLANTED [CAP]
//   cnf        PATH                    repeatable
//   policies   walksat walksatpp support01 textbook
//   init       maj|random              all policies
//   T          N                       all policies; `textbook:T 500` for one
//   p          0.1
//   greedy     least_support|break_count
//   support1_pool unsat|all
//   flips      PATH                    textbook flip distribution table
//   repetitions R
//   seed       S
//   curve      clamp|drop
//   out        DIR
//
// Relative paths resolve against the spec file's directory.

inline CompareSpec readCompareSpec(std::istream &in, const std::filesystem::path &baseDir = {}) {
  CompareSpec spec;
  struct Setting {
    std::string key, value;
    std::optional<Policy> only;
    std::size_t line;
  };
  std::vector<Setting> settings;
  std::string line;
  std::size_t lineNo = 0;
  auto resolve = [&](const std::string &p) {
    std::filesystem::path path(p);
    return path.is_absolute() || baseDir.empty() ? path : baseDir / path;
  };
  auto addGenerated = [&](Distribution dist, const ManifestEntry &e, const std::string &tag) {
    for (std::size_t i = 0; i < e.count; ++i) {
      auto inst = generateInstance(dist, e, i);
      spec.instances.push_back(
          {instanceFileStem(tag, e, i),
           std::make_shared<const CnfFormula>(std::move(inst.formula))});
    }
  };

  while (std::getline(in, line)) {
    ++lineNo;
    auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key))
      continue;
    std::vector<std::string> args;
    for (std::string a; ls >> a;)
      args.push_back(a);
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (args.size() < lo || args.size() > hi)
        throw ParseError("wrong number of arguments for '" + key + "'", lineNo);
    };
    try {
      if (key == "name") {
        need(1, 1);
        spec.name = args[0];
      } else if (key == "random" || key == "planted") {
        need(4, 4);
        ManifestEntry e{std::stoul(args[0]), std::stod(args[1]), std::stoul(args[2]),
                        std::stoull(args[3])};
        DatasetManifest single{key, {e}};
        validateManifest(single);
        addGenerated(key == "planted" ? Distribution::Planted : Distribution::Random, e, key);
      } else if (key == "manifest") {
        need(1, 2);
        auto mf = args.size() == 2 ? buildManifest(args[0], std::stoul(args[1]))
                                   : buildManifest(args[0]);
        for (const auto &e : mf.entries)
          addGenerated(mf.distribution(), e, mf.name);
      } else if (key == "cnf") {
        need(1, 1);
        std::ifstream f(resolve(args[0]));
        if (!f)
          throw ParseError("cannot open CNF file '" + args[0] + "'", lineNo);
        spec.instances.push_back(
            {args[0], std::make_shared<const CnfFormula>(parseDimacs(f))});
      } else if (key == "policies") {
        need(1, 4);
        spec.policies.clear();
        for (const auto &a : args)
          spec.policies.push_back(parsePolicy(a));
      } else if (key == "repetitions") {
        need(1, 1);
        spec.repetitions = std::stoul(args[0]);
      } else if (key == "seed") {
        need(1, 1);
        spec.seed = std::stoull(args[0]);
      } else if (key == "curve") {
        need(1, 1);
        if (args[0] == "clamp")
          spec.curve = CurveMode::Clamp;
        else if (args[0] == "drop")
          spec.curve = CurveMode::Drop;
        else
          throw ParseError("curve must be clamp or drop", lineNo);
      } else if (key == "out") {
        need(1, 1);
        spec.outDir = resolve(args[0]);
      } else {
        std::optional<Policy> only;
        std::string bare = key;
        if (auto colon = key.find(':'); colon != std::string::npos) {
          only = parsePolicy(key.substr(0, colon));
          bare = key.substr(colon + 1);
        }
        if (bare != "init" && bare != "T" && bare != "p" && bare != "greedy" &&
            bare != "support1_pool" && bare != "flips")
          throw ParseError("unknown key '" + key + "'", lineNo);
        need(1, 1);
        settings.push_back({bare, bare == "flips" ? resolve(args[0]).string() : args[0],
                            only, lineNo});
      }
    } catch (const ParseError &) {
      throw;
    } catch (const std::exception &e) {
      throw ParseError(e.what(), lineNo);
    }
  }

  for (Policy p : spec.policies) {
    SolverConfig cfg = SolverConfig::defaultsFor(p);
    for (const auto &s : settings) {
      if (s.only && *s.only != p)
        continue;
      try {
        if (s.key == "init")
          cfg.init = parseInitMode(s.value);
        else if (s.key == "T")
          cfg.maxIters = std::stoul(s.value);
        else if (s.key == "p")
          cfg.noise = std::stod(s.value);
        else if (s.key == "greedy") {
          if (s.value == "least_support")
            cfg.greedy = Greedy::LeastSupport;
          else if (s.value == "break_count")
            cfg.greedy = Greedy::BreakCount;
          else
            throw std::invalid_argument("greedy must be least_support or break_count");
        } else if (s.key == "support1_pool") {
          if (s.value == "unsat")
            cfg.support1Pool = Support1Pool::UnsatClauses;
          else if (s.value == "all")
            cfg.support1Pool = Support1Pool::All;
          else
            throw std::invalid_argument("support1_pool must be unsat or all");
        } else if (s.key == "flips") {
          std::ifstream f(s.value);
          if (!f)
            throw std::invalid_argument("cannot open flip distribution '" + s.value + "'");
          cfg.flips = readFlipDistribution(f);
        }
      } catch (const ParseError &) {
        throw;
      } catch (const std::exception &e) {
        throw ParseError(e.what(), s.line);
      }
    }
    if (p == Policy::Textbook)
      cfg.init = InitMode::Maj;
    spec.configs[p] = cfg;
  }
  spec.validate();
  return spec;
}

//------------------------------------------------------------------------------
// Output
//------------------------------------------------------------------------------

inline std::string formatNumber(double x) {
  if (std::isnan(x))
    return "";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
  return os.str();
}

/// Convergence CSV: iter,policy,mean_unsat with iter = 1..T. Values print with max_digits10
/// so they parse back exactly; undefined points leave mean_unsat empty.
inline void writeConvergenceCsv(std::ostream &out, const CompareReport &rep) {
  out << "iter,policy,mean_unsat\n";
  for (const auto &pr : rep.policies)
    for (std::size_t it = 0; it < pr.meanUnsat.size(); ++it)
      out << it + 1 << ',' << toString(pr.policy) << ',' << formatNumber(pr.meanUnsat[it])
          << '\n';
}

inline void writeSummaryCsv(std::ostream &out, const CompareReport &rep) {
  out << "policy,runs,solved,median_iters,speedup_vs_walksat\n";
  for (const auto &pr : rep.policies) {
    auto s = rep.speedup(pr.policy);
    out << toString(pr.policy) << ',' << pr.runs.size() << ',' << pr.solved << ','
        << formatNumber(pr.medianItersToSolve) << ',' << (s ? formatNumber(*s) : "") << '\n';
  }
}

inline void writeRunsCsv(std::ostream &out, const CompareReport &rep,
                         const CompareSpec &spec) {
  out << "policy,instance,repetition,seed,solved_at,flips\n";
  for (const auto &pr : rep.policies)
    for (const auto &r : pr.runs)
      out << toString(pr.policy) << ',' << spec.instances[r.instance].label << ','
          << r.repetition << ',' << r.seed << ','
          << (r.solvedAt ? std::to_string(*r.solvedAt) : "") << ',' << r.flips << '\n';
}

/// Writes <name>.csv, <name>.summary.csv and <name>.runs.csv into dir.
inline void writeCompareResults(const CompareReport &rep, const CompareSpec &spec,
                                const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string &file) {
    std::ofstream out(dir / file);
    if (!out)
      throw std::runtime_error("cannot write " + (dir / file).string());
    return out;
  };
  {
    auto out = open(rep.name + ".csv");
    writeConvergenceCsv(out, rep);
  }
  {
    auto out = open(rep.name + ".summary.csv");
    writeSummaryCsv(out, rep);
  }
  {
    auto out = open(rep.name + ".runs.csv");
    writeRunsCsv(out, rep, spec);
  }
}

struct ConvergenceTable {
  std::vector<std::string> policies;              // first-appearance order
  std::map<std::string, std::vector<double>> curves; // NaN for empty cells
};

inline ConvergenceTable readConvergenceCsv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != "iter,policy,mean_unsat")
    throw FormatError("not a convergence CSV (expected header iter,policy,mean_unsat)");
  ConvergenceTable table;
  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty())
      continue;
    auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ParseError("convergence row needs 3 fields", lineNo);
    std::size_t iter = std::stoul(line.substr(0, c1));
    std::string policy = line.substr(c1 + 1, c2 - c1 - 1);
    std::string value = line.substr(c2 + 1);
    auto [it, inserted] = table.curves.try_emplace(policy);
    if (inserted)
      table.policies.push_back(policy);
    if (iter != it->second.size() + 1)
      throw ParseError("convergence rows must be consecutive per policy", lineNo);
    it->second.push_back(value.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : std::stod(value));
  }
  return table;
}

/// Line plot of mean unsat count against iteration, one polyline per policy.
/// Long curves are thinned to at most 2000 points.
inline std::string renderSvg(const ConvergenceTable &table, const std::string &title) {
  const double W = 800, H = 500, ml = 70, mr = 140, mt = 40, mb = 50;
  std::size_t len = 0;
  double ymax = 0;
  for (const auto &[_, c] : table.curves) {
    len = std::max(len, c.size());
    for (double y : c)
      if (std::isfinite(y))
        ymax = std::max(ymax, y);
  }
  if (ymax <= 0)
    ymax = 1;
  const double xmax = len > 0 ? double(len) : 1;
  auto px = [&](double x) { return ml + (W - ml - mr) * x / xmax; };
  auto py = [&](double y) { return H - mb - (H - mt - mb) * y / ymax; };
  static const char *colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};

  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
    << "</text>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << px(xmax) << "\" y2=\""
    << py(0) << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << ml << "\" y2=\"" << py(ymax)
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double xv = xmax * k / 4, yv = ymax * k / 4;
    s << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">"
      << std::llround(xv) << "</text>\n";
    s << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
      << std::setprecision(1) << yv << std::setprecision(2) << "</text>\n";
  }
  s << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
    << "\" text-anchor=\"middle\">iteration</text>\n";
  s << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" transform=\"rotate(-90 16 "
    << (mt + H - mb) / 2 << ")\" text-anchor=\"middle\">mean unsat clauses</text>\n";

  std::size_t idx = 0;
  for (const auto &name : table.policies) {
    const auto &c = table.curves.at(name);
    const char *color = colors[idx % 5];
    std::size_t stride = std::max<std::size_t>(1, c.size() / 2000);
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.size(); i += stride)
      if (std::isfinite(c[i]))
        s << px(double(i + 1)) << ',' << py(c[i]) << ' ';
    if (!c.empty() && std::isfinite(c.back()))
      s << px(double(c.size())) << ',' << py(c.back());
    s << "\"/>\n";
    double ly = mt + 20 + 18 * double(idx);
    s << "<line x1=\"" << W - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 30
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << W - mr + 36 << "\" y=\"" << ly + 4 << "\">" << name << "</text>\n";
    ++idx;
  }
  s << "</svg>\n";
  return s.str();
}

/// For every convergence CSV in dir, writes a sibling .svg. Returns the SVG
/// paths; throws when the directory is missing or holds no convergence CSV.
inline std::vector<std::filesystem::path> reportDirectory(const std::filesystem::path &dir) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("results directory '" + dir.string() + "' does not exist");
  std::vector<std::filesystem::path> csvs;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    const auto &p = entry.path();
    if (p.extension() != ".csv")
      continue;
    std::ifstream in(p);
    std::string header;
    if (std::getline(in, header) && header == "iter,policy,mean_unsat")
      csvs.push_back(p);
  }
  if (csvs.empty())
    throw std::runtime_error("no comparison results (iter,policy,mean_unsat CSV) in '" +
                             dir.string() + "'");
  std::sort(csvs.begin(), csvs.end());
  std::vector<std::filesystem::path> svgs;
  for (const auto &csv : csvs) {
    std::ifstream in(csv);
    auto table = readConvergenceCsv(in);
    auto svgPath = csv;
    svgPath.replace_extension(".svg");
    std::ofstream out(svgPath);
    out << renderSvg(table, csv.stem().string());
    if (!out)
      throw std::runtime_error("cannot write " + svgPath.string());
    svgs.push_back(svgPath);
  }
  return svgs;
}

} // namespace satlab

#endif // SATLAB_BENCH_HPP
