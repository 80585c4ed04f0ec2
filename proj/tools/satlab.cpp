// satlab: command-line front end for generation, local search, exact
// solving, solver comparison and concept analysis.

#include "satlab/satlab.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace satlab;
namespace fs = std::filesystem;

namespace {

CnfFormula loadCnf(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return parseDimacs(in);
}

Assignment loadAssignment(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  return readAssignment(in);
}

/// One assignment line per iteration.
std::vector<Assignment> loadAssignmentSequence(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::vector<Assignment> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream ls(line + "\n");
    out.push_back(readAssignment(ls));
  }
  return out;
}

void printModel(const Assignment &a) {
  std::cout << "v";
  for (std::size_t v = 0; v < a.size(); ++v)
    std::cout << ' ' << (a.values[v] ? "" : "-") << v + 1;
  std::cout << " 0\n";
}

//------------------------------------------------------------------------------

struct GenArgs {
  std::string manifest;
  std::string manifestFile;
  std::string out;
  std::size_t totalCap = 0;
};

int runGen(const GenArgs &args) {
  DatasetManifest mf;
  if (!args.manifestFile.empty()) {
    std::ifstream in(args.manifestFile);
    if (!in)
      throw std::runtime_error("cannot open " + args.manifestFile);
    mf = readManifest(in);
    if (args.totalCap)
      capManifest(mf, args.totalCap);
  } else {
    mf = args.totalCap ? buildManifest(args.manifest, args.totalCap) : buildManifest(args.manifest);
  }
  std::size_t written = materializeManifest(mf, args.out);
  std::cout << "wrote " << written << " " << mf.name << " instances to " << args.out << "\n";
  return 0;
}

struct SolveArgs {
  std::string cnf, policy = "walksat", init, flips, trace, reference, initial;
  std::string greedy = "least_support", support1Pool = "unsat";
  double p = 0.1;
  std::optional<std::size_t> T;
  std::uint64_t seed = 0;
};

int runSolve(const SolveArgs &args) {
  CnfFormula f = loadCnf(args.cnf);
  Policy policy = parsePolicy(args.policy);
  SolverConfig cfg = SolverConfig::defaultsFor(policy);
  cfg.noise = args.p;
  cfg.seed = args.seed;
  if (args.T)
    cfg.maxIters = *args.T;
  if (!args.init.empty())
    cfg.init = parseInitMode(args.init);
  if (!args.initial.empty()) {
    cfg.initial = loadAssignment(args.initial);
    if (args.init.empty())
      cfg.init = InitMode::Given;
  }
  if (!args.reference.empty())
    cfg.reference = loadAssignment(args.reference);
  if (!args.flips.empty()) {
    std::ifstream in(args.flips);
    if (!in)
      throw std::runtime_error("cannot open " + args.flips);
    cfg.flips = readFlipDistribution(in);
  }
  cfg.greedy = args.greedy == "break_count" ? Greedy::BreakCount : Greedy::LeastSupport;
  cfg.support1Pool = args.support1Pool == "all" ? Support1Pool::All : Support1Pool::UnsatClauses;
  cfg.recordTrace = true;

  auto out = policy == Policy::Textbook ? textbookNeuroSat(f, cfg) : runLocalSearch(f, cfg, policy);
  if (!args.trace.empty()) {
    std::ofstream t(args.trace);
    writeTraceCsv(t, out.trace);
  }
  std::cout << "c policy " << toString(policy) << " iterations " << out.trace.size() - 1
            << " flips " << out.trace.numFlips << "\n";
  if (out.result.status == SolveStatus::Sat) {
    std::cout << "c solved at iteration " << *out.trace.solvedAt << "\n";
    std::cout << "s SATISFIABLE\n";
    printModel(out.result.witness);
    return 10;
  }
  std::cout << "c unsat clauses left " << out.trace.unsat.back() << "\n";
  std::cout << "s UNKNOWN\n";
  return 0;
}

int runCompare(const std::string &specPath, const std::string &outOverride) {
  std::ifstream in(specPath);
  if (!in)
    throw std::runtime_error("cannot open " + specPath);
  CompareSpec spec = readCompareSpec(in, fs::path(specPath).parent_path());
  if (!outOverride.empty())
    spec.outDir = outOverride;
  if (spec.outDir.empty())
    spec.outDir = "results";
  auto rep = compareSolvers(spec);
  writeCompareResults(rep, spec, spec.outDir);
  writeSummaryCsv(std::cout, rep);
  std::cout << "results in " << spec.outDir.string() << "\n";
  return 0;
}

int runExact(const std::string &cnf, bool backbone, std::uint64_t budget) {
  CnfFormula f = loadCnf(cnf);
  DpllOptions opt{budget};
  if (!backbone) {
    auto r = dpllSolve(f, opt);
    switch (r.status) {
    case SolveStatus::Sat:
      std::cout << "s SATISFIABLE\n";
      printModel(r.witness);
      return 10;
    case SolveStatus::Unsat:
      std::cout << "s UNSATISFIABLE\n";
      return 20;
    case SolveStatus::BudgetExhausted:
      std::cout << "c node budget exhausted\ns UNKNOWN\n";
      return 0;
    }
  }
  auto bb = backboneExact(f, opt);
  std::cout << "c backbone size " << bb.size() << " of " << f.numVars() << "\n";
  std::cout << "b";
  for (const auto &l : bb)
    std::cout << ' ' << (l.value ? "" : "-") << l.var + 1;
  std::cout << " 0\n";
  return 0;
}

struct EmbedArgs {
  std::string cnf, out;
  std::size_t T = 50, d = 128;
  std::uint64_t seed = 0;
  float scale = 0.1f;
};

int runEmbed(const EmbedArgs &args) {
  CnfFormula f = loadCnf(args.cnf);
  auto w = DetangledWeights::random(Eigen::Index(args.d), args.scale, args.seed);
  Rng rng(deriveSeed(args.seed, 1));
  Eigen::VectorXf lit(Eigen::Index(args.d)), cls(Eigen::Index(args.d));
  for (Eigen::Index i = 0; i < lit.size(); ++i) {
    lit(i) = float(2 * rng.uniform() - 1);
    cls(i) = float(2 * rng.uniform() - 1);
  }
  auto traj = runDetangled(f, w, args.T, EmbeddingInit::tiled(f, lit, cls));
  saveTrajectory(args.out, traj);
  std::cout << "wrote " << args.T << " iterations (" << traj.numLiterals << " x " << traj.dim
            << " literal, " << traj.numClauses << " x " << traj.dim << " clause) to " << args.out
            << "\n";
  return 0;
}

struct AnalyzeArgs {
  std::vector<std::string> emb, cnf, assign;
  std::string stat, dataset = "custom", zones = "SPARSE", out;
  std::size_t sparse = 0;
};

int runAnalyze(const AnalyzeArgs &args) {
  if (args.emb.size() != args.cnf.size())
    throw std::runtime_error("--emb and --cnf must be given the same number of times");
  if (!args.assign.empty() && args.assign.size() != args.emb.size())
    throw std::runtime_error("--assign must be given once per --emb or not at all");
  std::vector<EmbeddingTrajectory> trajs;
  std::vector<CnfFormula> formulas;
  for (std::size_t i = 0; i < args.emb.size(); ++i) {
    trajs.push_back(loadTrajectory(args.emb[i]));
    formulas.push_back(loadCnf(args.cnf[i]));
    if (trajs.back().numLiterals != 2 * formulas.back().numVars() ||
        trajs.back().numClauses != formulas.back().numClauses())
      throw std::runtime_error(args.emb[i] + " does not match " + args.cnf[i]);
  }

  auto litPca = pcaTop2(averagedCovariance(trajs, Entity::Literal));
  auto clsPca = pcaTop2(averagedCovariance(trajs, Entity::Clause));
  auto maybeSparse = [&](const Eigen::VectorXd &pc) {
    return args.sparse ? sparsifyPc(pc, args.sparse) : pc;
  };
  const Eigen::VectorXd lit1 = maybeSparse(litPca.pc1), lit2 = maybeSparse(litPca.pc2),
                        cls1 = maybeSparse(clsPca.pc1);

  auto phisFor = [&](std::size_t i) {
    if (!args.assign.empty())
      return loadAssignmentSequence(args.assign[i]);
    return assignmentsFromTrajectory(trajs[i], lit1);
  };

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  auto column = [&](const std::string &name) -> std::vector<double> & {
    for (auto &r : rows)
      if (r.first == name)
        return r.second;
    rows.emplace_back(name, std::vector<double>{});
    return rows.back().second;
  };

  const std::string &stat = args.stat;
  if (stat == "cov") {
    column("cov_trace_literal").push_back(averagedCovariance(trajs, Entity::Literal).trace());
    column("cov_trace_clause").push_back(averagedCovariance(trajs, Entity::Clause).trace());
  } else if (stat == "pca") {
    column("literal_pc1_explained").push_back(litPca.explained1);
    column("literal_pc2_explained").push_back(litPca.explained2);
    column("clause_pc1_explained").push_back(clsPca.explained1);
    column("clause_pc2_explained").push_back(clsPca.explained2);
  } else if (stat == "contradictions") {
    for (const auto &t : trajs)
      column("contradiction_pct").push_back(contradictionRate(t, lit1));
  } else if (stat == "abiding") {
    for (std::size_t i = 0; i < trajs.size(); ++i)
      if (auto r = conceptAbidingRate(trajs[i], cls1, formulas[i], phisFor(i)))
        column("concept_abiding_pct").push_back(*r);
  } else if (stat == "zones") {
    SupportZoneConfig zones;
    if (args.zones == "SPARSE" || args.zones == "DENSE") {
      zones = SupportZoneConfig::preset(args.zones);
    } else {
      std::ifstream in(args.zones);
      if (!in)
        throw std::runtime_error("cannot open " + args.zones);
      zones = readZoneConfig(in);
    }
    for (int k = 0; k < 4; ++k)
      column("support" + std::to_string(k) + "_in_zone_pct");
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      auto res = supportZoneStats(trajs[i], lit1, formulas[i], phisFor(i), zones);
      for (int k = 0; k < 4; ++k)
        if (res[std::size_t(k)])
          column("support" + std::to_string(k) + "_in_zone_pct").push_back(*res[std::size_t(k)]);
    }
  } else if (stat == "maj") {
    for (std::size_t i = 0; i < trajs.size(); ++i)
      column("maj_distance").push_back(majDistance(phisFor(i).front(), formulas[i]));
  } else if (stat == "appearance") {
    for (const auto *b : kAppearanceBuckets)
      column(std::string("appearance_") + b + "_pct");
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      auto counts = appearanceCounts(formulas[i]);
      auto rep = appearanceRegressionAccuracy(trajs[i].steps.back().literals, lit1, lit2, counts);
      if (rep.degenerate())
        std::cerr << "warning: " << args.emb[i] << ": degenerate appearance cohorts\n";
      for (std::size_t b = 0; b < 4; ++b)
        if (rep.bucketAccuracy[b])
          column(std::string("appearance_") + kAppearanceBuckets[b] + "_pct")
              .push_back(*rep.bucketAccuracy[b]);
    }
  } else {
    throw std::runtime_error("unknown statistic '" + stat + "'");
  }

  std::ofstream file;
  if (!args.out.empty()) {
    file.open(args.out);
    if (!file)
      throw std::runtime_error("cannot write " + args.out);
  }
  std::ostream &out = args.out.empty() ? std::cout : file;
  writeStatCsvHeader(out);
  for (const auto &[name, values] : rows) {
    if (values.empty()) {
      out << args.dataset << ',' << name << ",undefined,\n";
      continue;
    }
    writeStatCsvRow(out, args.dataset, name, summarize(values));
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"satlab: support-aware SAT local search and concept analysis"};
  app.require_subcommand(1);

  GenArgs gen;
  auto *genCmd = app.add_subcommand("gen", "materialize a dataset manifest as DIMACS files");
  auto *manifestOpt = genCmd->add_option("--manifest", gen.manifest, "SPARSE, DENSE or PLANTED")
                          ->check(CLI::IsMember({"SPARSE", "DENSE", "PLANTED"}));
  genCmd->add_option("--manifest-file", gen.manifestFile, "manifest file (name n c count seed_base)")
      ->excludes(manifestOpt)
      ->check(CLI::ExistingFile);
  genCmd->add_option("--out", gen.out, "output directory")->required();
  genCmd->add_option("--total-cap", gen.totalCap, "cap the total instance count");

  SolveArgs solve;
  auto *solveCmd = app.add_subcommand("solve", "run a local-search policy on a DIMACS file");
  solveCmd->add_option("--cnf", solve.cnf)->required()->check(CLI::ExistingFile);
  solveCmd->add_option("--policy", solve.policy)
      ->check(CLI::IsMember({"walksat", "walksatpp", "support01", "textbook"}));
  solveCmd->add_option("--p", solve.p, "noise probability")->check(CLI::Range(0.0, 1.0));
  solveCmd->add_option("--T", solve.T, "maximum iterations");
  solveCmd->add_option("--seed", solve.seed);
  solveCmd->add_option("--init", solve.init)->check(CLI::IsMember({"maj", "random", "given"}));
  solveCmd->add_option("--initial", solve.initial, "initial assignment file (0/1 line)");
  solveCmd->add_option("--flips", solve.flips, "textbook flip distribution table");
  solveCmd->add_option("--greedy", solve.greedy)
      ->check(CLI::IsMember({"least_support", "break_count"}));
  solveCmd->add_option("--support1-pool", solve.support1Pool)->check(CLI::IsMember({"unsat", "all"}));
  solveCmd->add_option("--trace", solve.trace, "write the per-iteration trace CSV");
  solveCmd->add_option("--reference", solve.reference, "assignment for the hamming_ref column");

  std::string specPath, compareOut;
  auto *compareCmd = app.add_subcommand("compare", "compare policies on a set of instances");
  compareCmd->add_option("--spec", specPath)->required()->check(CLI::ExistingFile);
  compareCmd->add_option("--out", compareOut, "override the spec's output directory");

  AnalyzeArgs analyze;
  auto *analyzeCmd = app.add_subcommand("analyze", "concept statistics over EMB1 trajectories");
  analyzeCmd->add_option("--emb", analyze.emb)->required()->check(CLI::ExistingFile);
  analyzeCmd->add_option("--cnf", analyze.cnf)->required()->check(CLI::ExistingFile);
  analyzeCmd->add_option("--stat", analyze.stat)
      ->required()
      ->check(CLI::IsMember({"cov", "pca", "contradictions", "abiding", "zones", "maj", "appearance"}));
  analyzeCmd->add_option("--assign", analyze.assign, "per-iteration assignment sidecar");
  analyzeCmd->add_option("--sparse", analyze.sparse, "keep only the top-k PC entries");
  analyzeCmd->add_option("--zones", analyze.zones, "SPARSE, DENSE or a zone file");
  analyzeCmd->add_option("--dataset", analyze.dataset, "dataset label for the CSV");
  analyzeCmd->add_option("--out", analyze.out, "CSV output path (default stdout)");

  std::string exactCnf;
  bool backbone = false;
  std::uint64_t budget = 0;
  auto *exactCmd = app.add_subcommand("exact", "complete DPLL solve or exact backbone");
  exactCmd->add_option("--cnf", exactCnf)->required()->check(CLI::ExistingFile);
  exactCmd->add_flag("--backbone", backbone);
  exactCmd->add_option("--budget", budget, "DPLL node budget (0 = unlimited)");

  std::string reportDir;
  auto *reportCmd = app.add_subcommand("report", "render SVG plots for comparison CSVs");
  reportCmd->add_option("--dir", reportDir)->required();

  EmbedArgs embed;
  auto *embedCmd =
      app.add_subcommand("embed", "run the detangled forward pass with random weights");
  embedCmd->add_option("--cnf", embed.cnf)->required()->check(CLI::ExistingFile);
  embedCmd->add_option("--out", embed.out)->required();
  embedCmd->add_option("--T", embed.T);
  embedCmd->add_option("--d", embed.d);
  embedCmd->add_option("--seed", embed.seed);
  embedCmd->add_option("--scale", embed.scale, "weight entries uniform in [-scale, scale]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*genCmd) {
      if (gen.manifest.empty() && gen.manifestFile.empty())
        throw std::runtime_error("gen needs --manifest or --manifest-file");
      return runGen(gen);
    }
    if (*solveCmd)
      return runSolve(solve);
    if (*compareCmd)
      return runCompare(specPath, compareOut);
    if (*analyzeCmd)
      return runAnalyze(analyze);
    if (*exactCmd)
      return runExact(exactCnf, backbone, budget);
    if (*reportCmd) {
      for (const auto &p : reportDirectory(reportDir))
        std::cout << "wrote " << p.string() << "\n";
      return 0;
    }
    if (*embedCmd)
      return runEmbed(embed);
  } catch (const std::exception &e) {
    std::cerr << "satlab: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
