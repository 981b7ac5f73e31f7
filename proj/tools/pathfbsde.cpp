// pathfbsde: simulate, solve, sweep and fit from the command line.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathfbsde/coefficients.hpp"
#include "pathfbsde/errors.hpp"
#include "pathfbsde/euler.hpp"
#include "pathfbsde/parallel.hpp"
#include "pathfbsde/path_json.hpp"
#include "pathfbsde/picard.hpp"
#include "pathfbsde/sweep.hpp"

namespace pf = pathfbsde;
using nlohmann::json;

namespace {

struct ProblemArgs {
  std::string name;
  std::vector<std::string> params;  // k=v
  std::string historyFile;
};

void addProblemArgs(CLI::App* cmd, ProblemArgs& args) {
  cmd->add_option("--problem", args.name, "Zoo problem name")->required();
  cmd->add_option("--param", args.params, "Problem parameter override k=v (repeatable)");
  cmd->add_option("--history", args.historyFile, "Path JSON; its breakpoints become the conditioning history");
}

pf::ProblemParams parseParams(const std::vector<std::string>& items) {
  pf::ProblemParams out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--param expects k=v, got '" + item + "'");
    const std::string value = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw std::invalid_argument("--param value is not a number: " + item);
    out[item.substr(0, eq)] = v;
  }
  return out;
}

struct Setup {
  pf::Problem problem;
  pf::DiscretePath history;
};

Setup load(const ProblemArgs& args) {
  pf::Problem problem = pf::problemZoo(args.name, parseParams(args.params));
  const std::size_t d = problem.coefficients.dims.state;
  pf::DiscretePath history =
      args.historyFile.empty() ? pf::DiscretePath::constant(d, 0.0) : pf::loadPath(args.historyFile).asHistory();
  if (history.dim() != d) throw std::invalid_argument("history dimension does not match the problem");
  if (!(history.horizon() < problem.horizon)) throw std::invalid_argument("history reaches the horizon T");
  return {std::move(problem), std::move(history)};
}

json traceJson(const pf::TracePoint& p) {
  return {{"m", p.iteration}, {"y0", p.y0},     {"y0_stderr", p.y0StdError},
          {"z0", p.z0},       {"z0_stderr", p.z0StdError}, {"wall_ms", p.wallMs}};
}

void writeCsvNumber(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

int runSimulate(const ProblemArgs& args, std::size_t n, std::size_t samples, std::uint64_t seed, bool summary) {
  const Setup s = load(args);
  const pf::TimeGrid grid = pf::TimeGrid::uniform(s.history.horizon(), s.problem.horizon, n);
  const std::size_t d = s.problem.coefficients.dims.state;
  std::ostream& out = std::cout;
  if (summary) {
    out << "t";
    for (std::size_t r = 0; r < d; ++r) out << ",mean_" << r << ",var_" << r;
    out << '\n';
    for (const auto& node : pf::summarize(s.problem.coefficients, s.history, grid, samples, seed)) {
      writeCsvNumber(out, node.time);
      for (std::size_t r = 0; r < d; ++r) {
        out << ',';
        writeCsvNumber(out, node.mean[r]);
        out << ',';
        writeCsvNumber(out, node.variance[r]);
      }
      out << '\n';
    }
    return 0;
  }
  out << "sample,t";
  for (std::size_t r = 0; r < d; ++r) out << ",x" << r;
  out << '\n';
  const pf::SampleKey root(seed);
  for (std::size_t p = 0; p < samples; ++p) {
    const auto traj = pf::simulate(s.problem.coefficients, s.history, grid, root.child(p));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << p << ',';
      writeCsvNumber(out, grid[i]);
      for (double x : traj.path.nodeValue(i)) {
        out << ',';
        writeCsvNumber(out, x);
      }
      out << '\n';
    }
  }
  return 0;
}

struct SolveArgs {
  std::size_t n = 64;
  std::size_t m = 4;
  std::size_t samples = 10000;
  std::string estimator = "regression";
  std::size_t inner = 64;
  std::vector<std::string> features;
  double ridge = 0.0;
  std::uint64_t seed = 0;
  bool implicit = false;
  bool freshPaths = false;
  bool antithetic = false;
  std::string implicitTarget = "multi-step";
};

int runSolve(const ProblemArgs& args, const SolveArgs& a) {
  const Setup s = load(args);
  pf::SchemeConfig config;
  config.grid = pf::TimeGrid::uniform(s.history.horizon(), s.problem.horizon, a.n);
  config.iterations = a.m;
  config.samples = a.samples;
  config.seed = a.seed;
  config.freshPaths = a.freshPaths;
  config.antithetic = a.antithetic;
  config.estimator.kind = pf::parseEstimator(a.estimator);
  config.estimator.innerSamples = a.inner;
  config.estimator.ridge = a.ridge;
  if (!a.features.empty()) config.estimator.features = pf::FeatureConfig::parse(a.features);
  if (a.implicitTarget == "one-step") {
    config.estimator.implicitTarget = pf::ImplicitTarget::kOneStep;
  } else if (a.implicitTarget != "multi-step") {
    throw std::invalid_argument("--implicit-target must be multi-step or one-step");
  }

  const pf::SolveResult r = a.implicit ? pf::solveImplicit(s.problem.coefficients, s.history, config)
                                       : pf::solvePicard(s.problem.coefficients, s.history, config);
  json trace = json::array();
  for (const auto& p : r.trace) trace.push_back(traceJson(p));
  json params = json::object();
  for (const auto& [k, v] : s.problem.params) params[k] = v;
  const json out = {
      {"Y0", r.y0},
      {"Y0_stderr", r.y0StdError},
      {"Z0", r.z0},
      {"Z0_stderr", r.z0StdError},
      {"trace", trace},
      {"wall_ms", r.wallMs},
      {"config",
       {{"problem", args.name},
        {"params", params},
        {"method", r.method},
        {"t0", config.grid.start()},
        {"T", config.grid.horizon()},
        {"n", a.n},
        {"m", a.m},
        {"N", a.samples},
        {"estimator",
         {{"kind", a.estimator},
          {"features", config.estimator.features.names()},
          {"ridge", a.ridge},
          {"ninner", a.inner},
          {"implicit_target", a.implicitTarget}}},
        {"seed", a.seed},
        {"fresh_paths", a.freshPaths},
        {"antithetic", a.antithetic},
        {"threads", pf::threadCount()}}}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int runSweepCommand(const std::string& specFile, const std::string& outDir) {
  std::ifstream in(specFile);
  if (!in) throw std::invalid_argument("cannot open spec '" + specFile + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const std::string baseDir = std::filesystem::path(specFile).parent_path().string();
  const pf::SweepSpec spec = pf::SweepSpec::fromJson(text.str(), baseDir.empty() ? "." : baseDir);
  const auto records = pf::runSweep(spec);

  std::filesystem::create_directories(outDir);
  std::ofstream csv(std::filesystem::path(outDir) / "records.csv");
  pf::writeRecordsCsv(csv, records);
  std::ofstream manifest(std::filesystem::path(outDir) / "manifest.json");
  manifest << pf::sweepManifest(spec, records) << '\n';

  int failures = 0;
  for (const auto& r : records) {
    if (r.failed()) {
      ++failures;
      std::cerr << "cell n=" << r.n << " m=" << r.m << " failed: " << r.error << '\n';
    }
  }
  std::cerr << records.size() << " cells, " << failures << " failed; wrote " << outDir << '\n';
  return failures > 0 ? 2 : 0;
}

int runFit(const std::string& recordsFile, const std::string& axis, double noiseFloor) {
  std::ifstream in(recordsFile);
  if (!in) throw std::invalid_argument("cannot open records '" + recordsFile + "'");
  const auto records = pf::readRecordsCsv(in);
  pf::FitOptions options;
  options.noiseFloor = noiseFloor;
  std::cout << pf::fitRate(records, pf::parseRateAxis(axis), options).toJson() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-dependent FBSDE solver and convergence harness"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware default)");

  ProblemArgs simArgs;
  std::size_t simN = 64, simSamples = 10;
  std::uint64_t simSeed = 0;
  bool simSummary = false;
  auto* sim = app.add_subcommand("simulate", "Euler paths of the forward equation as CSV");
  addProblemArgs(sim, simArgs);
  sim->add_option("--n", simN, "Time steps")->check(CLI::PositiveNumber);
  sim->add_option("--samples", simSamples, "Number of paths")->check(CLI::PositiveNumber);
  sim->add_option("--seed", simSeed, "Root seed");
  sim->add_flag("--summary", simSummary, "Per-node mean and variance instead of raw paths");

  ProblemArgs solveArgs;
  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Y0 and Z0 by the Picard scheme (or the implicit scheme)");
  addProblemArgs(solve, solveArgs);
  solve->add_option("--n", sa.n, "Time steps")->check(CLI::PositiveNumber);
  solve->add_option("--m", sa.m, "Picard iterations");
  solve->add_option("--samples", sa.samples, "Outer samples N");
  solve->add_option("--estimator", sa.estimator, "regression or nested")
      ->check(CLI::IsMember({"regression", "nested"}));
  solve->add_option("--ninner", sa.inner, "Inner samples per nested evaluation");
  solve->add_option("--features", sa.features, "Regression features")->delimiter(',');
  solve->add_option("--ridge", sa.ridge, "Ridge penalty");
  solve->add_option("--seed", sa.seed, "Root seed");
  solve->add_flag("--implicit", sa.implicit, "Use the implicit backward scheme");
  solve->add_option("--implicit-target", sa.implicitTarget, "multi-step or one-step");
  solve->add_flag("--fresh-paths", sa.freshPaths, "New outer paths for every Picard iteration");
  solve->add_flag("--antithetic", sa.antithetic, "Antithetic outer pairs");

  std::string specFile, outDir;
  auto* sweep = app.add_subcommand("sweep", "Run a convergence sweep");
  sweep->add_option("--spec", specFile, "Sweep spec JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", outDir, "Output directory")->required();

  std::string recordsFile, axis = "mesh";
  double noiseFloor = -1.0;
  auto* fit = app.add_subcommand("fit", "Fit a convergence rate to records.csv");
  fit->add_option("--records", recordsFile, "records.csv")->required()->check(CLI::ExistingFile);
  fit->add_option("--axis", axis, "mesh or picard")->check(CLI::IsMember({"mesh", "picard"}));
  fit->add_option("--noise-floor", noiseFloor, "Picard axis: squared-error floor (negative = automatic)");

  CLI11_PARSE(app, argc, argv);
  try {
    pf::setThreadCount(threads);
    if (*sim) return runSimulate(simArgs, simN, simSamples, simSeed, simSummary);
    if (*solve) return runSolve(solveArgs, sa);
    if (*sweep) return runSweepCommand(specFile, outDir);
    if (*fit) return runFit(recordsFile, axis, noiseFloor);
  } catch (const pf::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
