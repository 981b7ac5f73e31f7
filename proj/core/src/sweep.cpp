#include "pathfbsde/sweep.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pathfbsde/parallel.hpp"
#include "pathfbsde/path_json.hpp"

#ifndef PATHFBSDE_GIT_HASH
#define PATHFBSDE_GIT_HASH "unknown"
#endif

namespace pathfbsde {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string readFile(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open '" + file + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve(const std::string& file, const std::string& baseDir) {
  const std::filesystem::path p(file);
  return p.is_absolute() ? file : (std::filesystem::path(baseDir) / p).string();
}

// Everything that is fixed across the cells of a sweep.
struct SweepContext {
  Problem problem;
  DiscretePath history;
  double start;
};

SweepContext makeContext(const SweepSpec& spec) {
  spec.validate();
  Problem problem = problemZoo(spec.problem, spec.params);
  DiscretePath history = spec.history ? *spec.history : DiscretePath::constant(problem.coefficients.dims.state, 0.0);
  if (history.dim() != problem.coefficients.dims.state) {
    throw std::invalid_argument("history dimension does not match problem '" + spec.problem + "'");
  }
  const double start = history.horizon();
  if (!(start < problem.horizon)) throw std::invalid_argument("history reaches the problem horizon");
  if (spec.reference == ReferenceMode::kClosedForm && !problem.reference.hasValue()) {
    throw std::invalid_argument("problem '" + spec.problem + "' has no closed-form reference");
  }
  return {std::move(problem), std::move(history), start};
}

SchemeConfig configFor(const SweepSpec& spec, const SweepContext& ctx, std::size_t n, std::size_t m) {
  SchemeConfig c;
  c.grid = TimeGrid::uniform(ctx.start, ctx.problem.horizon, n);
  c.iterations = m;
  c.samples = spec.samples;
  c.estimator = spec.estimator;
  c.seed = spec.seed;
  c.freshPaths = spec.freshPaths;
  c.antithetic = spec.antithetic;
  return c;
}

double oracleValue(const SweepSpec& spec) {
  const json j = json::parse(readFile(spec.oracleFile));
  if (!j.contains("y0") || !j["y0"].is_number()) {
    throw std::invalid_argument("oracle file '" + spec.oracleFile + "' needs a numeric \"y0\"");
  }
  return j["y0"].get<double>();
}

double referenceFor(const SweepSpec& spec, const SweepContext& ctx, std::size_t n) {
  switch (spec.reference) {
    case ReferenceMode::kClosedForm: return ctx.problem.reference.valueAt(ctx.start, ctx.history);
    case ReferenceMode::kOracleFile: return oracleValue(spec);
    case ReferenceMode::kImplicit:
      return solveImplicit(ctx.problem.coefficients, ctx.history, configFor(spec, ctx, n, 0)).y0;
  }
  return kNaN;
}

ConvergenceRecord blankRecord(const SweepSpec& spec, const TimeGrid& grid, std::size_t m) {
  ConvergenceRecord r;
  r.problem = spec.problem;
  r.n = grid.steps();
  r.mesh = grid.mesh();
  r.m = m;
  r.samples = spec.samples;
  r.estimator = toString(spec.estimator.kind);
  r.seed = spec.seed;
  return r;
}

void fillResult(ConvergenceRecord& r, const TracePoint& point, double reference, double wallMs) {
  r.y0 = point.y0;
  r.y0StdError = point.y0StdError;
  r.z0 = point.z0;
  r.reference = reference;
  r.sqErr = (point.y0 - reference) * (point.y0 - reference);
  r.wallMs = wallMs;
}

void markFailed(ConvergenceRecord& r, std::size_t noise, const std::string& what) {
  r.y0 = r.y0StdError = r.reference = r.sqErr = kNaN;
  r.z0.assign(noise, kNaN);
  r.error = what.empty() ? "unknown error" : what;
}

// All cells with step count n.
std::vector<ConvergenceRecord> runColumn(const SweepSpec& spec, const SweepContext& ctx, std::size_t n) {
  const std::size_t l = ctx.problem.coefficients.dims.noise;
  const std::size_t maxM = *std::max_element(spec.iterations.begin(), spec.iterations.end());
  const SchemeConfig config = configFor(spec, ctx, n, maxM);
  std::vector<ConvergenceRecord> out;
  for (std::size_t m : spec.iterations) out.push_back(blankRecord(spec, config.grid, m));
  try {
    const double reference = referenceFor(spec, ctx, n);
    if (spec.implicit) {
      const SolveResult r = solveImplicit(ctx.problem.coefficients, ctx.history, config);
      for (auto& rec : out) fillResult(rec, r.trace.back(), reference, r.wallMs);
    } else {
      const SolveResult r = solvePicard(ctx.problem.coefficients, ctx.history, config);
      for (auto& rec : out) fillResult(rec, r.trace[rec.m], reference, r.trace[rec.m].wallMs);
    }
  } catch (const std::exception& e) {
    for (auto& rec : out) markFailed(rec, l, e.what());
  }
  return out;
}

json estimatorJson(const EstimatorConfig& e) {
  return {{"kind", toString(e.kind)},
          {"features", e.features.names()},
          {"ridge", e.ridge},
          {"ninner", e.innerSamples},
          {"implicit_target", e.implicitTarget == ImplicitTarget::kMultiStep ? "multi-step" : "one-step"}};
}

json specJson(const SweepSpec& s) {
  json j = {{"problem", s.problem},
            {"params", json::object()},
            {"n", s.steps},
            {"m", s.iterations},
            {"N", s.samples},
            {"estimator", estimatorJson(s.estimator)},
            {"seed", s.seed},
            {"reference", toString(s.reference)},
            {"implicit", s.implicit},
            {"fresh_paths", s.freshPaths},
            {"antithetic", s.antithetic}};
  for (const auto& [k, v] : s.params) j["params"][k] = v;
  if (!s.oracleFile.empty()) j["oracle_file"] = s.oracleFile;
  if (s.history) j["history"] = json::parse(toJson(*s.history));
  return j;
}

std::string formatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parseNumber(const std::string& s, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::invalid_argument(std::string("bad value '") + s + "' in column " + column);
  }
  return v;
}

std::uint64_t parseUnsigned(const std::string& s, const char* column) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) {
    throw std::invalid_argument(std::string("bad integer '") + s + "' in column " + column);
  }
  return v;
}

std::string utcNow() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const char* toString(ReferenceMode mode) noexcept {
  switch (mode) {
    case ReferenceMode::kClosedForm: return "closed-form";
    case ReferenceMode::kImplicit: return "implicit";
    case ReferenceMode::kOracleFile: return "oracle-file";
  }
  return "?";
}

ReferenceMode parseReferenceMode(const std::string& name) {
  if (name == "closed-form") return ReferenceMode::kClosedForm;
  if (name == "implicit") return ReferenceMode::kImplicit;
  if (name == "oracle-file") return ReferenceMode::kOracleFile;
  throw std::invalid_argument("unknown reference mode '" + name + "' (closed-form, implicit, oracle-file)");
}

void SweepSpec::validate() const {
  if (problem.empty()) throw std::invalid_argument("sweep spec needs a problem");
  if (steps.empty() || iterations.empty()) throw std::invalid_argument("sweep spec needs non-empty n and m lists");
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k] == 0) throw std::invalid_argument("n values must be positive");
    if (k > 0 && steps[k] <= steps[k - 1]) throw std::invalid_argument("n values must be distinct and sorted");
  }
  if (samples < 2) throw std::invalid_argument("N must be at least 2");
  if (reference == ReferenceMode::kOracleFile && oracleFile.empty()) {
    throw std::invalid_argument("reference oracle-file needs \"oracle_file\"");
  }
}

SweepSpec SweepSpec::fromJson(const std::string& text, const std::string& baseDir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("sweep spec is not valid JSON: ") + e.what());
  }
  static const char* const known[] = {"problem", "params", "n", "m", "N", "estimator", "seed", "reference",
                                      "oracle_file", "history", "implicit", "fresh_paths", "antithetic"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw std::invalid_argument("unknown sweep spec key '" + key + "'");
    }
  }
  SweepSpec s;
  try {
    s.problem = j.at("problem").get<std::string>();
    s.steps = j.at("n").get<std::vector<std::size_t>>();
    s.iterations = j.at("m").get<std::vector<std::size_t>>();
    s.samples = j.at("N").get<std::size_t>();
    if (j.contains("params")) {
      for (const auto& [k, v] : j["params"].items()) s.params[k] = v.get<double>();
    }
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("reference")) s.reference = parseReferenceMode(j["reference"].get<std::string>());
    if (j.contains("oracle_file")) s.oracleFile = resolve(j["oracle_file"].get<std::string>(), baseDir);
    if (j.contains("history")) {
      const json& h = j["history"];
      s.history = h.is_string() ? loadPath(resolve(h.get<std::string>(), baseDir)) : pathFromJson(h.dump());
    }
    if (j.contains("implicit")) s.implicit = j["implicit"].get<bool>();
    if (j.contains("fresh_paths")) s.freshPaths = j["fresh_paths"].get<bool>();
    if (j.contains("antithetic")) s.antithetic = j["antithetic"].get<bool>();
    if (j.contains("estimator")) {
      const json& e = j["estimator"];
      if (e.contains("kind")) s.estimator.kind = parseEstimator(e["kind"].get<std::string>());
      if (e.contains("features")) {
        const auto names = e["features"].get<std::vector<std::string>>();
        s.estimator.features = FeatureConfig::parse(names);
      }
      if (e.contains("ridge")) s.estimator.ridge = e["ridge"].get<double>();
      if (e.contains("ninner")) s.estimator.innerSamples = e["ninner"].get<std::size_t>();
      if (e.contains("implicit_target")) {
        const auto t = e["implicit_target"].get<std::string>();
        if (t == "multi-step") {
          s.estimator.implicitTarget = ImplicitTarget::kMultiStep;
        } else if (t == "one-step") {
          s.estimator.implicitTarget = ImplicitTarget::kOneStep;
        } else {
          throw std::invalid_argument("implicit_target must be multi-step or one-step");
        }
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad sweep spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::string SweepSpec::toJson() const { return specJson(*this).dump(2); }

SchemeConfig cellConfig(const SweepSpec& spec, std::size_t n, std::size_t m) {
  return configFor(spec, makeContext(spec), n, m);
}

ConvergenceRecord runCell(const SweepSpec& spec, std::size_t n, std::size_t m) {
  const SweepContext ctx = makeContext(spec);
  const SchemeConfig config = configFor(spec, ctx, n, m);
  ConvergenceRecord rec = blankRecord(spec, config.grid, m);
  try {
    const double reference = referenceFor(spec, ctx, n);
    const SolveResult r = spec.implicit ? solveImplicit(ctx.problem.coefficients, ctx.history, config)
                                        : solvePicard(ctx.problem.coefficients, ctx.history, config);
    fillResult(rec, r.trace.back(), reference, r.wallMs);
  } catch (const std::exception& e) {
    markFailed(rec, ctx.problem.coefficients.dims.noise, e.what());
  }
  return rec;
}

std::vector<ConvergenceRecord> runSweep(const SweepSpec& spec) {
  const SweepContext ctx = makeContext(spec);
  std::vector<std::vector<ConvergenceRecord>> columns(spec.steps.size());
  auto column = [&](std::size_t k) { columns[k] = runColumn(spec, ctx, spec.steps[k]); };
  // Columns in parallel only when there are enough of them to occupy every
  // worker; otherwise each solver parallelizes internally.
  if (spec.steps.size() >= threadCount()) {
    parallelFor(spec.steps.size(), column);
  } else {
    for (std::size_t k = 0; k < spec.steps.size(); ++k) column(k);
  }
  std::vector<ConvergenceRecord> out;
  for (auto& c : columns) out.insert(out.end(), c.begin(), c.end());
  return out;
}

void writeRecordsCsv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
  std::size_t l = 0;
  for (const auto& r : records) l = std::max(l, r.z0.size());
  out << "problem,n,mesh,m,N,estimator,seed,y0,y0_stderr";
  for (std::size_t k = 0; k < l; ++k) out << ",z0_" << k;
  out << ",ref,sq_err,wall_ms\n";
  for (const auto& r : records) {
    out << r.problem << ',' << r.n << ',' << formatDouble(r.mesh) << ',' << r.m << ',' << r.samples << ','
        << r.estimator << ',' << r.seed << ',' << formatDouble(r.y0) << ',' << formatDouble(r.y0StdError);
    for (std::size_t k = 0; k < l; ++k) out << ',' << formatDouble(k < r.z0.size() ? r.z0[k] : kNaN);
    out << ',' << formatDouble(r.reference) << ',' << formatDouble(r.sqErr) << ',' << formatDouble(r.wallMs)
        << '\n';
  }
}

std::vector<ConvergenceRecord> readRecordsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("records CSV is empty");
  const auto header = splitCsv(line);
  std::map<std::string, std::size_t> col;
  std::vector<std::size_t> zCols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    col[header[c]] = c;
    if (header[c].rfind("z0_", 0) == 0) zCols.push_back(c);
  }
  for (const char* name : {"problem", "n", "mesh", "m", "N", "estimator", "seed", "y0", "y0_stderr", "ref",
                           "sq_err", "wall_ms"}) {
    if (!col.count(name)) throw std::invalid_argument(std::string("records CSV lacks column '") + name + "'");
  }
  std::vector<ConvergenceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = splitCsv(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("records CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    }
    ConvergenceRecord r;
    r.problem = cells[col["problem"]];
    r.n = parseUnsigned(cells[col["n"]], "n");
    r.mesh = parseNumber(cells[col["mesh"]], "mesh");
    r.m = parseUnsigned(cells[col["m"]], "m");
    r.samples = parseUnsigned(cells[col["N"]], "N");
    r.estimator = cells[col["estimator"]];
    r.seed = parseUnsigned(cells[col["seed"]], "seed");
    r.y0 = parseNumber(cells[col["y0"]], "y0");
    r.y0StdError = parseNumber(cells[col["y0_stderr"]], "y0_stderr");
    for (std::size_t c : zCols) r.z0.push_back(parseNumber(cells[c], "z0"));
    r.reference = parseNumber(cells[col["ref"]], "ref");
    r.sqErr = parseNumber(cells[col["sq_err"]], "sq_err");
    r.wallMs = parseNumber(cells[col["wall_ms"]], "wall_ms");
    if (!std::isfinite(r.sqErr)) r.error = "non-finite";
    out.push_back(std::move(r));
  }
  return out;
}

const char* buildRevision() noexcept { return PATHFBSDE_GIT_HASH; }

std::string sweepManifest(const SweepSpec& spec, const std::vector<ConvergenceRecord>& records) {
  json failures = json::array();
  for (const auto& r : records) {
    if (r.failed()) failures.push_back({{"n", r.n}, {"m", r.m}, {"error", r.error}});
  }
  const json j = {{"tool", "pathfbsde"},
                  {"git_hash", buildRevision()},
                  {"created_utc", utcNow()},
                  {"seed", spec.seed},
                  {"threads", threadCount()},
                  {"cells", records.size()},
                  {"failures", failures},
                  {"spec", specJson(spec)}};
  return j.dump(2);
}

RateAxis parseRateAxis(const std::string& name) {
  if (name == "mesh") return RateAxis::kMesh;
  if (name == "picard") return RateAxis::kPicard;
  throw std::invalid_argument("axis must be mesh or picard, got '" + name + "'");
}

double RateFit::ratio() const noexcept { return std::exp(slope); }

std::string RateFit::toJson() const {
  json pts = json::array();
  for (const auto& p : points) pts.push_back({p.x, p.y});
  json j = {{"axis", axis == RateAxis::kMesh ? "mesh" : "picard"},
            {"points", pts},
            {"slope", slope},
            {"intercept", intercept},
            {"r2", r2},
            {"slope_ci95", slopeCi}};
  if (axis == RateAxis::kPicard) j["ratio"] = ratio();
  return j.dump(2);
}

RateFit fitPoints(std::vector<RatePoint> points, RateAxis axis) {
  if (points.size() < 3) {
    throw std::invalid_argument("rate fit needs at least 3 usable points, got " + std::to_string(points.size()));
  }
  std::sort(points.begin(), points.end(), [](const RatePoint& a, const RatePoint& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  const double k = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("rate fit needs at least two distinct x values");
  RateFit fit;
  fit.axis = axis;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssRes = 0.0;
  for (const auto& p : points) {
    const double r = p.y - (fit.intercept + fit.slope * p.x);
    ssRes += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ssRes / syy : 1.0;
  const double dof = k - 2.0;
  const boost::math::students_t dist(dof);
  fit.slopeCi = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(ssRes / dof / sxx);
  if (!std::isfinite(fit.slope)) throw std::invalid_argument("rate fit produced a non-finite slope");
  fit.points = std::move(points);
  return fit;
}

RateFit fitRate(const std::vector<ConvergenceRecord>& records, RateAxis axis, const FitOptions& options) {
  std::vector<const ConvergenceRecord*> usable;
  for (const auto& r : records) {
    if (!r.failed() && std::isfinite(r.sqErr)) usable.push_back(&r);
  }
  if (usable.empty()) throw std::invalid_argument("no successful records to fit");
  std::vector<RatePoint> points;
  if (axis == RateAxis::kMesh) {
    std::size_t maxM = 0;
    for (const auto* r : usable) maxM = std::max(maxM, r->m);
    for (const auto* r : usable) {
      if (r->m == maxM && r->sqErr > 0.0) points.push_back({std::log(r->mesh), std::log(r->sqErr)});
    }
  } else {
    std::size_t maxN = 0;
    for (const auto* r : usable) maxN = std::max(maxN, r->n);
    std::vector<const ConvergenceRecord*> column;
    for (const auto* r : usable) {
      if (r->n == maxN) column.push_back(r);
    }
    std::sort(column.begin(), column.end(), [](const auto* a, const auto* b) {
      return a->m < b->m || (a->m == b->m && a->sqErr > b->sqErr);
    });
    double previous = std::numeric_limits<double>::infinity();
    for (const auto* r : column) {
      const double floor =
          options.noiseFloor >= 0.0 ? options.noiseFloor : 1e-20 * std::max(1.0, r->reference * r->reference);
      if (!(r->sqErr > floor) || !(r->sqErr < previous)) break;
      points.push_back({static_cast<double>(r->m), std::log(r->sqErr)});
      previous = r->sqErr;
    }
  }
  return fitPoints(std::move(points), axis);
}

}  // namespace pathfbsde
