#include "fracplasma/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "fracplasma/checks.hpp"
#include "fracplasma/extension.hpp"
#include "fracplasma/free_boundary.hpp"
#include "fracplasma/frequency.hpp"
#include "fracplasma/half_ball.hpp"

namespace fracplasma {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::Skipped:
      return "skipped";
  }
  return "unknown";
}

// ---------------------------------------------------------------- config

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(join(prefix, it.key()), "unknown field");
  }
}

double number(const json& obj, const std::string& key, const std::string& prefix, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(prefix, key), "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(prefix, key), "must be finite");
  return x;
}

int integer(const json& obj, const std::string& key, const std::string& prefix, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(prefix, key), "must be an integer");
  return v.get<int>();
}

std::string text(const json& obj, const std::string& key, const std::string& prefix, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(prefix, key), "must be a string");
  return v.get<std::string>();
}

Point point(const json& v, const std::string& field, int dim) {
  if (dim == 1 && v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || static_cast<int>(v.size()) != dim) {
    throw ConfigError(field, "must be an array of " + std::to_string(dim) + " numbers");
  }
  Point p{0.0, 0.0};
  for (int i = 0; i < dim; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) throw ConfigError(field, "must contain numbers");
    p[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)].get<double>();
  }
  return p;
}

ShapeSpec parse_domain(const json& doc) {
  if (!doc.contains("domain")) return ShapeSpec::interval(0.0, M_PI);
  const json& d = doc.at("domain");
  reject_unknown(d, "domain", {"shape", "lo", "hi", "center", "radius"});
  const std::string shape = text(d, "shape", "domain", "interval");
  try {
    if (shape == "interval") {
      return ShapeSpec::interval(number(d, "lo", "domain", 0.0), number(d, "hi", "domain", M_PI));
    }
    if (shape == "rectangle") {
      const Point lo = d.contains("lo") ? point(d.at("lo"), "domain.lo", 2) : Point{0.0, 0.0};
      const Point hi = d.contains("hi") ? point(d.at("hi"), "domain.hi", 2) : Point{M_PI, M_PI};
      return ShapeSpec::rectangle(lo, hi);
    }
    if (shape == "disk") {
      const Point c = d.contains("center") ? point(d.at("center"), "domain.center", 2) : Point{0.0, 0.0};
      const double r = number(d, "radius", "domain", 1.0);
      if (!(r > 0.0)) throw ConfigError("domain.radius", "must be positive");
      return ShapeSpec::disk({c[0] - r, c[1] - r}, {c[0] + r, c[1] + r}, c, r);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("domain", e.what());
  }
  throw ConfigError("domain.shape", "must be one of interval, rectangle, disk");
}

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0)) throw ConfigError(field, "must be positive");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc, "", {"domain", "n", "s", "gamma", "c", "lambda", "lambda_units", "method", "solver",
                           "extension", "frequency", "blowup", "verify", "output", "seed"});
  ExperimentConfig cfg;
  cfg.source = doc;
  cfg.shape = parse_domain(doc);
  const int dim = cfg.shape.dim();
  cfg.n = integer(doc, "n", "", dim == 1 ? 257 : 65);
  if (cfg.n < 5) throw ConfigError("n", "must be at least 5");
  cfg.s = number(doc, "s", "", 0.5);
  if (!(cfg.s > 0.0 && cfg.s < 1.0)) throw ConfigError("s", "must lie in (0, 1)");
  cfg.gamma = number(doc, "gamma", "", 0.1);
  require_positive(cfg.gamma, "gamma");
  if (doc.contains("c")) {
    cfg.c = number(doc, "c", "", 0.0);
    require_positive(*cfg.c, "c");
  }
  if (doc.contains("lambda")) {
    cfg.lambda = number(doc, "lambda", "", 0.0);
    require_positive(*cfg.lambda, "lambda");
  }
  if (cfg.c.has_value() == cfg.lambda.has_value()) throw ConfigError("lambda", "exactly one of 'c' and 'lambda' must be set");
  const std::string units = text(doc, "lambda_units", "", "absolute");
  if (units != "absolute" && units != "lambda1_s") throw ConfigError("lambda_units", "must be 'absolute' or 'lambda1_s'");
  cfg.lambda_relative = units == "lambda1_s";

  const std::string method = text(doc, "method", "", "branch");
  if (method == "branch") {
    cfg.method = SolveMethod::Branch;
  } else if (method == "minimize") {
    cfg.method = SolveMethod::Minimize;
    if (!cfg.c) throw ConfigError("method", "'minimize' requires the constraint value 'c'");
  } else {
    throw ConfigError("method", "must be 'branch' or 'minimize'");
  }

  if (doc.contains("solver")) {
    const json& so = doc.at("solver");
    reject_unknown(so, "solver", {"damping", "tolerance", "max_iterations", "constraint", "constraint_tolerance", "bracket"});
    SolverOptions& o = cfg.solver;
    o.damping = number(so, "damping", "solver", o.damping);
    if (!(o.damping > 0.0 && o.damping <= 1.0)) throw ConfigError("solver.damping", "must lie in (0, 1]");
    o.tolerance = number(so, "tolerance", "solver", o.tolerance);
    require_positive(o.tolerance, "solver.tolerance");
    o.max_iterations = integer(so, "max_iterations", "solver", o.max_iterations);
    if (o.max_iterations < 1) throw ConfigError("solver.max_iterations", "must be at least 1");
    const std::string kind = text(so, "constraint", "solver", "quadratic");
    if (kind == "quadratic") {
      o.constraint = ConstraintKind::Quadratic;
    } else if (kind == "linear") {
      o.constraint = ConstraintKind::Linear;
    } else {
      throw ConfigError("solver.constraint", "must be 'quadratic' or 'linear'");
    }
    o.constraint_tolerance = number(so, "constraint_tolerance", "solver", o.constraint_tolerance);
    require_positive(o.constraint_tolerance, "solver.constraint_tolerance");
    if (so.contains("bracket")) {
      const Point b = point(so.at("bracket"), "solver.bracket", 2);
      if (!(b[0] > 0.0 && b[1] > b[0])) throw ConfigError("solver.bracket", "must satisfy 0 < lo < hi");
      o.bracket_lo = b[0];
      o.bracket_hi = b[1];
    }
  }
  if (cfg.method == SolveMethod::Minimize && cfg.solver.constraint == ConstraintKind::Linear) {
    throw ConfigError("solver.constraint", "'minimize' supports only the quadratic constraint");
  }

  if (doc.contains("extension")) {
    const json& e = doc.at("extension");
    reject_unknown(e, "extension", {"height", "layers", "grading"});
    cfg.extension.height = number(e, "height", "extension", 0.0);
    if (cfg.extension.height < 0.0) throw ConfigError("extension.height", "must be nonnegative");
    cfg.extension.layers = integer(e, "layers", "extension", cfg.extension.layers);
    if (cfg.extension.layers < 4) throw ConfigError("extension.layers", "must be at least 4");
    cfg.extension.grading = number(e, "grading", "extension", 0.0);
    if (cfg.extension.grading != 0.0 && cfg.extension.grading < 1.0) {
      throw ConfigError("extension.grading", "must be 0 (default) or at least 1");
    }
  }

  if (doc.contains("frequency")) {
    const json& f = doc.at("frequency");
    reject_unknown(f, "frequency", {"centers", "radii", "count"});
    if (f.contains("centers")) {
      if (!f.at("centers").is_array()) throw ConfigError("frequency.centers", "must be an array");
      for (std::size_t i = 0; i < f.at("centers").size(); ++i) {
        cfg.frequency.centers.push_back(point(f.at("centers")[i], "frequency.centers[" + std::to_string(i) + "]", dim));
      }
    }
    if (f.contains("radii")) {
      if (!f.at("radii").is_array()) throw ConfigError("frequency.radii", "must be an array");
      for (const json& r : f.at("radii")) {
        if (!r.is_number() || !(r.get<double>() > 0.0)) throw ConfigError("frequency.radii", "must contain positive numbers");
        if (!cfg.frequency.radii.empty() && r.get<double>() <= cfg.frequency.radii.back()) {
          throw ConfigError("frequency.radii", "must be increasing");
        }
        cfg.frequency.radii.push_back(r.get<double>());
      }
    }
    cfg.frequency.count = integer(f, "count", "frequency", cfg.frequency.count);
    if (cfg.frequency.count < 3) throw ConfigError("frequency.count", "must be at least 3");
  }

  if (doc.contains("blowup")) {
    const json& b = doc.at("blowup");
    reject_unknown(b, "blowup", {"center", "radius", "nodes", "layers"});
    if (b.contains("center")) cfg.blowup.center = point(b.at("center"), "blowup.center", dim);
    cfg.blowup.radius = number(b, "radius", "blowup", 0.0);
    if (cfg.blowup.radius < 0.0) throw ConfigError("blowup.radius", "must be nonnegative");
    cfg.blowup.nodes = integer(b, "nodes", "blowup", 0);
    if (cfg.blowup.nodes != 0 && cfg.blowup.nodes < 5) throw ConfigError("blowup.nodes", "must be 0 or at least 5");
    cfg.blowup.layers = integer(b, "layers", "blowup", cfg.blowup.layers);
    if (cfg.blowup.layers < 4) throw ConfigError("blowup.layers", "must be at least 4");
  }

  if (doc.contains("verify")) {
    const json& v = doc.at("verify");
    reject_unknown(v, "verify", {"d2n_modes", "d2n_tolerance", "sign_tolerance", "symmetry_tolerance", "steiner_fields", "census"});
    VerifyConfig& o = cfg.verify;
    o.d2n_modes = integer(v, "d2n_modes", "verify", o.d2n_modes);
    if (o.d2n_modes < 1) throw ConfigError("verify.d2n_modes", "must be at least 1");
    o.d2n_tolerance = number(v, "d2n_tolerance", "verify", o.d2n_tolerance);
    require_positive(o.d2n_tolerance, "verify.d2n_tolerance");
    o.sign_tolerance = number(v, "sign_tolerance", "verify", o.sign_tolerance);
    require_positive(o.sign_tolerance, "verify.sign_tolerance");
    o.symmetry_tolerance = number(v, "symmetry_tolerance", "verify", o.symmetry_tolerance);
    require_positive(o.symmetry_tolerance, "verify.symmetry_tolerance");
    o.steiner_fields = integer(v, "steiner_fields", "verify", o.steiner_fields);
    if (o.steiner_fields < 1) throw ConfigError("verify.steiner_fields", "must be at least 1");
    if (v.contains("census")) {
      if (!v.at("census").is_boolean()) throw ConfigError("verify.census", "must be a boolean");
      o.census = v.at("census").get<bool>();
    }
  }

  cfg.output = text(doc, "output", "", cfg.output);
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed", "must be a nonnegative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  try {
    Domain::build(cfg.shape, cfg.n);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("n", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig refine_config(ExperimentConfig cfg, int factor) {
  if (factor < 1) throw ConfigError("--refine", "must be a positive integer");
  cfg.n = (cfg.n - 1) * factor + 1;
  cfg.extension.layers *= factor;
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  json d;
  d["shape"] = to_string(cfg.shape.kind);
  if (cfg.shape.kind == ShapeKind::Interval) {
    d["lo"] = cfg.shape.lo[0];
    d["hi"] = cfg.shape.hi[0];
  } else if (cfg.shape.kind == ShapeKind::Rectangle) {
    d["lo"] = {cfg.shape.lo[0], cfg.shape.lo[1]};
    d["hi"] = {cfg.shape.hi[0], cfg.shape.hi[1]};
  } else {
    d["center"] = {cfg.shape.center[0], cfg.shape.center[1]};
    d["radius"] = cfg.shape.radius;
  }
  j["domain"] = d;
  j["n"] = cfg.n;
  j["s"] = cfg.s;
  j["gamma"] = cfg.gamma;
  if (cfg.c) j["c"] = *cfg.c;
  if (cfg.lambda) j["lambda"] = *cfg.lambda;
  j["lambda_units"] = cfg.lambda_relative ? "lambda1_s" : "absolute";
  j["method"] = cfg.method == SolveMethod::Branch ? "branch" : "minimize";
  j["solver"] = {{"damping", cfg.solver.damping},
                 {"tolerance", cfg.solver.tolerance},
                 {"max_iterations", cfg.solver.max_iterations},
                 {"constraint", to_string(cfg.solver.constraint)},
                 {"constraint_tolerance", cfg.solver.constraint_tolerance},
                 {"bracket", {cfg.solver.bracket_lo, cfg.solver.bracket_hi}}};
  j["extension"] = {{"height", cfg.extension.height},
                    {"layers", cfg.extension.layers},
                    {"grading", cfg.extension.grading}};
  json centers = json::array();
  for (const Point& p : cfg.frequency.centers) {
    centers.push_back(cfg.shape.dim() == 1 ? json(p[0]) : json({p[0], p[1]}));
  }
  j["frequency"] = {{"centers", centers}, {"radii", cfg.frequency.radii}, {"count", cfg.frequency.count}};
  json b = {{"radius", cfg.blowup.radius}, {"nodes", cfg.blowup.nodes}, {"layers", cfg.blowup.layers}};
  if (cfg.blowup.center) {
    const Point& p = *cfg.blowup.center;
    b["center"] = cfg.shape.dim() == 1 ? json(p[0]) : json({p[0], p[1]});
  }
  j["blowup"] = b;
  j["verify"] = {{"d2n_modes", cfg.verify.d2n_modes},
                 {"d2n_tolerance", cfg.verify.d2n_tolerance},
                 {"sign_tolerance", cfg.verify.sign_tolerance},
                 {"symmetry_tolerance", cfg.verify.symmetry_tolerance},
                 {"steiner_fields", cfg.verify.steiner_fields},
                 {"census", cfg.verify.census}};
  j["output"] = cfg.output;
  j["seed"] = cfg.seed;
  return j;
}

json RunReport::to_json() const {
  json j;
  j["config"] = config;
  j["outcome"] = outcome;
  j["free_boundary"] = free_boundary;
  json cs = json::array();
  for (const CheckResult& c : checks) {
    cs.push_back({{"name", c.name},
                  {"status", fracplasma::to_string(c.status)},
                  {"measured", c.measured},
                  {"tolerance", c.tolerance},
                  {"detail", c.detail},
                  {"seconds", c.seconds}});
  }
  j["checks"] = cs;
  json t = json::object();
  for (const auto& [name, sec] : timings) t[name] = sec;
  j["timings"] = t;
  j["exit_code"] = exit_code;
  return j;
}

// ---------------------------------------------------------------- helpers

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_double(v);
      first = false;
    }
    out_ << '\n';
  }
  std::ofstream& stream() { return out_; }

 private:
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json point_json(const Point& p, int dim) { return dim == 1 ? json(p[0]) : json({p[0], p[1]}); }

struct Setup {
  std::shared_ptr<const Domain> domain;
  std::shared_ptr<const EigenBasis> basis;
};

Setup build_setup(const ExperimentConfig& cfg) {
  Setup st;
  st.domain = std::make_shared<const Domain>(Domain::build(cfg.shape, cfg.n));
  st.basis = EigenBasis::compute(st.domain);
  return st;
}

double absolute_lambda(const ExperimentConfig& cfg, const EigenBasis& basis) {
  return cfg.lambda_relative ? *cfg.lambda * std::pow(basis.eigenvalue(0), cfg.s) : *cfg.lambda;
}

PlasmaSolution solve(const ExperimentConfig& cfg, const Setup& st) {
  if (cfg.lambda) return solve_fixed_lambda(absolute_lambda(cfg, *st.basis), cfg.gamma, cfg.s, st.basis, cfg.solver);
  if (cfg.method == SolveMethod::Minimize) return minimize_energy(*cfg.c, cfg.gamma, cfg.s, st.basis, cfg.solver);
  return solve_constrained(*cfg.c, cfg.gamma, cfg.s, st.basis, cfg.solver);
}

YMesh extension_mesh(const ExperimentConfig& cfg, const EigenBasis& basis) {
  const double height = cfg.extension.height > 0.0 ? cfg.extension.height : 20.0 / std::sqrt(basis.eigenvalue(0));
  const double g = cfg.extension.grading > 0.0 ? cfg.extension.grading : YMesh::default_grading(1.0 - 2.0 * cfg.s);
  return YMesh::graded(height, cfg.extension.layers, g);
}

bool solve_ok(const PlasmaSolution& sol) {
  return sol.status == SolveStatus::Converged || sol.status == SolveStatus::Trivial;
}

json solution_json(const PlasmaSolution& sol) {
  json curve = json::array();
  for (const auto& [l, g] : sol.curve) curve.push_back({l, g});
  return {{"status", to_string(sol.status)},
          {"lambda", sol.lambda},
          {"gamma", sol.gamma},
          {"s", sol.s},
          {"constraint_value", sol.c},
          {"residual", sol.residual},
          {"iterations", sol.iterations},
          {"max_u", sol.u.nodal().size() > 0 ? sol.u.nodal().maxCoeff() : 0.0},
          {"modes", sol.u.coefficients().size()},
          {"message", sol.message},
          {"curve", curve}};
}

json free_boundary_json(const FreeBoundary& fb, int dim) {
  std::size_t regular = 0;
  double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
  json pts = json::array();
  for (const BoundaryPoint& p : fb.points) {
    regular += p.tag == PointTag::Regular;
    gmin = std::min(gmin, p.gradient_norm);
    gmax = std::max(gmax, p.gradient_norm);
    if (dim == 1) pts.push_back({{"x", p.x[0]}, {"gradient", p.gradient[0]}, {"tag", to_string(p.tag)}});
  }
  json j = {{"level", fb.level},
            {"points", fb.points.size()},
            {"cells", fb.cells.size()},
            {"chains", fb.chains.size()},
            {"degenerate_cells", fb.degenerate_cells.size()},
            {"gradient_regular", regular},
            {"min_gradient", fb.points.empty() ? 0.0 : gmin},
            {"max_gradient", gmax}};
  if (dim == 1) j["crossings"] = pts;
  return j;
}

void write_thin(const fs::path& path, const Domain& d, const Eigen::VectorXd& nodal) {
  Csv csv(path, d.dim() == 1 ? "x,value" : "x,x2,value");
  for (std::size_t k = 0; k < d.interior_count(); ++k) {
    const Point p = d.position(d.interior_nodes()[k]);
    const double v = nodal[static_cast<Eigen::Index>(k)];
    if (d.dim() == 1) {
      csv.row({p[0], v});
    } else {
      csv.row({p[0], p[1], v});
    }
  }
}

void write_extension(const fs::path& path, const ExtensionField& w) {
  const Domain& d = w.domain();
  const int n = d.nodes_per_axis();
  Csv csv(path, d.dim() == 1 ? "x,y,value" : "x,x2,y,value");
  const int mid = n / 2;
  for (int j = 0; j <= w.mesh().layers; ++j) {
    const double y = w.mesh().nodes[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i) {
      const std::size_t g = d.dim() == 1 ? d.grid_index(i) : d.grid_index(i, mid);
      const Point p = d.position(g);
      if (d.dim() == 1) {
        csv.row({p[0], y, w.at(g, j)});
      } else {
        csv.row({p[0], p[1], y, w.at(g, j)});
      }
    }
  }
}

struct LoadedSolution {
  SpectralField u;
  double lambda;
  double gamma;
};

LoadedSolution load_solution(const ExperimentConfig& cfg, const Setup& st) {
  const fs::path dir(cfg.output);
  std::ifstream sj(dir / "solution.json");
  std::ifstream cc(dir / "coefficients.csv");
  if (!sj || !cc) throw ConfigError("--out", "no solution artifact in " + dir.string() + " (run 'solve' first)");
  json meta;
  sj >> meta;
  std::string line;
  std::getline(cc, line);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(st.basis->size()));
  Eigen::Index count = 0;
  while (std::getline(cc, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string k, ev, a;
    std::getline(ss, k, ',');
    std::getline(ss, ev, ',');
    std::getline(ss, a, ',');
    if (count >= coeffs.size()) throw ConfigError("--out", "solution artifact does not match the configured grid");
    coeffs[count++] = std::stod(a);
  }
  if (count != coeffs.size()) throw ConfigError("--out", "solution artifact does not match the configured grid");
  return {SpectralField(st.basis, coeffs), meta.at("lambda").get<double>(), meta.at("gamma").get<double>()};
}

CheckResult timed_check(const std::string& name, const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.name = name;
  Stopwatch sw;
  try {
    body(r);
  } catch (const std::exception& e) {
    r.status = CheckStatus::Fail;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = sw.seconds();
  return r;
}

}  // namespace

// ---------------------------------------------------------------- commands

RunReport run_solve(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.config = config_to_json(cfg);
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  Stopwatch total;
  const Setup st = build_setup(cfg);
  rep.timings.emplace_back("basis", total.seconds());
  try {
    Stopwatch sw;
    const PlasmaSolution sol = solve(cfg, st);
    rep.timings.emplace_back("solve", sw.seconds());
    rep.outcome = solution_json(sol);
    write_json(dir / "solution.json", rep.outcome);
    write_thin(dir / "u.csv", *st.domain, sol.u.nodal());
    {
      Csv csv(dir / "coefficients.csv", "k,eigenvalue,coefficient");
      for (std::size_t k = 0; k < st.basis->size(); ++k) {
        csv.row({static_cast<double>(k), st.basis->eigenvalue(k), sol.u.coefficients()[static_cast<Eigen::Index>(k)]});
      }
    }
    Stopwatch ext;
    const ExtensionField w = extend_semianalytic(sol.u, cfg.s, extension_mesh(cfg, *st.basis));
    write_extension(dir / "extension.csv", w);
    rep.timings.emplace_back("extension", ext.seconds());
    rep.free_boundary = free_boundary_json(extract_free_boundary(*st.domain, sol.u.nodal(), cfg.gamma), cfg.shape.dim());
    rep.exit_code = solve_ok(sol) && (sol.status == SolveStatus::Trivial || sol.residual <= cfg.solver.tolerance) ? 0 : 1;
  } catch (const std::runtime_error& e) {
    rep.outcome = {{"status", "error"}, {"message", e.what()}};
    rep.exit_code = 1;
  }
  rep.timings.emplace_back("total", total.seconds());
  write_json(dir / "report.json", rep.to_json());
  return rep;
}

RunReport run_frequency(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.config = config_to_json(cfg);
  const fs::path dir(cfg.output);
  Stopwatch total;
  const Setup st = build_setup(cfg);
  const LoadedSolution sol = load_solution(cfg, st);
  const ExtensionField w = extend_semianalytic(sol.u, cfg.s, extension_mesh(cfg, *st.basis));
  const int dim = cfg.shape.dim();
  Csv summary(dir / "frequency_summary.csv", "index,x,x2,n0,monotonicity_violations,sandwich_constant,tag");
  json entries = json::array();
  for (std::size_t i = 0; i < cfg.frequency.centers.size(); ++i) {
    const Point& c = cfg.frequency.centers[i];
    json e = {{"index", i}, {"center", point_json(c, dim)}};
    std::vector<double> radii = cfg.frequency.radii;
    std::string warning;
    if (distance_to_boundary(*st.domain, c) <= 0.0 ||
        (cfg.shape.kind == ShapeKind::Disk &&
         std::hypot(c[0] - cfg.shape.center[0], c[1] - cfg.shape.center[1]) >= cfg.shape.radius)) {
      warning = "center outside the domain";
    } else {
      if (radii.empty()) radii = default_radii(w, c, cfg.frequency.count);
      if (radii.empty()) warning = "center too close to the boundary for any radius";
    }
    FrequencyProfile prof;
    if (warning.empty()) {
      try {
        prof = frequency_profile(w, c, radii, sol.lambda, sol.gamma);
      } catch (const std::invalid_argument& ex) {
        warning = ex.what();
      }
    }
    if (!warning.empty()) {
      std::cerr << "warning: frequency center " << i << " skipped: " << warning << '\n';
      e["skipped"] = true;
      e["warning"] = warning;
      entries.push_back(e);
      continue;
    }
    Csv csv(dir / ("profile_" + std::to_string(i) + ".csv"), "r,D,H,N,Ntilde");
    for (std::size_t k = 0; k < prof.radii.size(); ++k) {
      csv.row({prof.radii[k], prof.D[k], prof.H[k], prof.N[k], prof.Ntilde[k]});
    }
    ClassifyOptions co;
    co.radius_list = radii;
    co.level = sol.gamma;
    const Classification cls = classify_point(w, c, sol.lambda, co);
    e["skipped"] = false;
    e["radii"] = prof.radii.size();
    e["truncated"] = prof.truncated;
    e["n0"] = std::isfinite(prof.n0) ? json(prof.n0) : json(nullptr);
    e["n0_slope"] = prof.n0_slope;
    e["monotonicity_violations"] = prof.monotonicity_violations;
    e["max_relative_drop"] = prof.max_relative_drop;
    e["sandwich_constant"] = prof.sandwich_constant;
    e["classification"] = to_string(cls.tag);
    e["reason"] = cls.reason;
    e["gradient_norm"] = cls.gradient_norm;
    e["gradient_threshold"] = cls.threshold;
    entries.push_back(e);
    summary.stream() << i << ',' << format_double(c[0]) << ',' << format_double(c[1]) << ','
                     << format_double(prof.n0) << ',' << prof.monotonicity_violations << ','
                     << format_double(prof.sandwich_constant) << ',' << to_string(cls.tag) << '\n';
  }
  rep.outcome = {{"lambda", sol.lambda}, {"gamma", sol.gamma}, {"centers", entries}};
  rep.timings.emplace_back("total", total.seconds());
  write_json(dir / "frequency.json", rep.to_json());
  return rep;
}

RunReport run_blowup(const ExperimentConfig& cfg) {
  if (!cfg.blowup.center) throw ConfigError("blowup.center", "required by the blowup command");
  RunReport rep;
  rep.config = config_to_json(cfg);
  const fs::path dir(cfg.output);
  Stopwatch total;
  const Setup st = build_setup(cfg);
  const LoadedSolution sol = load_solution(cfg, st);
  const ExtensionField w = extend_semianalytic(sol.u, cfg.s, extension_mesh(cfg, *st.basis));
  const Point c = *cfg.blowup.center;
  double r = cfg.blowup.radius;
  if (r == 0.0) {
    const std::vector<double> radii = default_radii(w, c, cfg.frequency.count);
    if (radii.empty()) throw ConfigError("blowup.center", "too close to the boundary");
    r = radii.front();
  }
  BlowupOptions bo;
  bo.nodes_per_axis = cfg.blowup.nodes;
  bo.layers = cfg.blowup.layers;
  BlowupField bf;
  try {
    bf = blowup(w, c, r, sol.gamma, bo);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("blowup", e.what());
  }
  const FrequencyProfile prof = frequency_profile(w, c, {r}, 0.0, sol.gamma);
  const ExtensionField& u = *bf.field;
  const Domain& rd = u.domain();
  Csv csv(dir / "blowup.csv", rd.dim() == 1 ? "X,Y,value" : "X,X2,Y,value");
  for (int j = 0; j <= u.mesh().layers; ++j) {
    const double y = u.mesh().nodes[static_cast<std::size_t>(j)];
    for (std::size_t g = 0; g < rd.grid_size(); ++g) {
      const Point p = rd.position(g);
      if (p[0] * p[0] + p[1] * p[1] + y * y > 1.0 + 1e-12) continue;
      if (rd.dim() == 1) {
        csv.row({p[0], y, u.at(g, j)});
      } else {
        csv.row({p[0], p[1], y, u.at(g, j)});
      }
    }
  }
  rep.outcome = {{"center", point_json(c, cfg.shape.dim())},
                 {"radius", r},
                 {"normalization", bf.normalization},
                 {"unit_sphere_norm", bf.unit_sphere_norm},
                 {"unit_frequency", bf.unit_frequency},
                 {"source_frequency", prof.N.empty() ? 0.0 : prof.N.front()}};
  rep.timings.emplace_back("total", total.seconds());
  write_json(dir / "blowup.json", rep.to_json());
  return rep;
}

RunReport run_symmetrize(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.config = config_to_json(cfg);
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  Stopwatch total;
  const Setup st = build_setup(cfg);
  const Domain& d = *st.domain;
  if (d.symmetry_axes().empty()) throw ConfigError("domain", "has no axis of symmetry");
  Eigen::VectorXd f;
  std::string source;
  if (fs::exists(dir / "coefficients.csv")) {
    f = load_solution(cfg, st).u.nodal();
    source = "solution";
  } else {
    f = random_bumps(*st.basis, 1, cfg.seed).front();
    source = "random";
  }
  Eigen::VectorXd sf = f;
  for (int axis : d.symmetry_axes()) sf = steiner_symmetrize(d, sf, axis);
  write_thin(dir / "symmetrized.csv", d, sf);
  const SteinerStudy study = steiner_study(st.basis, cfg.s, cfg.gamma, cfg.verify.steiner_fields, cfg.seed);
  rep.outcome = {{"source", source},
                 {"energy_before", fractional_energy(project(f, st.basis), cfg.s)},
                 {"energy_after", fractional_energy(project(sf, st.basis), cfg.s)},
                 {"constraint_before", constraint_value(d, f, cfg.gamma, ConstraintKind::Quadratic)},
                 {"constraint_after", constraint_value(d, sf, cfg.gamma, ConstraintKind::Quadratic)},
                 {"random_fields", study.fields},
                 {"max_relative_energy_increase", study.max_relative_increase},
                 {"max_constraint_change", study.max_constraint_change}};
  rep.exit_code = study.max_relative_increase <= 1e-12 && study.max_constraint_change == 0.0 ? 0 : 1;
  rep.timings.emplace_back("total", total.seconds());
  write_json(dir / "symmetrize.json", rep.to_json());
  return rep;
}

RunReport run_verify(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.config = config_to_json(cfg);
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  Stopwatch total;
  const Setup st = build_setup(cfg);
  const Domain& d = *st.domain;
  const YMesh mesh = extension_mesh(cfg, *st.basis);
  const int dim = cfg.shape.dim();

  std::optional<PlasmaSolution> sol;
  rep.checks.push_back(timed_check("plasma_solve", [&](CheckResult& r) {
    sol = solve(cfg, st);
    rep.outcome = solution_json(*sol);
    r.measured = sol->residual;
    r.tolerance = cfg.solver.tolerance;
    r.status = sol->converged() && sol->residual <= cfg.solver.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "status " + to_string(sol->status);
  }));
  const bool have = sol && sol->converged();

  rep.checks.push_back(timed_check("d2n_equivalence", [&](CheckResult& r) {
    const SpectralField u(st.basis, random_coefficients(*st.basis, static_cast<std::size_t>(cfg.verify.d2n_modes), cfg.seed));
    r.measured = d2n_relative_error(u, cfg.s, mesh);
    r.tolerance = cfg.verify.d2n_tolerance;
    r.status = r.measured <= r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "relative L2 error on " + std::to_string(cfg.verify.d2n_modes) + " random modes, " +
               std::to_string(mesh.layers) + " layers";
  }));

  std::optional<ExtensionField> w;
  rep.checks.push_back(timed_check("uy_sign", [&](CheckResult& r) {
    r.tolerance = cfg.verify.sign_tolerance;
    if (!have) {
      r.status = CheckStatus::Fail;
      r.detail = "no converged solution";
      return;
    }
    w = extend_semianalytic(sol->u, cfg.s, mesh);
    const SignReport sr = check_uy_sign(*w, r.tolerance);
    r.measured = sr.max_derivative;
    r.status = sr.violators.empty() ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = std::to_string(sr.violators.size()) + " violators of " + std::to_string(sr.checked);
  }));

  rep.checks.push_back(timed_check("free_boundary_inclusion", [&](CheckResult& r) {
    if (!have) {
      r.detail = "no converged solution";
      return;
    }
    const InclusionReport ir = check_boundary_inclusion(d, sol->u.nodal(), cfg.gamma);
    rep.free_boundary = free_boundary_json(extract_free_boundary(d, sol->u.nodal(), cfg.gamma), dim);
    r.measured = static_cast<double>(ir.violations.size());
    r.status = ir.passed() ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = std::to_string(ir.checked) + " points checked";
  }));

  rep.checks.push_back(timed_check("subharmonic_strip", [&](CheckResult& r) {
    if (cfg.s <= 0.5) {
      r.status = CheckStatus::Skipped;
      r.detail = "skipped (requires s>1/2)";
      return;
    }
    if (!have) {
      r.detail = "no converged solution";
      return;
    }
    const SubharmonicReport sr = check_subharmonic_strip(d, sol->u.nodal(), cfg.gamma, cfg.s);
    r.measured = sr.min_laplacian;
    r.status = sr.passed() ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "min discrete Laplacian over " + std::to_string(sr.nodes) + " nodes within 2h";
  }));

  rep.checks.push_back(timed_check("symmetry", [&](CheckResult& r) {
    r.tolerance = cfg.verify.symmetry_tolerance;
    if (d.symmetry_axes().empty()) {
      r.status = CheckStatus::Skipped;
      r.detail = "skipped (domain has no axis of symmetry)";
      return;
    }
    if (!have) {
      r.detail = "no converged solution";
      return;
    }
    const double c = cfg.c ? *cfg.c : constraint_value(d, sol->u.nodal(), cfg.gamma, ConstraintKind::Quadratic);
    if (!(c > 0.0)) {
      r.status = CheckStatus::Skipped;
      r.detail = "skipped (trivial solution)";
      return;
    }
    SolverOptions o = cfg.solver;
    o.constraint = ConstraintKind::Quadratic;
    const PlasmaSolution m = minimize_energy(c, cfg.gamma, cfg.s, st.basis, o);
    for (int axis : d.symmetry_axes()) r.measured = std::max(r.measured, reflection_defect(d, m.u.nodal(), axis));
    r.status = m.converged() && r.measured <= r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "minimizer " + to_string(m.status) + ", max reflection defect over symmetry axes";
  }));

  rep.checks.push_back(timed_check("steiner_energy", [&](CheckResult& r) {
    if (d.symmetry_axes().empty()) {
      r.status = CheckStatus::Skipped;
      r.detail = "skipped (domain has no axis of symmetry)";
      return;
    }
    const SteinerStudy sst = steiner_study(st.basis, cfg.s, cfg.gamma, cfg.verify.steiner_fields, cfg.seed);
    r.measured = sst.max_relative_increase;
    r.tolerance = 1e-12;
    r.status = sst.max_relative_increase <= r.tolerance && sst.max_constraint_change == 0.0 ? CheckStatus::Pass
                                                                                            : CheckStatus::Fail;
    r.detail = "max relative energy increase over " + std::to_string(sst.fields) +
               " fields; max constraint change " + format_double(sst.max_constraint_change);
  }));

  rep.checks.push_back(timed_check("singular_census", [&](CheckResult& r) {
    if (dim != 2 || !cfg.verify.census) {
      r.status = CheckStatus::Skipped;
      r.detail = dim != 2 ? "skipped (2D only)" : "skipped (disabled)";
      return;
    }
    if (!have || !w) {
      r.detail = "no converged solution";
      return;
    }
    const FreeBoundary fb = extract_free_boundary(d, sol->u.nodal(), cfg.gamma);
    const Census coarse = singular_census(*w, fb, sol->lambda);
    const ExperimentConfig fine_cfg = refine_config(cfg, 2);
    const Setup fst = build_setup(fine_cfg);
    const PlasmaSolution fsol = solve(fine_cfg, fst);
    if (!fsol.converged()) {
      r.detail = "refined solve " + to_string(fsol.status);
      return;
    }
    const ExtensionField fw = extend_semianalytic(fsol.u, cfg.s, extension_mesh(fine_cfg, *fst.basis));
    const Census fine = singular_census(fw, extract_free_boundary(*fst.domain, fsol.u.nodal(), cfg.gamma), fsol.lambda);
    const double ratio = coarse.cells > 0 ? static_cast<double>(fine.cells) / static_cast<double>(coarse.cells) : 0.0;
    r.measured = ratio;
    r.tolerance = 1.5;
    const bool stable = coarse.singular_sites == fine.singular_sites;
    r.status = stable && ratio >= 2.0 / 1.5 && ratio <= 2.0 * 1.5 ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "singular sites " + std::to_string(coarse.singular_sites) + " -> " + std::to_string(fine.singular_sites) +
               ", cells " + std::to_string(coarse.cells) + " -> " + std::to_string(fine.cells) +
               " (expected ratio 2 within factor 1.5)";
  }));

  rep.exit_code = 0;
  for (const CheckResult& c : rep.checks) {
    if (c.status == CheckStatus::Fail) rep.exit_code = 1;
  }
  rep.timings.emplace_back("total", total.seconds());
  write_json(dir / "report.json", rep.to_json());
  return rep;
}

}  // namespace fracplasma
