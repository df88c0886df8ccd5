#include "valfun/cli.hpp"

#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "valfun/error.hpp"
#include "valfun/report.hpp"

namespace valfun {

namespace {

using report::json;

struct UsageError : Error {
  using Error::Error;
};

VectorXd parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> vals;
  if (!text.empty()) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const char* s = item.c_str();
      char* end = nullptr;
      double v = std::strtod(s, &end);
      while (end && *end == ' ') ++end;
      if (end == s || (end && *end != '\0')) throw UsageError(what + ": '" + item + "' is not a number");
      vals.push_back(v);
    }
  }
  VectorXd out(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) out[i] = vals[i];
  return out;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& it : items) {
    auto eq = it.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + it + "'");
    VectorXd v = parse_vector(it.substr(eq + 1), "--param " + it.substr(0, eq));
    if (v.size() != 1) throw UsageError("--param " + it.substr(0, eq) + " needs one number");
    out[it.substr(0, eq)] = v[0];
  }
  return out;
}

struct Options {
  std::string problem;
  std::string x, y, lambda, xs;
  std::vector<std::string> params;
  std::optional<int> n_starts, grid_density, max_iter, max_clusters;
  std::optional<std::uint64_t> seed;
  std::optional<double> cluster_tol, activity_tol;
  std::string kind = "limiting";
  std::string system = "inner";
  double radius = 0.05;
  int samples = 64;
  double h = 1e-5;
  bool weak = false;
  bool boundary = false;
  bool verbose = false;
};

void add_common(CLI::App* sub, Options& o, bool needs_x) {
  sub->add_option("--problem", o.problem, "builtin name or problem file")->required();
  auto* xo = sub->add_option("--x", o.x, "parameter point, comma-separated");
  if (needs_x) xo->required();
  sub->add_option("--param", o.params, "override a problem parameter, name=value");
  sub->add_option("--n-starts", o.n_starts);
  sub->add_option("--grid-density", o.grid_density);
  sub->add_option("--max-iter", o.max_iter);
  sub->add_option("--max-clusters", o.max_clusters);
  sub->add_option("--seed", o.seed);
  sub->add_option("--cluster-tol", o.cluster_tol);
  sub->add_option("--activity-tol", o.activity_tol);
  sub->add_flag("--verbose", o.verbose, "human-readable summary on stderr");
}

SolverConfig make_config(const ParametricProblem& p, const Options& o) {
  SolverConfig c = p.solver_defaults();
  if (o.n_starts) c.n_starts = *o.n_starts;
  if (o.grid_density) c.grid_density = *o.grid_density;
  if (o.max_iter) c.max_iter = *o.max_iter;
  if (o.max_clusters) c.max_clusters = *o.max_clusters;
  if (o.seed) c.seed = *o.seed;
  if (o.cluster_tol) c.cluster_tol = *o.cluster_tol;
  if (o.activity_tol) c.activity_tol = *o.activity_tol;
  if (const char* env = std::getenv("VALFUN_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw UsageError("VALFUN_SEED must be a non-negative integer");
    c.seed = v;
  }
  if (c.n_starts < 1 || c.grid_density < 1 || c.max_iter < 1 || c.max_clusters < 1)
    throw UsageError("solver counts must be >= 1");
  return c;
}

VectorXd sized(const std::string& text, int n, const std::string& what) {
  VectorXd v = parse_vector(text, what);
  if (v.size() != n)
    throw UsageError(what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n));
  return v;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Value-function sensitivity and minimax stationarity analysis", "valfun"};
  app.require_subcommand(1);
  Options o;
  auto* problems = app.add_subcommand("problems", "list builtin problems");
  auto* value_cmd = app.add_subcommand("value", "V(x)");
  auto* solutions = app.add_subcommand("solutions", "V(x) with the clustered solution set");
  auto* subdiff = app.add_subcommand("subdiff", "upper estimate of a subdifferential of V");
  auto* cq = app.add_subcommand("cq", "constraint qualification verdict");
  auto* wolfe_cmd = app.add_subcommand("wolfe", "Wolfe dual value, weak duality, or the Wolfe system");
  auto* certify = app.add_subcommand("certify", "stationarity certificate at (x, y)");
  auto* oracle = app.add_subcommand("oracle", "finite-difference gradient samples of V");
  for (auto* s : {value_cmd, solutions, subdiff, cq, wolfe_cmd, certify, oracle})
    add_common(s, o, s != wolfe_cmd);
  subdiff->add_option("--kind", o.kind, "frechet|limiting|horizon|lipschitz_eqn1|lipschitz_horizon_eqn2|clarke_hull");
  subdiff->add_option("--y", o.y, "designated solution (frechet)");
  subdiff->add_option("--lambda", o.lambda, "designated multiplier (frechet)");
  cq->add_option("--system", o.system, "inner|dual_system|mpec_branch|mfcq|crcq")->required();
  cq->add_option("--y", o.y)->required();
  cq->add_option("--lambda", o.lambda);
  cq->add_option("--radius", o.radius);
  cq->add_option("--samples", o.samples);
  wolfe_cmd->add_flag("--check-weak-duality", o.weak);
  wolfe_cmd->add_option("--xs", o.xs, "x points separated by ';' for weak duality");
  wolfe_cmd->add_option("--y", o.y, "check the Wolfe system at this y");
  wolfe_cmd->add_option("--lambda", o.lambda);
  wolfe_cmd->add_flag("--boundary", o.boundary, "use the boundary version with N_X(x)");
  certify->add_option("--y", o.y)->required();
  oracle->add_option("--radius", o.radius);
  oracle->add_option("--samples", o.samples);
  oracle->add_option("--step", o.h, "finite-difference step h");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  if (problems->parsed()) {
    json list = json::array();
    for (const auto& name : builtin_names()) {
      ParametricProblem p = load_builtin(name);
      list.push_back({{"id", p.id()}, {"n", p.n()}, {"m", p.m()}, {"q", p.q()}});
    }
    out << json({{"schema_version", report::kSchemaVersion}, {"command", "problems"}, {"results", list}}).dump(2)
        << "\n";
    return 0;
  }

  std::optional<ParametricProblem> prob;
  SolverConfig cfg;
  VectorXd x;
  try {
    prob.emplace(load_problem_spec(o.problem, parse_params(o.params)));
    cfg = make_config(*prob, o);
    if (!o.x.empty()) x = sized(o.x, prob->n(), "--x");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const ParametricProblem& p = *prob;
  json warnings = json::array();
  json results;
  std::string command;
  int code = 0;
  auto summary = [&](const std::string& s) {
    if (o.verbose) err << s << "\n";
  };

  try {
    if (value_cmd->parsed() || solutions->parsed()) {
      command = value_cmd->parsed() ? "value" : "solutions";
      SolveReport r = solve_inner(p, x, cfg);
      results = value_cmd->parsed() ? json{{"x", report::vector(x)}, {"value", report::number(r.value)}} : report::solve(r);
      std::ostringstream s;
      s << "V(x) = " << r.value << " with " << r.solutions.size() << " solution cluster(s)";
      summary(s.str());
    } else if (subdiff->parsed()) {
      command = "subdiff";
      EstimateKind kind = estimate_kind_from_string(o.kind);
      std::optional<Point> designated;
      if (!o.y.empty()) {
        if (kind != EstimateKind::Frechet) throw UsageError("--y is only used with --kind frechet");
        Point pt{x, sized(o.y, p.m(), "--y"), std::nullopt};
        pt.lambda = o.lambda.empty() ? VectorXd::Zero(p.q()) : sized(o.lambda, p.q(), "--lambda");
        designated = pt;
      }
      SolveReport sr;
      const SolveReport* srp = nullptr;
      if (!designated) {
        sr = solve_inner(p, x, cfg);
        srp = &sr;
      }
      EstimateSet e = upper_estimate(p, x, kind, srp, designated);
      results = report::estimate(e);
      for (auto& w : e.warnings) warnings.push_back(w);
      summary(std::string(to_string(kind)) + " estimate with " + std::to_string(e.pieces.size()) + " piece(s)");
    } else if (cq->parsed()) {
      command = "cq";
      VectorXd y = sized(o.y, p.m(), "--y");
      CqReport r;
      if (o.system == "inner" || o.system == "dual_system" || o.system == "mpec_branch") {
        Point pt{x, y, std::nullopt};
        if (!o.lambda.empty()) pt.lambda = sized(o.lambda, p.q(), "--lambda");
        else if (o.system != "inner") pt.lambda = VectorXd::Zero(p.q());
        LicqSystem sys = o.system == "inner"         ? LicqSystem::Inner
                         : o.system == "dual_system" ? LicqSystem::DualSystem
                                                     : LicqSystem::MpecBranch;
        r = check_licq(p, pt, sys, cfg.activity_tol);
      } else if (o.system == "mfcq") {
        r = check_mfcq(p, x, y, cfg.activity_tol);
      } else if (o.system == "crcq") {
        r = check_crcq_sampled(p, x, y, o.radius, o.samples, cfg.seed, cfg.activity_tol);
      } else {
        throw UsageError("unknown --system '" + o.system + "'");
      }
      results = report::cq(r);
      summary(std::string(to_string(r.kind)) + ": " + to_string(r.verdict));
    } else if (wolfe_cmd->parsed()) {
      command = "wolfe";
      if (o.weak) {
        std::vector<VectorXd> xs;
        if (!o.xs.empty()) {
          std::stringstream ss(o.xs);
          std::string item;
          while (std::getline(ss, item, ';')) xs.push_back(sized(item, p.n(), "--xs entry"));
        } else if (x.size()) {
          xs.push_back(x);
        } else {
          throw UsageError("--check-weak-duality needs --x or --xs");
        }
        WeakDualityReport r = check_weak_duality(p, xs, cfg);
        results = report::weak_duality(r);
        for (const auto& d : r.points)
          if (!d.verified) warnings.push_back("dual feasibility not reached at one x; weak duality unverified there");
        if (!r.all_ok) code = 2;
        summary(r.all_ok ? "weak duality holds at every x" : "weak duality VIOLATED");
      } else {
        if (!x.size()) throw UsageError("--x is required");
        if (!o.y.empty()) {
          VectorXd y = sized(o.y, p.m(), "--y");
          VectorXd lam = o.lambda.empty() ? VectorXd::Zero(p.q()) : sized(o.lambda, p.q(), "--lambda");
          WolfeResult w = check_wolfe_system(p, x, y, lam, o.boundary, cfg.activity_tol);
          results = {{"system", report::wolfe(w)}};
          if (w.holds) {
            ConversionResult c = convert_wolfe_to_s(p, x, y, lam, w.u, w.nu, cfg.activity_tol);
            results["s_multipliers"] = report::mpec(c.mult);
            results["s_residual"] = report::number(c.check.residual);
          }
          summary(w.holds ? "Wolfe system holds" : "Wolfe system fails");
        } else {
          DualResult d = dual_value(p, x, cfg);
          results = report::dual(d);
          if (d.possibly_unbounded) warnings.push_back("dual value possibly unbounded below");
          std::ostringstream s;
          s << "best-found V_D(x) = " << d.value;
          summary(s.str());
        }
      }
    } else if (certify->parsed()) {
      command = "certify";
      VectorXd y = sized(o.y, p.m(), "--y");
      StationarityCertificate c = certify_point(p, x, y, cfg);
      results = report::certificate(c);
      for (auto& w : c.warnings) warnings.push_back(w);
      std::ostringstream s;
      for (const auto& [k, v] : c.systems) s << k << ": " << to_string(v.status) << "\n";
      summary(s.str());
    } else if (oracle->parsed()) {
      command = "oracle";
      auto samples = numeric_subdiff_oracle(p, x, o.radius, o.samples, o.h, cfg);
      results = report::oracle(samples);
      results["radius"] = report::number(o.radius);
      results["h"] = report::number(o.h);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "analysis failed: " << e.what() << "\n";
    return 2;
  }
  if (p.flags().restricted_sup_compactness_assumed) warnings.push_back("assumed: restricted sup-compactness");
  out << report::envelope(command, p, cfg, results, warnings).dump(2) << "\n";
  return code;
}

}  // namespace valfun
