#include "valfun/report.hpp"

#include <cmath>

namespace valfun::report {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v == 0.0 ? 0.0 : v;
}

json vector(const VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

namespace {

json one_based(const std::vector<int>& idx) {
  json a = json::array();
  for (int i : idx) a.push_back(i + 1);
  return a;
}

json generators(const GeneratorSet& g) {
  json v = json::array(), r = json::array();
  for (const auto& p : g.vertices) v.push_back(vector(p));
  for (const auto& p : g.rays) r.push_back(vector(p));
  return {{"vertices", v}, {"rays", r}};
}

json strings(const std::vector<std::string>& s) {
  json a = json::array();
  for (const auto& x : s) a.push_back(x);
  return a;
}

json interval(const Interval& iv) { return {{"lo", number(iv.lo)}, {"hi", number(iv.hi)}}; }

}  // namespace

json problem(const ParametricProblem& p) {
  json params = json::object();
  for (const auto& [k, v] : p.params()) params[k] = number(v);
  json xdom = json::array(), ybox = json::array(), g = json::array();
  for (const auto& iv : p.x_domain()) xdom.push_back(interval(iv));
  for (const auto& iv : p.y_search_box()) ybox.push_back(interval(iv));
  for (const auto& c : p.constraints()) g.push_back(expr::print(c));
  return {{"id", p.id()},
          {"n", p.n()},
          {"m", p.m()},
          {"q", p.q()},
          {"params", params},
          {"objective", expr::print(p.objective())},
          {"constraints", g},
          {"x_domain", xdom},
          {"y_search_box", ybox},
          {"flags",
           {{"concave_in_y", p.flags().concave_in_y},
            {"separable_xy", p.flags().separable_xy},
            {"restricted_sup_compactness_assumed", p.flags().restricted_sup_compactness_assumed}}}};
}

json config(const SolverConfig& c) {
  return {{"n_starts", c.n_starts},       {"grid_density", c.grid_density}, {"max_iter", c.max_iter},
          {"seed", c.seed},               {"cluster_tol", number(c.cluster_tol)},
          {"max_clusters", c.max_clusters}, {"value_tol", number(c.value_tol)},
          {"activity_tol", number(c.activity_tol)}};
}

json solve(const SolveReport& r) {
  json sols = json::array();
  for (const auto& s : r.solutions)
    sols.push_back({{"y", vector(s.y)},
                    {"f", number(s.f)},
                    {"kkt_residual", number(s.kkt_residual)},
                    {"lambda", vector(s.lambda)},
                    {"on_box_boundary", s.on_box_boundary}});
  return {{"x", vector(r.x)},
          {"value", number(r.value)},
          {"solutions", sols},
          {"diagnostics",
           {{"starts", r.starts},
            {"iterations", r.iterations},
            {"max_penalty_rounds", r.max_rounds},
            {"grid_points", r.grid_points},
            {"grid_feasible", r.grid_feasible},
            {"candidates", r.candidates},
            {"clusters", r.clusters},
            {"truncated", r.truncated}}}};
}

json estimate(const EstimateSet& e) {
  json pieces = json::array();
  for (const auto& pc : e.pieces) {
    json j = generators(pc.set);
    j["y"] = vector(pc.y);
    j["lambda"] = vector(pc.lambda);
    pieces.push_back(j);
  }
  GeneratorSet all = e.pooled();
  json out = {{"kind", to_string(e.kind)}, {"pieces", pieces}, {"assumptions", strings(e.assumptions)}};
  if (e.n == 1 && all.rays.empty() && !all.vertices.empty()) {
    double lo = all.vertices.front()[0], hi = lo;
    for (const auto& v : all.vertices) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    out["hull_interval"] = {number(lo), number(hi)};
  }
  return out;
}

json cq(const CqReport& r) {
  json fam = json::array();
  for (int i = 0; i < r.family.rows(); ++i) fam.push_back(vector(r.family.row(i).transpose()));
  json out = {{"kind", to_string(r.kind)},
              {"verdict", to_string(r.verdict)},
              {"rank", r.rank},
              {"family_size", r.family_size},
              {"family", fam},
              {"labels", strings(r.labels)},
              {"rank_tol", number(r.rank_tol)},
              {"activity_tol", number(r.activity_tol)}};
  if (r.witness.size()) out["witness"] = vector(r.witness);
  if (r.kind == CqKind::CrcqSampled) {
    out["samples"] = r.samples;
    if (r.verdict == CqVerdict::Fails) {
      out["witness_subset"] = one_based(r.witness_subset);
      out["sample_x"] = vector(r.sample_x);
      out["sample_y"] = vector(r.sample_y);
      out["rank_center"] = r.rank_center;
      out["rank_sample"] = r.rank_sample;
    }
  }
  return out;
}

json dual(const DualResult& d) {
  return {{"value", number(d.value)},
          {"label", "best-found upper bound on V_D"},
          {"y", vector(d.y)},
          {"lambda", vector(d.lambda)},
          {"kkt_residual", number(d.kkt_residual)},
          {"possibly_unbounded", d.possibly_unbounded},
          {"starts", d.starts},
          {"converged", d.converged}};
}

json weak_duality(const WeakDualityReport& r) {
  json pts = json::array();
  for (const auto& d : r.points) {
    json j = {{"x", vector(d.x)}, {"primal", number(d.primal)}, {"ok", d.ok}, {"verified", d.verified}};
    if (d.verified) {
      j["dual"] = number(d.dual);
      j["margin"] = number(d.margin);
    }
    if (!d.note.empty()) j["note"] = d.note;
    pts.push_back(j);
  }
  json out = {{"points", pts}, {"all_ok", r.all_ok}};
  if (std::isfinite(r.min_margin)) out["min_margin"] = number(r.min_margin);
  return out;
}

json wolfe(const WolfeResult& w) {
  json out = {{"holds", w.holds}, {"residual", number(w.residual)}, {"unique", w.unique}};
  if (w.holds) {
    out["u"] = vector(w.u);
    out["nu"] = vector(w.nu);
  } else {
    out["reason"] = w.reason;
  }
  return out;
}

json mpec(const MpecMultipliers& m) {
  return {{"u", vector(m.u)}, {"alpha", vector(m.alpha)}, {"beta", vector(m.beta)}, {"nu", vector(m.nu)}};
}

json partition(const IndexPartition& p) {
  return {{"I_0+", one_based(p.i0p)}, {"I_+0", one_based(p.ip0)}, {"I_00", one_based(p.i00)}};
}

json certificate(const StationarityCertificate& c) {
  json systems = json::object();
  for (const auto& [k, v] : c.systems) {
    json j = {{"status", to_string(v.status)}};
    if (v.status == SystemStatus::Holds) {
      json mm = json::object();
      for (const auto& [name, vec] : v.multipliers) mm[name] = vector(vec);
      j["multipliers"] = mm;
      j["residual"] = number(v.residual);
    } else {
      j["reason"] = v.reason;
    }
    systems[k] = j;
  }
  return {{"x", vector(c.candidate.x)},
          {"y", vector(c.candidate.y)},
          {"systems", systems},
          {"partition", partition(c.partition)},
          {"solution_verified", c.solution_verified},
          {"assumptions", strings(c.assumptions)},
          {"tolerances", {{"activity_tol", number(c.activity_tol)}, {"m_epsilon", number(c.epsilon)}}}};
}

json oracle(const std::vector<GradientSample>& samples) {
  json a = json::array();
  int smooth = 0;
  for (const auto& s : samples) {
    a.push_back({{"x", vector(s.x)}, {"grad", vector(s.grad)}, {"score", number(s.score)}, {"smooth", s.smooth}});
    smooth += s.smooth;
  }
  return {{"samples", a}, {"smooth_count", smooth}};
}

json envelope(const std::string& command, const ParametricProblem& p, const SolverConfig& c, json results,
              json warnings) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"problem", problem(p)},
          {"config", config(c)},
          {"results", std::move(results)},
          {"warnings", std::move(warnings)}};
}

}  // namespace valfun::report
