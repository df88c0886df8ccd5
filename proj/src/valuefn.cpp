#include "valfun/valuefn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "valfun/error.hpp"
#include "valfun/local_solver.hpp"

namespace valfun {

namespace {

void check_x(const ParametricProblem& p, const VectorXd& x) {
  if (x.size() != p.n()) throw DimensionMismatch("x has length " + std::to_string(x.size()) + ", expected " +
                                                 std::to_string(p.n()));
  const Box& X = p.x_domain();
  for (int k = 0; k < p.n(); ++k)
    if (!(x[k] >= X[k].lo && x[k] <= X[k].hi))
      throw InfeasiblePoint("x" + std::to_string(k + 1) + " lies outside x_domain");
}

std::vector<VectorXd> grid(const Box& box, int density) {
  const int m = static_cast<int>(box.size());
  std::vector<VectorXd> out;
  long total = 1;
  for (int j = 0; j < m; ++j) total *= density;
  if (total > 200000) throw Unsupported("grid_density^m exceeds 200000 points");
  std::vector<int> idx(m, 0);
  for (long t = 0; t < total; ++t) {
    VectorXd y(m);
    for (int j = 0; j < m; ++j) {
      double frac = density == 1 ? 0.5 : static_cast<double>(idx[j]) / (density - 1);
      y[j] = box[j].lo + frac * (box[j].hi - box[j].lo);
    }
    out.push_back(y);
    for (int j = 0; j < m; ++j) {
      if (++idx[j] < density) break;
      idx[j] = 0;
    }
  }
  return out;
}

bool lex_less(const VectorXd& a, const VectorXd& b) {
  for (int j = 0; j < a.size(); ++j)
    if (a[j] != b[j]) return a[j] < b[j];
  return false;
}

// Coordinate extremes first, then farthest-point fill.
std::vector<std::size_t> select_representatives(const std::vector<VectorXd>& ys, std::size_t cap) {
  std::vector<std::size_t> chosen;
  auto take = [&](std::size_t i) {
    if (chosen.size() < cap && std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
  };
  const int m = static_cast<int>(ys.front().size());
  for (int j = 0; j < m; ++j) {
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < ys.size(); ++i) {
      if (ys[i][j] < ys[lo][j]) lo = i;
      if (ys[i][j] > ys[hi][j]) hi = i;
    }
    take(lo);
    take(hi);
  }
  while (chosen.size() < cap) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t c : chosen) d = std::min(d, (ys[i] - ys[c]).norm());
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best_d <= 0.0) break;
    chosen.push_back(best);
  }
  return chosen;
}

}  // namespace

SolveReport solve_inner(const ParametricProblem& p, const VectorXd& x) { return solve_inner(p, x, p.solver_defaults()); }

SolveReport solve_inner(const ParametricProblem& p, const VectorXd& x, const SolverConfig& cfg) {
  check_x(p, x);
  if (cfg.n_starts < 1 || cfg.grid_density < 1 || cfg.max_iter < 1 || cfg.max_clusters < 1)
    throw Error("solver config needs n_starts, grid_density, max_iter, max_clusters >= 1");
  const Box& box = p.y_search_box();
  SolveReport rep;
  rep.x = x;
  rep.config = cfg;

  std::vector<VectorXd> starts = grid(box, cfg.grid_density);
  rep.grid_points = static_cast<int>(starts.size());
  double grid_best = -std::numeric_limits<double>::infinity();
  for (const auto& y : starts) {
    try {
      VectorXd g = p.g(x, y);
      if (g.size() && g.maxCoeff() > cfg.activity_tol) continue;
      double f = p.f(x, y);
      if (!std::isfinite(f)) continue;
      ++rep.grid_feasible;
      grid_best = std::max(grid_best, f);
    } catch (const DomainError&) {
    }
  }
  if (rep.grid_feasible == 0) throw NoFeasiblePoint("no grid point satisfies g <= activity_tol");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::uniform_real_distribution<double>> unif;
  for (const auto& iv : box) unif.emplace_back(iv.lo, iv.hi);
  for (int s = 0; s < cfg.n_starts; ++s) {
    VectorXd y(p.m());
    for (int j = 0; j < p.m(); ++j) y[j] = unif[j](rng);
    starts.push_back(y);
  }
  rep.starts = static_cast<int>(starts.size());

  std::vector<AscentResult> done;
  for (const auto& y0 : starts) {
    AscentResult a = penalty_ascent(p, x, y0, cfg);
    rep.iterations += a.iterations;
    rep.max_rounds = std::max(rep.max_rounds, a.rounds);
    if (a.ok && a.violation <= cfg.activity_tol && std::isfinite(a.f)) done.push_back(std::move(a));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : done) best = std::max(best, a.f);

  if (done.empty()) throw NoFeasiblePoint("no start reached a feasible point");
  rep.value = std::max(best, grid_best);

  // Candidates by descending f; a candidate joins the first representative within cluster_tol.
  std::vector<const AscentResult*> cand;
  for (const auto& a : done)
    if (a.f >= best - cfg.value_tol) cand.push_back(&a);
  std::stable_sort(cand.begin(), cand.end(), [](auto* a, auto* b) { return a->f > b->f; });
  rep.candidates = static_cast<int>(cand.size());
  std::vector<VectorXd> reps;
  for (auto* a : cand) {
    bool merged = false;
    for (const auto& r : reps)
      if ((r - a->y).norm() < cfg.cluster_tol) {
        merged = true;
        break;
      }
    if (!merged) reps.push_back(a->y);
  }
  rep.clusters = static_cast<int>(reps.size());
  std::vector<std::size_t> keep(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) keep[i] = i;
  if (reps.size() > static_cast<std::size_t>(cfg.max_clusters)) {
    keep = select_representatives(reps, cfg.max_clusters);
    rep.truncated = true;
  }
  for (std::size_t i : keep) {
    Solution s;
    s.y = reps[i];
    s.f = p.f(x, s.y);
    KktResidual k = kkt_residual(p, x, s.y, cfg.activity_tol);
    s.kkt_residual = k.residual;
    s.lambda = k.lambda;
    s.on_box_boundary = k.on_box_boundary;
    rep.solutions.push_back(std::move(s));
  }
  std::sort(rep.solutions.begin(), rep.solutions.end(), [](const Solution& a, const Solution& b) {
    return lex_less(a.y, b.y);
  });
  return rep;
}

double value(const ParametricProblem& p, const VectorXd& x, const SolverConfig& cfg) {
  return solve_inner(p, x, cfg).value;
}

double value(const ParametricProblem& p, const VectorXd& x) { return solve_inner(p, x).value; }

std::vector<GradientSample> numeric_subdiff_oracle(const ParametricProblem& p, const VectorXd& x, double radius,
                                                   int n_samples, double h, const SolverConfig& cfg) {
  if (!(radius > 0) || !(h > 0)) throw Error("oracle: radius and h must be positive");
  const int n = p.n();
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<GradientSample> out;
  for (int s = 0; s < n_samples; ++s) {
    VectorXd dir(n);
    for (int k = 0; k < n; ++k) dir[k] = normal(rng);
    double nr = dir.norm();
    if (nr == 0.0) continue;
    dir *= radius * std::pow(unif(rng), 1.0 / n) / nr;
    GradientSample gs;
    gs.x = x + dir;
    gs.grad = VectorXd(n);
    double v0 = value(p, gs.x, cfg);
    for (int k = 0; k < n; ++k) {
      VectorXd xp = gs.x, xm = gs.x;
      xp[k] += h;
      xm[k] -= h;
      double fwd = (value(p, xp, cfg) - v0) / h;
      double bwd = (v0 - value(p, xm, cfg)) / h;
      gs.grad[k] = 0.5 * (fwd + bwd);
      gs.score = std::max(gs.score, std::abs(fwd - bwd));
    }
    gs.smooth = gs.score <= 10 * h;
    out.push_back(std::move(gs));
  }
  return out;
}

}  // namespace valfun
