#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "valfun/error.hpp"
#include "valfun/valuefn.hpp"
#include "valfun/wolfe.hpp"

using namespace valfun;
using fixture::vec;

TEST_SUITE("wolfe") {
  TEST_CASE("dual values on closed-form instances") {
    SolverConfig cfg;
    auto q = dual_value(load_builtin("quad"), vec({1, 2}), cfg);
    CHECK(q.value == doctest::Approx(2.5).epsilon(1e-9));
    // kink at x = -2: on the dual feasible set L = 2λ1 + 3λ2 with λ2 = λ1 + 1, so V_D = 3.
    auto k = dual_value(load_builtin("kink"), vec({-2}), cfg);
    // Best-found may undershoot by |y| times the 1e-6 feasibility tolerance on ∇_y L.
    CHECK(k.value == doctest::Approx(3.0).epsilon(1e-6));
    auto s = dual_value(load_builtin("sqdist"), vec({-1, 4}), cfg);
    CHECK(std::abs(s.value) <= 1e-9);
  }

  TEST_CASE("reported minimizers are dual feasible") {
    SolverConfig cfg;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-2, 2);
    for (const char* name : {"quad", "sqdist", "kink", "budget", "gan2c"}) {
      auto p = load_builtin(name);
      for (int t = 0; t < 4; ++t) {
        VectorXd x(p.n());
        for (int k = 0; k < p.n(); ++k) x[k] = u(rng);
        if (std::string(name) == "gan2c") x = fixture::gan_xbar() + 0.05 * x;
        DualResult r = dual_value(p, x, cfg);
        DualProblem D(p, x);
        CHECK(D.constraint(r.y, r.lambda).cwiseAbs().maxCoeff() <= 1e-6);
        if (p.q()) CHECK(r.lambda.minCoeff() >= -1e-8);
        CHECK(r.kkt_residual <= 1e-6);
        CHECK(D.objective(r.y, r.lambda) == doctest::Approx(r.value).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("more seeds never raise the best-found value") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2, 2);
    for (const char* name : {"kink", "budget", "gan2c"}) {
      auto p = load_builtin(name);
      for (int t = 0; t < 4; ++t) {
        VectorXd x(p.n());
        for (int k = 0; k < p.n(); ++k) x[k] = u(rng);
        if (std::string(name) == "gan2c") x = fixture::gan_xbar() + 0.05 * x;
        double prev = std::numeric_limits<double>::infinity();
        for (int starts : {1, 4, 16}) {
          SolverConfig cfg;
          cfg.n_starts = starts;
          double v = dual_value(p, x, cfg).value;
          CHECK(v <= prev + 1e-9);
          prev = v;
        }
      }
    }
  }

  TEST_CASE("the Lagrangian equals f at inner KKT points") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-2, 2);
    int checked = 0;
    for (const auto& name : builtin_names()) {
      auto p = load_builtin(name);
      for (int t = 0; t < 5; ++t) {
        VectorXd x(p.n());
        for (int k = 0; k < p.n(); ++k) x[k] = u(rng);
        if (name.rfind("gan2", 0) == 0) x = fixture::gan_xbar() + 0.1 * x;
        DualProblem D(p, x);
        for (const auto& s : solve_inner(p, x).solutions) {
          if (s.kkt_residual > 1e-6 || s.on_box_boundary) continue;
          CHECK(std::abs(D.objective(s.y, s.lambda) - p.f(x, s.y)) <= 1e-8);
          ++checked;
        }
      }
    }
    CHECK(checked > 20);
  }

  TEST_CASE("dual problem agrees with the Lagrangian evaluator") {
    auto p = load_builtin("gan2c");
    VectorXd x = fixture::gan_xbar();
    DualProblem D(p, x);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 20; ++t) {
      VectorXd y = vec({u(rng), u(rng)}), l = vec({1 + u(rng), 1 + u(rng)});
      LagrangianEval L = eval_lagrangian(p, Point{x, y, l}, 1);
      CHECK(D.objective(y, l) == doctest::Approx(L.value).epsilon(1e-14));
      CHECK((D.constraint(y, l) - L.grad_y).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }

  TEST_CASE("weak duality on the spec instances") {
    SolverConfig cfg;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<VectorXd> xs;
    for (int t = 0; t < 20; ++t) xs.push_back(vec({u(rng), u(rng)}));
    auto q = check_weak_duality(load_builtin("quad"), xs, cfg);
    CHECK(q.all_ok);
    for (const auto& d : q.points) {
      CHECK(d.verified);
      CHECK(std::abs(d.margin) <= 1e-6);
    }
    auto k = check_weak_duality(load_builtin("kink"), {vec({-3}), vec({-2}), vec({0}), vec({1})}, cfg);
    CHECK(k.all_ok);
    for (const auto& d : k.points) {
      CHECK(d.verified);
      CHECK(d.margin >= -1e-6);
    }
  }

  TEST_CASE("weak duality needs concavity") {
    auto p = load_problem(R"([meta]
id = convex
[dims]
n = 1
m = 1
q = 0
[objective]
f = "y1^2 + x1*y1"
[y_search_box]
y1 = "-1,1"
)");
    CHECK_THROWS_AS(check_weak_duality(p, {vec({0})}, SolverConfig{}), Unsupported);
  }
}
