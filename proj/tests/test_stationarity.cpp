#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "valfun/error.hpp"
#include "valfun/stationarity.hpp"
#include "valfun/valuefn.hpp"

using namespace valfun;
using fixture::vec;

namespace {

// Mixed Hessian of the Lagrangian, n×m, rebuilt from the raw derivatives.
MatrixXd lag_xy(const PointEval& e, const VectorXd& lambda) {
  MatrixXd H = e.fxy;
  for (int i = 0; i < lambda.size(); ++i) H -= lambda[i] * e.gxy[i];
  return H;
}

MatrixXd lag_yy(const PointEval& e, const VectorXd& lambda) {
  MatrixXd H = e.fyy;
  for (int i = 0; i < lambda.size(); ++i) H -= lambda[i] * e.gyy[i];
  return H;
}

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Rows of the weak stationarity system at an interior x.
double weak_residual(const PointEval& e, const VectorXd& lambda, const MpecMultipliers& m) {
  MatrixXd Hxy = lag_xy(e, lambda), Hyy = lag_yy(e, lambda);
  double r = inf_norm(e.fx + e.gx * m.alpha + Hxy * m.u);
  r = std::max(r, inf_norm(e.fy + e.gy * m.alpha + Hyy * m.u));
  r = std::max(r, inf_norm(-e.gy.transpose() * m.u - m.beta));
  return r;
}

// Rows of the interior Wolfe system.
double wolfe_residual(const PointEval& e, const VectorXd& lambda, const VectorXd& u) {
  MatrixXd Hxy = lag_xy(e, lambda);
  double r = inf_norm(e.fx - e.gx * lambda + Hxy * u);
  r = std::max(r, inf_norm(lag_yy(e, lambda) * u));
  for (int i = 0; i < lambda.size(); ++i) {
    double s = -e.gy.col(i).dot(u) - e.g[i];
    r = std::max(r, lambda[i] > 1e-6 ? std::abs(s) : std::max(0.0, -s));
  }
  return r;
}

std::string doubled(std::string doc) {
  auto at = doc.find("\nf = \"");
  REQUIRE(at != std::string::npos);
  doc.insert(at + 6, "2*(");
  auto end = doc.find("\"\n", at + 9);
  doc.insert(end, ")");
  return doc;
}

const char* kLinearX = R"([meta]
id = tilt
[dims]
n = 1
m = 1
q = 0
[objective]
f = "x1 - y1^2"
[y_search_box]
y1 = "-1,1"
)";

}  // namespace

TEST_SUITE("stationarity") {
  TEST_CASE("S-stationarity at the constrained GAN point") {
    auto p = load_builtin("gan2c");
    Point pt{fixture::gan_xbar(), vec({1, 0}), vec({0, 0})};
    auto r = find_mpec_multipliers(p, pt, MpecClass::S);
    REQUIRE(r.holds);
    CHECK((r.mult.u - vec({-1, 0})).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(r.mult.alpha.cwiseAbs().maxCoeff() <= 1e-9);
    // β = −∇_y gᵀu with ∇_y g1 = y = (1,0), ∇_y g2 = (1,0).
    CHECK((r.mult.beta - vec({1, 1})).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(r.partition.i00 == std::vector<int>{0, 1});
    PointEval e = p.eval_full(pt.x, pt.y);
    CHECK(weak_residual(e, *pt.lambda, r.mult) <= 1e-6);
  }

  TEST_CASE("unconstrained GAN reduces to the interior system") {
    auto p = load_builtin("gan2");
    VectorXd y = vec({1.3, 0});
    for (auto cls : {MpecClass::Weak, MpecClass::C, MpecClass::M, MpecClass::S}) {
      auto r = find_mpec_multipliers(p, Point{fixture::gan_xbar(), y, VectorXd(0)}, cls);
      CHECK(r.holds);
    }
    auto w = check_wolfe_system(p, fixture::gan_xbar(), y, VectorXd(0), false);
    REQUIRE(w.holds);
    CHECK((w.u + y).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(w.unique);
  }

  TEST_CASE("systems fail when only the x-gradient survives") {
    auto p = load_problem(kLinearX);
    auto r = find_mpec_multipliers(p, Point{vec({0}), vec({0}), VectorXd(0)}, MpecClass::Weak);
    CHECK_FALSE(r.holds);
    CHECK_FALSE(check_wolfe_system(p, vec({0}), vec({0}), VectorXd(0), false).holds);
  }

  TEST_CASE("Wolfe system examples") {
    auto k = load_builtin("kink");
    auto w = check_wolfe_system(k, vec({-1}), vec({0}), vec({0, 0}), false);
    REQUIRE(w.holds);
    CHECK(std::abs(w.u[0]) <= 1e-9);
    auto q = load_builtin("quad");
    CHECK_FALSE(check_wolfe_system(q, vec({1, -2}), vec({1, -2}), VectorXd(0), false).holds);
    CHECK(check_wolfe_system(q, vec({0, 0}), vec({0, 0}), VectorXd(0), false).holds);
    CHECK_THROWS_AS(check_wolfe_system(q, vec({1, -2}), vec({0, 0}), VectorXd(0), false), NotKktPoint);
  }

  TEST_CASE("conversion examples") {
    auto k = load_builtin("kink");
    auto c = convert_wolfe_to_s(k, vec({-1}), vec({0}), vec({0, 0}), vec({0}));
    CHECK(c.check.in_class);
    CHECK(c.mult.alpha.cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.mult.beta.cwiseAbs().maxCoeff() == 0.0);
    auto g = load_builtin("gan2c");
    auto w = check_wolfe_system(g, fixture::gan_xbar(), vec({1, 0}), vec({0, 0}), false);
    REQUIRE(w.holds);
    auto cg = convert_wolfe_to_s(g, fixture::gan_xbar(), vec({1, 0}), vec({0, 0}), w.u);
    CHECK(cg.check.in_class);
    CHECK(cg.check.residual <= 1e-6);
  }

  TEST_CASE("Wolfe certificates convert to S-stationarity on random quadratics") {
    std::mt19937_64 rng(100);
    int biactive = 0;
    for (int trial = 0; trial < 100; ++trial) {
      auto inst = fixture::random_concave_quadratic(rng, trial);
      auto p = load_problem(inst.document);
      PointEval e = p.eval_full(inst.x, inst.y);
      REQUIRE(wolfe_residual(e, inst.lambda, inst.u) <= 1e-8);
      auto w = check_wolfe_system(p, inst.x, inst.y, inst.lambda, false);
      REQUIRE(w.holds);
      CHECK(wolfe_residual(e, inst.lambda, w.u) <= 1e-6);
      auto c = convert_wolfe_to_s(p, inst.x, inst.y, inst.lambda, w.u);
      CHECK(c.check.in_class);
      CHECK(c.check.residual <= 1e-6);
      CHECK(weak_residual(e, inst.lambda, c.mult) <= 1e-6);
      biactive += inst.biactive;
    }
    CHECK(biactive > 10);
  }

  TEST_CASE("class hierarchy and independent residuals") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 60; ++trial) {
      auto inst = fixture::random_concave_quadratic(rng, trial);
      auto p = load_problem(inst.document);
      Point pt{inst.x, inst.y, inst.lambda};
      PointEval e = p.eval_full(inst.x, inst.y);
      bool stronger = false;
      for (auto cls : {MpecClass::S, MpecClass::M, MpecClass::C, MpecClass::Weak}) {
        auto r = find_mpec_multipliers(p, pt, cls);
        if (stronger) CHECK(r.holds);
        stronger = stronger || r.holds;
        if (!r.holds) continue;
        CHECK(weak_residual(e, inst.lambda, r.mult) <= 1e-6);
        auto chk = check_mpec_multipliers(p, pt, r.mult, cls);
        CHECK(chk.in_class);
        CHECK(chk.residual <= 1e-6);
        for (int i : r.partition.ip0) CHECK(std::abs(r.mult.alpha[i]) <= 1e-9);
        for (int i : r.partition.i0p) CHECK(std::abs(r.mult.beta[i]) <= 1e-9);
      }
      CHECK(stronger);
    }
  }

  TEST_CASE("MPEC search rejects infeasible inputs") {
    auto k = load_builtin("kink");
    CHECK_THROWS_AS(find_mpec_multipliers(k, Point{vec({-2}), vec({-3}), vec({0, 0})}, MpecClass::Weak),
                    NotMpecFeasible);
  }

  TEST_CASE("certificates at the unconstrained GAN point") {
    SolverConfig cfg;
    auto p = load_builtin("gan2");
    auto c = certify_point(p, fixture::gan_xbar(), vec({1, 0}), cfg);
    CHECK(c.solution_verified);
    CHECK(c.systems.at("nash").status == SystemStatus::Fails);
    CHECK(c.systems.at("wolfe_interior").status == SystemStatus::Holds);
    CHECK(c.systems.at("wolfe_boundary").status == SystemStatus::NotApplicable);
    CHECK(hierarchy_consistent(c));
    auto z = certify_point(p, fixture::gan_xbar(), vec({0, 0}), cfg);
    CHECK(z.systems.at("nash").status == SystemStatus::Holds);
    for (const auto& [name, v] : c.systems)
      if (v.status == SystemStatus::Holds) CHECK(v.residual <= 1e-6);
  }

  TEST_CASE("certificate at the flat kink") {
    SolverConfig cfg;
    auto c = certify_point(load_builtin("kink"), vec({-1}), vec({0}), cfg);
    CHECK(c.solution_verified);
    REQUIRE(c.systems.at("hull_caratheodory").status == SystemStatus::Holds);
    VectorXd w = c.systems.at("hull_caratheodory").multipliers.at("weights");
    CHECK(w.minCoeff() >= 0);
    CHECK(w.sum() == doctest::Approx(1.0));
    CHECK(c.systems.at("wolfe_interior").status == SystemStatus::Holds);
    for (const char* cls : {"mpec_s", "mpec_m", "mpec_c", "mpec_weak"})
      CHECK(c.systems.at(cls).status == SystemStatus::Holds);
  }

  TEST_CASE("doubling f rescales multipliers and keeps verdicts") {
    SolverConfig cfg;
    for (const char* name : {"kink", "gan2c", "budget"}) {
      auto p = load_builtin(name);
      auto p2 = load_problem(doubled(builtin_document(name)));
      VectorXd x = std::string(name) == "kink" ? vec({-2}) : std::string(name) == "budget" ? vec({1})
                                                                                          : fixture::gan_xbar();
      SolveReport s1 = solve_inner(p, x, cfg);
      CHECK(value(p2, x, cfg) == doctest::Approx(2 * s1.value).epsilon(1e-8));
      const VectorXd& y = s1.solutions.front().y;
      auto a = certify_point(p, x, y, cfg), b = certify_point(p2, x, y, cfg);
      for (const auto& [key, v] : a.systems) {
        CHECK_MESSAGE(v.status == b.systems.at(key).status, name, " ", key);
        if (v.status != SystemStatus::Holds) continue;
        if (v.multipliers.count("lambda"))
          CHECK((2 * v.multipliers.at("lambda") - b.systems.at(key).multipliers.at("lambda")).cwiseAbs().maxCoeff() <=
                1e-6);
      }
      if (p.q()) {
        VectorXd lam = s1.solutions.front().lambda;
        auto w1 = check_wolfe_system(p, x, y, lam, false), w2 = check_wolfe_system(p2, x, y, 2 * lam, false);
        CHECK(w1.holds == w2.holds);
        if (w1.holds && w1.unique && w2.unique) CHECK((w1.u - w2.u).cwiseAbs().maxCoeff() <= 1e-6);
      }
    }
  }
}
