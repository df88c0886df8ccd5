#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "valfun/linalg.hpp"
#include "valfun/multipliers.hpp"
#include "valfun/subdiff.hpp"
#include "valfun/valuefn.hpp"

using namespace valfun;
using fixture::vec;

namespace {

double min_vertex(const GeneratorSet& g) {
  double v = INFINITY;
  for (const auto& p : g.vertices) v = std::min(v, p[0]);
  return v;
}

double max_vertex(const GeneratorSet& g) {
  double v = -INFINITY;
  for (const auto& p : g.vertices) v = std::max(v, p[0]);
  return v;
}

VectorXd random_x(const std::string& name, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  VectorXd x(n);
  for (int k = 0; k < n; ++k) x[k] = u(rng);
  // The GAN objectives attain their supremum only when x + z − s̄ is parallel to s − s̄ = e2.
  if (name.rfind("gan2", 0) == 0) return fixture::gan_xbar() + vec({0, 0.2 * x[1]});
  return 2 * x;
}

}  // namespace

TEST_SUITE("subdiff") {
  TEST_CASE("limiting estimate of the kink is [-4, 1]") {
    auto p = load_builtin("kink");
    auto e = upper_estimate(p, vec({-1}), EstimateKind::Limiting);
    REQUIRE(e.pieces.size() >= 2);
    GeneratorSet all = e.pooled();
    CHECK(all.rays.empty());
    CHECK(min_vertex(all) == doctest::Approx(-4.0).epsilon(1e-6));
    CHECK(max_vertex(all) == doctest::Approx(1.0).epsilon(1e-6));
    int interior = 0;
    for (const auto& pc : e.pieces) {
      if (pc.y[0] <= -4 + 1e-3 || pc.y[0] >= 1 - 1e-3) continue;
      ++interior;
      CHECK(min_vertex(pc.set) == doctest::Approx(-4.0).epsilon(1e-6));
      CHECK(max_vertex(pc.set) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(interior > 0);
  }

  TEST_CASE("membership in the kink estimate") {
    auto e = upper_estimate(load_builtin("kink"), vec({-1}), EstimateKind::Limiting);
    CHECK(estimate_contains(e, vec({1.0})).where == Containment::InsidePiece);
    CHECK(estimate_contains(e, vec({-4.0})).where == Containment::InsidePiece);
    CHECK(estimate_contains(e, vec({2.0})).where == Containment::Outside);
  }

  TEST_CASE("horizon estimate of the kink agrees with brute force") {
    auto p = load_builtin("kink");
    SolveReport sr = solve_inner(p, vec({-1}));
    auto e = upper_estimate(p, vec({-1}), EstimateKind::Horizon, &sr);
    REQUIRE_FALSE(e.pieces.empty());
    for (const auto& pc : e.pieces) {
      // Ξ^0 at λ = 0: -∇g_i u - 0·g_i >= 0 with ∇g = (1, -1), and ∇²_xy L = 1.
      MatrixXd A(2, 1);
      A << 1, -1;
      auto oracle_pts = oracle::brute_force_vertices(A, vec({0, 0}));
      CHECK(same_point_sets(pc.set.vertices, oracle_pts, 1e-9));
      CHECK(pc.set.rays.empty());
    }
  }

  TEST_CASE("frechet estimate of the squared distance is the origin") {
    auto p = load_builtin("sqdist");
    VectorXd x = vec({0.4, -1.3});
    auto e = upper_estimate(p, x, EstimateKind::Frechet, nullptr, Point{x, x, VectorXd(0)});
    REQUIRE(e.pieces.size() == 1);
    REQUIRE(e.pieces[0].set.vertices.size() == 1);
    CHECK(e.pieces[0].set.vertices[0].norm() <= 1e-12);
    CHECK(e.pieces[0].set.rays.empty());
  }

  TEST_CASE("frechet estimate of the unconstrained GAN contains the origin") {
    auto p = load_builtin("gan2");
    VectorXd x = fixture::gan_xbar();
    SolveReport sr = solve_inner(p, x);
    const VectorXd& y = sr.solutions.front().y;
    auto e = upper_estimate(p, x, EstimateKind::Frechet, &sr);
    REQUIRE(e.pieces.size() == 1);
    CHECK(estimate_contains(e, VectorXd::Zero(2)).where == Containment::InsidePiece);

    // Affine image {∇_x f + ∇²_xy f N w} rebuilt from finite differences.
    const double h = 1e-5;
    auto fx = [&](const VectorXd& xx) { return p.f(xx, y); };
    VectorXd gx = oracle::central_gradient(fx, x, h);
    MatrixXd Hxy(2, 2), Hyy(2, 2);
    for (int j = 0; j < 2; ++j) {
      VectorXd yp = y, ym = y;
      yp[j] += h;
      ym[j] -= h;
      Hxy.col(j) = (oracle::central_gradient([&](const VectorXd& xx) { return p.f(xx, yp); }, x, h) -
                    oracle::central_gradient([&](const VectorXd& xx) { return p.f(xx, ym); }, x, h)) /
                   (2 * h);
      Hyy.col(j) = (oracle::central_gradient([&](const VectorXd& yy) { return p.f(x, yy); }, yp, h) -
                    oracle::central_gradient([&](const VectorXd& yy) { return p.f(x, yy); }, ym, h)) /
                   (2 * h);
    }
    MatrixXd N = null_space(Hyy, 1e-4);
    REQUIRE(N.cols() == 1);
    MatrixXd D = Hxy * N;
    auto in_image = [&](const VectorXd& v, bool affine) {
      VectorXd r = affine ? VectorXd(v - gx) : v;
      VectorXd w = D.colPivHouseholderQr().solve(r);
      return (D * w - r).norm() <= 1e-4 * std::max(1.0, r.norm());
    };
    for (const auto& v : e.pieces[0].set.vertices) CHECK(in_image(v, true));
    for (const auto& r : e.pieces[0].set.rays) CHECK(in_image(r, false));
    // The image is a line through the origin along e1, not a single point.
    CHECK(e.pieces[0].set.rays.size() == 2);
    CHECK(std::abs(D(1, 0)) <= 1e-4 * D.norm());
  }

  TEST_CASE("horizon estimates contain the origin") {
    std::mt19937_64 rng(21);
    for (const auto& name : builtin_names()) {
      auto p = load_builtin(name);
      for (int t = 0; t < 4; ++t) {
        VectorXd x = random_x(name, p.n(), rng);
        auto e = upper_estimate(p, x, EstimateKind::Horizon);
        CHECK(estimate_contains(e, VectorXd::Zero(p.n())).where == Containment::InsidePiece);
      }
    }
  }

  TEST_CASE("clarke hull contains limiting contains frechet") {
    std::mt19937_64 rng(22);
    int checked = 0;
    for (const auto& name : builtin_names()) {
      auto p = load_builtin(name);
      for (int t = 0; t < 4; ++t) {
        VectorXd x = random_x(name, p.n(), rng);
        SolveReport sr = solve_inner(p, x);
        auto fr = upper_estimate(p, x, EstimateKind::Frechet, &sr);
        auto li = upper_estimate(p, x, EstimateKind::Limiting, &sr);
        auto cl = upper_estimate(p, x, EstimateKind::ClarkeHull, &sr);
        GeneratorSet hull = cl.pooled();
        for (const auto& pc : li.pieces) {
          for (const auto& v : pc.set.vertices) CHECK(generator_membership(v, hull, 1e-6).inside);
          for (const auto& r : pc.set.rays) {
            GeneratorSet shifted = hull;
            VectorXd base = hull.vertices.front();
            CHECK(generator_membership(base + r, shifted, 1e-6).inside);
          }
        }
        for (const auto& pc : fr.pieces)
          for (const auto& v : pc.set.vertices) CHECK(estimate_contains(li, v).where == Containment::InsidePiece);
        ++checked;
      }
    }
    CHECK(checked == 4 * static_cast<int>(builtin_names().size()));
  }

  TEST_CASE("separable problems have a point frechet estimate") {
    auto p = load_builtin("budget");
    REQUIRE(p.flags().separable_xy);
    // V(x) = -(x-2)^2/2 for x < 2 and 0 above; ∇_x L = λ.
    for (double x : {-1.0, 0.5, 1.0, 3.0, 5.0}) {
      auto e = upper_estimate(p, vec({x}), EstimateKind::Frechet);
      REQUIRE(e.pieces.size() == 1);
      REQUIRE(e.pieces[0].set.vertices.size() == 1);
      CHECK(e.pieces[0].set.rays.empty());
      double expected = x < 2 ? 2 - x : 0.0;
      CHECK(e.pieces[0].set.vertices[0][0] == doctest::Approx(expected).epsilon(1e-6));
    }
  }

  TEST_CASE("strict differentiability when the limiting estimate is a point") {
    SolverConfig cfg;
    struct Case {
      const char* name;
      VectorXd x;
    };
    for (const Case& c : {Case{"quad", vec({1, 2})}, Case{"budget", vec({1})}, Case{"kink", vec({-2})},
                          Case{"sqdist", vec({0.2, 0.1})}}) {
      auto p = load_builtin(c.name);
      auto e = upper_estimate(p, c.x, EstimateKind::Limiting);
      GeneratorSet all = e.pooled();
      REQUIRE(all.vertices.size() == 1);
      REQUIRE(all.rays.empty());
      auto s = numeric_subdiff_oracle(p, c.x, 1e-9, 1, 1e-5, cfg);
      REQUIRE(s.front().smooth);
      CHECK((s.front().grad - all.vertices[0]).cwiseAbs().maxCoeff() <= 1e-4);
    }
  }

  TEST_CASE("sampled gradients at the kink lie in the limiting estimate") {
    SolverConfig cfg;
    auto p = load_builtin("kink");
    auto e = upper_estimate(p, vec({-1}), EstimateKind::Limiting);
    int smooth = 0;
    for (const auto& s : numeric_subdiff_oracle(p, vec({-1}), 0.01, 30, 1e-6, cfg)) {
      if (!s.smooth) continue;
      ++smooth;
      CHECK(estimate_contains(e, s.grad, 1e-4).where != Containment::Outside);
    }
    CHECK(smooth > 10);
  }

  TEST_CASE("sampled gradients near the unconstrained GAN point lie in the limiting estimate") {
    SolverConfig cfg;
    auto p = load_builtin("gan2");
    auto e = upper_estimate(p, fixture::gan_xbar(), EstimateKind::Limiting);
    int smooth = 0;
    for (const auto& s : numeric_subdiff_oracle(p, fixture::gan_xbar(), 1e-5, 12, 1e-8, cfg)) {
      if (!s.smooth) continue;
      ++smooth;
      CHECK(estimate_contains(e, s.grad, 1e-4).where != Containment::Outside);
    }
    CHECK(smooth > 0);
  }

  TEST_CASE("lipschitz kinds at a smooth kink point") {
    auto p = load_builtin("kink");
    // x = -2: y = -3, Σ = {(0, 1)}, ∇_x L = y + λ2 = -2 = V'(-2).
    auto e1 = upper_estimate(p, vec({-2}), EstimateKind::LipschitzEqn1);
    REQUIRE(e1.pieces.size() == 1);
    REQUIRE(e1.pieces[0].set.vertices.size() == 1);
    CHECK(e1.pieces[0].set.vertices[0][0] == doctest::Approx(-2.0).epsilon(1e-6));
    auto e2 = upper_estimate(p, vec({-2}), EstimateKind::LipschitzHorizonEqn2);
    REQUIRE(e2.pieces.size() == 1);
    CHECK(same_point_sets(e2.pieces[0].set.vertices, {vec({0})}, 1e-9));
    CHECK(e2.pieces[0].set.rays.empty());
  }

  TEST_CASE("singular condition") {
    auto k = load_builtin("kink");
    CHECK(singular_condition_check(k, vec({-1}), vec({0})).holds);
    CHECK(singular_condition_check(k, vec({-1}), vec({1})).holds);
    auto p = load_problem(R"([meta]
id = singular
[dims]
n = 1
m = 1
q = 1
[objective]
f = "-y1^2"
[constraints]
g1 = "y1^2 - x1"
[y_search_box]
y1 = "-1,1"
)");
    auto r = singular_condition_check(p, vec({0}), vec({0}));
    REQUIRE_FALSE(r.holds);
    CHECK(r.witness_lambda[0] > 0);
    CHECK(r.witness_image[0] == doctest::Approx(-r.witness_lambda[0]));
  }

  TEST_CASE("estimate kind names round-trip") {
    for (auto k : {EstimateKind::Frechet, EstimateKind::Limiting, EstimateKind::Horizon, EstimateKind::LipschitzEqn1,
                   EstimateKind::LipschitzHorizonEqn2, EstimateKind::ClarkeHull})
      CHECK(estimate_kind_from_string(to_string(k)) == k);
  }
}
