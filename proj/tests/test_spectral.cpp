#include <catch2/catch_amalgamated.hpp>

#include "nodalab/fields.hpp"
#include "nodalab/spectral.hpp"

using namespace nodalab;

namespace {

PolygonDomain unit_square() { return PolygonDomain({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}); }

PolygonDomain regular_polygon(int n, double r = 1.0) {
  std::vector<Vec2> loop(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2 * kPi * i / n;
    loop[i] = {r * std::cos(a), r * std::sin(a)};
  }
  return PolygonDomain({loop});
}

constexpr double kLambda11 = 2 * kPi * kPi;  // 19.7392088...

}  // namespace

TEST_CASE("reference element matrices") {
  // single triangle (0,0),(1,0),(0,1) without Dirichlet elimination
  TriangleMesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.boundary_vertex = {1, 1, 1};
  const auto sys = assemble(m, false);
  // consistent P1 mass: total = area, trace = area/2, row sums = area/3
  CHECK(sys.M.sum() == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(sys.M.trace() == Catch::Approx(0.25).epsilon(1e-14));
  std::vector<double> ones{1, 1, 1};
  const auto Mrow = sys.M.multiply(ones);
  for (double v : Mrow) CHECK(v == Catch::Approx(0.5 / 3).epsilon(1e-14));
  // constants lie in the stiffness kernel
  const auto Krow = sys.K.multiply(ones);
  for (double v : Krow) CHECK(v == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("stiffness kernel on a real mesh") {
  const auto mesh = triangulate(unit_square(), 0.1);
  const auto sys = assemble(mesh, false);
  std::vector<double> ones(sys.n_dofs, 1.0);
  CHECK(std::abs(sys.K.quadratic_form(ones)) < 1e-10);
  CHECK(sys.M.sum() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rayleigh quotient of the interpolated ground state") {
  const auto mesh = triangulate(unit_square(), 0.05);
  const auto sys = assemble(mesh, true);
  std::vector<double> u(sys.n_dofs, 0.0);
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    const int d = sys.dof_map[v];
    if (d < 0) continue;
    u[d] = std::sin(kPi * mesh.vertices[v].x) * std::sin(kPi * mesh.vertices[v].y);
  }
  const double rq = sys.K.quadratic_form(u) / sys.M.quadratic_form(u);
  CHECK(rq == Catch::Approx(kLambda11).epsilon(0.01));
}

TEST_CASE("unit square eigenvalues") {
  const auto mesh = triangulate(unit_square(), 0.02);
  const auto sys = assemble(mesh);
  const auto pairs = solve_eigen(sys.K, sys.M, 10, 1e-8);
  REQUIRE(pairs.size() == 10);
  CHECK(pairs[0].lambda == Catch::Approx(kLambda11).epsilon(0.005));

  const double pattern[10] = {2, 5, 5, 8, 10, 10, 13, 13, 17, 17};
  for (int i = 0; i < 10; ++i) {
    CHECK(pairs[i].lambda == Catch::Approx(pattern[i] * kPi * kPi).epsilon(0.015));
    CHECK(pairs[i].residual <= 1e-8);
  }
  // degenerate pairs agree much more tightly than the discretization error
  CHECK(pairs[1].lambda == Catch::Approx(pairs[2].lambda).epsilon(0.005));
  CHECK(pairs[4].lambda == Catch::Approx(pairs[5].lambda).epsilon(0.005));

  // M-orthonormality of the returned basis
  for (int i = 0; i < 10; ++i)
    for (int j = i; j < 10; ++j) {
      std::vector<double> Mu(sys.n_dofs);
      sys.M.multiply(pairs[j].coeffs.data(), Mu.data());
      double dot = 0;
      for (int k = 0; k < sys.n_dofs; ++k) dot += pairs[i].coeffs[k] * Mu[k];
      CHECK(dot == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-8));
    }
}

TEST_CASE("eigenvalue convergence order under refinement") {
  const auto mesh = triangulate(unit_square(), 0.08);
  const auto sys0 = assemble(mesh);
  const auto refined = refine(mesh);
  const auto sys1 = assemble(refined);
  const double l0 = solve_eigen(sys0.K, sys0.M, 1)[0].lambda;
  const double l1 = solve_eigen(sys1.K, sys1.M, 1)[0].lambda;
  const double ratio = (l0 - kLambda11) / (l1 - kLambda11);
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);
}

TEST_CASE("bessel zeros and the disk eigenvalue") {
  CHECK(bessel_zero(0, 1) == Catch::Approx(2.404825557695773).epsilon(1e-12));
  CHECK(bessel_zero(0, 2) == Catch::Approx(5.520078110286311).epsilon(1e-12));
  CHECK(bessel_zero(1, 1) == Catch::Approx(3.831705970207512).epsilon(1e-12));
  for (int k = 0; k <= 4; ++k)
    for (int s = 1; s <= 4; ++s)
      CHECK(std::abs(bessel_j(k, bessel_zero(k, s))) < 1e-12);

  const auto mesh = triangulate(regular_polygon(256), 0.05);
  const auto sys = assemble(mesh);
  const auto pairs = solve_eigen(sys.K, sys.M, 1);
  CHECK(pairs[0].lambda == Catch::Approx(sq(bessel_zero(0, 1))).epsilon(0.01));
}

TEST_CASE("first eigenvalue dominates the diameter-disk bound") {
  const auto square_rep = first_eigenvalue_monotonicity_check(unit_square());
  CHECK(square_rep.holds);
  CHECK(square_rep.disk_bound == Catch::Approx(sq(2.404825557695773 / std::sqrt(2.0))).epsilon(1e-9));
  CHECK(square_rep.lambda1 == Catch::Approx(kLambda11).epsilon(0.01));

  const PolygonDomain lshape({{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}});
  const auto l_rep = first_eigenvalue_monotonicity_check(lshape, 0.02);
  CHECK(l_rep.holds);
  // 4x the classical L-shape value 9.6397 (legs of width 1/2)
  CHECK(l_rep.lambda1 == Catch::Approx(4 * 9.6397238).epsilon(0.01));
}

TEST_CASE("solver rejects bad requests") {
  const auto mesh = triangulate(unit_square(), 0.2);
  const auto sys = assemble(mesh);
  CHECK_THROWS_AS(solve_eigen(sys.K, sys.M, 0), std::invalid_argument);
  CHECK_THROWS_AS(solve_eigen(sys.K, sys.M, sys.n_dofs + 5), std::invalid_argument);
}
