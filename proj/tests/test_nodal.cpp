#include <catch2/catch_amalgamated.hpp>

#include "nodalab/nodal.hpp"

using namespace nodalab;

namespace {

PolygonRegion square_region() {
  return PolygonRegion(PolygonDomain({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}));
}

PolygonRegion disk_region(int n = 512) {
  std::vector<Vec2> loop(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2 * kPi * i / n;
    loop[i] = {std::cos(a), std::sin(a)};
  }
  return PolygonRegion(PolygonDomain({loop}));
}

}  // namespace

TEST_CASE("ground state has an empty nodal set") {
  const auto sq = square_region();
  const auto u = analytic_rectangle(1, 1).field;
  const auto ns = extract_nodal(*u, sq, 0.01);
  CHECK(ns.total_length == 0.0);
  CHECK(ns.segments.empty());
}

TEST_CASE("separable nodal lengths") {
  const auto sq = square_region();
  const auto u = analytic_rectangle(3, 2).field;
  const auto ns = extract_nodal(*u, sq, 0.005);
  // interior grid lines x in {1/3, 2/3}, y = 1/2: length (3-1) + (2-1) = 3
  CHECK(ns.total_length == Catch::Approx(3.0).epsilon(0.02));
}

TEST_CASE("disk mode (0,2) nodal circle") {
  const auto dr = disk_region();
  const auto u = analytic_disk(0, 2).field;
  const auto ns = extract_nodal(*u, dr, 0.005);
  const double rho = bessel_zero(0, 1) / bessel_zero(0, 2);
  CHECK(rho == Catch::Approx(0.43565).margin(5e-6));
  CHECK(ns.total_length == Catch::Approx(2 * kPi * rho).epsilon(0.02));
}

TEST_CASE("resolution too coarse is rejected") {
  const auto sq = square_region();
  const auto u = analytic_rectangle(2, 2).field;
  CHECK_THROWS_AS(extract_nodal(*u, sq, 0.3), std::invalid_argument);
}

TEST_CASE("measure in balls") {
  const auto sq = square_region();
  const auto u = analytic_rectangle(2, 1).field;
  const auto ns = extract_nodal(*u, sq, 0.005);
  // the nodal line x = 1/2 crosses the ball through its center
  CHECK(measure_in_ball(ns, ball2({0.5, 0.5}, 0.25)) == Catch::Approx(0.5).epsilon(0.01));

  NodalSet empty;
  CHECK(measure_in_ball(empty, ball2({0, 0}, 1)) == 0.0);

  EverywhereRegion plane(Rect{{-1.2, -1.2}, {1.2, 1.2}});
  const auto z2 = parse_field_spec("harmonic:Re(z^2)").field;
  const auto nz = extract_nodal(*z2, plane, 0.005);
  CHECK(measure_in_ball(nz, ball2({0, 0}, 1.0)) == Catch::Approx(4.0).epsilon(0.01));
}

TEST_CASE("ball measures are additive and monotone") {
  const auto sq = square_region();
  const auto u = analytic_rectangle(3, 3).field;
  const auto ns = extract_nodal(*u, sq, 0.01);
  const double whole = measure_in_ball(ns, ball2({0.5, 0.5}, 2.0));
  CHECK(whole == Catch::Approx(ns.total_length).epsilon(1e-12));
  // disjoint balls
  const double a = measure_in_ball(ns, ball2({0.3, 0.3}, 0.1));
  const double b = measure_in_ball(ns, ball2({0.7, 0.7}, 0.1));
  CHECK(a + b <= whole + 1e-12);
  // monotone under inclusion
  CHECK(measure_in_ball(ns, ball2({0.5, 0.5}, 0.2)) <=
        measure_in_ball(ns, ball2({0.5, 0.5}, 0.4)) + 1e-15);
}

TEST_CASE("resolution halving is a cauchy sequence") {
  const auto sq = square_region();
  for (auto [m, n] : {std::pair{2, 3}, {4, 4}, {5, 1}}) {
    const auto u = analytic_rectangle(m, n).field;
    const double l1 = extract_nodal(*u, sq, 0.01).total_length;
    const double l2 = extract_nodal(*u, sq, 0.005).total_length;
    CHECK(std::abs(l2 - l1) / l2 < 0.01);
  }
}

TEST_CASE("extraction respects the square symmetries") {
  const auto sq = square_region();
  const auto u = analytic_rectangle(3, 3).field;
  const auto ns = extract_nodal(*u, sq, 0.005);
  // swap symmetry (x,y) -> (y,x) maps the mode to itself
  const double m1 = measure_in_ball(ns, ball2({0.25, 0.4}, 0.15));
  const double m2 = measure_in_ball(ns, ball2({0.4, 0.25}, 0.15));
  CHECK(m1 == Catch::Approx(m2).epsilon(0.02));
}

TEST_CASE("fem extraction and boundary exclusion") {
  const PolygonDomain dom({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  auto mesh = std::make_shared<TriangleMesh>(triangulate(dom, 0.02));
  // interpolate the (2,1) mode; boundary values are exactly zero
  std::vector<double> vals(mesh->vertices.size());
  for (size_t i = 0; i < vals.size(); ++i) {
    const Vec2& p = mesh->vertices[i];
    vals[i] = mesh->boundary_vertex[i] ? 0.0 : std::sin(2 * kPi * p.x) * std::sin(kPi * p.y);
  }
  const FemField f(mesh, vals);
  const PolygonRegion region(dom);
  const auto ns = extract_nodal(f, region, mesh->h_max);
  // only the interior line x = 1/2 survives; boundary-hugging pieces are dropped
  CHECK(ns.total_length == Catch::Approx(1.0).epsilon(0.02));
  for (const auto& seg : ns.segments) {
    CHECK(std::abs(seg[0].x - 0.5) < 0.05);
    CHECK(std::abs(seg[1].x - 0.5) < 0.05);
  }
}

TEST_CASE("interior zero counting in 1d") {
  CHECK(count_zeros_1d(Sine1DField(5), 0.0, 1.0).count == 4);
  CHECK(count_zeros_1d(Sine1DField(1), 0.0, 1.0).count == 0);
  const auto z = count_zeros_1d(Sine1DField(3), 0.0, 0.5);
  CHECK(z.count == 1);
  REQUIRE(z.locations.size() == 1);
  CHECK(z.locations[0] == Catch::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("cube measures and zero-freeness") {
  EverywhereRegion plane(Rect{{-1, -1}, {1, 1}});
  const auto y = parse_field_spec("harmonic:y").field;
  const auto ns = extract_nodal(*y, plane, 0.004);
  // the zero line y=0 lies inside the plane region (no boundary to exclude)
  const Cube q({0, 0}, 0.5);
  CHECK(measure_in_cube(ns, q) == Catch::Approx(0.5).epsilon(0.01));
  CHECK_FALSE(zero_free_in_cube(ns, q));
  CHECK(zero_free_in_cube(ns, Cube({0, 0.5}, 0.3)));
}

TEST_CASE("extension slice measure in a 3d ball") {
  const auto pr = analytic_rectangle(3, 2);
  const auto h = make_extension(pr.field, pr.lambda);
  const auto sq = square_region();
  const auto base = extract_nodal(*pr.field, sq, 0.004);
  // ball centered on the crossing of the planes x=1/3 and y=1/2: two
  // orthogonal disks of radius 0.1
  const double m = measure_extension_in_ball3(base, Ball({1.0 / 3, 0.5, 0}, 0.1, 3));
  CHECK(m == Catch::Approx(2 * kPi * 0.01).epsilon(0.02));
  (void)h;
}
