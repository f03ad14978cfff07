#include <catch2/catch_amalgamated.hpp>

#include "nodalab/mesh.hpp"

using namespace nodalab;

namespace {

PolygonDomain unit_square() { return PolygonDomain({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}); }

PolygonDomain l_shape() {
  return PolygonDomain({{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}});
}

PolygonDomain regular_polygon(int n, double r = 1.0) {
  std::vector<Vec2> loop(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2 * kPi * i / n;
    loop[i] = {r * std::cos(a), r * std::sin(a)};
  }
  return PolygonDomain({loop});
}

}  // namespace

TEST_CASE("coarse square mesh") {
  const auto m = triangulate(unit_square(), 0.2);
  CHECK(m.triangles.size() >= 8);
  CHECK(m.total_area() == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(m.conforming());
  CHECK(m.min_angle_deg() >= 20.0);
  CHECK(m.h_max <= 1.5 * 0.2);
  // polygon corners are mesh vertices
  for (const Vec2 corner : {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}}) {
    bool found = false;
    for (const auto& v : m.vertices)
      if (dist(v, corner) < 1e-12) found = true;
    CHECK(found);
  }
}

TEST_CASE("fine square mesh hits the density window") {
  const auto m = triangulate(unit_square(), 0.02);
  CHECK(m.vertices.size() >= 2000);
  CHECK(m.vertices.size() <= 8000);
  CHECK(m.min_angle_deg() >= 20.0);
  CHECK(m.h_max <= 1.5 * 0.02);
  CHECK(m.total_area() == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(m.conforming());
}

TEST_CASE("L-shape mesh with reentrant grading") {
  const auto dom = l_shape();
  const auto m = triangulate(dom, 0.05);
  CHECK(m.total_area() == Catch::Approx(0.75).epsilon(1e-10));
  CHECK(m.conforming());
  CHECK(m.min_angle_deg() >= 20.0);
  // triangles touching the reentrant vertex carry two extra levels of size
  const Vec2 corner{0.5, 0.5};
  double near_len = 0;
  for (const auto& t : m.triangles) {
    bool touches = false;
    for (int i = 0; i < 3; ++i)
      if (dist(m.vertices[t[i]], corner) < 1e-12) touches = true;
    if (!touches) continue;
    for (int i = 0; i < 3; ++i)
      near_len = std::max(near_len, dist(m.vertices[t[i]], m.vertices[t[(i + 1) % 3]]));
  }
  CHECK(near_len > 0);
  CHECK(near_len <= 1.5 * 0.05 / 4);
}

TEST_CASE("mesh boundary vertices sit on the polygon") {
  const auto dom = l_shape();
  const auto m = triangulate(dom, 0.1);
  for (size_t i = 0; i < m.vertices.size(); ++i)
    if (m.boundary_vertex[i]) CHECK(dom.boundary_distance(m.vertices[i]) < 1e-10);
}

TEST_CASE("256-gon disk approximation meshes cleanly") {
  const auto dom = regular_polygon(64);
  const auto m = triangulate(dom, 0.15);
  CHECK(m.conforming());
  CHECK(m.min_angle_deg() >= 20.0);
  CHECK(m.total_area() == Catch::Approx(dom.area()).epsilon(1e-10));
}

TEST_CASE("red refinement") {
  const auto m = triangulate(unit_square(), 0.25);
  const auto r = refine(m);
  CHECK(r.triangles.size() == 4 * m.triangles.size());
  CHECK(r.total_area() == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(r.conforming());
  // similar triangles: the angle spectrum is preserved on straight boundaries
  CHECK(r.min_angle_deg() == Catch::Approx(m.min_angle_deg()).margin(1e-9));
  // parent vertices preserved
  for (size_t i = 0; i < m.vertices.size(); ++i) CHECK(dist(r.vertices[i], m.vertices[i]) == 0.0);

  const auto rr = refine(r);
  CHECK(rr.h_max == Catch::Approx(m.h_max / 4).epsilon(0.05));
}

TEST_CASE("triangulate rejects bad input") {
  CHECK_THROWS_AS(triangulate(unit_square(), 0.7), std::invalid_argument);
}

TEST_CASE("mesh locator") {
  const auto m = triangulate(l_shape(), 0.1);
  MeshLocator loc(m);
  double l[3];
  const int t = loc.locate({0.3, 0.3}, l);
  REQUIRE(t >= 0);
  CHECK(l[0] + l[1] + l[2] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(loc.locate({0.9, 0.9}) == -1);  // removed quarter
  CHECK(loc.locate({2.5, 0.5}) == -1);
}
