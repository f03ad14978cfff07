#include <catch2/catch_amalgamated.hpp>

#include "nodalab/fields.hpp"
#include "nodalab/spectral.hpp"

using namespace nodalab;

namespace {

// five-point second differences along each axis, summed
double discrete_laplacian(const ScalarField& f, const Vec3& p, double h) {
  double s = 0;
  s += f.value({p.x + h, p.y, p.z}) + f.value({p.x - h, p.y, p.z}) - 2 * f.value(p);
  s += f.value({p.x, p.y + h, p.z}) + f.value({p.x, p.y - h, p.z}) - 2 * f.value(p);
  if (f.dim() == 3)
    s += f.value({p.x, p.y, p.z + h}) + f.value({p.x, p.y, p.z - h}) - 2 * f.value(p);
  return s / (h * h);
}

// Richardson extrapolation removes the h^2 truncation term, which does not
// vanish for harmonic functions (d4x + d4y is not zero when the mixed term is)
double laplacian_extrapolated(const ScalarField& f, const Vec3& p, double h) {
  return (4 * discrete_laplacian(f, p, h / 2) - discrete_laplacian(f, p, h)) / 3.0;
}

}  // namespace

TEST_CASE("harmonic polynomials are exactly harmonic") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> re(7), im(7);
    for (auto& c : re) c = rng.uniform(-1, 1);
    for (auto& c : im) c = rng.uniform(-1, 1);
    HarmonicPolynomialField f(re, im);
    for (int k = 0; k < 10; ++k) {
      const Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1), 0};
      CHECK(std::abs(laplacian_extrapolated(f, p, 4e-3)) < 1e-8);
    }
  }
}

TEST_CASE("extension field values") {
  const auto u = std::make_shared<Sine1DField>(1);  // sin(pi x), lambda = pi^2
  const auto h = make_extension(u, kPi * kPi);
  CHECK(h->dim() == 2);
  CHECK(h->value({0.5, 0, 0}) == Catch::Approx(1.0).epsilon(1e-14));
  // e^{sqrt(lambda) t} = e^{pi t} doubles at t = ln2/pi
  CHECK(h->value({0.5, std::log(2.0) / kPi, 0}) == Catch::Approx(2.0).epsilon(1e-12));

  const auto u2 = analytic_rectangle(1, 1);
  const auto h2 = make_extension(u2.field, u2.lambda);
  CHECK(h2->dim() == 3);
  CHECK(h2->value({0.5, 0.5, 0}) == Catch::Approx(1.0));
  // harmonic in 3d: the five-point-per-axis stencil vanishes to stencil order
  CHECK(std::abs(discrete_laplacian(*h2, {0.4, 0.6, 0.1}, 1e-3)) < 1e-4 * u2.lambda);
  CHECK(std::abs(laplacian_extrapolated(*h2, {0.4, 0.6, 0.1}, 1e-3)) < 1e-6 * u2.lambda);

  CHECK_THROWS_AS(make_extension(u2.field, -1.0), std::invalid_argument);
}

TEST_CASE("gradients match finite differences") {
  std::vector<FieldPtr> fields;
  fields.push_back(HarmonicPolynomialField::monomial_re(3));
  fields.push_back(analytic_rectangle(3, 2).field);
  fields.push_back(analytic_disk(2, 2).field);
  fields.push_back(make_extension(analytic_rectangle(2, 1).field, analytic_rectangle(2, 1).lambda));

  SplitMix64 rng(11);
  for (const auto& f : fields) {
    for (int k = 0; k < 100; ++k) {
      Vec3 p{rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85), 0};
      if (f->dim() == 3) p.z = rng.uniform(-0.2, 0.2);
      if (f->kind() == FieldKind::disk) {
        p.x = rng.uniform(-0.6, 0.6);
        p.y = rng.uniform(-0.6, 0.6);
      }
      const Vec3 g = f->gradient(p);
      const double step = 1e-6;
      const Vec3 fd{
          (f->value({p.x + step, p.y, p.z}) - f->value({p.x - step, p.y, p.z})) / (2 * step),
          (f->value({p.x, p.y + step, p.z}) - f->value({p.x, p.y - step, p.z})) / (2 * step),
          f->dim() == 3
              ? (f->value({p.x, p.y, p.z + step}) - f->value({p.x, p.y, p.z - step})) / (2 * step)
              : 0.0};
      const double scale = std::max(1.0, g.norm());
      CHECK((g - fd).norm() / scale < 1e-4);
    }
  }
}

TEST_CASE("harmonic mean value property") {
  const auto f = parse_field_spec("harmonic:Re(z^3)+0.5*Im(z^2)-2*y+1").field;
  for (const Vec2 c : {Vec2{0.2, -0.3}, Vec2{0, 0}, Vec2{1.5, 0.7}}) {
    for (double r : {0.3, 1.0}) {
      double avg = 0;
      const int n = 4096;
      for (int k = 0; k < n; ++k) {
        const double th = 2 * kPi * k / n;
        avg += f->value({c.x + r * std::cos(th), c.y + r * std::sin(th), 0});
      }
      avg /= n;
      CHECK(avg == Catch::Approx(f->value(Vec3(c))).margin(1e-8 * (1 + std::abs(avg))));
    }
  }
}

TEST_CASE("sup on balls") {
  EverywhereRegion plane(4.0);
  const auto x = parse_field_spec("harmonic:Re(z^1)").field;
  const auto s1 = sup_on_ball(*x, ball2({0, 0}, 1.0), plane);
  CHECK(s1.sup == Catch::Approx(1.0).epsilon(1e-3));
  CHECK(s1.argmax.x == Catch::Approx(1.0).margin(2e-3));

  const auto z2 = parse_field_spec("harmonic:Re(z^2)").field;
  for (double r : {0.5, 1.0, 2.0}) {
    const auto s = sup_on_ball(*z2, ball2({0, 0}, r), plane);
    CHECK(s.sup == Catch::Approx(r * r).epsilon(1e-3));
  }

  const auto u = analytic_rectangle(1, 1).field;
  const auto s3 = sup_on_ball(*u, ball2({0.5, 0.5}, 0.1),
                              PolygonRegion(PolygonDomain({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}})));
  CHECK(s3.sup == Catch::Approx(1.0).epsilon(1e-6));
  CHECK(dist(s3.argmax, {0.5, 0.5}) < 1e-3);
}

TEST_CASE("holder boundary exponent") {
  const auto flat = LipschitzPatch::flat({0, 0}, 1.0, 0.1);
  const auto hy = HarmonicPolynomialField::linear_y();
  const auto r1 = holder_boundary_check(*hy, flat);
  CHECK(r1.beta_hat == Catch::Approx(1.0).margin(0.02));

  // 2xy vanishes linearly in y along {y = 0}
  const auto hxy = HarmonicPolynomialField::monomial_im(2);
  const auto r2 = holder_boundary_check(*hxy, flat);
  CHECK(r2.beta_hat == Catch::Approx(1.0).margin(0.05));

  // Re z does not vanish on the boundary
  const auto hx = HarmonicPolynomialField::monomial_re(1);
  CHECK_THROWS_AS(holder_boundary_check(*hx, flat), std::invalid_argument);
}

TEST_CASE("fem fields signal out-of-domain evaluation") {
  const PolygonDomain sq({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  auto mesh = std::make_shared<TriangleMesh>(triangulate(sq, 0.2));
  std::vector<double> vals(mesh->vertices.size());
  for (size_t i = 0; i < vals.size(); ++i) vals[i] = mesh->vertices[i].x;
  FemField f(mesh, vals);
  CHECK(f.value({0.5, 0.5, 0}) == Catch::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(f.try_value({1.5, 0.5}).has_value());
  CHECK_THROWS_AS(f.value({1.5, 0.5, 0}), std::domain_error);
}

TEST_CASE("field spec parser") {
  const auto p1 = parse_field_spec("rect:3,2");
  CHECK(p1.lambda.value() == Catch::Approx(13 * kPi * kPi).epsilon(1e-14));
  CHECK(p1.field->value({0.5, 0.25, 0}) == Catch::Approx(-1.0).epsilon(1e-12));

  const auto p2 = parse_field_spec("disk:0,2");
  CHECK(p2.lambda.value() == Catch::Approx(sq(5.520078110286311)).epsilon(1e-12));

  const auto p3 = parse_field_spec("harmonic:Re(z^2)");
  CHECK(p3.field->value({0.3, 0.4, 0}) == Catch::Approx(0.09 - 0.16).epsilon(1e-14));
  CHECK_FALSE(p3.lambda.has_value());

  const auto p4 = parse_field_spec("harmonic:2*y-0.5*Im(z^3)+1.25");
  CHECK(p4.field->value({0.0, 1.0, 0}) ==
        Catch::Approx(2.0 - 0.5 * (-1.0) + 1.25).epsilon(1e-14));

  const auto p5 = parse_field_spec("ext:rect:1,1@19.739208802178716");
  CHECK(p5.field->dim() == 3);
  const auto p6 = parse_field_spec("ext:rect:1,1");  // eigenvalue inferred
  CHECK(p6.lambda.value() == Catch::Approx(2 * kPi * kPi).epsilon(1e-14));

  CHECK_THROWS_AS(parse_field_spec("harmonic:Qe(z^2)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_field_spec("rect:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_field_spec("ext:harmonic:y"), std::invalid_argument);
  CHECK_THROWS_AS(parse_field_spec("bogus:1"), std::invalid_argument);
}
