#include <catch2/catch_amalgamated.hpp>

#include "nodalab/doubling.hpp"

using namespace nodalab;

namespace {

const double kLn2 = std::log(2.0);

EverywhereRegion plane() { return EverywhereRegion(8.0); }

GraphRegion half_plane() { return GraphRegion(LipschitzPatch::flat({0, 0}, 8.0, 0.1)); }

MassOptions tight() {
  MassOptions o;
  o.rel_tol = 1e-9;
  return o;
}

}  // namespace

TEST_CASE("mass closed forms") {
  const auto pl = plane();
  const auto one = HarmonicPolynomialField::constant(1.0);
  for (double r : {0.3, 1.0, 2.0}) {
    const auto m = mass(*one, ball2({0.4, -0.2}, r), pl, tight());
    CHECK(m.converged);
    CHECK(m.value == Catch::Approx(kPi * r * r).epsilon(1e-7));
  }

  const auto hp = half_plane();
  const auto y = HarmonicPolynomialField::linear_y();
  for (double r : {0.5, 1.0, 1.7}) {
    const auto m = mass(*y, ball2({0, 0}, r), hp, tight());
    CHECK(m.value == Catch::Approx(kPi * std::pow(r, 4) / 8).epsilon(1e-7));
  }

  for (int k = 1; k <= 6; ++k) {
    const auto f = HarmonicPolynomialField::monomial_re(k);
    const auto m = mass(*f, ball2({0, 0}, 1.1), pl, tight());
    CHECK(m.value == Catch::Approx(kPi * std::pow(1.1, 2 * k + 2) / (2 * k + 2)).epsilon(1e-6));
  }
}

TEST_CASE("doubling index closed forms") {
  const auto pl = plane();
  const auto one = HarmonicPolynomialField::constant(1.0);
  CHECK(doubling_index(*one, {0.1, 0.2, 0}, 0.5, pl, tight()).N ==
        Catch::Approx(2 * kLn2).margin(1e-6));

  for (int k = 1; k <= 6; ++k) {
    const auto f = HarmonicPolynomialField::monomial_re(k);
    const auto d = doubling_index(*f, {0, 0, 0}, 0.35, pl, tight());
    CHECK(d.N == Catch::Approx((2 * k + 2) * kLn2).margin(1e-3));
  }

  const auto y = HarmonicPolynomialField::linear_y();
  CHECK(doubling_index(*y, {0, 0, 0}, 0.6, half_plane(), tight()).N ==
        Catch::Approx(std::log(16.0)).margin(1e-3));

  CHECK_THROWS_AS(
      doubling_index(*HarmonicPolynomialField::constant(0.0), {0, 0, 0}, 0.5, pl, tight()),
      std::underflow_error);
}

TEST_CASE("doubling profiles") {
  const auto pl = plane();
  const auto z3 = HarmonicPolynomialField::monomial_re(3);
  const auto rep = doubling_profile(*z3, {0, 0, 0}, 0.2, 1.0, 6, pl, tight());
  for (double n : rep.N_values) CHECK(n == Catch::Approx(8 * kLn2).margin(1e-4));

  // low degree dominates as r -> 0, profile rises with r
  HarmonicPolynomialField mix({0, 1, 0, 0, 0.1}, {});
  const auto rep2 = doubling_profile(mix, {0, 0, 0}, 0.05, 1.2, 8, pl, tight());
  CHECK(rep2.N_values.front() == Catch::Approx(4 * kLn2).epsilon(0.01));
  for (size_t i = 1; i < rep2.N_values.size(); ++i)
    CHECK(rep2.N_values[i] >= rep2.N_values[i - 1] - 1e-6);

  const auto c = HarmonicPolynomialField::constant(3.0);
  const auto rep3 = doubling_profile(*c, {0.5, 0.5, 0}, 0.1, 0.4, 4, pl, tight());
  for (double n : rep3.N_values) CHECK(n == Catch::Approx(2 * kLn2).margin(1e-6));
}

TEST_CASE("interior monotonicity of the doubling index") {
  const auto pl = plane();
  SplitMix64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> re(6), im(6);
    for (auto& v : re) v = rng.uniform(-1, 1);
    for (auto& v : im) v = rng.uniform(-1, 1);
    const HarmonicPolynomialField f(re, im);
    const Vec3 x{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0};
    for (int p = 0; p < 5; ++p) {
      const double r = rng.uniform(0.05, 0.4);
      const double R = r + rng.uniform(0.05, 0.6);
      const auto nr = doubling_index(f, x, r, pl, tight());
      const auto nR = doubling_index(f, x, R, pl, tight());
      CHECK(nr.N <= nR.N + 1e-6);
    }
  }
}

TEST_CASE("maximal doubling index") {
  const auto hp = half_plane();
  const auto y = HarmonicPolynomialField::linear_y();
  const Cube q({0, 0}, 0.1);
  MaxDoublingOptions opt;
  opt.mass_opt.rel_tol = 1e-7;
  const auto res = max_doubling(*y, q, hp, opt);
  CHECK(res.N_star == Catch::Approx(std::log(16.0)).epsilon(0.02));

  // sup dominates any sampled value
  const auto at_center = doubling_index(*y, {0, 0, 0}, q.diam() / 2, hp, tight());
  CHECK(res.N_star >= at_center.N - 1e-9);

  // random-sampling oracle stays below the searched maximum
  SplitMix64 rng(7);
  double brute = -1e300;
  for (int s = 0; s < 20000; ++s) {
    const Vec2 c{rng.uniform(-0.05, 0.05), rng.uniform(0.0, 0.05)};
    const double r = rng.uniform(q.diam() / 2, q.diam());
    MassOptions mo;
    mo.rel_tol = 1e-5;
    try {
      brute = std::max(brute, doubling_index(*y, Vec3(c), r, hp, mo).N);
    } catch (const std::underflow_error&) {
    }
  }
  CHECK(brute <= res.N_star + 1e-3);
  CHECK(brute == Catch::Approx(res.N_star).epsilon(0.02));

  // joint rescaling leaves the maximum unchanged
  const auto res2 = max_doubling(*y, q.scaled(0.5), hp, opt);
  CHECK(res2.N_star == Catch::Approx(res.N_star).margin(1e-6));
}

TEST_CASE("extension masses reduce the fiber exactly") {
  // 1d eigenfunction: fiber result against direct 2d quadrature
  const auto u = std::make_shared<Sine1DField>(3);
  const auto h = make_extension(u, u->lambda());
  StripRegion strip(0.0, 1.0);
  MassOptions direct;
  direct.fiber_reduce = false;
  direct.rel_tol = 1e-9;
  for (double r : {0.1, 0.22}) {
    const auto fib = mass(*h, ball2({0.5, 0.0}, r), strip, tight());
    const auto dir = mass(*h, ball2({0.5, 0.0}, r), strip, direct);
    CHECK(fib.value == Catch::Approx(dir.value).epsilon(1e-4));
  }

  // t-invariance of the doubling index is exact under fiber reduction
  const auto pr = analytic_rectangle(2, 1);
  const auto h2 = make_extension(pr.field, pr.lambda);
  const PolygonRegion sq(PolygonDomain({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}));
  const auto n0 = doubling_index(*h2, {0.4, 0.5, 0.0}, 0.07, sq, tight());
  const auto n1 = doubling_index(*h2, {0.4, 0.5, 0.8}, 0.07, sq, tight());
  const auto n2 = doubling_index(*h2, {0.4, 0.5, -0.6}, 0.07, sq, tight());
  CHECK(n1.N == Catch::Approx(n0.N).epsilon(1e-6));
  CHECK(n2.N == Catch::Approx(n0.N).epsilon(1e-6));
}

TEST_CASE("fiber-reduced 3d mass agrees with monte carlo") {
  const PolygonRegion square(PolygonDomain({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}));
  std::vector<double> errs(10);
  parallel_for(10, [&](size_t cfg) {
    SplitMix64 local = SplitMix64::fork(2026, cfg);
    const int m = 1 + int(local.below(3));
    const int n = 1 + int(local.below(3));
    const auto pr = analytic_rectangle(m, n);
    const auto h = make_extension(pr.field, pr.lambda);
    const Vec2 c{local.uniform(0.2, 0.8), local.uniform(0.2, 0.8)};
    const double t0 = local.uniform(-0.3, 0.3);
    const double r = local.uniform(0.08, 0.18);

    const auto fib = mass(*h, Ball({c.x, c.y, t0}, r, 3), square);

    // plain Monte Carlo over the bounding box of the 3d ball
    const long N = 10000000;
    double sum = 0, sum2 = 0;
    for (long s = 0; s < N; ++s) {
      const Vec3 p{c.x + r * (2 * local.uniform() - 1), c.y + r * (2 * local.uniform() - 1),
                   t0 + r * (2 * local.uniform() - 1)};
      double v = 0;
      if ((p - Vec3{c.x, c.y, t0}).norm2() <= r * r && p.x > 0 && p.x < 1 && p.y > 0 && p.y < 1)
        v = sq(h->value(p));
      sum += v;
      sum2 += v * v;
    }
    const double vol = std::pow(2 * r, 3);
    const double mc = vol * sum / N;
    const double se = vol * std::sqrt(std::max(0.0, sum2 / N - sq(sum / N)) / N);
    errs[cfg] = std::abs(mc - fib.value) / std::max(se, 1e-300);
  });
  for (double e : errs) CHECK(e <= 3.0);
}

TEST_CASE("chain of balls") {
  PolygonDomain dom({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  const PolygonRegion sq(dom);
  const double r = 0.1;
  const auto rep = chain_of_balls(sq, {0.5, 0.0}, r, {0.5, 0.5});
  CHECK(rep.net_covering_radius <= r / 8 + 1e-12);
  CHECK(rep.steps == int(rep.balls.size()) - 1);
  CHECK(rep.steps <= int(rep.net.size()) + 2);
  for (size_t j = 0; j + 1 < rep.balls.size(); ++j) {
    const double gap = dist(rep.balls[j].center.xy(), rep.balls[j + 1].center.xy());
    CHECK(gap < r / 4);  // implies B_{j+1} inside (3/2) B_j
  }
  CHECK(dist(rep.balls.back().center.xy(), {0.5, 0.5}) < 1e-12);

  // degenerate chain: start at the target
  const auto deg = chain_of_balls(sq, {0.5, 0.5}, r, {0.5, 0.5});
  CHECK(deg.balls.size() == 2);
  CHECK(deg.steps == 1);

  // reentrant domain: the path bends but the chain invariants still hold
  const PolygonRegion lsh(PolygonDomain({{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}}));
  const auto lrep = chain_of_balls(lsh, {0.9, 0.25}, 0.08, {0.25, 0.9});
  for (size_t j = 0; j + 1 < lrep.balls.size(); ++j)
    CHECK(dist(lrep.balls[j].center.xy(), lrep.balls[j + 1].center.xy()) < 0.08 / 4);
  CHECK(lrep.steps <= int(lrep.net.size()) + 2);
}
