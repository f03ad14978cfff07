#pragma once

// Mass H_h(x,r) = ∫_{B(x,r)∩Ω} h², the doubling index N = log H(2r)/H(r)
// (natural log), the maximal doubling index over a cube, and the
// chain-of-balls construction connecting a boundary point to the maximizer.
//
// Extensions h(x,t) = u(x) e^{sqrt(lambda) t} reduce the t-integral in
// closed form: over a ball of radius r around (x0, t0),
//   H = e^{2 sqrt(l) t0} / sqrt(l) * ∫ u(x)^2 sinh(2 sqrt(l) s(x)) dx,
//   s(x) = sqrt(r^2 - |x - x0|^2),
// so the index is exactly independent of t0.

#include "nodalab/fields.hpp"
#include "nodalab/nodal.hpp"
#include "nodalab/quadrature.hpp"

namespace nodalab {

struct MassResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = true;
  long evaluations = 0;
};

struct MassOptions {
  double rel_tol = 1e-5;
  long max_pieces = 400000;
  bool fiber_reduce = true;  // off: evaluate extensions pointwise in 2d
};

inline MassResult mass(const ScalarField& field, const Ball& ball, const Region& region,
                       const MassOptions& opt = {}) {
  MassResult out;
  const auto* ext = dynamic_cast<const ExtensionField*>(&field);

  if (ext && opt.fiber_reduce) {
    const double rl = ext->sqrt_lambda();
    const double t0 = ext->t_of(ball.center);
    const double factor = std::exp(2 * rl * t0) / rl;
    if (!std::isfinite(factor))
      throw std::overflow_error("mass: extension factor overflows at this height");
    const double r = ball.radius;
    const ScalarField& u = *ext->inner();

    if (ext->inner()->dim() == 2) {
      const Vec2 x0 = ball.center.xy();
      auto integrand = [&](const Vec2& p, int tag) {
        const double s2 = r * r - (p - x0).norm2();
        const double s = s2 > 0 ? std::sqrt(s2) : 0.0;
        double uv;
        if (const auto* fem = dynamic_cast<const FemField*>(&u))
          uv = fem->value_tagged(p, tag);
        else
          uv = u.value(Vec3(p));
        return uv * uv * std::sinh(2 * rl * s);
      };
      const IntegralResult ir = integrate_ball_region(integrand, x0, r, region, opt.rel_tol,
                                                      opt.max_pieces);
      out.value = factor * ir.value;
      out.abs_error = factor * ir.abs_error;
      out.converged = ir.converged;
      out.evaluations = ir.evaluations;
      return out;
    }
    // inner field on an interval: one-dimensional fiber integral
    const double x0 = ball.center.x;
    double a = x0 - r, b = x0 + r;
    if (const auto* strip = dynamic_cast<const StripRegion*>(&region)) {
      a = std::max(a, strip->left());
      b = std::min(b, strip->right());
    }
    if (b <= a) throw std::invalid_argument("mass: ball does not meet the domain");
    auto integrand = [&](double x) {
      const double s2 = r * r - sq(x - x0);
      const double s = s2 > 0 ? std::sqrt(s2) : 0.0;
      const double uv = u.value({x, 0, 0});
      return uv * uv * std::sinh(2 * rl * s);
    };
    const IntegralResult ir = integrate_interval(integrand, a, b, opt.rel_tol);
    out.value = factor * ir.value;
    out.abs_error = factor * ir.abs_error;
    out.converged = ir.converged;
    out.evaluations = ir.evaluations;
    return out;
  }

  if (field.dim() != 2) throw std::invalid_argument("mass: direct quadrature needs a 2d field");
  const Vec2 c = ball.center.xy();
  auto integrand = [&](const Vec2& p, int tag) {
    double v;
    if (const auto* fem = dynamic_cast<const FemField*>(&field))
      v = fem->value_tagged(p, tag);
    else
      v = field.value(Vec3(p, ball.center.z));
    return v * v;
  };
  const IntegralResult ir =
      integrate_ball_region(integrand, c, ball.radius, region, opt.rel_tol, opt.max_pieces);
  out.value = ir.value;
  out.abs_error = ir.abs_error;
  out.converged = ir.converged;
  out.evaluations = ir.evaluations;
  return out;
}

struct DoublingValue {
  double N = 0.0;
  double abs_error = 0.0;  // first-order error bound from the two masses
  double H_r = 0.0;
  double H_2r = 0.0;
};

inline DoublingValue doubling_index(const ScalarField& field, const Vec3& center, double r,
                                    const Region& region, const MassOptions& opt = {}) {
  const int bdim = field.dim();
  const MassResult h1 = mass(field, Ball(center, r, bdim), region, opt);
  const MassResult h2 = mass(field, Ball(center, 2 * r, bdim), region, opt);
  if (!(h1.value > 1e-300))
    throw std::underflow_error("doubling_index: field is numerically zero on the inner ball");
  DoublingValue out;
  out.H_r = h1.value;
  out.H_2r = h2.value;
  out.N = std::log(h2.value / h1.value);
  out.abs_error = h1.abs_error / h1.value + h2.abs_error / h2.value;
  return out;
}

struct DoublingReport {
  Vec3 center;
  std::vector<double> radii;
  std::vector<double> H_values;
  std::vector<double> N_values;
  std::vector<double> quad_error;
};

inline DoublingReport doubling_profile(const ScalarField& field, const Vec3& center, double r_min,
                                       double r_max, int steps, const Region& region,
                                       const MassOptions& opt = {}) {
  if (!(r_min > 0 && r_max > r_min)) throw std::invalid_argument("doubling_profile: bad radii");
  if (steps < 1) throw std::invalid_argument("doubling_profile: steps must be >= 1");
  DoublingReport rep;
  rep.center = center;
  for (int i = 0; i < steps; ++i) {
    const double r =
        steps == 1 ? r_min : r_min * std::pow(r_max / r_min, double(i) / (steps - 1));
    const DoublingValue d = doubling_index(field, center, r, region, opt);
    rep.radii.push_back(r);
    rep.H_values.push_back(d.H_r);
    rep.N_values.push_back(d.N);
    rep.quad_error.push_back(d.abs_error);
  }
  return rep;
}

struct MaxDoublingResult {
  double N_star = 0.0;
  Vec2 arg_center;
  double arg_r = 0.0;
  long evaluations = 0;
};

struct MaxDoublingOptions {
  int grid = 17;          // centers per cube side
  int radii = 9;          // radii spanning [l/2, l]
  int refine_rounds = 3;  // local ascent rounds around the best grid node
  MassOptions mass_opt{};
};

// N*_h(Q): supremum of N over centers in Q∩closure(Ω) and radii in
// [diam(Q)/2, diam(Q)], by grid search plus local refinement (continuity of
// (x,r) -> N makes this sound).
inline MaxDoublingResult max_doubling(const ScalarField& field, const Cube& Q, const Region& region,
                                      const MaxDoublingOptions& opt = {},
                                      const LipschitzPatch* governing_patch = nullptr) {
  if (governing_patch) {
    for (const auto& corner : Q.corners())
      if (dist(corner, governing_patch->center()) > governing_patch->radius() / 32)
        throw std::invalid_argument("max_doubling: cube not inside (1/32)B of the patch");
  }
  const double ell = Q.diam();
  const Frame fr = Q.frame();
  const double h = Q.side / 2;

  MaxDoublingResult best;
  best.N_star = -1e300;
  long evals = 0;

  auto consider = [&](const Vec2& world, double r) {
    if (!Q.contains(world, 1e-12 * Q.side)) return;
    if (region.classify(world) == PointClass::outside) return;
    Vec3 c3(world);
    if (field.dim() == 3) c3 = Vec3{world.x, world.y, 0};
    try {
      const DoublingValue d = doubling_index(field, c3, r, region, opt.mass_opt);
      ++evals;
      if (d.N > best.N_star) {
        best.N_star = d.N;
        best.arg_center = world;
        best.arg_r = r;
      }
    } catch (const std::underflow_error&) {
      // fields vanishing on the ball contribute nothing to the sup
    }
  };

  for (int i = 0; i < opt.grid; ++i)
    for (int j = 0; j < opt.grid; ++j) {
      const Vec2 local{-h + 2 * h * double(i) / (opt.grid - 1),
                       -h + 2 * h * double(j) / (opt.grid - 1)};
      const Vec2 world = fr.to_world(local);
      if (region.classify(world) == PointClass::outside) continue;
      for (int k = 0; k < opt.radii; ++k) {
        const double r = ell / 2 + ell / 2 * double(k) / (opt.radii - 1);
        consider(world, r);
      }
    }
  if (best.N_star == -1e300)
    throw std::invalid_argument("max_doubling: cube does not meet the closure of the domain");

  double dx = 2 * h / (opt.grid - 1);
  double dr = ell / 2 / (opt.radii - 1);
  for (int round = 0; round < opt.refine_rounds; ++round) {
    dx /= 3;
    dr /= 3;
    const Vec2 c0 = best.arg_center;
    const double r0 = best.arg_r;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k) {
          if (i == 0 && j == 0 && k == 0) continue;
          const Vec2 world = c0 + fr.up() * (dx * j) + (fr.to_world({1, 0}) - fr.origin) * (dx * i);
          const double r = std::clamp(r0 + k * dr, ell / 2, ell);
          consider(world, r);
        }
  }
  best.evaluations = evals;
  return best;
}

// ---------------------------------------------------------------------------
// Chain of balls: a finite r/8-net of the closure, a path from the start to
// the target, and balls of radius r/2 hopping along net points.

struct ChainReport {
  std::vector<Ball> balls;   // radius r/2 each, last one at the target
  std::vector<Vec2> net;     // the r/8-net S
  std::vector<Vec2> path;    // polyline gamma
  int steps = 0;             // J = balls.size() - 1
  double net_covering_radius = 0.0;
};

inline ChainReport chain_of_balls(const PolygonRegion& region, const Vec2& start, double r,
                                  const Vec2& target) {
  const PolygonDomain& dom = region.domain();
  if (dom.r0 > 0 && !(r < dom.r0 / 16))
    throw std::invalid_argument("chain_of_balls: requires r < r0/16");
  if (region.classify(start) == PointClass::outside)
    throw std::invalid_argument("chain_of_balls: start must lie in the closure");
  if (region.classify(target) == PointClass::outside)
    throw std::invalid_argument("chain_of_balls: target must lie in the closure");

  ChainReport rep;

  // candidate pool on a grid of spacing r/32; greedy farthest-point selection
  // until the pool (hence the closure) is covered within r/8
  const double spacing = r / 32;
  const Rect box = region.bbox();
  std::vector<Vec2> pool;
  const int nx = std::max(1, int(std::ceil(box.width() / spacing)));
  const int ny = std::max(1, int(std::ceil(box.height() / spacing)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const Vec2 p{box.lo.x + box.width() * i / nx, box.lo.y + box.height() * j / ny};
      if (region.classify(p) != PointClass::outside) pool.push_back(p);
    }
  const double pool_gap = spacing * std::sqrt(0.5);
  const double cover_target = r / 8 - pool_gap;

  std::vector<double> d2(pool.size(), 1e300);
  size_t pick = 0;  // deterministic: first pool point seeds the net
  while (true) {
    const Vec2 s = pool[pick];
    rep.net.push_back(s);
    double worst = 0;
    size_t worst_i = 0;
    for (size_t i = 0; i < pool.size(); ++i) {
      d2[i] = std::min(d2[i], (pool[i] - s).norm2());
      if (d2[i] > worst) {
        worst = d2[i];
        worst_i = i;
      }
    }
    rep.net_covering_radius = std::sqrt(worst) + pool_gap;
    if (std::sqrt(worst) <= cover_target) break;
    pick = worst_i;
    if (rep.net.size() > pool.size()) throw std::runtime_error("chain_of_balls: net failed to cover");
  }

  // path from start to target through the open domain
  rep.path = region.shortest_path(start, target);
  std::vector<double> cumlen{0.0};
  for (size_t i = 1; i < rep.path.size(); ++i)
    cumlen.push_back(cumlen.back() + dist(rep.path[i - 1], rep.path[i]));
  const double total_len = cumlen.back();
  auto gamma = [&](double s) {
    if (total_len <= 0) return rep.path.front();
    const double target_len = s * total_len;
    for (size_t i = 1; i < rep.path.size(); ++i)
      if (cumlen[i] >= target_len) {
        const double seg = cumlen[i] - cumlen[i - 1];
        const double t = seg > 0 ? (target_len - cumlen[i - 1]) / seg : 0.0;
        return rep.path[i - 1] + (rep.path[i] - rep.path[i - 1]) * t;
      }
    return rep.path.back();
  };
  // last curve parameter still within rho of y (scan segments from the end)
  auto last_within = [&](const Vec2& y, double rho) {
    if (total_len <= 0) return 1.0;
    for (size_t i = rep.path.size() - 1; i >= 1; --i) {
      const Vec2 a = rep.path[i - 1], b = rep.path[i];
      const Vec2 dvec = b - a, f = a - y;
      const double A = dvec.norm2();
      const double B = 2 * f.dot(dvec);
      const double C = f.norm2() - rho * rho;
      if ((b - y).norm2() <= rho * rho) return cumlen[i] / total_len;
      if (A <= 0) continue;
      const double disc = B * B - 4 * A * C;
      if (disc < 0) continue;
      const double t = (-B + std::sqrt(disc)) / (2 * A);
      if (t >= 0 && t <= 1) return (cumlen[i - 1] + t * std::sqrt(A)) / total_len;
    }
    return -1.0;  // path never enters the rho-ball (cannot happen for y on gamma)
  };

  Vec2 y = start;
  rep.balls.push_back(ball2(y, r / 2));
  double s_prev = -1.0;
  const int cap = int(rep.net.size()) + 2;
  for (int j = 0; j < cap; ++j) {
    const double sj = last_within(y, r / 8);
    if (sj < s_prev - 1e-15)
      throw std::runtime_error("chain_of_balls: path parameters failed to advance");
    s_prev = sj;
    if (sj >= 1.0 - 1e-15 || dist(gamma(sj), target) < 1e-12) {
      rep.balls.push_back(ball2(target, r / 2));
      break;
    }
    const Vec2 gp = gamma(sj);
    // nearest net point within r/8 of gamma(s_j)
    double bestd = 1e300;
    Vec2 next = gp;
    for (const auto& s : rep.net) {
      const double dd = (s - gp).norm2();
      if (dd < bestd) {
        bestd = dd;
        next = s;
      }
    }
    if (std::sqrt(bestd) >= r / 8)
      throw std::runtime_error("chain_of_balls: net point out of reach");
    if (dist(next, y) >= r / 4)
      throw std::runtime_error("chain_of_balls: consecutive centers too far apart");
    y = next;
    rep.balls.push_back(ball2(y, r / 2));
  }
  if (dist(rep.balls.back().center.xy(), target) > 1e-12)
    throw std::runtime_error("chain_of_balls: chain did not reach the target");
  rep.steps = int(rep.balls.size()) - 1;
  if (rep.steps > int(rep.net.size()) + 2)
    throw std::runtime_error("chain_of_balls: chain exceeded |S| + 2");
  return rep;
}

}  // namespace nodalab
