#pragma once

// Zero-set extraction by marching triangles and H^{d-1} measurement.
// Each grid cell is split into four triangles around its sampled center, so
// extraction commutes with the square's symmetries.  Boundary points never
// belong to the zero set: segments are clipped to the open domain and
// pieces that hug the boundary are dropped.

#include <concepts>

#include "nodalab/fields.hpp"
#include "nodalab/quadrature.hpp"

namespace nodalab {

struct NodalSet {
  std::vector<std::array<Vec2, 2>> segments;
  double total_length = 0.0;
  double resolution = 0.0;
};

namespace nodaldetail {

// one triangle against the shifted level; appends 0 or 1 segment
inline void march_triangle(const Vec2& p0, const Vec2& p1, const Vec2& p2, double v0, double v1,
                           double v2, std::vector<std::array<Vec2, 2>>& out) {
  const bool s0 = v0 > 0, s1 = v1 > 0, s2 = v2 > 0;
  if (s0 == s1 && s1 == s2) return;
  Vec2 pts[2];
  int np = 0;
  auto edge = [&](const Vec2& a, const Vec2& b, double va, double vb) {
    if ((va > 0) == (vb > 0)) return;
    const double t = va / (va - vb);
    if (np < 2) pts[np++] = a + (b - a) * t;
  };
  edge(p0, p1, v0, v1);
  edge(p1, p2, v1, v2);
  edge(p2, p0, v2, v0);
  if (np == 2) out.push_back({pts[0], pts[1]});
}

inline void clip_and_keep(const Region& region, const std::array<Vec2, 2>& seg, double min_len,
                          double boundary_tol, std::vector<std::array<Vec2, 2>>& out,
                          const PolygonRegion* poly) {
  std::vector<std::array<Vec2, 2>> pieces;
  if (poly) {
    pieces = poly->clip_segment(seg[0], seg[1]);
  } else {
    // graph/strip/plane regions: classify the midpoint, refine on a change
    const PointClass c0 = region.classify(seg[0]);
    const PointClass c1 = region.classify(seg[1]);
    if (c0 != PointClass::outside && c1 != PointClass::outside) {
      pieces.push_back(seg);
    } else if (c0 == PointClass::outside && c1 == PointClass::outside) {
      return;
    } else {
      // bisect for the crossing parameter
      Vec2 in = c0 == PointClass::outside ? seg[1] : seg[0];
      Vec2 outp = c0 == PointClass::outside ? seg[0] : seg[1];
      for (int it = 0; it < 60; ++it) {
        const Vec2 mid = (in + outp) * 0.5;
        (region.classify(mid) == PointClass::outside ? outp : in) = mid;
      }
      pieces.push_back({c0 == PointClass::outside ? in : seg[0],
                        c0 == PointClass::outside ? seg[1] : in});
    }
  }
  for (const auto& piece : pieces) {
    if (dist(piece[0], piece[1]) < min_len) continue;
    // boundary points are not part of the zero set: a segment whose two
    // endpoints both sit within the positional uncertainty of the boundary
    // (plateau chords, rim slivers) cannot be certified interior
    if (region.boundary_distance(piece[0]) < boundary_tol &&
        region.boundary_distance(piece[1]) < boundary_tol)
      continue;
    out.push_back(piece);
  }
}

}  // namespace nodaldetail

// Marching-triangles extraction on a uniform grid over `window` (defaults to
// the region's bounding box).  FEM fields march their own mesh instead.
inline NodalSet extract_nodal(const ScalarField& field, const Region& region, double resolution,
                              std::optional<Rect> window = std::nullopt) {
  if (field.dim() != 2) throw std::invalid_argument("extract_nodal: field must be two-dimensional");
  if (resolution > region.diameter() / 8)
    throw std::invalid_argument("extract_nodal: resolution too coarse to be meaningful");

  NodalSet ns;
  ns.resolution = resolution;
  const double min_len = 1e-12 * region.diameter();
  const double boundary_tol = std::max(1e-9 * region.diameter(), 2e-3 * resolution);
  const auto* poly = dynamic_cast<const PolygonRegion*>(&region);

  std::vector<std::array<Vec2, 2>> raw;

  if (const auto* fem = dynamic_cast<const FemField*>(&field)) {
    const TriangleMesh& mesh = fem->mesh();
    const double level = 1e-14 * fem->max_abs();
    for (const auto& t : mesh.triangles)
      nodaldetail::march_triangle(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]],
                                  fem->vertex_values()[t[0]] - level,
                                  fem->vertex_values()[t[1]] - level,
                                  fem->vertex_values()[t[2]] - level, raw);
  } else {
    const Rect box = window.value_or(region.bbox());
    const int nx = std::max(2, int(std::ceil(box.width() / resolution)));
    const int ny = std::max(2, int(std::ceil(box.height() / resolution)));
    const double hx = box.width() / nx, hy = box.height() / ny;

    std::vector<double> corner((nx + 1) * (ny + 1));
    double scale = 0;
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const double v = field.value({box.lo.x + i * hx, box.lo.y + j * hy, 0});
        corner[j * (nx + 1) + i] = v;
        scale = std::max(scale, std::abs(v));
      }
    const double level = 1e-14 * scale;

    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const Vec2 c00{box.lo.x + i * hx, box.lo.y + j * hy};
        const Vec2 c10{c00.x + hx, c00.y};
        const Vec2 c01{c00.x, c00.y + hy};
        const Vec2 c11{c00.x + hx, c00.y + hy};
        const Vec2 cen = (c00 + c11) * 0.5;
        // cells fully away from the region are skipped
        if (region.classify(cen) == PointClass::outside &&
            region.boundary_distance(cen) > std::hypot(hx, hy))
          continue;
        const double v00 = corner[j * (nx + 1) + i] - level;
        const double v10 = corner[j * (nx + 1) + i + 1] - level;
        const double v01 = corner[(j + 1) * (nx + 1) + i] - level;
        const double v11 = corner[(j + 1) * (nx + 1) + i + 1] - level;
        const double vc = field.value({cen.x, cen.y, 0}) - level;
        nodaldetail::march_triangle(c00, c10, cen, v00, v10, vc, raw);
        nodaldetail::march_triangle(c10, c11, cen, v10, v11, vc, raw);
        nodaldetail::march_triangle(c11, c01, cen, v11, v01, vc, raw);
        nodaldetail::march_triangle(c01, c00, cen, v01, v00, vc, raw);
      }
  }

  for (const auto& seg : raw)
    nodaldetail::clip_and_keep(region, seg, min_len, boundary_tol, ns.segments, poly);
  for (const auto& seg : ns.segments) ns.total_length += dist(seg[0], seg[1]);
  return ns;
}

inline double measure_in_ball(const NodalSet& ns, const Ball& ball) {
  const Vec2 c = ball.center.xy();
  double total = 0;
  Vec2 a, b;
  for (const auto& seg : ns.segments)
    if (clip_segment_to_disk(seg[0], seg[1], c, ball.radius, &a, &b)) total += dist(a, b);
  return total;
}

inline double measure_in_cube(const NodalSet& ns, const Cube& cube) {
  const Frame fr = cube.frame();
  const double h = cube.side / 2;
  double total = 0;
  for (const auto& seg : ns.segments) {
    Vec2 a = fr.to_local(seg[0]);
    Vec2 b = fr.to_local(seg[1]);
    // Liang-Barsky interval clip against the centered square
    double t0 = 0, t1 = 1;
    const double d[2] = {b.x - a.x, b.y - a.y};
    const double p0[2] = {a.x, a.y};
    bool ok = true;
    for (int axis = 0; axis < 2 && ok; ++axis) {
      for (int side = 0; side < 2 && ok; ++side) {
        const double sgn = side == 0 ? 1.0 : -1.0;
        const double num = h - sgn * p0[axis];
        const double den = sgn * d[axis];
        if (std::abs(den) < 1e-300) {
          if (num < 0) ok = false;
        } else {
          const double t = num / den;
          if (den > 0)
            t1 = std::min(t1, t);
          else
            t0 = std::max(t0, t);
          if (t0 > t1) ok = false;
        }
      }
    }
    if (ok && t1 > t0) total += dist(seg[0], seg[1]) * (t1 - t0);
  }
  return total;
}

inline bool zero_free_in_cube(const NodalSet& ns, const Cube& cube) {
  return measure_in_cube(ns, cube) <= 0;
}

// H^2 measure of (Z(u) x R) ∩ B^3 by integrating slice lengths in t.
inline double measure_extension_in_ball3(const NodalSet& base, const Ball& ball,
                                         double rel_tol = 1e-6) {
  if (ball.dim != 3) throw std::invalid_argument("measure_extension_in_ball3: need a 3d ball");
  const Vec2 x0 = ball.center.xy();
  const double r = ball.radius;
  auto slice = [&](double dt) {
    const double rho2 = r * r - dt * dt;
    if (rho2 <= 0) return 0.0;
    return measure_in_ball(base, ball2(x0, std::sqrt(rho2)));
  };
  return integrate_interval(slice, -r, r, rel_tol).value;
}

// Interior zero count of a 1d field on (a, b): sign changes on a fine grid,
// each bracket refined by bisection.
struct Zeros1D {
  int count = 0;
  std::vector<double> locations;
};

template <class F>
  requires std::invocable<F&, double>
Zeros1D count_zeros_1d(F&& f, double a, double b, int grid = 10000) {
  Zeros1D out;
  double prev = f(a + (b - a) * 1e-12);
  double xprev = a;
  for (int i = 1; i <= grid; ++i) {
    const double x = a + (b - a) * double(i) / grid;
    const double v = f(i == grid ? x - (b - a) * 1e-12 : x);
    if ((prev > 0) != (v > 0)) {
      double lo = xprev, hi = x, flo = prev;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo > 0) != (fm > 0))
          hi = mid;
        else {
          lo = mid;
          flo = fm;
        }
        if (hi - lo < 1e-12 * (b - a)) break;
      }
      out.locations.push_back(0.5 * (lo + hi));
      ++out.count;
    }
    prev = v;
    xprev = x;
  }
  return out;
}

inline Zeros1D count_zeros_1d(const ScalarField& u, double a, double b, int grid = 10000) {
  return count_zeros_1d([&](double x) { return u.value({x, 0, 0}); }, a, b, grid);
}

}  // namespace nodalab
