#pragma once

// Planar geometry kernel: Lipschitz graph patches, polygon domains with
// holes, balls/cubes in local frames, triangle/disk clipping and the
// boundary-cube construction used by the hyperplane experiments.

#include <cassert>
#include <cmath>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "nodalab/core.hpp"

namespace nodalab {

enum class PointClass { inside, boundary, outside };

// Rotation + translation; maps patch-local coordinates to world.
struct Frame {
  Vec2 origin{0, 0};
  double angle = 0.0;

  Vec2 to_world(const Vec2& local) const {
    const double c = std::cos(angle), s = std::sin(angle);
    return {origin.x + c * local.x - s * local.y, origin.y + s * local.x + c * local.y};
  }
  Vec2 to_local(const Vec2& world) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const Vec2 d = world - origin;
    return {c * d.x + s * d.y, -s * d.x + c * d.y};
  }
  Vec2 up() const { return to_world(Vec2{0, 1}) - origin; }  // e_d in world coords
};

struct Ball {
  Vec3 center;
  double radius = 0.0;
  int dim = 2;

  Ball() = default;
  Ball(const Vec3& c, double r, int d = 3) : center(c), radius(r), dim(d) {
    if (radius <= 0) throw std::invalid_argument("Ball: radius must be positive");
  }
  // cB keeps the center fixed
  Ball scaled(double c) const { return Ball(center, radius * c, dim); }
};

inline Ball ball2(const Vec2& c, double r) { return Ball(Vec3(c), r, 2); }

struct Cube {
  Vec2 center;
  double side = 0.0;
  double angle = 0.0;  // sides parallel to the axes of this rotated frame

  Cube() = default;
  Cube(const Vec2& c, double s, double a = 0.0) : center(c), side(s), angle(a) {
    if (side <= 0) throw std::invalid_argument("Cube: side must be positive");
  }
  double diam() const { return side * std::sqrt(2.0); }
  Frame frame() const { return Frame{center, angle}; }
  std::array<Vec2, 4> corners() const {
    const Frame f = frame();
    const double h = side / 2;
    return {f.to_world({-h, -h}), f.to_world({h, -h}), f.to_world({h, h}), f.to_world({-h, h})};
  }
  bool contains(const Vec2& p, double tol = 0.0) const {
    const Vec2 l = frame().to_local(p);
    const double h = side / 2 + tol;
    return std::abs(l.x) <= h && std::abs(l.y) <= h;
  }
  Cube scaled(double c) const { return Cube(center, side * c, angle); }
};

// ---------------------------------------------------------------------------
// Segment / polygon primitives

inline double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 <= 0) return dist(p, a);
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return dist(p, a + ab * t);
}

// Proper or touching intersection of [a,b] and [c,d]; fills t on [a,b].
inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d,
                               double* t_ab = nullptr) {
  const Vec2 r = b - a, s = d - c;
  const double denom = r.cross(s);
  const Vec2 qp = c - a;
  if (std::abs(denom) < 1e-30) return false;  // parallel: handled by distance checks elsewhere
  const double t = qp.cross(s) / denom;
  const double u = qp.cross(r) / denom;
  if (t < 0 || t > 1 || u < 0 || u > 1) return false;
  if (t_ab) *t_ab = t;
  return true;
}

inline double polygon_signed_area(const std::vector<Vec2>& loop) {
  double a = 0;
  for (size_t i = 0; i < loop.size(); ++i) {
    const Vec2& p = loop[i];
    const Vec2& q = loop[(i + 1) % loop.size()];
    a += p.cross(q);
  }
  return a / 2;
}

inline bool point_in_loop(const Vec2& p, const std::vector<Vec2>& loop) {
  // crossing-number parity; orientation independent
  bool in = false;
  for (size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
    const Vec2& a = loop[i];
    const Vec2& b = loop[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xc = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xc) in = !in;
    }
  }
  return in;
}

struct TriRef {
  Vec2 a, b, c;
  int tag = -1;  // owning cell for integrand fast paths
  double area() const { return 0.5 * (b - a).cross(c - a); }
};

// Ear clipping of a simple CCW loop.  Quality does not matter here: the
// output only seeds quadrature covers and SVG fills.
inline std::vector<std::array<int, 3>> ear_clip(const std::vector<Vec2>& loop) {
  const int n = int(loop.size());
  if (n < 3) throw std::invalid_argument("ear_clip: degenerate loop");
  std::vector<int> next(n), prev(n);
  for (int i = 0; i < n; ++i) {
    next[i] = (i + 1) % n;
    prev[i] = (i + n - 1) % n;
  }
  auto is_convex = [&](int i) {
    const Vec2& a = loop[prev[i]];
    const Vec2& b = loop[i];
    const Vec2& c = loop[next[i]];
    return (b - a).cross(c - b) > 1e-18;
  };
  auto contains_vertex = [&](int i) {
    const Vec2& a = loop[prev[i]];
    const Vec2& b = loop[i];
    const Vec2& c = loop[next[i]];
    for (int v = next[next[i]]; v != prev[i]; v = next[v]) {
      const Vec2& p = loop[v];
      // bridged holes duplicate vertices; coincident points never block an ear
      if ((p - a).norm2() < 1e-28 || (p - b).norm2() < 1e-28 || (p - c).norm2() < 1e-28) continue;
      const double d0 = (b - a).cross(p - a);
      const double d1 = (c - b).cross(p - b);
      const double d2 = (a - c).cross(p - c);
      if (d0 >= -1e-18 && d1 >= -1e-18 && d2 >= -1e-18) return true;
    }
    return false;
  };
  std::vector<std::array<int, 3>> tris;
  int remaining = n;
  int i = 0, guard = 0;
  while (remaining > 3) {
    if (guard++ > 4 * n * n) throw std::runtime_error("ear_clip: no ear found (non-simple loop?)");
    if (is_convex(i) && !contains_vertex(i)) {
      tris.push_back({prev[i], i, next[i]});
      next[prev[i]] = next[i];
      prev[next[i]] = prev[i];
      i = prev[i];
      --remaining;
      guard = 0;
    } else {
      i = next[i];
    }
  }
  tris.push_back({prev[i], i, next[i]});
  return tris;
}

// Splices CW holes into a CCW outer loop with bridge edges, then ear clips.
inline std::vector<TriRef> triangulate_loops(const std::vector<std::vector<Vec2>>& loops) {
  if (loops.empty()) throw std::invalid_argument("triangulate_loops: no loops");
  std::vector<Vec2> poly = loops[0];
  if (polygon_signed_area(poly) <= 0)
    throw std::invalid_argument("triangulate_loops: outer loop must be counter-clockwise");

  std::vector<std::vector<Vec2>> holes(loops.begin() + 1, loops.end());
  std::sort(holes.begin(), holes.end(), [](const auto& a, const auto& b) {
    auto mx = [](const std::vector<Vec2>& l) {
      double m = -1e300;
      for (const auto& p : l) m = std::max(m, p.x);
      return m;
    };
    return mx(a) > mx(b);
  });

  for (const auto& hole : holes) {
    // rightmost hole vertex casts a +x ray onto the current outer polygon
    int hm = 0;
    for (int i = 1; i < int(hole.size()); ++i)
      if (hole[i].x > hole[hm].x) hm = i;
    const Vec2 m = hole[hm];
    double best_x = 1e300;
    int best_edge = -1;
    for (int i = 0; i < int(poly.size()); ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % poly.size()];
      if ((a.y > m.y) == (b.y > m.y)) continue;
      const double xc = a.x + (m.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (xc >= m.x - 1e-15 && xc < best_x) {
        best_x = xc;
        best_edge = i;
      }
    }
    if (best_edge < 0) throw std::invalid_argument("triangulate_loops: hole outside outer loop");
    // connect to the edge endpoint visible from m (endpoint with larger x is safe
    // for the convex-ish bridges we need; fall back to scanning reflex vertices)
    int bridge = best_edge;
    const Vec2& e0 = poly[best_edge];
    const Vec2& e1 = poly[(best_edge + 1) % poly.size()];
    bridge = (e0.x > e1.x) ? best_edge : int((best_edge + 1) % poly.size());
    // reject candidates whose bridge segment crosses the outer polygon
    auto bridge_ok = [&](int cand) {
      const Vec2 p = poly[cand];
      for (int i = 0; i < int(poly.size()); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        if ((a - p).norm() < 1e-15 || (b - p).norm() < 1e-15) continue;
        if ((a - m).norm() < 1e-15 || (b - m).norm() < 1e-15) continue;
        if (segments_intersect(m, p, a, b)) return false;
      }
      return true;
    };
    if (!bridge_ok(bridge)) {
      bool found = false;
      for (int cand = 0; cand < int(poly.size()) && !found; ++cand)
        if (poly[cand].x >= m.x && bridge_ok(cand)) {
          bridge = cand;
          found = true;
        }
      if (!found) throw std::runtime_error("triangulate_loops: no visible bridge vertex");
    }
    std::vector<Vec2> merged;
    merged.reserve(poly.size() + hole.size() + 2);
    for (int i = 0; i <= bridge; ++i) merged.push_back(poly[i]);
    for (int i = 0; i <= int(hole.size()); ++i) merged.push_back(hole[(hm + i) % hole.size()]);
    merged.push_back(poly[bridge]);
    for (int i = bridge + 1; i < int(poly.size()); ++i) merged.push_back(poly[i]);
    poly = std::move(merged);
  }

  const auto tris = ear_clip(poly);
  std::vector<TriRef> out;
  out.reserve(tris.size());
  for (const auto& t : tris) {
    TriRef tr{poly[t[0]], poly[t[1]], poly[t[2]], -1};
    if (tr.area() > 1e-18) out.push_back(tr);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lipschitz graph patch

class LipschitzPatch {
 public:
  // samples: f at M+1 equispaced abscissae spanning [-radius, radius]
  LipschitzPatch(const Vec2& center, double radius, double angle, double tau,
                 std::vector<double> samples)
      : frame_{center, angle}, radius_(radius), tau_(tau), samples_(std::move(samples)) {
    if (radius_ <= 0) throw std::invalid_argument("LipschitzPatch: radius must be positive");
    if (!(tau_ > 0 && tau_ < 1))
      throw std::invalid_argument("LipschitzPatch: tau must lie in (0,1)");
    if (samples_.size() < 2) throw std::invalid_argument("LipschitzPatch: need >= 2 samples");
    if (std::abs(graph(0.0)) > 1e-12 * radius_)
      throw std::invalid_argument("LipschitzPatch: f(0) must vanish");
    const int m = int(samples_.size()) - 1;
    const double h = 2 * radius_ / m;
    lipschitz_ = 0;
    for (int i = 0; i < m; ++i)
      lipschitz_ = std::max(lipschitz_, std::abs(samples_[i + 1] - samples_[i]) / h);
    if (lipschitz_ > tau_ + 1e-12)
      throw std::invalid_argument("LipschitzPatch: sampled slope exceeds declared tau");
  }

  static LipschitzPatch flat(const Vec2& center, double radius, double tau, double angle = 0.0,
                             int segments = 512) {
    return from_function(center, radius, tau, [](double) { return 0.0; }, angle, segments);
  }

  template <class F>
  static LipschitzPatch from_function(const Vec2& center, double radius, double tau, F&& f,
                                      double angle = 0.0, int segments = 512) {
    std::vector<double> s(segments + 1);
    for (int i = 0; i <= segments; ++i) {
      const double y = -radius + 2.0 * radius * double(i) / segments;
      s[i] = f(y);
    }
    return LipschitzPatch(center, radius, angle, tau, std::move(s));
  }

  const Frame& frame() const { return frame_; }
  Vec2 center() const { return frame_.origin; }
  double radius() const { return radius_; }
  double tau() const { return tau_; }
  double angle() const { return frame_.angle; }
  const std::vector<double>& samples() const { return samples_; }
  Vec2 up() const { return frame_.up(); }
  double diameter() const { return 2 * radius_; }

  // piecewise-linear graph value; clamp-extended beyond the sample range
  double graph(double yp) const {
    const int m = int(samples_.size()) - 1;
    const double h = 2 * radius_ / m;
    double u = (yp + radius_) / h;
    if (u <= 0) {
      const double slope = (samples_[1] - samples_[0]) / h;
      return samples_[0] + slope * (yp + radius_);
    }
    if (u >= m) {
      const double slope = (samples_[m] - samples_[m - 1]) / h;
      return samples_[m] + slope * (yp - radius_);
    }
    const int i = int(u);
    const double t = u - i;
    return samples_[i] * (1 - t) + samples_[i + 1] * t;
  }

  double lipschitz_estimate() const { return lipschitz_; }

  // classification of a world point against the graph region {y'' > f(y')}
  PointClass classify(const Vec2& world, double tol = -1.0) const {
    if (tol < 0) tol = 1e-12 * diameter();
    const Vec2 l = frame_.to_local(world);
    const double g = graph(l.x);
    if (std::abs(l.y - g) <= tol) return PointClass::boundary;
    return l.y > g ? PointClass::inside : PointClass::outside;
  }

  double boundary_distance(const Vec2& world) const {
    const Vec2 l = frame_.to_local(world);
    const int m = int(samples_.size()) - 1;
    const double h = 2 * radius_ / m;
    double best = 1e300;
    // only segments within |l.x - x_seg| < best can improve; scan with pruning
    for (int i = 0; i < m; ++i) {
      const double x0 = -radius_ + i * h;
      const double x1 = x0 + h;
      if (l.x - x1 > best || x0 - l.x > best) continue;
      best = std::min(best, point_segment_dist(l, {x0, samples_[i]}, {x1, samples_[i + 1]}));
    }
    return best;
  }

  // rescaling about the center keeps the sampled slopes; the certified
  // estimate transfers unchanged (the ratios only pick up rounding noise)
  LipschitzPatch scaled(double c) const {
    if (c <= 0) throw std::invalid_argument("LipschitzPatch::scaled: factor must be positive");
    std::vector<double> s(samples_.size());
    for (size_t i = 0; i < s.size(); ++i) s[i] = samples_[i] * c;
    LipschitzPatch p(frame_.origin, radius_ * c, frame_.angle, tau_, std::move(s));
    p.lipschitz_ = lipschitz_;
    return p;
  }

  std::vector<Vec2> breakpoints_local() const {
    const int m = int(samples_.size()) - 1;
    const double h = 2 * radius_ / m;
    std::vector<Vec2> v(m + 1);
    for (int i = 0; i <= m; ++i) v[i] = {-radius_ + i * h, samples_[i]};
    return v;
  }

 private:
  Frame frame_;
  double radius_;
  double tau_;
  double lipschitz_ = 0;
  std::vector<double> samples_;
};

// ---------------------------------------------------------------------------
// Polygon domain

struct PolygonDomain {
  std::vector<std::vector<Vec2>> loops;  // loops[0] outer CCW, rest CW holes
  std::vector<LipschitzPatch> patches;   // optional boundary certification
  double tau_global = 1.0;
  double r0 = 0.0;

  PolygonDomain() = default;
  PolygonDomain(std::vector<std::vector<Vec2>> ls, double tau = 1.0, double r0_in = 0.0)
      : loops(std::move(ls)), tau_global(tau), r0(r0_in) {
    validate();
  }

  void validate() const {
    if (loops.empty() || loops[0].size() < 3)
      throw std::invalid_argument("PolygonDomain: missing outer loop");
    if (polygon_signed_area(loops[0]) <= 0)
      throw std::invalid_argument("PolygonDomain: outer loop must be counter-clockwise");
    for (size_t k = 1; k < loops.size(); ++k) {
      if (loops[k].size() < 3) throw std::invalid_argument("PolygonDomain: degenerate hole");
      if (polygon_signed_area(loops[k]) >= 0)
        throw std::invalid_argument("PolygonDomain: holes must be clockwise");
      for (const auto& p : loops[k])
        if (!point_in_loop(p, loops[0]))
          throw std::invalid_argument("PolygonDomain: hole vertex outside outer loop");
    }
    for (const auto& loop : loops)
      for (size_t i = 0; i < loop.size(); ++i)
        if (dist(loop[i], loop[(i + 1) % loop.size()]) < 1e-14)
          throw std::invalid_argument("PolygonDomain: repeated vertices");
    // simplicity: no proper crossings between non-adjacent edges
    std::vector<std::array<Vec2, 2>> edges;
    for (const auto& loop : loops)
      for (size_t i = 0; i < loop.size(); ++i)
        edges.push_back({loop[i], loop[(i + 1) % loop.size()]});
    for (size_t i = 0; i < edges.size(); ++i)
      for (size_t j = i + 1; j < edges.size(); ++j) {
        const bool shares = dist(edges[i][0], edges[j][0]) < 1e-14 ||
                            dist(edges[i][0], edges[j][1]) < 1e-14 ||
                            dist(edges[i][1], edges[j][0]) < 1e-14 ||
                            dist(edges[i][1], edges[j][1]) < 1e-14;
        if (shares) continue;
        if (segments_intersect(edges[i][0], edges[i][1], edges[j][0], edges[j][1]))
          throw std::invalid_argument("PolygonDomain: self-intersecting boundary");
      }
  }

  double area() const {
    double a = 0;
    for (const auto& loop : loops) a += polygon_signed_area(loop);
    return a;
  }

  Rect bbox() const { return Rect::of_points(loops[0]); }

  double diameter() const {
    double d = 0;
    const auto& outer = loops[0];
    for (size_t i = 0; i < outer.size(); ++i)
      for (size_t j = i + 1; j < outer.size(); ++j) d = std::max(d, dist(outer[i], outer[j]));
    return d;
  }

  double boundary_distance(const Vec2& p) const {
    double best = 1e300;
    for (const auto& loop : loops)
      for (size_t i = 0; i < loop.size(); ++i)
        best = std::min(best, point_segment_dist(p, loop[i], loop[(i + 1) % loop.size()]));
    return best;
  }

  PointClass classify(const Vec2& p, double tol = -1.0) const {
    if (tol < 0) tol = 1e-12 * diameter();
    if (boundary_distance(p) <= tol) return PointClass::boundary;
    bool in = point_in_loop(p, loops[0]);
    for (size_t k = 1; k < loops.size() && in; ++k)
      if (point_in_loop(p, loops[k])) in = false;
    return in ? PointClass::inside : PointClass::outside;
  }

  // every boundary point must be inside some patch ball of radius >= r0
  bool patches_cover_boundary(int samples_per_edge = 32) const {
    if (patches.empty()) return false;
    for (const auto& loop : loops)
      for (size_t i = 0; i < loop.size(); ++i) {
        const Vec2 a = loop[i];
        const Vec2 b = loop[(i + 1) % loop.size()];
        for (int s = 0; s <= samples_per_edge; ++s) {
          const Vec2 p = a + (b - a) * (double(s) / samples_per_edge);
          bool covered = false;
          for (const auto& patch : patches)
            if (patch.radius() >= r0 && dist(p, patch.center()) <= patch.radius()) {
              covered = true;
              break;
            }
          if (!covered) return false;
        }
      }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Region: the evaluation domain seen by quadrature, nodal extraction and
// sup estimation.  Cover triangles tile region-within-ball before the disk
// clip; each must be a subset of the region.

class Region {
 public:
  virtual ~Region() = default;
  virtual PointClass classify(const Vec2& p) const = 0;
  virtual double diameter() const = 0;
  virtual Rect bbox() const = 0;
  virtual double boundary_distance(const Vec2& p) const = 0;
  virtual void cover_ball(const Vec2& center, double radius, std::vector<TriRef>& out) const = 0;

  bool inside(const Vec2& p) const { return classify(p) == PointClass::inside; }
  bool in_closure(const Vec2& p) const { return classify(p) != PointClass::outside; }
};

class EverywhereRegion final : public Region {
 public:
  explicit EverywhereRegion(Rect window) : window_(window) {}
  explicit EverywhereRegion(double half_width)
      : window_{{-half_width, -half_width}, {half_width, half_width}} {}

  PointClass classify(const Vec2&) const override { return PointClass::inside; }
  double diameter() const override { return window_.diag(); }
  Rect bbox() const override { return window_; }
  double boundary_distance(const Vec2&) const override { return 1e300; }
  void cover_ball(const Vec2& c, double r, std::vector<TriRef>& out) const override {
    const Vec2 q[4] = {{c.x - r, c.y - r}, {c.x + r, c.y - r}, {c.x + r, c.y + r}, {c.x - r, c.y + r}};
    for (int i = 0; i < 4; ++i) out.push_back({c, q[i], q[(i + 1) % 4], -1});
  }

 private:
  Rect window_;
};

// Region above a patch graph, extended past the sample range by end slopes.
class GraphRegion final : public Region {
 public:
  explicit GraphRegion(LipschitzPatch patch) : patch_(std::move(patch)) {}

  const LipschitzPatch& patch() const { return patch_; }

  PointClass classify(const Vec2& p) const override { return patch_.classify(p); }
  double diameter() const override { return patch_.diameter(); }
  Rect bbox() const override {
    const double r = patch_.radius();
    Rect local{{-r, -r}, {r, r}};
    Rect world{{1e300, 1e300}, {-1e300, -1e300}};
    const Frame& f = patch_.frame();
    world.expand(f.to_world(local.lo));
    world.expand(f.to_world({local.hi.x, local.lo.y}));
    world.expand(f.to_world(local.hi));
    world.expand(f.to_world({local.lo.x, local.hi.y}));
    return world;
  }
  double boundary_distance(const Vec2& p) const override { return patch_.boundary_distance(p); }

  void cover_ball(const Vec2& center, double radius, std::vector<TriRef>& out) const override {
    const Frame& fr = patch_.frame();
    const Vec2 lc = fr.to_local(center);
    const double top = lc.y + radius;
    const double x0 = lc.x - radius, x1 = lc.x + radius;
    // strip walls at graph breakpoints inside [x0, x1]
    std::vector<double> xs{x0};
    const int m = int(patch_.samples().size()) - 1;
    const double h = 2 * patch_.radius() / m;
    for (int i = 0; i <= m; ++i) {
      const double x = -patch_.radius() + i * h;
      if (x > x0 + 1e-15 && x < x1 - 1e-15) xs.push_back(x);
    }
    xs.push_back(x1);
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
      const double a = xs[i], b = xs[i + 1];
      const double fa = patch_.graph(a), fb = patch_.graph(b);
      if (fa >= top && fb >= top) continue;
      // quad between graph and the cap line y = top, clipped where the graph
      // pokes above the cap (the graph is linear on the strip)
      std::vector<Vec2> piece;
      auto push = [&](double x, double y) { piece.push_back({x, y}); };
      if (fa < top && fb < top) {
        push(a, fa); push(b, fb); push(b, top); push(a, top);
      } else if (fa < top) {
        const double xc = a + (top - fa) / (fb - fa) * (b - a);
        push(a, fa); push(xc, top); push(a, top);
      } else {
        const double xc = a + (top - fa) / (fb - fa) * (b - a);
        push(xc, top); push(b, fb); push(b, top);
      }
      for (size_t k = 1; k + 1 < piece.size(); ++k) {
        TriRef t{fr.to_world(piece[0]), fr.to_world(piece[k]), fr.to_world(piece[k + 1]), -1};
        if (std::abs(t.area()) > 1e-16 * sq(radius)) out.push_back(t);
      }
    }
  }

 private:
  LipschitzPatch patch_;
};

// Vertical strip a < x < b (the 2d home of interval x R extensions).
class StripRegion final : public Region {
 public:
  StripRegion(double a, double b, double t_half = 4.0) : a_(a), b_(b), t_half_(t_half) {
    if (!(b_ > a_)) throw std::invalid_argument("StripRegion: need a < b");
  }

  PointClass classify(const Vec2& p) const override {
    const double tol = 1e-12 * (b_ - a_);
    if (std::abs(p.x - a_) <= tol || std::abs(p.x - b_) <= tol) return PointClass::boundary;
    return (p.x > a_ && p.x < b_) ? PointClass::inside : PointClass::outside;
  }
  double diameter() const override { return std::hypot(b_ - a_, 2 * t_half_); }
  Rect bbox() const override { return {{a_, -t_half_}, {b_, t_half_}}; }
  double boundary_distance(const Vec2& p) const override {
    return std::min(std::abs(p.x - a_), std::abs(p.x - b_));
  }
  void cover_ball(const Vec2& c, double r, std::vector<TriRef>& out) const override {
    const double x0 = std::max(a_, c.x - r), x1 = std::min(b_, c.x + r);
    if (x1 <= x0) return;
    const Vec2 q[4] = {{x0, c.y - r}, {x1, c.y - r}, {x1, c.y + r}, {x0, c.y + r}};
    out.push_back({q[0], q[1], q[2], -1});
    out.push_back({q[0], q[2], q[3], -1});
  }
  double left() const { return a_; }
  double right() const { return b_; }

 private:
  double a_, b_, t_half_;
};

class PolygonRegion final : public Region {
 public:
  explicit PolygonRegion(PolygonDomain domain)
      : domain_(std::move(domain)),
        cover_(triangulate_loops(domain_.loops)),
        diameter_(domain_.diameter()) {}

  const PolygonDomain& domain() const { return domain_; }
  const std::vector<TriRef>& cover_triangles() const { return cover_; }

  PointClass classify(const Vec2& p) const override { return domain_.classify(p, 1e-12 * diameter_); }
  double diameter() const override { return diameter_; }
  Rect bbox() const override { return domain_.bbox(); }
  double boundary_distance(const Vec2& p) const override { return domain_.boundary_distance(p); }

  void cover_ball(const Vec2& c, double r, std::vector<TriRef>& out) const override {
    const Rect box{{c.x - r, c.y - r}, {c.x + r, c.y + r}};
    for (const auto& t : cover_) {
      Rect tb{{std::min({t.a.x, t.b.x, t.c.x}), std::min({t.a.y, t.b.y, t.c.y})},
              {std::max({t.a.x, t.b.x, t.c.x}), std::max({t.a.y, t.b.y, t.c.y})}};
      if (tb.overlaps(box)) out.push_back(t);
    }
  }

  // keeps the parts of [a,b] inside the (open) polygon
  std::vector<std::array<Vec2, 2>> clip_segment(const Vec2& a, const Vec2& b) const {
    std::vector<double> ts{0.0, 1.0};
    for (const auto& loop : domain_.loops)
      for (size_t i = 0; i < loop.size(); ++i) {
        double t;
        if (segments_intersect(a, b, loop[i], loop[(i + 1) % loop.size()], &t)) ts.push_back(t);
      }
    std::sort(ts.begin(), ts.end());
    std::vector<std::array<Vec2, 2>> kept;
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
      if (ts[i + 1] - ts[i] < 1e-14) continue;
      const double tm = 0.5 * (ts[i] + ts[i + 1]);
      const Vec2 mid = a + (b - a) * tm;
      if (classify(mid) == PointClass::inside)
        kept.push_back({a + (b - a) * ts[i], a + (b - a) * ts[i + 1]});
    }
    return kept;
  }

  bool segment_inside(const Vec2& a, const Vec2& b) const {
    const auto kept = clip_segment(a, b);
    if (kept.size() != 1) return false;
    return dist(kept[0][0], a) < 1e-9 * diameter_ && dist(kept[0][1], b) < 1e-9 * diameter_;
  }

  // polyline from a to b through the open polygon (visibility graph over
  // inward-offset vertices); both endpoints must be in the closure
  std::vector<Vec2> shortest_path(const Vec2& a, const Vec2& b) const {
    if (segment_inside_open(a, b)) return {a, b};
    std::vector<Vec2> nodes{a, b};
    const double eps = 1e-7 * diameter_;
    for (const auto& loop : domain_.loops)
      for (size_t i = 0; i < loop.size(); ++i) {
        const Vec2 prev = loop[(i + loop.size() - 1) % loop.size()];
        const Vec2 cur = loop[i];
        const Vec2 next = loop[(i + 1) % loop.size()];
        const Vec2 in_dir = ((prev - cur).normalized() + (next - cur).normalized());
        Vec2 off = cur + in_dir * eps;
        if (classify(off) != PointClass::inside) off = cur + in_dir * (-eps);
        if (classify(off) == PointClass::inside) nodes.push_back(off);
      }
    const size_t n = nodes.size();
    std::vector<std::vector<std::pair<size_t, double>>> adj(n);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        if (segment_inside_open(nodes[i], nodes[j])) {
          const double w = dist(nodes[i], nodes[j]);
          adj[i].push_back({j, w});
          adj[j].push_back({i, w});
        }
    std::vector<double> d(n, 1e300);
    std::vector<int> par(n, -1);
    using QE = std::pair<double, size_t>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    d[0] = 0;
    pq.push({0, 0});
    while (!pq.empty()) {
      auto [dd, u] = pq.top();
      pq.pop();
      if (dd > d[u]) continue;
      if (u == 1) break;
      for (auto [v, w] : adj[u])
        if (d[u] + w < d[v]) {
          d[v] = d[u] + w;
          par[v] = int(u);
          pq.push({d[v], v});
        }
    }
    if (d[1] >= 1e300) throw std::runtime_error("shortest_path: endpoints not connected");
    std::vector<Vec2> path;
    for (int v = 1; v != -1; v = par[v]) path.push_back(nodes[v]);
    std::reverse(path.begin(), path.end());
    return path;
  }

 private:
  // like segment_inside but tolerates endpoints on the boundary; interior
  // samples must be strictly inside (grazing a corner disqualifies)
  bool segment_inside_open(const Vec2& a, const Vec2& b) const {
    const int steps = 64;
    for (int i = 1; i < steps; ++i) {
      const Vec2 p = a + (b - a) * (double(i) / steps);
      const PointClass pc = classify(p);
      if (pc == PointClass::outside) return false;
      if (pc == PointClass::boundary && i > 2 && i < steps - 2) return false;
    }
    for (const auto& loop : domain_.loops)
      for (size_t i = 0; i < loop.size(); ++i) {
        const Vec2& c = loop[i];
        const Vec2& dpt = loop[(i + 1) % loop.size()];
        double t;
        if (!segments_intersect(a, b, c, dpt, &t)) continue;
        if (t < 1e-12 || t > 1 - 1e-12) continue;  // touching at an endpoint is fine
        const Vec2 x = a + (b - a) * t;
        // transversal crossing of a boundary edge disqualifies
        if (point_segment_dist(x, c, dpt) < 1e-12 * diameter_) {
          const Vec2 mid_l = a + (b - a) * std::max(0.0, t - 1e-6);
          const Vec2 mid_r = a + (b - a) * std::min(1.0, t + 1e-6);
          if (classify(mid_l) == PointClass::outside || classify(mid_r) == PointClass::outside)
            return false;
        }
      }
    return true;
  }

  PolygonDomain domain_;
  std::vector<TriRef> cover_;
  double diameter_;
};

// ---------------------------------------------------------------------------
// Triangle/disk clipping

// Intersection of a triangle with a closed disk.  The boundary alternates
// straight pieces (chords of the triangle) and circle arcs; `poly` is the
// chord polygon and `arcs` lists ccw angular intervals whose circular
// segments sit outside the chord polygon.
struct DiskClip {
  Vec2 center;
  double radius = 0;
  bool full_disk = false;
  std::vector<Vec2> poly;
  std::vector<std::pair<double, double>> arcs;  // (th1, th2), th2 > th1, ccw

  bool empty() const { return !full_disk && poly.size() < 3 && arcs.empty(); }

  double area() const {
    if (full_disk) return kPi * radius * radius;
    double a = 0;
    if (poly.size() >= 3) a += polygon_signed_area(poly);
    for (const auto& [t1, t2] : arcs) {
      const double d = t2 - t1;
      a += radius * radius * (d - std::sin(d)) / 2;
    }
    return a;
  }
};

inline DiskClip clip_cell(const Vec2& ta, const Vec2& tb, const Vec2& tc, const Vec2& center,
                          double radius) {
  DiskClip out;
  out.center = center;
  out.radius = radius;

  Vec2 tri[3] = {ta, tb, tc};
  if ((tb - ta).cross(tc - ta) < 0) std::swap(tri[1], tri[2]);  // enforce ccw

  const double r2 = radius * radius;
  const double eps = 1e-14 * std::max(r2, std::max((tri[1] - tri[0]).norm2(), (tri[2] - tri[0]).norm2()));
  auto inside = [&](const Vec2& p) { return (p - center).norm2() <= r2 + eps; };

  struct V {
    Vec2 p;
    bool arc_to_next = false;
  };
  std::vector<V> verts;

  for (int e = 0; e < 3; ++e) {
    const Vec2 p = tri[e];
    const Vec2 q = tri[(e + 1) % 3];
    if (inside(p)) {
      // a vertex sitting on the circle whose outgoing edge exits the disk is
      // itself the leaving event (the t~0 root below gets skipped); a forward
      // probe also catches tangent departures where the derivative vanishes
      const bool on_circle = (p - center).norm2() >= r2 - eps;
      bool exits = false;
      if (on_circle) {
        const Vec2 probe = p + (q - p) * 1e-5;
        exits = (probe - center).norm2() > r2 + eps;
      }
      verts.push_back({p, exits});
    }
    // segment-circle roots
    const Vec2 dvec = q - p;
    const Vec2 f = p - center;
    const double A = dvec.norm2();
    const double B = 2 * f.dot(dvec);
    const double C = f.norm2() - r2;
    const double disc = B * B - 4 * A * C;
    if (disc > eps * A && A > 0) {
      const double sd = std::sqrt(disc);
      const double t1 = (-B - sd) / (2 * A);
      const double t2 = (-B + sd) / (2 * A);
      for (double t : {t1, t2}) {
        if (t <= 1e-12 || t >= 1 - 1e-12) continue;
        const Vec2 x = p + dvec * t;
        const bool leaving = (2 * (x - center).dot(dvec)) > 0;
        verts.push_back({x, leaving});
      }
    }
  }

  if (verts.empty()) {
    if (inside(tri[0]) && inside(tri[1]) && inside(tri[2])) {
      out.poly = {tri[0], tri[1], tri[2]};
      return out;
    }
    // disk either disjoint from the triangle or fully inside it
    const double d0 = (tri[1] - tri[0]).cross(center - tri[0]);
    const double d1 = (tri[2] - tri[1]).cross(center - tri[1]);
    const double d2 = (tri[0] - tri[2]).cross(center - tri[2]);
    if (d0 > 0 && d1 > 0 && d2 > 0) out.full_disk = true;
    return out;
  }

  out.poly.reserve(verts.size());
  for (const auto& v : verts) out.poly.push_back(v.p);
  for (size_t i = 0; i < verts.size(); ++i)
    if (verts[i].arc_to_next) {
      const Vec2 u = verts[i].p - center;
      const Vec2 w = verts[(i + 1) % verts.size()].p - center;
      double th1 = std::atan2(u.y, u.x);
      double th2 = std::atan2(w.y, w.x);
      while (th2 <= th1 + 1e-15) th2 += 2 * kPi;
      out.arcs.push_back({th1, th2});
    }
  return out;
}

// clip [a,b] to the closed disk; false when no part is inside
inline bool clip_segment_to_disk(const Vec2& a, const Vec2& b, const Vec2& c, double r, Vec2* oa,
                                 Vec2* ob) {
  const Vec2 dvec = b - a;
  const Vec2 f = a - c;
  const double A = dvec.norm2();
  if (A == 0) {
    if ((a - c).norm2() <= r * r) { *oa = a; *ob = b; return true; }
    return false;
  }
  const double B = 2 * f.dot(dvec);
  const double C = f.norm2() - r * r;
  const double disc = B * B - 4 * A * C;
  if (disc < 0) return false;
  const double sd = std::sqrt(disc);
  double t0 = (-B - sd) / (2 * A);
  double t1 = (-B + sd) / (2 * A);
  t0 = std::max(t0, 0.0);
  t1 = std::min(t1, 1.0);
  if (t1 <= t0) return false;
  *oa = a + dvec * t0;
  *ob = a + dvec * t1;
  return true;
}

// ---------------------------------------------------------------------------
// Standard boundary-cube construction

struct StandardConstruction {
  Cube cube;
  int k = 0;
  std::vector<Cube> boundary_cubes;
  std::vector<Cube> inner_cubes;
  double bisection_residual = 0.0;
};

// Splits a boundary cube Q (sides parallel to the patch frame) into 2^k
// columns; each column gets one cube centered on the graph plus a stack of
// interior cubes reaching the top face.  Requires the graph to stay inside
// the middle slab |y'' - y_Q''| < s/4.
inline StandardConstruction standard_construction(const LipschitzPatch& patch, const Cube& cube,
                                                  int k, double clearance = 0.1) {
  if (k < 3) throw std::invalid_argument("standard_construction: k must be >= 3");
  const double tau_max = 1.0 / (16.0 * std::sqrt(2.0));
  if (patch.tau() >= tau_max)
    throw std::invalid_argument("standard_construction: tau must be below 1/(16*sqrt(d))");
  for (const auto& corner : cube.corners())
    if (dist(corner, patch.center()) > patch.radius() * (1 + 1e-12))
      throw std::invalid_argument("standard_construction: cube not inside patch ball");

  const Frame& fr = patch.frame();
  const Vec2 lq = fr.to_local(cube.center);
  if (std::abs(lq.y - patch.graph(lq.x)) > 1e-9 * cube.side)
    throw std::invalid_argument("standard_construction: cube center must lie on the boundary");

  const double s = cube.side;
  const double left = lq.x - s / 2, right = lq.x + s / 2;
  // graph must stay in the middle slab of Q
  {
    const int probes = 4096;
    for (int i = 0; i <= probes; ++i) {
      const double x = left + (right - left) * double(i) / probes;
      if (std::abs(patch.graph(x) - lq.y) >= s / 4)
        throw std::runtime_error(
            "standard_construction: boundary leaves the middle slab (tau too large for this cube)");
    }
  }

  StandardConstruction sc;
  sc.cube = cube;
  sc.k = k;
  const int cols = 1 << k;
  const double sq_side = s / cols;
  const double top = lq.y + s / 2;
  sc.boundary_cubes.reserve(cols);

  for (int j = 0; j < cols; ++j) {
    const double xm = left + (j + 0.5) * sq_side;
    // bisection of the graph crossing along the column
    double ylo = lq.y - s / 4, yhi = lq.y + s / 4;
    for (int it = 0; it < 100; ++it) {
      const double ym = 0.5 * (ylo + yhi);
      (ym > patch.graph(xm) ? yhi : ylo) = ym;
    }
    const double yc = 0.5 * (ylo + yhi);
    sc.bisection_residual = std::max(sc.bisection_residual, std::abs(yc - patch.graph(xm)));
    sc.boundary_cubes.emplace_back(fr.to_world({xm, yc}), sq_side, patch.angle());

    // interior stack from the top of q to the top face; the last cube is
    // aligned with the face and may overlap its predecessor
    const double z0 = yc + sq_side / 2;
    int n = int(std::ceil((top - z0) / sq_side - 1e-12));
    n = std::max(n, 1);
    if (n > cols)
      throw std::runtime_error("standard_construction: column would need more than 2^k cubes");
    for (int i = 0; i < n; ++i) {
      double zc = z0 + (i + 0.5) * sq_side;
      if (zc + sq_side / 2 > top) zc = top - sq_side / 2;
      Cube p(fr.to_world({xm, zc}), sq_side, patch.angle());
      // interior cubes must keep clearance from the boundary graph; the cube
      // lies above the graph, so the distance is attained corner-to-segment
      // or segment-endpoint-to-square
      const double h = sq_side / 2;
      auto dist_to_square = [&](const Vec2& g) {
        const double dx = std::max(std::abs(g.x - xm) - h, 0.0);
        const double dy = std::max(std::abs(g.y - zc) - h, 0.0);
        return std::hypot(dx, dy);
      };
      double d = 1e300;
      const auto bp = patch.breakpoints_local();
      for (size_t bi = 0; bi + 1 < bp.size(); ++bi) {
        const Vec2 a = bp[bi], b = bp[bi + 1];
        if (std::min(a.x, b.x) > xm + 8 * sq_side || std::max(a.x, b.x) < xm - 8 * sq_side) continue;
        for (const Vec2 corner :
             {Vec2{xm - h, zc - h}, Vec2{xm + h, zc - h}, Vec2{xm + h, zc + h}, Vec2{xm - h, zc + h}})
          d = std::min(d, point_segment_dist(corner, a, b));
        d = std::min(d, std::min(dist_to_square(a), dist_to_square(b)));
      }
      if (d <= clearance * sq_side)
        throw std::runtime_error("standard_construction: interior cube too close to the boundary");
      sc.inner_cubes.push_back(p);
    }
  }
  return sc;
}

// ---------------------------------------------------------------------------
// Star-shapedness probe

struct StarShapeReport {
  bool holds = true;
  Vec2 apex;                        // x1, the probe center
  std::optional<std::array<Vec2, 2>> witness_segment;
  std::optional<Vec2> witness_point;
  int pairs_checked = 0;
};

// Samples segments [x1, x2] with x2 in the region within B(x1, r/2) and
// reports the first subdivision point that escapes the region.  Graph
// breakpoints are always among the x2 candidates, since a piecewise-linear
// graph can only fail star-shapedness across a vertex.
inline StarShapeReport star_shaped_check(const LipschitzPatch& patch, const Vec2& x0, int samples = 10000,
                                         int subdivisions = 64, double lift = -1.0) {
  if (patch.tau() >= 0.25)
    throw std::invalid_argument("star_shaped_check: requires tau < 1/4");
  if (samples < 1000) throw std::invalid_argument("star_shaped_check: samples must be >= 1000");
  const double r = patch.radius();
  if (patch.classify(x0) == PointClass::outside)
    throw std::invalid_argument("star_shaped_check: x0 must be in the closure of the region");
  if (dist(x0, patch.center()) > r / 4 + 1e-12 * r)
    throw std::invalid_argument("star_shaped_check: x0 must lie in (1/4)B");
  if (lift < 0) lift = patch.tau() * r;

  StarShapeReport rep;
  const Vec2 x1 = x0 + patch.up() * lift;
  rep.apex = x1;
  const double half = r / 2;

  std::vector<Vec2> targets;
  targets.reserve(samples + 64);
  const Rect box{{x1.x - half, x1.y - half}, {x1.x + half, x1.y + half}};
  std::uint64_t k = 0;
  while (int(targets.size()) < samples && k < std::uint64_t(40) * samples) {
    const Vec2 p = R2Sequence::in_rect(k++, box);
    if (dist(p, x1) <= half && patch.classify(p) == PointClass::inside) targets.push_back(p);
  }
  const double delta = 1e-9 * r;
  for (const Vec2& bp : patch.breakpoints_local()) {
    const Vec2 w = patch.frame().to_world(bp) + patch.up() * delta;
    if (dist(w, x1) <= half && patch.classify(w) == PointClass::inside) targets.push_back(w);
  }

  for (const Vec2& x2 : targets) {
    ++rep.pairs_checked;
    for (int i = 1; i <= subdivisions; ++i) {
      const double t = double(i) / (subdivisions + 1);
      const Vec2 x3 = x1 + (x2 - x1) * t;
      if (patch.classify(x3) == PointClass::outside) {
        rep.holds = false;
        rep.witness_segment = {{x1, x2}};
        rep.witness_point = x3;
        return rep;
      }
    }
  }
  return rep;
}

}  // namespace nodalab
