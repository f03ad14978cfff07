#pragma once

// Adaptive quadrature over (ball ∩ region).  The region supplies cover
// triangles, clip_cell trims them to the disk, and a worst-first heap of
// triangle and arc-segment pieces refines until the requested relative
// tolerance is met.

#include <queue>

#include "nodalab/geometry.hpp"

namespace nodalab {

struct IntegralResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = true;
  long evaluations = 0;
};

namespace qdetail {

// Dunavant degree-4 rule, 6 points.
inline constexpr double kW1 = 0.223381589678011;
inline constexpr double kA1 = 0.108103018168070;
inline constexpr double kB1 = 0.445948490915965;
inline constexpr double kW2 = 0.109951743655322;
inline constexpr double kA2 = 0.816847572980459;
inline constexpr double kB2 = 0.091576213509771;

template <class F>
double tri_rule4(F&& f, const Vec2& a, const Vec2& b, const Vec2& c, int tag, long& evals) {
  const double area = 0.5 * std::abs((b - a).cross(c - a));
  if (area <= 0) return 0.0;
  auto at = [&](double l1, double l2, double l3) {
    return Vec2{l1 * a.x + l2 * b.x + l3 * c.x, l1 * a.y + l2 * b.y + l3 * c.y};
  };
  double s = 0;
  s += kW1 * (f(at(kA1, kB1, kB1), tag) + f(at(kB1, kA1, kB1), tag) + f(at(kB1, kB1, kA1), tag));
  s += kW2 * (f(at(kA2, kB2, kB2), tag) + f(at(kB2, kA2, kB2), tag) + f(at(kB2, kB2, kA2), tag));
  evals += 6;
  return s * area;
}

// edge-midpoint rule (degree 2); error mate for the degree-4 rule
template <class F>
double tri_rule2(F&& f, const Vec2& a, const Vec2& b, const Vec2& c, int tag, long& evals) {
  const double area = 0.5 * std::abs((b - a).cross(c - a));
  if (area <= 0) return 0.0;
  const Vec2 mab = (a + b) * 0.5, mbc = (b + c) * 0.5, mca = (c + a) * 0.5;
  evals += 3;
  return area * (f(mab, tag) + f(mbc, tag) + f(mca, tag)) / 3.0;
}

struct Piece {
  enum Kind { tri, arc } kind = tri;
  Vec2 a, b, c;          // triangle corners (tri)
  double th1 = 0, th2 = 0;  // arc segment angles (arc)
  int tag = -1;
  double value = 0;
  double err = 0;
  long id = 0;
};

struct PieceOrder {
  bool operator()(const Piece& x, const Piece& y) const {
    if (x.err != y.err) return x.err < y.err;
    return x.id > y.id;  // deterministic tie-break
  }
};

inline double arc_segment_area(double radius, double dth) {
  return radius * radius * (dth - std::sin(dth)) / 2;
}

}  // namespace qdetail

// Integrates f(p, tag) over ball(center, radius) ∩ region.  The tag is the
// id of the cover triangle the point came from, letting mesh-backed fields
// skip point location.
template <class F>
IntegralResult integrate_ball_region(F&& f, const Vec2& center, double radius, const Region& region,
                                     double rel_tol = 1e-5, long max_pieces = 400000) {
  using qdetail::Piece;
  IntegralResult res;
  long next_id = 0;

  std::priority_queue<Piece, std::vector<Piece>, qdetail::PieceOrder> heap;
  double total = 0, total_err = 0;

  auto eval_tri = [&](Piece& p) {
    const double i4 = qdetail::tri_rule4(f, p.a, p.b, p.c, p.tag, res.evaluations);
    const double i2 = qdetail::tri_rule2(f, p.a, p.b, p.c, p.tag, res.evaluations);
    p.value = i4;
    p.err = std::abs(i4 - i2);
  };
  auto eval_arc = [&](Piece& p) {
    // cap estimate from an interior representative; rim samples alone can
    // vanish identically (fiber weights are zero on the circle)
    const double dth = p.th2 - p.th1;
    const double area = qdetail::arc_segment_area(radius, dth);
    const double thm = 0.5 * (p.th1 + p.th2);
    const Vec2 pm = center + Vec2{std::cos(thm), std::sin(thm)} * radius;
    const Vec2 p1 = center + Vec2{std::cos(p.th1), std::sin(p.th1)} * radius;
    const Vec2 p2 = center + Vec2{std::cos(p.th2), std::sin(p.th2)} * radius;
    const Vec2 pc = (p1 + p2) * 0.5;       // chord midpoint
    const Vec2 q = (pc + pm) * 0.5;        // inside the segment
    const double fm = f(pm, p.tag), f1 = f(p1, p.tag), f2 = f(p2, p.tag);
    const double fq = f(q, p.tag), fc = f(pc, p.tag);
    res.evaluations += 5;
    p.value = area * fq;
    const double hi = std::max({f1, f2, fm, fq, fc});
    const double lo = std::min({f1, f2, fm, fq, fc});
    p.err = area * ((hi - lo) + 1e-6 * std::abs(fq));
  };
  auto push = [&](Piece p) {
    p.id = next_id++;
    if (p.kind == Piece::tri) {
      if (0.5 * std::abs((p.b - p.a).cross(p.c - p.a)) < 1e-30) return;
      eval_tri(p);
    } else {
      if (p.th2 - p.th1 < 1e-12) return;
      eval_arc(p);
    }
    total += p.value;
    total_err += p.err;
    heap.push(p);
  };

  // seed pieces: cover triangles clipped to the disk
  std::vector<TriRef> cover;
  region.cover_ball(center, radius, cover);
  for (const auto& t : cover) {
    DiskClip clip = clip_cell(t.a, t.b, t.c, center, radius);
    if (clip.empty()) continue;
    if (clip.full_disk) {
      // inscribed square fan + four quarter arcs
      for (int q = 0; q < 4; ++q) {
        const double a0 = kPi / 4 + q * kPi / 2;
        const double a1 = a0 + kPi / 2;
        const Vec2 v0 = center + Vec2{std::cos(a0), std::sin(a0)} * radius;
        const Vec2 v1 = center + Vec2{std::cos(a1), std::sin(a1)} * radius;
        push({Piece::tri, center, v0, v1, 0, 0, t.tag});
        push({Piece::arc, {}, {}, {}, a0, a1, t.tag});
      }
      continue;
    }
    if (clip.poly.size() >= 3)
      for (size_t i = 1; i + 1 < clip.poly.size(); ++i)
        push({Piece::tri, clip.poly[0], clip.poly[i], clip.poly[i + 1], 0, 0, t.tag});
    for (const auto& [t1, t2] : clip.arcs) push({Piece::arc, {}, {}, {}, t1, t2, t.tag});
  }

  const double abs_floor = 1e-300;
  long pieces = long(heap.size());
  while (!heap.empty() && total_err > rel_tol * std::max(std::abs(total), abs_floor) &&
         pieces < max_pieces) {
    Piece p = heap.top();
    heap.pop();
    total -= p.value;
    total_err -= p.err;
    if (p.kind == Piece::tri) {
      // evaluate the four children, then shrink their mate-based error
      // estimates by the parent/children Richardson difference (the degree-4
      // rule converges two orders faster than the mate suggests)
      const Vec2 mab = (p.a + p.b) * 0.5, mbc = (p.b + p.c) * 0.5, mca = (p.c + p.a) * 0.5;
      Piece ch[4] = {{Piece::tri, p.a, mab, mca, 0, 0, p.tag},
                     {Piece::tri, mab, p.b, mbc, 0, 0, p.tag},
                     {Piece::tri, mca, mbc, p.c, 0, 0, p.tag},
                     {Piece::tri, mab, mbc, mca, 0, 0, p.tag}};
      double child_sum = 0, mate_sum = 0;
      for (auto& c : ch) {
        eval_tri(c);
        child_sum += c.value;
        mate_sum += c.err;
      }
      const double rich = std::abs(p.value - child_sum);
      for (auto& c : ch) {
        const double share = mate_sum > 0 ? c.err / mate_sum : 0.25;
        c.err = std::min(c.err, 2 * rich * share + 1e-300);
        c.id = next_id++;
        total += c.value;
        total_err += c.err;
        heap.push(c);
      }
      pieces += 3;
    } else {
      const double thm = 0.5 * (p.th1 + p.th2);
      const Vec2 p1 = center + Vec2{std::cos(p.th1), std::sin(p.th1)} * radius;
      const Vec2 p2 = center + Vec2{std::cos(p.th2), std::sin(p.th2)} * radius;
      const Vec2 pm = center + Vec2{std::cos(thm), std::sin(thm)} * radius;
      push({Piece::tri, p1, pm, p2, 0, 0, p.tag});
      push({Piece::arc, {}, {}, {}, p.th1, thm, p.tag});
      push({Piece::arc, {}, {}, {}, thm, p.th2, p.tag});
      pieces += 2;
    }
  }

  res.value = total;
  res.abs_error = total_err;
  res.converged = total_err <= rel_tol * std::max(std::abs(total), abs_floor);
  return res;
}

// Adaptive 1d quadrature on [a, b] with a 10-point Gauss-Legendre panel.
namespace qdetail {
inline constexpr double kGL10X[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                     0.8650633666889845, 0.9739065285171717};
inline constexpr double kGL10W[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                     0.1494513491505806, 0.0666713443086881};

template <class F>
double gl10(F&& f, double a, double b, long& evals) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0;
  for (int i = 0; i < 5; ++i)
    s += kGL10W[i] * (f(mid - half * kGL10X[i]) + f(mid + half * kGL10X[i]));
  evals += 10;
  return s * half;
}
}  // namespace qdetail

template <class F>
IntegralResult integrate_interval(F&& f, double a, double b, double rel_tol = 1e-7,
                                  int max_depth = 40) {
  IntegralResult res;
  if (b <= a) return res;
  struct Node {
    double a, b, value, err;
  };
  // first split so the error estimate has something to compare against
  std::priority_queue<std::pair<double, size_t>> order;
  std::vector<Node> nodes;
  auto make = [&](double lo, double hi) {
    const double whole = qdetail::gl10(f, lo, hi, res.evaluations);
    const double mid = 0.5 * (lo + hi);
    const double half_sum = qdetail::gl10(f, lo, mid, res.evaluations) +
                            qdetail::gl10(f, mid, hi, res.evaluations);
    nodes.push_back({lo, hi, half_sum, std::abs(whole - half_sum)});
    order.push({nodes.back().err, nodes.size() - 1});
  };
  make(a, b);
  double total = nodes[0].value, total_err = nodes[0].err;
  long budget = 1L << std::min(max_depth, 18);
  while (!order.empty() && total_err > rel_tol * std::max(std::abs(total), 1e-300) &&
         long(nodes.size()) < budget) {
    auto [err, idx] = order.top();
    order.pop();
    if (err != nodes[idx].err) continue;  // stale entry
    Node n = nodes[idx];
    nodes[idx].err = -1;  // retire
    total -= n.value;
    total_err -= n.err;
    const double mid = 0.5 * (n.a + n.b);
    const size_t i0 = nodes.size();
    make(n.a, mid);
    make(mid, n.b);
    for (size_t i = i0; i < nodes.size(); ++i) {
      total += nodes[i].value;
      total_err += nodes[i].err;
    }
  }
  res.value = total;
  res.abs_error = total_err;
  res.converged = total_err <= rel_tol * std::max(std::abs(total), 1e-300);
  return res;
}

}  // namespace nodalab
