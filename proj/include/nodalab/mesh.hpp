#pragma once

// Conforming triangle meshes of polygon domains: constrained Delaunay
// triangulation (Lawson flips) plus Ruppert-style refinement driven by a
// circumradius/shortest-edge quality bound and a size field that tightens
// near reentrant corners.

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

#include "nodalab/geometry.hpp"

namespace nodalab {

struct TriangleMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // ccw
  std::vector<std::uint8_t> boundary_vertex;
  double h_max = 0.0;

  double total_area() const {
    double a = 0;
    for (const auto& t : triangles)
      a += 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    return a;
  }

  double min_angle_deg() const {
    double worst = 180.0;
    for (const auto& t : triangles) {
      for (int i = 0; i < 3; ++i) {
        const Vec2 a = vertices[t[i]];
        const Vec2 b = vertices[t[(i + 1) % 3]];
        const Vec2 c = vertices[t[(i + 2) % 3]];
        const Vec2 u = (b - a), v = (c - a);
        const double ang = std::atan2(std::abs(u.cross(v)), u.dot(v)) * 180.0 / kPi;
        worst = std::min(worst, ang);
      }
    }
    return worst;
  }

  double compute_h_max() const {
    double h = 0;
    for (const auto& t : triangles)
      for (int i = 0; i < 3; ++i)
        h = std::max(h, dist(vertices[t[i]], vertices[t[(i + 1) % 3]]));
    return h;
  }

  // interior edges shared by exactly two triangles, boundary edges by one
  bool conforming() const {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : triangles)
      for (int i = 0; i < 3; ++i) {
        int a = t[i], b = t[(i + 1) % 3];
        if (a > b) std::swap(a, b);
        ++count[{a, b}];
      }
    for (const auto& [e, c] : count)
      if (c != 1 && c != 2) return false;
    // boundary edges must join two flagged boundary vertices
    for (const auto& t : triangles)
      for (int i = 0; i < 3; ++i) {
        int a = t[i], b = t[(i + 1) % 3];
        int lo = std::min(a, b), hi = std::max(a, b);
        if (count[{lo, hi}] == 1 && !(boundary_vertex[a] && boundary_vertex[b])) return false;
      }
    return true;
  }
};

namespace meshdetail {

inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double d = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  const double scale = std::abs(b.x - a.x) * std::abs(c.y - a.y) +
                       std::abs(b.y - a.y) * std::abs(c.x - a.x);
  if (std::abs(d) > 1e-12 * scale) return d;
  const long double dl = (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
                         (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
  if (std::abs(double(dl)) > 1e-18 * scale) return double(dl);
  return 0.0;
}

// true when d lies strictly inside the circumcircle of ccw (a,b,c)
inline bool in_circle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const long double adx = a.x - d.x, ady = a.y - d.y;
  const long double bdx = b.x - d.x, bdy = b.y - d.y;
  const long double cdx = c.x - d.x, cdy = c.y - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  const long double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                          ad * (bdx * cdy - bdy * cdx);
  const long double mag = (std::abs(adx) + std::abs(ady) + std::abs(bdx) + std::abs(bdy) +
                           std::abs(cdx) + std::abs(cdy));
  return det > 1e-24L * mag * mag * mag * mag;
}

inline Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double d = 2 * ((b - a).cross(c - a));
  if (std::abs(d) < 1e-30) return (a + b + c) / 3.0;
  const double b2 = (b - a).norm2(), c2 = (c - a).norm2();
  const Vec2 ba = b - a, ca = c - a;
  return a + Vec2{ca.y * b2 - ba.y * c2, ba.x * c2 - ca.x * b2} / d;
}

struct DelTri {
  std::array<int, 3> v{-1, -1, -1};
  std::array<int, 3> n{-1, -1, -1};  // neighbor opposite v[i]
  bool alive = false;
};

class Triangulator {
 public:
  explicit Triangulator(const PolygonDomain& domain) : domain_(&domain) {
    const Rect box = domain.bbox();
    const double pad = 10 * std::max(box.width(), box.height());
    const Vec2 c = (box.lo + box.hi) * 0.5;
    verts_ = {{c.x - 2 * pad, c.y - pad}, {c.x + 2 * pad, c.y - pad}, {c.x, c.y + 2 * pad}};
    DelTri t0;
    t0.v = {0, 1, 2};
    t0.alive = true;
    tris_.push_back(t0);
  }

  int insert_point(const Vec2& p, int hint = -1) {
    auto [ti, edge, existing] = locate(p, hint);
    if (existing >= 0) return existing;
    const int vi = int(verts_.size());
    verts_.push_back(p);
    if (edge < 0)
      split_interior(ti, vi);
    else
      split_edge(ti, edge, vi);
    return vi;
  }

  void add_segment(int a, int b) {
    if (a == b) throw std::runtime_error("mesh: zero-length constraint");
    pending_segments_.push_back({a, b});
  }

  void recover_segments() {
    for (auto [a, b] : pending_segments_) recover(a, b);
    pending_segments_.clear();
  }

  bool segment_constrained(int a, int b) const {
    return segments_.count(key(a, b)) > 0;
  }

  // --- refinement ------------------------------------------------------
  template <class SizeField>
  void refine(const SizeField& size_at, double quality_bound, double h_floor, long max_inserts) {
    std::deque<std::pair<int, int>> seg_queue(segments_seq_.begin(), segments_seq_.end());
    std::deque<int> bad;
    long inserted = 0;

    auto queue_since = [&](size_t before) {
      for (size_t nt = before; nt < tris_.size(); ++nt)
        if (tris_[nt].alive) bad.push_back(int(nt));
    };

    // split a constrained subsegment at its midpoint; split_edge takes care
    // of the constraint bookkeeping
    auto split_seg = [&](int a, int b) {
      const auto [t, e] = find_edge(a, b);
      if (t < 0) return;
      const size_t before = tris_.size();
      const int vi = int(verts_.size());
      verts_.push_back((verts_[a] + verts_[b]) * 0.5);
      split_edge(t, e, vi);
      ++inserted;
      seg_queue.push_back({a, vi});
      seg_queue.push_back({vi, b});
      queue_since(before);
    };

    while (inserted < max_inserts) {
      if (!seg_queue.empty()) {
        auto [a, b] = seg_queue.front();
        seg_queue.pop_front();
        if (!segments_.count(key(a, b))) continue;
        const double len = dist(verts_[a], verts_[b]);
        const Vec2 mid = (verts_[a] + verts_[b]) * 0.5;
        if (len > size_at(mid) * 1.45 || (len > 2 * h_floor && encroached(a, b))) split_seg(a, b);
        continue;
      }
      if (bad.empty()) {
        for (int t = 0; t < int(tris_.size()); ++t)
          if (tris_[t].alive && is_inside(t) && needs_split(t, size_at, quality_bound, h_floor))
            bad.push_back(t);
        if (bad.empty()) break;
      }
      const int t = bad.front();
      bad.pop_front();
      if (t >= int(tris_.size()) || !tris_[t].alive) continue;
      if (!is_inside(t) || !needs_split(t, size_at, quality_bound, h_floor)) continue;
      const auto& tr = tris_[t];
      const Vec2 cc = circumcenter(verts_[tr.v[0]], verts_[tr.v[1]], verts_[tr.v[2]]);

      int ea = -1, eb = -1;
      if (blocked_by_segment(t, cc, ea, eb)) {
        // circumcenter lies behind a constrained edge: split that instead
        if (dist(verts_[ea], verts_[eb]) > 2 * h_floor) {
          split_seg(ea, eb);
          bad.push_back(t);
        }
        continue;
      }
      const size_t before = tris_.size();
      insert_point(cc, t);
      ++inserted;
      queue_since(before);
    }
  }

  TriangleMesh extract() {
    TriangleMesh m;
    std::vector<int> vmap(verts_.size(), -1);
    for (size_t t = 0; t < tris_.size(); ++t) {
      if (!tris_[t].alive || !is_inside(int(t))) continue;
      std::array<int, 3> tv{};
      for (int i = 0; i < 3; ++i) {
        const int v = tris_[t].v[i];
        if (vmap[v] < 0) {
          vmap[v] = int(m.vertices.size());
          m.vertices.push_back(verts_[v]);
        }
        tv[i] = vmap[v];
      }
      if (orient(m.vertices[tv[0]], m.vertices[tv[1]], m.vertices[tv[2]]) < 0)
        std::swap(tv[1], tv[2]);
      m.triangles.push_back(tv);
    }
    m.boundary_vertex.assign(m.vertices.size(), 0);
    for (const auto& s : segments_) {
      const auto [a, b] = s;
      if (vmap[a] >= 0) m.boundary_vertex[vmap[a]] = 1;
      if (vmap[b] >= 0) m.boundary_vertex[vmap[b]] = 1;
    }
    m.h_max = m.compute_h_max();
    return m;
  }

 private:
  static std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

  // --- point location ---------------------------------------------------
  // returns (triangle, edge or -1, existing vertex or -1)
  std::tuple<int, int, int> locate(const Vec2& p, int hint) const {
    int t = hint;
    if (t < 0 || t >= int(tris_.size()) || !tris_[t].alive) {
      t = -1;
      for (int i = int(tris_.size()) - 1; i >= 0; --i)
        if (tris_[i].alive) { t = i; break; }
    }
    int steps = 0;
    const int limit = int(tris_.size()) * 4 + 64;
    while (steps++ < limit) {
      const auto& tr = tris_[t];
      double o[3];
      for (int i = 0; i < 3; ++i) {
        const Vec2& a = verts_[tr.v[(i + 1) % 3]];
        const Vec2& b = verts_[tr.v[(i + 2) % 3]];
        o[i] = orient(a, b, p);
      }
      int worst = -1;
      double worst_val = -1e-300;
      for (int i = 0; i < 3; ++i)
        if (o[i] < worst_val) { worst_val = o[i]; worst = i; }
      if (worst >= 0 && tr.n[worst] >= 0) {
        t = tr.n[worst];
        continue;
      }
      if (worst >= 0 && tr.n[worst] < 0)
        throw std::runtime_error("mesh: point outside the super triangle");
      // inside or on an edge: detect duplicates and on-edge cases
      for (int i = 0; i < 3; ++i)
        if (dist(verts_[tr.v[i]], p) < 1e-13 * scale()) return {t, -1, tr.v[i]};
      for (int i = 0; i < 3; ++i) {
        const Vec2& a = verts_[tr.v[(i + 1) % 3]];
        const Vec2& b = verts_[tr.v[(i + 2) % 3]];
        if (std::abs(o[i]) <= 1e-13 * scale() * dist(a, b)) return {t, i, -1};
      }
      return {t, -1, -1};
    }
    // fallback: linear scan
    for (int ti = 0; ti < int(tris_.size()); ++ti) {
      if (!tris_[ti].alive) continue;
      const auto& tr = tris_[ti];
      bool ok = true;
      for (int i = 0; i < 3; ++i)
        if (orient(verts_[tr.v[(i + 1) % 3]], verts_[tr.v[(i + 2) % 3]], p) < 0) ok = false;
      if (ok) return {ti, -1, -1};
    }
    throw std::runtime_error("mesh: point location failed");
  }

  double scale() const { return dist(verts_[0], verts_[1]); }

  // --- topology ops -----------------------------------------------------
  int neighbor_index(int t, int nt) const {
    for (int i = 0; i < 3; ++i)
      if (tris_[t].n[i] == nt) return i;
    return -1;
  }

  void set_neighbor(int t, int a, int b, int nt) {
    // neighbor across edge (a,b) — the index opposite the remaining vertex
    if (t < 0) return;
    for (int i = 0; i < 3; ++i) {
      const int va = tris_[t].v[(i + 1) % 3], vb = tris_[t].v[(i + 2) % 3];
      if ((va == a && vb == b) || (va == b && vb == a)) {
        tris_[t].n[i] = nt;
        return;
      }
    }
  }

  void split_interior(int t, int vi) {
    const auto tr = tris_[t];
    tris_[t].alive = false;
    invalidate_inside(t);
    DelTri a, b, c;
    a.v = {tr.v[0], tr.v[1], vi}; a.alive = true;
    b.v = {tr.v[1], tr.v[2], vi}; b.alive = true;
    c.v = {tr.v[2], tr.v[0], vi}; c.alive = true;
    const int ta = int(tris_.size());
    tris_.push_back(a);
    tris_.push_back(b);
    tris_.push_back(c);
    const int tb = ta + 1, tc = ta + 2;
    // outer neighbors: opposite vi is the original outer edge
    tris_[ta].n = {tb, tc, tr.n[2]};
    tris_[tb].n = {tc, ta, tr.n[0]};
    tris_[tc].n = {ta, tb, tr.n[1]};
    if (tr.n[2] >= 0) set_neighbor(tr.n[2], tr.v[0], tr.v[1], ta);
    if (tr.n[0] >= 0) set_neighbor(tr.n[0], tr.v[1], tr.v[2], tb);
    if (tr.n[1] >= 0) set_neighbor(tr.n[1], tr.v[2], tr.v[0], tc);
    legalize(ta, 2, vi);
    legalize(tb, 2, vi);
    legalize(tc, 2, vi);
  }

  void split_edge(int t, int e, int vi) {
    const int nt = tris_[t].n[e];
    const int a = tris_[t].v[(e + 1) % 3];
    const int b = tris_[t].v[(e + 2) % 3];
    const int c = tris_[t].v[e];
    const bool constrained = segments_.count(key(a, b)) > 0;
    if (constrained) {
      segments_.erase(key(a, b));
      segments_.insert(key(a, vi));
      segments_.insert(key(vi, b));
      segments_seq_.push_back({a, vi});
      segments_seq_.push_back({vi, b});
    }
    tris_[t].alive = false;
    invalidate_inside(t);
    const int t1 = int(tris_.size());
    DelTri x, y;
    x.v = {c, a, vi}; x.alive = true;
    y.v = {c, vi, b}; y.alive = true;
    tris_.push_back(x);
    tris_.push_back(y);
    const int t2 = t1 + 1;
    tris_[t1].n = {-1, t2, tris_[t].n[(e + 2) % 3]};
    tris_[t2].n = {-1, tris_[t].n[(e + 1) % 3], t1};
    if (tris_[t].n[(e + 2) % 3] >= 0) set_neighbor(tris_[t].n[(e + 2) % 3], c, a, t1);
    if (tris_[t].n[(e + 1) % 3] >= 0) set_neighbor(tris_[t].n[(e + 1) % 3], c, b, t2);

    if (nt >= 0) {
      const int j = neighbor_index(nt, t);
      const int d = tris_[nt].v[j];
      tris_[nt].alive = false;
      invalidate_inside(nt);
      const int t3 = int(tris_.size());
      DelTri u, w;
      u.v = {d, vi, a}; u.alive = true;
      w.v = {d, b, vi}; w.alive = true;
      tris_.push_back(u);
      tris_.push_back(w);
      const int t4 = t3 + 1;
      tris_[t3].n = {t1, tris_[nt].n[(j + 1) % 3], t4};
      tris_[t4].n = {t2, t3, tris_[nt].n[(j + 2) % 3]};
      tris_[t1].n[0] = t3;
      tris_[t2].n[0] = t4;
      if (tris_[nt].n[(j + 1) % 3] >= 0) set_neighbor(tris_[nt].n[(j + 1) % 3], d, a, t3);
      if (tris_[nt].n[(j + 2) % 3] >= 0) set_neighbor(tris_[nt].n[(j + 2) % 3], d, b, t4);
      legalize(t3, 1, vi);
      legalize(t4, 2, vi);
    }
    legalize(t1, 2, vi);
    legalize(t2, 1, vi);
  }

  // edge e of triangle t is opposite vi; flip if the far vertex violates the
  // Delaunay criterion and the edge is not constrained
  void legalize(int t, int e, int vi) {
    const int nt = tris_[t].n[e];
    if (nt < 0) return;
    const int a = tris_[t].v[(e + 1) % 3];
    const int b = tris_[t].v[(e + 2) % 3];
    if (segments_.count(key(a, b))) return;
    const int j = neighbor_index(nt, t);
    if (j < 0) return;
    const int d = tris_[nt].v[j];
    if (!in_circle(verts_[a], verts_[b], verts_[vi], verts_[d])) return;
    flip(t, e);
    // after flip, t holds (vi, a, d) and nt holds (vi, d, b); re-legalize the
    // two edges now opposite vi
    for (int tt : {t, nt})
      for (int i = 0; i < 3; ++i)
        if (tris_[tt].v[i] == vi) legalize(tt, i, vi);
  }

  void flip(int t, int e) {
    const int nt = tris_[t].n[e];
    const int j = neighbor_index(nt, t);
    const int c = tris_[t].v[e];
    const int a = tris_[t].v[(e + 1) % 3];
    const int b = tris_[t].v[(e + 2) % 3];
    const int d = tris_[nt].v[j];
    const int tn_ca = tris_[t].n[(e + 2) % 3];  // across (c,a)
    const int tn_bc = tris_[t].n[(e + 1) % 3];  // across (b,c)
    // nt is ccw {d, b, a}: across (a,d) sits opposite b, across (d,b) opposite a
    const int nn_ad = tris_[nt].n[(j + 1) % 3];
    const int nn_db = tris_[nt].n[(j + 2) % 3];
    tris_[t].v = {c, a, d};
    tris_[nt].v = {c, d, b};
    tris_[t].n = {nn_ad, nt, tn_ca};
    tris_[nt].n = {nn_db, tn_bc, t};
    if (tn_ca >= 0) set_neighbor(tn_ca, c, a, t);
    if (nn_ad >= 0) set_neighbor(nn_ad, a, d, t);
    if (tn_bc >= 0) set_neighbor(tn_bc, b, c, nt);
    if (nn_db >= 0) set_neighbor(nn_db, d, b, nt);
    invalidate_inside(t);
    invalidate_inside(nt);
  }

  // --- constrained edges --------------------------------------------------
  bool edge_exists(int a, int b) const {
    for (size_t t = 0; t < tris_.size(); ++t) {
      if (!tris_[t].alive) continue;
      for (int i = 0; i < 3; ++i) {
        const int va = tris_[t].v[(i + 1) % 3], vb = tris_[t].v[(i + 2) % 3];
        if ((va == a && vb == b) || (va == b && vb == a)) return true;
      }
    }
    return false;
  }

  void recover(int a, int b) {
    segments_.insert(key(a, b));
    segments_seq_.push_back({a, b});
    int guard = 0;
    while (!edge_exists(a, b)) {
      if (++guard > 10000) throw std::runtime_error("mesh: segment recovery failed");
      // find a triangle edge properly crossing (a,b) and flip it
      bool flipped = false;
      for (size_t t = 0; t < tris_.size() && !flipped; ++t) {
        if (!tris_[t].alive) continue;
        for (int i = 0; i < 3 && !flipped; ++i) {
          const int va = tris_[t].v[(i + 1) % 3], vb = tris_[t].v[(i + 2) % 3];
          if (va == a || va == b || vb == a || vb == b) continue;
          if (!segments_intersect(verts_[a], verts_[b], verts_[va], verts_[vb])) continue;
          if (segments_.count(key(va, vb)))
            throw std::runtime_error("mesh: crossing constraints");
          // flippable only if the union of the two triangles is convex
          const int nt = tris_[t].n[i];
          if (nt < 0) continue;
          const int j = neighbor_index(nt, int(t));
          const int c = tris_[t].v[i];
          const int d = tris_[nt].v[j];
          if (orient(verts_[c], verts_[va], verts_[d]) <= 0) continue;
          if (orient(verts_[d], verts_[vb], verts_[c]) <= 0) continue;
          flip(int(t), i);
          flipped = true;
        }
      }
      if (!flipped) throw std::runtime_error("mesh: segment recovery stalled");
    }
  }

  // --- refinement helpers ---------------------------------------------
  // first (triangle, edge-index) carrying edge (a,b)
  std::pair<int, int> find_edge(int a, int b) const {
    for (size_t t = 0; t < tris_.size(); ++t) {
      if (!tris_[t].alive) continue;
      for (int i = 0; i < 3; ++i) {
        const int va = tris_[t].v[(i + 1) % 3], vb = tris_[t].v[(i + 2) % 3];
        if ((va == a && vb == b) || (va == b && vb == a)) return {int(t), i};
      }
    }
    return {-1, -1};
  }

  bool encroached(int a, int b) const {
    // apex vertices of the adjacent triangles inside the diametral circle
    const Vec2 mid = (verts_[a] + verts_[b]) * 0.5;
    const double r2 = (verts_[a] - verts_[b]).norm2() / 4;
    for (size_t t = 0; t < tris_.size(); ++t) {
      if (!tris_[t].alive) continue;
      for (int i = 0; i < 3; ++i) {
        const int va = tris_[t].v[(i + 1) % 3], vb = tris_[t].v[(i + 2) % 3];
        if ((va == a && vb == b) || (va == b && vb == a)) {
          const Vec2& apex = verts_[tris_[t].v[i]];
          if ((apex - mid).norm2() < r2 * (1 - 1e-12)) return true;
        }
      }
    }
    return false;
  }

  template <class SizeField>
  bool needs_split(int t, const SizeField& size_at, double quality_bound, double h_floor) const {
    const auto& tr = tris_[t];
    const Vec2& a = verts_[tr.v[0]];
    const Vec2& b = verts_[tr.v[1]];
    const Vec2& c = verts_[tr.v[2]];
    double lmin = 1e300, lmax = 0;
    const double lab = dist(a, b), lbc = dist(b, c), lca = dist(c, a);
    lmin = std::min({lab, lbc, lca});
    lmax = std::max({lab, lbc, lca});
    const Vec2 cen = (a + b + c) / 3.0;
    if (lmax > 1.45 * size_at(cen)) return true;
    if (lmin <= 2 * h_floor) return false;  // stop refining at the floor
    const double area = 0.5 * std::abs((b - a).cross(c - a));
    if (area < 1e-30) return false;
    const double circumradius = lab * lbc * lca / (4 * area);
    return circumradius / lmin > quality_bound;
  }

  bool blocked_by_segment(int t, const Vec2& cc, int& ea, int& eb) {
    // walk from the triangle centroid toward the circumcenter; the first
    // constrained edge crossed (or encroached by cc) gets split instead
    const auto& tr = tris_[t];
    const Vec2 start = (verts_[tr.v[0]] + verts_[tr.v[1]] + verts_[tr.v[2]]) / 3.0;
    int cur = t;
    int steps = 0;
    while (steps++ < 1024) {
      const auto& trc = tris_[cur];
      // done when cc is inside cur
      bool inside = true;
      int exit_edge = -1;
      for (int i = 0; i < 3; ++i) {
        const int va = trc.v[(i + 1) % 3], vb = trc.v[(i + 2) % 3];
        if (orient(verts_[va], verts_[vb], cc) < 0) {
          inside = false;
          if (segments_intersect(start, cc, verts_[va], verts_[vb])) exit_edge = i;
        }
      }
      if (inside) return false;
      if (exit_edge < 0) return false;
      const int va = trc.v[(exit_edge + 1) % 3], vb = trc.v[(exit_edge + 2) % 3];
      if (segments_.count(key(va, vb))) {
        ea = va;
        eb = vb;
        return true;
      }
      const int nxt = trc.n[exit_edge];
      if (nxt < 0) return false;
      cur = nxt;
    }
    return false;
  }

  void invalidate_inside(int t) {
    if (t >= 0 && size_t(t) < inside_cache_.size()) inside_cache_[t] = 2;
  }

  bool is_inside(int t) {
    if (inside_cache_.size() < tris_.size()) inside_cache_.resize(tris_.size(), 2);
    if (inside_cache_[t] == 2) {
      const auto& tr = tris_[t];
      if (!tr.alive || tr.v[0] < 3 || tr.v[1] < 3 || tr.v[2] < 3) {
        inside_cache_[t] = 0;  // dead or touching super vertices
      } else {
        const Vec2 cen = (verts_[tr.v[0]] + verts_[tr.v[1]] + verts_[tr.v[2]]) / 3.0;
        inside_cache_[t] =
            domain_->classify(cen, 1e-14 * domain_->diameter()) == PointClass::inside ? 1 : 0;
      }
    }
    return inside_cache_[t] == 1;
  }

  const PolygonDomain* domain_;
  std::vector<Vec2> verts_;
  std::vector<DelTri> tris_;
  std::set<std::pair<int, int>> segments_;
  std::vector<std::pair<int, int>> segments_seq_;
  std::vector<std::pair<int, int>> pending_segments_;
  std::vector<std::uint8_t> inside_cache_;  // 0 out, 1 in, 2 unknown
};

}  // namespace meshdetail

inline TriangleMesh triangulate(const PolygonDomain& domain, double h_target) {
  if (h_target >= domain.diameter() / 4)
    throw std::invalid_argument("triangulate: h_target must be below diameter/4");
  meshdetail::Triangulator tor(domain);

  std::vector<std::vector<int>> loop_ids;
  for (const auto& loop : domain.loops) {
    std::vector<int> ids;
    ids.reserve(loop.size());
    for (const auto& p : loop) ids.push_back(tor.insert_point(p));
    loop_ids.push_back(std::move(ids));
  }
  for (const auto& ids : loop_ids)
    for (size_t i = 0; i < ids.size(); ++i) tor.add_segment(ids[i], ids[(i + 1) % ids.size()]);
  tor.recover_segments();

  // reentrant corners get a tighter size so nodal extraction keeps up with
  // the gradient singularity (two extra refinement levels)
  std::vector<Vec2> reentrant;
  for (const auto& loop : domain.loops)
    for (size_t i = 0; i < loop.size(); ++i) {
      const Vec2& prev = loop[(i + loop.size() - 1) % loop.size()];
      const Vec2& cur = loop[i];
      const Vec2& next = loop[(i + 1) % loop.size()];
      if ((cur - prev).cross(next - cur) < -1e-14) reentrant.push_back(cur);
    }
  auto size_at = [&](const Vec2& p) {
    double s = h_target;
    for (const auto& v : reentrant) {
      const double d = dist(p, v);
      const double ramp = d < h_target / 2 ? 0.0 : 0.75 * (d - h_target / 2);
      s = std::min(s, h_target / 4 + ramp);
    }
    return s;
  };

  tor.refine(size_at, 1.43, h_target / 256, 400000);
  TriangleMesh m = tor.extract();
  if (!m.conforming()) throw std::runtime_error("triangulate: produced a non-conforming mesh");
  return m;
}

// Uniform red refinement: every triangle splits into four via edge
// midpoints.  Straight boundaries keep midpoints on the boundary, so no
// projection is needed for polygon domains.
inline TriangleMesh refine(const TriangleMesh& mesh) {
  TriangleMesh out;
  out.vertices = mesh.vertices;
  out.boundary_vertex = mesh.boundary_vertex;

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : mesh.triangles)
    for (int i = 0; i < 3; ++i) {
      int a = t[i], b = t[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  std::map<std::pair<int, int>, int> midpoint;
  auto mid_of = [&](int a, int b) {
    int lo = std::min(a, b), hi = std::max(a, b);
    auto it = midpoint.find({lo, hi});
    if (it != midpoint.end()) return it->second;
    const int vi = int(out.vertices.size());
    out.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]) * 0.5);
    const bool on_boundary = edge_count[{lo, hi}] == 1;
    out.boundary_vertex.push_back(on_boundary ? 1 : 0);
    midpoint[{lo, hi}] = vi;
    return vi;
  };

  out.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const int m01 = mid_of(t[0], t[1]);
    const int m12 = mid_of(t[1], t[2]);
    const int m20 = mid_of(t[2], t[0]);
    out.triangles.push_back({t[0], m01, m20});
    out.triangles.push_back({t[1], m12, m01});
    out.triangles.push_back({t[2], m20, m12});
    out.triangles.push_back({m01, m12, m20});
  }
  out.h_max = out.compute_h_max();
  return out;
}

// Uniform grid over triangle bounding boxes for O(1) point location.
class MeshLocator {
 public:
  explicit MeshLocator(const TriangleMesh& mesh) : mesh_(&mesh) {
    box_ = Rect::of_points(mesh.vertices).padded(1e-12);
    const int target = std::max(1, int(std::sqrt(double(mesh.triangles.size()))));
    nx_ = ny_ = target;
    cells_.assign(size_t(nx_) * ny_, {});
    for (int t = 0; t < int(mesh.triangles.size()); ++t) {
      const auto& tr = mesh.triangles[t];
      Rect tb{{1e300, 1e300}, {-1e300, -1e300}};
      for (int i = 0; i < 3; ++i) tb.expand(mesh.vertices[tr[i]]);
      int i0, j0, i1, j1;
      cell_of(tb.lo, i0, j0);
      cell_of(tb.hi, i1, j1);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) cells_[size_t(j) * nx_ + i].push_back(t);
    }
  }

  // triangle containing p, or -1; fills barycentric coords
  int locate(const Vec2& p, double* l = nullptr) const {
    if (!box_.contains(p)) return -1;
    int ci, cj;
    cell_of(p, ci, cj);
    for (int t : cells_[size_t(cj) * nx_ + ci]) {
      const auto& tr = mesh_->triangles[t];
      const Vec2& a = mesh_->vertices[tr[0]];
      const Vec2& b = mesh_->vertices[tr[1]];
      const Vec2& c = mesh_->vertices[tr[2]];
      const double den = (b - a).cross(c - a);
      if (den <= 0) continue;
      const double l1 = (p - a).cross(c - a) / den;
      const double l2 = (b - a).cross(p - a) / den;
      const double l0 = 1 - l1 - l2;
      const double eps = -1e-12;
      if (l0 >= eps && l1 >= eps && l2 >= eps) {
        if (l) { l[0] = l0; l[1] = l1; l[2] = l2; }
        return t;
      }
    }
    return -1;
  }

  void triangles_near(const Rect& r, std::vector<int>& out) const {
    int i0, j0, i1, j1;
    cell_of({std::max(r.lo.x, box_.lo.x), std::max(r.lo.y, box_.lo.y)}, i0, j0);
    cell_of({std::min(r.hi.x, box_.hi.x), std::min(r.hi.y, box_.hi.y)}, i1, j1);
    seen_.assign(mesh_->triangles.size(), 0);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        for (int t : cells_[size_t(j) * nx_ + i])
          if (!seen_[t]) {
            seen_[t] = 1;
            out.push_back(t);
          }
  }

 private:
  void cell_of(const Vec2& p, int& i, int& j) const {
    i = std::clamp(int((p.x - box_.lo.x) / box_.width() * nx_), 0, nx_ - 1);
    j = std::clamp(int((p.y - box_.lo.y) / box_.height() * ny_), 0, ny_ - 1);
  }

  const TriangleMesh* mesh_;
  Rect box_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> cells_;
  mutable std::vector<std::uint8_t> seen_;
};

// Region backed by a mesh of a polygon domain; cover triangles carry their
// mesh index so fields can evaluate without point location.
class MeshRegion final : public Region {
 public:
  MeshRegion(std::shared_ptr<const TriangleMesh> mesh, std::shared_ptr<const PolygonDomain> domain)
      : mesh_(std::move(mesh)), domain_(std::move(domain)), locator_(*mesh_) {}

  const TriangleMesh& mesh() const { return *mesh_; }
  const PolygonDomain& domain() const { return *domain_; }
  const MeshLocator& locator() const { return locator_; }

  PointClass classify(const Vec2& p) const override { return domain_->classify(p); }
  double diameter() const override { return domain_->diameter(); }
  Rect bbox() const override { return domain_->bbox(); }
  double boundary_distance(const Vec2& p) const override { return domain_->boundary_distance(p); }
  void cover_ball(const Vec2& c, double r, std::vector<TriRef>& out) const override {
    std::vector<int> ids;
    locator_.triangles_near({{c.x - r, c.y - r}, {c.x + r, c.y + r}}, ids);
    for (int t : ids) {
      const auto& tr = mesh_->triangles[t];
      out.push_back({mesh_->vertices[tr[0]], mesh_->vertices[tr[1]], mesh_->vertices[tr[2]], t});
    }
  }

 private:
  std::shared_ptr<const TriangleMesh> mesh_;
  std::shared_ptr<const PolygonDomain> domain_;
  MeshLocator locator_;
};

}  // namespace nodalab
