#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nodalab {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2() = default;
  Vec2(double xx, double yy) : x(xx), y(yy) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  Vec2 perp() const { return {-y, x}; }
  Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double xx, double yy, double zz = 0.0) : x(xx), y(yy), z(zz) {}
  explicit Vec3(const Vec2& v, double zz = 0.0) : x(v.x), y(v.y), z(zz) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  Vec2 xy() const { return {x, y}; }
};

struct Rect {
  Vec2 lo{0, 0}, hi{0, 0};

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double diag() const { return (hi - lo).norm(); }
  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  bool overlaps(const Rect& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }
  Rect padded(double d) const { return {{lo.x - d, lo.y - d}, {hi.x + d, hi.y + d}}; }
  void expand(const Vec2& p) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
  }
  static Rect of_points(const std::vector<Vec2>& pts) {
    Rect r{{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()},
           {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()}};
    for (const auto& p : pts) r.expand(p);
    return r;
  }
};

// Counter-based deterministic RNG.  All randomness in the project flows
// through this so that a (seed, stream) pair pins every artifact byte.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0,1)
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  static SplitMix64 fork(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x6a09e667f3bcc909ULL + stream * 0x1f83d9abfb41bd6bULL));
    g.next();
    return g;
  }

 private:
  std::uint64_t state_;
};

// R2 low-discrepancy sequence (generalized golden ratio); deterministic
// space-filling samples for sup estimation and membership probes.
struct R2Sequence {
  static Vec2 point(std::uint64_t k) {
    // plastic constant based increments
    constexpr double a1 = 0.7548776662466927;
    constexpr double a2 = 0.5698402909980532;
    double u = std::fmod(0.5 + a1 * double(k + 1), 1.0);
    double v = std::fmod(0.5 + a2 * double(k + 1), 1.0);
    return {u, v};
  }
  static Vec2 in_rect(std::uint64_t k, const Rect& r) {
    Vec2 p = point(k);
    return {r.lo.x + p.x * r.width(), r.lo.y + p.y * r.height()};
  }
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 points");
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i]; sy += ys[i];
    sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (f.slope * xs[i] + f.intercept);
    ss_res += e * e;
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

// Least squares y = c*x; r2 is measured against the mean model.
inline double fit_through_origin(const std::vector<double>& xs, const std::vector<double>& ys,
                                 double* r2 = nullptr) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("fit_through_origin: empty input");
  double sxy = 0, sxx = 0, sy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += xs[i] * ys[i];
    sxx += xs[i] * xs[i];
    sy += ys[i];
  }
  if (sxx < 1e-300) throw std::invalid_argument("fit_through_origin: degenerate abscissae");
  const double c = sxy / sxx;
  if (r2) {
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / double(ys.size());
    for (size_t i = 0; i < xs.size(); ++i) {
      ss_res += (ys[i] - c * xs[i]) * (ys[i] - c * xs[i]);
      ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    *r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  }
  return c;
}

inline double spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t n = xs.size();
  if (ys.size() != n || n < 2) throw std::invalid_argument("spearman_rho: bad input");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<size_t> idx(v.size());
    for (size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < idx.size(); ++i) r[idx[i]] = double(i);
    return r;
  };
  const auto rx = ranks(xs), ry = ranks(ys);
  const LineFit f = fit_line(rx, ry);
  const double sign = f.slope >= 0 ? 1.0 : -1.0;
  return sign * std::sqrt(std::max(0.0, f.r2));
}

// Runs f(i) for i in [0,n) on a small thread pool.  Each index owns its
// output slot, so results do not depend on the schedule.
template <class F>
void parallel_for(std::size_t n, F&& f, unsigned max_threads = 0) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned nt = max_threads == 0 ? hw : std::min(hw, max_threads);
  if (nt <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  nt = unsigned(std::min<std::size_t>(nt, n));
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex err_mtx;
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < n; i += nt) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mtx);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline double sq(double v) { return v * v; }

}  // namespace nodalab
