#pragma once

// Scalar fields under one evaluation contract: FEM solutions, separable
// rectangle modes, Bessel disk modes, harmonic polynomials and the
// exponential harmonic extension h(x,t) = u(x) e^{sqrt(lambda) t}.

#include <cctype>
#include <memory>
#include <optional>
#include <sstream>

#include "nodalab/bessel.hpp"
#include "nodalab/geometry.hpp"
#include "nodalab/mesh.hpp"

namespace nodalab {

enum class FieldKind { fem, rectangle, disk, harmonic_poly, extension };

class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual FieldKind kind() const = 0;
  virtual int dim() const = 0;
  virtual double value(const Vec3& p) const = 0;
  virtual Vec3 gradient(const Vec3& p) const = 0;
};

using FieldPtr = std::shared_ptr<const ScalarField>;

// sum_j re_j Re(z^j) + im_j Im(z^j); exactly harmonic
class HarmonicPolynomialField final : public ScalarField {
 public:
  HarmonicPolynomialField(std::vector<double> re, std::vector<double> im)
      : re_(std::move(re)), im_(std::move(im)) {
    deg_ = int(std::max(re_.size(), im_.size())) - 1;
    re_.resize(deg_ + 1, 0.0);
    im_.resize(deg_ + 1, 0.0);
  }

  static FieldPtr monomial_re(int k, double coef = 1.0) {
    std::vector<double> re(k + 1, 0.0);
    re[k] = coef;
    return std::make_shared<HarmonicPolynomialField>(re, std::vector<double>{});
  }
  static FieldPtr monomial_im(int k, double coef = 1.0) {
    std::vector<double> im(k + 1, 0.0);
    im[k] = coef;
    return std::make_shared<HarmonicPolynomialField>(std::vector<double>{}, im);
  }
  static FieldPtr constant(double c) { return monomial_re(0, c); }
  static FieldPtr linear_y(double c = 1.0) { return monomial_im(1, c); }

  FieldKind kind() const override { return FieldKind::harmonic_poly; }
  int dim() const override { return 2; }
  int degree() const { return deg_; }
  const std::vector<double>& re_coeffs() const { return re_; }
  const std::vector<double>& im_coeffs() const { return im_; }

  // vanishes identically on {y = 0} iff only Im terms are present
  bool odd_in_y() const {
    for (double c : re_)
      if (c != 0.0) return false;
    return true;
  }

  double value(const Vec3& p) const override {
    double zr = 1, zi = 0;  // z^0
    double s = re_[0];
    for (int j = 1; j <= deg_; ++j) {
      const double nr = zr * p.x - zi * p.y;
      const double ni = zr * p.y + zi * p.x;
      zr = nr;
      zi = ni;
      s += re_[j] * zr + im_[j] * zi;
    }
    return s;
  }

  Vec3 gradient(const Vec3& p) const override {
    // d/dx Re z^j = j Re z^{j-1}, d/dy Re z^j = -j Im z^{j-1}
    // d/dx Im z^j = j Im z^{j-1}, d/dy Im z^j =  j Re z^{j-1}
    double zr = 1, zi = 0;
    double gx = 0, gy = 0;
    for (int j = 1; j <= deg_; ++j) {
      gx += j * (re_[j] * zr + im_[j] * zi);
      gy += j * (-re_[j] * zi + im_[j] * zr);
      const double nr = zr * p.x - zi * p.y;
      const double ni = zr * p.y + zi * p.x;
      zr = nr;
      zi = ni;
    }
    return {gx, gy, 0};
  }

 private:
  std::vector<double> re_, im_;
  int deg_ = 0;
};

// sin(m pi x / a) sin(n pi y / b) on the rectangle (0,a) x (0,b)
class RectangleField final : public ScalarField {
 public:
  RectangleField(int m, int n, double a = 1.0, double b = 1.0) : m_(m), n_(n), a_(a), b_(b) {
    if (m < 1 || n < 1) throw std::invalid_argument("RectangleField: mode numbers start at 1");
    if (a <= 0 || b <= 0) throw std::invalid_argument("RectangleField: sides must be positive");
  }

  FieldKind kind() const override { return FieldKind::rectangle; }
  int dim() const override { return 2; }
  double lambda() const { return kPi * kPi * (sq(m_ / a_) + sq(n_ / b_)); }
  int m() const { return m_; }
  int n() const { return n_; }
  double a() const { return a_; }
  double b() const { return b_; }

  double value(const Vec3& p) const override {
    return std::sin(m_ * kPi * p.x / a_) * std::sin(n_ * kPi * p.y / b_);
  }
  Vec3 gradient(const Vec3& p) const override {
    const double sx = std::sin(m_ * kPi * p.x / a_), cx = std::cos(m_ * kPi * p.x / a_);
    const double sy = std::sin(n_ * kPi * p.y / b_), cy = std::cos(n_ * kPi * p.y / b_);
    return {m_ * kPi / a_ * cx * sy, n_ * kPi / b_ * sx * cy, 0};
  }

 private:
  int m_, n_;
  double a_, b_;
};

// sin(m pi x / a) on the interval (0, a); the 1d pipeline
class Sine1DField final : public ScalarField {
 public:
  explicit Sine1DField(int m, double a = 1.0) : m_(m), a_(a) {
    if (m < 1) throw std::invalid_argument("Sine1DField: mode number starts at 1");
  }
  FieldKind kind() const override { return FieldKind::rectangle; }
  int dim() const override { return 1; }
  double lambda() const { return sq(m_ * kPi / a_); }
  double a() const { return a_; }
  int m() const { return m_; }
  double value(const Vec3& p) const override { return std::sin(m_ * kPi * p.x / a_); }
  Vec3 gradient(const Vec3& p) const override {
    return {m_ * kPi / a_ * std::cos(m_ * kPi * p.x / a_), 0, 0};
  }

 private:
  int m_;
  double a_;
};

// J_k(j_{k,s} r) cos(k theta) on the unit disk
class DiskField final : public ScalarField {
 public:
  DiskField(int k, int s) : k_(k), s_(s), alpha_(bessel_zero(k, s)) {
    if (k < 0 || s < 1) throw std::invalid_argument("DiskField: need k >= 0, s >= 1");
  }

  FieldKind kind() const override { return FieldKind::disk; }
  int dim() const override { return 2; }
  double lambda() const { return alpha_ * alpha_; }
  double alpha() const { return alpha_; }
  int k() const { return k_; }
  int s() const { return s_; }

  double value(const Vec3& p) const override {
    const double r = std::hypot(p.x, p.y);
    const double u = bessel_j(k_, alpha_ * r);
    if (k_ == 0) return u;
    if (r < 1e-300) return 0.0;
    const double theta = std::atan2(p.y, p.x);
    return u * std::cos(k_ * theta);
  }

  Vec3 gradient(const Vec3& p) const override {
    const double r = std::hypot(p.x, p.y);
    if (r < 1e-12) {
      // series behavior at the origin: J_k ~ (alpha r)^k / (2^k k!)
      if (k_ == 0 || k_ > 1) return {0, 0, 0};
      return {alpha_ / 2, 0, 0};
    }
    const double theta = std::atan2(p.y, p.x);
    const double ur = alpha_ * bessel_j_derivative(k_, alpha_ * r) * std::cos(k_ * theta);
    const double ut = -k_ * bessel_j(k_, alpha_ * r) * std::sin(k_ * theta);
    const double ct = p.x / r, st = p.y / r;
    return {ur * ct - ut / r * st, ur * st + ut / r * ct, 0};
  }

 private:
  int k_, s_;
  double alpha_;
};

// nodal coefficients over a mesh, piecewise linear; evaluation outside the
// mesh signals out-of-domain instead of extrapolating
class FemField final : public ScalarField {
 public:
  FemField(std::shared_ptr<const TriangleMesh> mesh, std::vector<double> vertex_values)
      : mesh_(std::move(mesh)),
        values_(std::move(vertex_values)),
        locator_(std::make_shared<MeshLocator>(*mesh_)) {
    if (values_.size() != mesh_->vertices.size())
      throw std::invalid_argument("FemField: one value per mesh vertex required");
  }

  FieldKind kind() const override { return FieldKind::fem; }
  int dim() const override { return 2; }
  const TriangleMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriangleMesh> mesh_ptr() const { return mesh_; }
  const std::vector<double>& vertex_values() const { return values_; }

  std::optional<double> try_value(const Vec2& p) const {
    double l[3];
    const int t = locator_->locate(p, l);
    if (t < 0) return std::nullopt;
    return value_in_triangle(t, l);
  }

  double value(const Vec3& p) const override {
    const auto v = try_value({p.x, p.y});
    if (!v) throw std::domain_error("FemField: evaluation outside the mesh");
    return *v;
  }

  // barycentric evaluation when the owning triangle is already known
  double value_in_triangle(int t, const double l[3]) const {
    const auto& tr = mesh_->triangles[t];
    return l[0] * values_[tr[0]] + l[1] * values_[tr[1]] + l[2] * values_[tr[2]];
  }

  double value_tagged(const Vec2& p, int tag) const {
    if (tag >= 0 && tag < int(mesh_->triangles.size())) {
      const auto& tr = mesh_->triangles[tag];
      const Vec2& a = mesh_->vertices[tr[0]];
      const Vec2& b = mesh_->vertices[tr[1]];
      const Vec2& c = mesh_->vertices[tr[2]];
      const double den = (b - a).cross(c - a);
      const double l1 = (p - a).cross(c - a) / den;
      const double l2 = (b - a).cross(p - a) / den;
      const double l[3] = {1 - l1 - l2, l1, l2};
      return value_in_triangle(tag, l);
    }
    const auto v = try_value(p);
    return v ? *v : 0.0;
  }

  Vec3 gradient(const Vec3& p) const override {
    double l[3];
    const int t = locator_->locate({p.x, p.y}, l);
    if (t < 0) throw std::domain_error("FemField: gradient outside the mesh");
    const auto& tr = mesh_->triangles[t];
    const Vec2& p0 = mesh_->vertices[tr[0]];
    const Vec2& p1 = mesh_->vertices[tr[1]];
    const Vec2& p2 = mesh_->vertices[tr[2]];
    const double twoA = (p1 - p0).cross(p2 - p0);
    const Vec2 g = ((p2 - p1).perp() * values_[tr[0]] + (p0 - p2).perp() * values_[tr[1]] +
                    (p1 - p0).perp() * values_[tr[2]]) /
                   twoA;
    return {g.x, g.y, 0};
  }

  double max_abs() const {
    double m = 0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::shared_ptr<const TriangleMesh> mesh_;
  std::vector<double> values_;
  std::shared_ptr<MeshLocator> locator_;
};

// h(x, t) = u(x) e^{sqrt(lambda) t}; the added coordinate is the last one
class ExtensionField final : public ScalarField {
 public:
  ExtensionField(FieldPtr inner, double lambda) : inner_(std::move(inner)), lambda_(lambda) {
    if (lambda_ <= 0) throw std::invalid_argument("ExtensionField: lambda must be positive");
    if (!inner_ || inner_->dim() >= 3)
      throw std::invalid_argument("ExtensionField: inner field must be 1d or 2d");
    root_ = std::sqrt(lambda_);
  }

  FieldKind kind() const override { return FieldKind::extension; }
  int dim() const override { return inner_->dim() + 1; }
  const FieldPtr& inner() const { return inner_; }
  double lambda() const { return lambda_; }
  double sqrt_lambda() const { return root_; }

  double t_of(const Vec3& p) const { return inner_->dim() == 1 ? p.y : p.z; }
  Vec3 base_of(const Vec3& p) const {
    return inner_->dim() == 1 ? Vec3{p.x, 0, 0} : Vec3{p.x, p.y, 0};
  }

  double value(const Vec3& p) const override {
    return inner_->value(base_of(p)) * std::exp(root_ * t_of(p));
  }

  Vec3 gradient(const Vec3& p) const override {
    const double e = std::exp(root_ * t_of(p));
    const Vec3 gu = inner_->gradient(base_of(p));
    const double u = inner_->value(base_of(p));
    if (inner_->dim() == 1) return {gu.x * e, root_ * u * e, 0};
    return {gu.x * e, gu.y * e, root_ * u * e};
  }

 private:
  FieldPtr inner_;
  double lambda_;
  double root_;
};

inline FieldPtr make_extension(FieldPtr u, double lambda) {
  return std::make_shared<ExtensionField>(std::move(u), lambda);
}

// ---------------------------------------------------------------------------
// Supremum of |f| over ball ∩ closure(region): deterministic low-discrepancy
// sampling (interior, rim and domain boundary) refined by projected ascent.

struct SupResult {
  double sup = 0.0;
  Vec2 argmax;
  double rel_error_est = 1e-3;
};

inline SupResult sup_on_ball(const ScalarField& f, const Ball& ball, const Region& region,
                             int base_samples = 10000) {
  if (f.dim() != 2) throw std::invalid_argument("sup_on_ball: field must be two-dimensional");
  const Vec2 c = ball.center.xy();
  const double r = ball.radius;
  auto feval = [&](const Vec2& p) { return std::abs(f.value(Vec3(p))); };

  std::vector<std::pair<double, Vec2>> best;
  auto consider = [&](const Vec2& p) {
    if (dist(p, c) > r) return;
    if (region.classify(p) == PointClass::outside) return;
    best.push_back({feval(p), p});
  };

  const Rect box{{c.x - r, c.y - r}, {c.x + r, c.y + r}};
  for (int k = 0; k < base_samples; ++k) consider(R2Sequence::in_rect(k, box));
  for (int k = 0; k < 2048; ++k) {
    const double th = 2 * kPi * k / 2048;
    consider(c + Vec2{std::cos(th), std::sin(th)} * r);
  }
  // domain boundary inside the ball matters for boundary-vanishing fields
  const int nb = 2048;
  for (int k = 0; k < nb; ++k) {
    const double th = 2 * kPi * k / nb;
    for (double rho : {0.25 * r, 0.5 * r, 0.75 * r})
      consider(c + Vec2{std::cos(th), std::sin(th)} * rho);
  }
  if (best.empty()) throw std::runtime_error("sup_on_ball: ball does not meet the region");

  std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  best.resize(std::min<size_t>(best.size(), 8));
  const double sampled_best = best[0].first;

  double top = sampled_best;
  Vec2 arg = best[0].second;
  for (auto& [v0, p0] : best) {
    Vec2 p = p0;
    double v = v0;
    double step = 0.2 * r;
    for (int it = 0; it < 200 && step > 1e-12 * r; ++it) {
      const Vec3 g3 = f.gradient(Vec3(p));
      Vec2 g{g3.x, g3.y};
      if (f.value(Vec3(p)) < 0) g = g * -1.0;
      const double gn = g.norm();
      if (gn < 1e-300) break;
      Vec2 q = p + g * (step / gn);
      const Vec2 d = q - c;
      if (d.norm() > r) q = c + d * (r / d.norm());
      if (region.classify(q) == PointClass::outside || feval(q) <= v) {
        step *= 0.5;
        continue;
      }
      p = q;
      v = feval(q);
    }
    if (v > top) {
      top = v;
      arg = p;
    }
  }

  SupResult out;
  out.sup = top;
  out.argmax = arg;
  out.rel_error_est = top > 0 ? std::max(1e-3, (top - sampled_best) / top) : 1e-3;
  return out;
}

// ---------------------------------------------------------------------------
// Boundary Hölder exponent probe: |h| against dist(., boundary) along inward
// rays from the graph, log-log least squares.

struct HolderReport {
  double beta_hat = 0.0;
  double fit_r2 = 0.0;
  int points = 0;
};

inline HolderReport holder_boundary_check(const ScalarField& f, const LipschitzPatch& patch,
                                          int rays = 9, int steps = 24) {
  const double R = patch.radius();
  const GraphRegion region(patch);

  // the field must vanish on the boundary graph inside (1/2)B
  double scale = 0;
  for (int k = 0; k < 512; ++k) {
    const Vec2 p = patch.frame().to_world(
        {(-0.5 + double(k) / 511) * R, patch.graph((-0.5 + double(k) / 511) * R)});
    scale = std::max(scale, std::abs(f.value(Vec3(p + patch.up() * (0.2 * R)))));
  }
  if (scale <= 0) throw std::invalid_argument("holder_boundary_check: field vanishes identically");
  for (int k = 0; k < 256; ++k) {
    const double x = (-0.5 + double(k) / 255) * R;
    const Vec2 p = patch.frame().to_world({x, patch.graph(x)});
    if (std::abs(f.value(Vec3(p))) > 1e-8 * scale)
      throw std::invalid_argument("holder_boundary_check: field does not vanish on the boundary");
  }

  std::vector<double> lx, ly;
  for (int ri = 0; ri < rays; ++ri) {
    const double x = (-0.25 + 0.5 * double(ri) / (rays - 1)) * R;
    const Vec2 base = patch.frame().to_world({x, patch.graph(x)});
    for (int si = 0; si < steps; ++si) {
      const double s = R * std::pow(10.0, -4.0 + 2.5 * double(si) / (steps - 1));
      const Vec2 p = base + patch.up() * s;
      const double d = region.boundary_distance(p);
      const double v = std::abs(f.value(Vec3(p)));
      if (v <= 0 || d <= 0) continue;
      lx.push_back(std::log(d));
      ly.push_back(std::log(v));
    }
  }
  if (lx.size() < 8) throw std::runtime_error("holder_boundary_check: not enough usable samples");
  const LineFit fit = fit_line(lx, ly);
  HolderReport rep;
  rep.beta_hat = fit.slope;
  rep.fit_r2 = fit.r2;
  rep.points = int(lx.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Analytic oracles with their eigenvalues

struct AnalyticPair {
  FieldPtr field;
  double lambda = 0.0;
};

inline AnalyticPair analytic_rectangle(int m, int n, double a = 1.0, double b = 1.0) {
  auto f = std::make_shared<RectangleField>(m, n, a, b);
  return {f, f->lambda()};
}

inline AnalyticPair analytic_disk(int k, int s) {
  auto f = std::make_shared<DiskField>(k, s);
  return {f, f->lambda()};
}

// ---------------------------------------------------------------------------
// Mini-language for field specs:
//   harmonic:<terms over Re(z^k), Im(z^k), y and constants>
//   rect:m,n[,a,b]      disk:k,j      ext:<inner>@lambda
// (fem:<file>#<index> is resolved by the io layer)

struct ParsedField {
  FieldPtr field;
  std::optional<double> lambda;
  std::string spec;
};

namespace fielddetail {

inline std::vector<double> parse_csv_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw std::invalid_argument("field spec: empty numeric field");
    size_t pos = 0;
    out.push_back(std::stod(tok, &pos));
    if (pos != tok.size()) throw std::invalid_argument("field spec: bad number '" + tok + "'");
  }
  return out;
}

inline FieldPtr parse_harmonic_expr(const std::string& expr) {
  std::vector<double> re(32, 0.0), im(32, 0.0);
  size_t i = 0;
  const auto skip_ws = [&]() {
    while (i < expr.size() && std::isspace(static_cast<unsigned char>(expr[i]))) ++i;
  };
  bool any = false;
  while (true) {
    skip_ws();
    if (i >= expr.size()) break;
    double sign = 1.0;
    if (expr[i] == '+' || expr[i] == '-') {
      sign = expr[i] == '-' ? -1.0 : 1.0;
      ++i;
      skip_ws();
    } else if (any) {
      throw std::invalid_argument("harmonic spec: expected '+' or '-' between terms");
    }
    double coef = 1.0;
    if (i < expr.size() && (std::isdigit(static_cast<unsigned char>(expr[i])) || expr[i] == '.')) {
      size_t used = 0;
      coef = std::stod(expr.substr(i), &used);
      i += used;
      skip_ws();
      if (i < expr.size() && expr[i] == '*') {
        ++i;
        skip_ws();
      } else {
        re[0] += sign * coef;  // bare constant term
        any = true;
        continue;
      }
    }
    if (expr.compare(i, 5, "Re(z^") == 0 || expr.compare(i, 5, "Im(z^") == 0) {
      const bool real_part = expr[i] == 'R';
      i += 5;
      size_t used = 0;
      const int k = std::stoi(expr.substr(i), &used);
      i += used;
      if (k < 0 || k >= int(re.size())) throw std::invalid_argument("harmonic spec: degree out of range");
      if (i >= expr.size() || expr[i] != ')')
        throw std::invalid_argument("harmonic spec: missing ')'");
      ++i;
      (real_part ? re[k] : im[k]) += sign * coef;
    } else if (i < expr.size() && expr[i] == 'y') {
      ++i;
      im[1] += sign * coef;
    } else {
      throw std::invalid_argument("harmonic spec: unknown term near '" + expr.substr(i) + "'");
    }
    any = true;
  }
  if (!any) throw std::invalid_argument("harmonic spec: empty expression");
  return std::make_shared<HarmonicPolynomialField>(re, im);
}

}  // namespace fielddetail

// Parses the analytic part of the spec grammar; fem specs are rejected here.
inline ParsedField parse_field_spec(const std::string& spec) {
  ParsedField out;
  out.spec = spec;
  if (spec.rfind("harmonic:", 0) == 0) {
    out.field = fielddetail::parse_harmonic_expr(spec.substr(9));
    return out;
  }
  if (spec.rfind("rect:", 0) == 0) {
    const auto v = fielddetail::parse_csv_numbers(spec.substr(5));
    if (v.size() != 2 && v.size() != 4)
      throw std::invalid_argument("rect spec: expected m,n[,a,b]");
    const auto pair = v.size() == 2 ? analytic_rectangle(int(v[0]), int(v[1]))
                                    : analytic_rectangle(int(v[0]), int(v[1]), v[2], v[3]);
    out.field = pair.field;
    out.lambda = pair.lambda;
    return out;
  }
  if (spec.rfind("disk:", 0) == 0) {
    const auto v = fielddetail::parse_csv_numbers(spec.substr(5));
    if (v.size() != 2) throw std::invalid_argument("disk spec: expected k,j");
    const auto pair = analytic_disk(int(v[0]), int(v[1]));
    out.field = pair.field;
    out.lambda = pair.lambda;
    return out;
  }
  if (spec.rfind("ext:", 0) == 0) {
    const auto at = spec.rfind('@');
    std::string inner_spec = spec.substr(4);
    std::optional<double> lambda;
    if (at != std::string::npos && at > 4) {
      inner_spec = spec.substr(4, at - 4);
      lambda = std::stod(spec.substr(at + 1));
    }
    ParsedField inner = parse_field_spec(inner_spec);
    if (!lambda) lambda = inner.lambda;
    if (!lambda)
      throw std::invalid_argument("ext spec: lambda required for fields without an eigenvalue");
    out.field = make_extension(inner.field, *lambda);
    out.lambda = *lambda;
    return out;
  }
  if (spec.rfind("fem:", 0) == 0)
    throw std::invalid_argument("fem field specs require the solution-file loader");
  throw std::invalid_argument("unknown field spec '" + spec + "'");
}

}  // namespace nodalab
