#pragma once

// P1 finite elements for the Dirichlet Laplacian: stiffness/mass assembly
// and a shift-invert Lanczos eigensolver (full reorthogonalization in the
// M-inner product, sparse LDLT factorization of K behind it).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "nodalab/bessel.hpp"
#include "nodalab/mesh.hpp"
#include "nodalab/sparse.hpp"

namespace nodalab {

struct AssembledSystem {
  SparseSymmetric K;      // stiffness
  SparseSymmetric M;      // consistent mass
  std::vector<int> dof_map;  // vertex -> dof index, -1 for eliminated rows
  int n_dofs = 0;
};

inline AssembledSystem assemble(const TriangleMesh& mesh, bool dirichlet = true) {
  AssembledSystem sys;
  const int nv = int(mesh.vertices.size());
  sys.dof_map.assign(nv, -1);
  int nd = 0;
  for (int v = 0; v < nv; ++v)
    if (!dirichlet || !mesh.boundary_vertex[v]) sys.dof_map[v] = nd++;
  sys.n_dofs = nd;

  std::vector<std::tuple<int, int, double>> kt, mt;
  kt.reserve(mesh.triangles.size() * 6);
  mt.reserve(mesh.triangles.size() * 6);
  for (const auto& t : mesh.triangles) {
    const Vec2& p0 = mesh.vertices[t[0]];
    const Vec2& p1 = mesh.vertices[t[1]];
    const Vec2& p2 = mesh.vertices[t[2]];
    const double area = 0.5 * (p1 - p0).cross(p2 - p0);
    if (area <= 0) throw std::runtime_error("assemble: degenerate or misoriented triangle");
    // constant P1 gradients: grad_i = (b_i, c_i) / (2A)
    const double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    for (int i = 0; i < 3; ++i) {
      const int gi = sys.dof_map[t[i]];
      if (gi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int gj = sys.dof_map[t[j]];
        if (gj < 0 || gj > gi) continue;
        kt.emplace_back(gi, gj, (b[i] * b[j] + c[i] * c[j]) / (4 * area));
        mt.emplace_back(gi, gj, area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }
  sys.K = SparseSymmetric::from_triplets(nd, std::move(kt));
  sys.M = SparseSymmetric::from_triplets(nd, std::move(mt));
  return sys;
}

struct EigenPair {
  double lambda = 0.0;
  std::vector<double> coeffs;  // dof coefficients, M-normalized
  double residual = 0.0;       // ||K u - lambda M u|| / ||u||
};

struct EigenSolveError : std::runtime_error {
  double best_residual;
  EigenSolveError(const std::string& msg, double r) : std::runtime_error(msg), best_residual(r) {}
};

namespace spectraldetail {

inline Eigen::SparseMatrix<double> to_eigen(const SparseSymmetric& a) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a.values.size() * 2);
  for (int i = 0; i < a.n; ++i)
    for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      const int j = a.column_indices[k];
      trips.emplace_back(i, j, a.values[k]);
      if (j != i) trips.emplace_back(j, i, a.values[k]);
    }
  Eigen::SparseMatrix<double> m(a.n, a.n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace spectraldetail

// Smallest `count` eigenpairs of K u = lambda M u.  Shift-invert Lanczos at
// sigma = 0: Krylov iteration with A = K^{-1} M, self-adjoint in the M inner
// product; the largest Ritz values of A are the smallest lambda.
inline std::vector<EigenPair> solve_eigen(const SparseSymmetric& K, const SparseSymmetric& M,
                                          int count, double tol = 1e-8, std::uint64_t seed = 0,
                                          long max_applies = 10000) {
  using Vector = Eigen::VectorXd;
  const int n = K.n;
  if (count < 1) throw std::invalid_argument("solve_eigen: count must be >= 1");
  if (count > n) throw std::invalid_argument("solve_eigen: count exceeds the dof count");

  const Eigen::SparseMatrix<double> Ke = spectraldetail::to_eigen(K);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Ke);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("solve_eigen: stiffness factorization failed");

  auto mul_M = [&](const Vector& x) {
    Vector y(n);
    M.multiply(x.data(), y.data());
    return y;
  };
  auto mul_K = [&](const Vector& x) {
    Vector y(n);
    K.multiply(x.data(), y.data());
    return y;
  };

  const int m_cap = int(std::min<long>(n, std::max(3L * count + 60, 120L)));
  std::vector<Vector> V;    // M-orthonormal Lanczos basis
  std::vector<Vector> MV;   // M * V cached for reorthogonalization
  std::vector<double> alpha, beta;
  V.reserve(m_cap);

  SplitMix64 rng = SplitMix64::fork(seed, 0x5bd1);
  auto random_vec = [&]() {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1, 1);
    return v;
  };
  auto orthogonalize = [&](Vector& w) {
    for (int pass = 0; pass < 2; ++pass)
      for (size_t i = 0; i < V.size(); ++i) {
        const double c = MV[i].dot(w);
        w -= c * V[i];
      }
  };

  {
    Vector v0 = random_vec();
    orthogonalize(v0);
    const double nrm = std::sqrt(mul_M(v0).dot(v0));
    v0 /= nrm;
    V.push_back(v0);
    MV.push_back(mul_M(v0));
  }

  long applies = 0;
  double best_res = 1e300;
  std::vector<EigenPair> out;

  auto extract = [&](bool final_check) -> bool {
    const int m = int(alpha.size());
    if (m < count) return false;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    // largest theta -> smallest lambda
    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < m; ++i) order.push_back({-es.eigenvalues()[i], i});
    std::sort(order.begin(), order.end());
    std::vector<EigenPair> pairs;
    double worst = 0;
    for (int c = 0; c < count; ++c) {
      const double theta = -order[c].first;
      if (theta <= 1e-300) return false;
      Vector u = Vector::Zero(n);
      const auto s = es.eigenvectors().col(order[c].second);
      for (int i = 0; i < m; ++i) u += s[i] * V[i];
      const Vector Mu = mul_M(u);
      const double mn = std::sqrt(Mu.dot(u));
      u /= mn;
      const Vector Ku = mul_K(u);
      const Vector Mu2 = mul_M(u);
      const double lambda = Ku.dot(u) / Mu2.dot(u);  // Rayleigh refinement
      const double res = (Ku - lambda * Mu2).norm() / u.norm();
      worst = std::max(worst, res);
      EigenPair p;
      p.lambda = lambda;
      p.residual = res;
      p.coeffs.assign(u.data(), u.data() + n);
      pairs.push_back(std::move(p));
    }
    best_res = std::min(best_res, worst);
    if (worst <= tol || final_check) {
      std::sort(pairs.begin(), pairs.end(),
                [](const EigenPair& a, const EigenPair& b) { return a.lambda < b.lambda; });
      out = std::move(pairs);
      return worst <= tol;
    }
    return false;
  };

  while (int(V.size()) <= m_cap && applies < max_applies) {
    const Vector& vj = V.back();
    Vector w = ldlt.solve(MV.back());
    ++applies;
    const double a = MV.back().dot(w);
    alpha.push_back(a);
    w -= a * vj;
    if (V.size() >= 2) w -= beta.back() * V[V.size() - 2];
    orthogonalize(w);
    double b = std::sqrt(std::max(0.0, mul_M(w).dot(w)));
    if (b < 1e-12) {
      // invariant subspace found; restart with a fresh direction
      Vector f = random_vec();
      orthogonalize(f);
      b = std::sqrt(std::max(0.0, mul_M(f).dot(f)));
      if (b < 1e-12) break;
      w = f;
    }
    w /= b;
    beta.push_back(b);
    V.push_back(w);
    MV.push_back(mul_M(w));

    const int m = int(alpha.size());
    if (m >= count + 2 && (m % 10 == 0 || int(V.size()) > m_cap) && extract(false)) return out;
  }
  if (extract(true)) return out;
  throw EigenSolveError("solve_eigen: iteration budget exhausted", best_res);
}

struct MonotonicityReport {
  double lambda1 = 0.0;       // first Dirichlet eigenvalue of the domain
  double disk_bound = 0.0;    // first eigenvalue of the ball with radius diam
  bool holds = false;
};

// lambda_1(domain) >= lambda_1(ball of radius diam(domain))
inline MonotonicityReport first_eigenvalue_monotonicity_check(const PolygonDomain& domain,
                                                              double h = -1.0) {
  if (h <= 0) h = domain.diameter() / 50;
  const TriangleMesh mesh = triangulate(domain, h);
  const AssembledSystem sys = assemble(mesh);
  const auto pairs = solve_eigen(sys.K, sys.M, 1, 1e-8);
  MonotonicityReport rep;
  rep.lambda1 = pairs[0].lambda;
  rep.disk_bound = sq(bessel_zero(0, 1) / domain.diameter());
  rep.holds = rep.lambda1 >= rep.disk_bound;
  return rep;
}

}  // namespace nodalab
