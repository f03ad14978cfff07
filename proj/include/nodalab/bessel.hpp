#pragma once

#include <cmath>
#include <stdexcept>

#include "nodalab/core.hpp"

namespace nodalab {

inline double bessel_j(int k, double x) { return std::cyl_bessel_j(double(k), std::abs(x)); }

inline double bessel_j_derivative(int k, double x) {
  if (k == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(k - 1, x) - bessel_j(k + 1, x));
}

// s-th positive zero of J_k, bracketed Newton refined to ~1e-13 relative.
inline double bessel_zero(int k, int s) {
  if (k < 0 || s < 1) throw std::invalid_argument("bessel_zero: need k >= 0, s >= 1");
  // McMahon asymptotic guess
  const double beta = (s + 0.5 * k - 0.25) * kPi;
  const double mu = 4.0 * k * k;
  double x = beta - (mu - 1) / (8 * beta);

  // widen a sign-change bracket around the guess
  double lo = std::max(x - kPi / 2, 1e-8), hi = x + kPi / 2;
  double flo = bessel_j(k, lo), fhi = bessel_j(k, hi);
  int guard = 0;
  while (flo * fhi > 0 && guard++ < 64) {
    lo = std::max(lo - kPi / 4, 1e-8);
    hi += kPi / 4;
    flo = bessel_j(k, lo);
    fhi = bessel_j(k, hi);
  }
  if (flo * fhi > 0) throw std::runtime_error("bessel_zero: bracketing failed");

  for (int it = 0; it < 200; ++it) {
    const double fx = bessel_j(k, x);
    const double dfx = bessel_j_derivative(k, x);
    double nx = x - fx / dfx;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);  // bisection fallback
    const double fnx = bessel_j(k, nx);
    if (fnx * flo <= 0) {
      hi = nx;
      fhi = fnx;
    } else {
      lo = nx;
      flo = fnx;
    }
    if (std::abs(nx - x) < 1e-14 * std::abs(nx)) return nx;
    x = nx;
  }
  return x;
}

}  // namespace nodalab
