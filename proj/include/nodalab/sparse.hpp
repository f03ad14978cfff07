#pragma once

// CSR storage of the lower triangle of a symmetric matrix.

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace nodalab {

struct SparseSymmetric {
  int n = 0;
  std::vector<int> row_offsets;
  std::vector<int> column_indices;  // j <= i
  std::vector<double> values;

  static SparseSymmetric from_triplets(int n, std::vector<std::tuple<int, int, double>> trips) {
    for (auto& [i, j, v] : trips)
      if (j > i) std::swap(i, j);
    std::sort(trips.begin(), trips.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
      return std::get<1>(a) < std::get<1>(b);
    });
    SparseSymmetric s;
    s.n = n;
    s.row_offsets.assign(n + 1, 0);
    for (size_t k = 0; k < trips.size();) {
      size_t e = k;
      double acc = 0;
      while (e < trips.size() && std::get<0>(trips[e]) == std::get<0>(trips[k]) &&
             std::get<1>(trips[e]) == std::get<1>(trips[k]))
        acc += std::get<2>(trips[e++]);
      s.column_indices.push_back(std::get<1>(trips[k]));
      s.values.push_back(acc);
      ++s.row_offsets[std::get<0>(trips[k]) + 1];
      k = e;
    }
    for (int i = 0; i < n; ++i) s.row_offsets[i + 1] += s.row_offsets[i];
    return s;
  }

  // y = A x with the symmetric completion of the stored lower triangle
  void multiply(const double* x, double* y) const {
    std::fill(y, y + n, 0.0);
    for (int i = 0; i < n; ++i) {
      const int lo = row_offsets[i], hi = row_offsets[i + 1];
      double yi = 0;
      for (int k = lo; k < hi; ++k) {
        const int j = column_indices[k];
        const double v = values[k];
        yi += v * x[j];
        if (j != i) y[j] += v * x[i];
      }
      y[i] += yi;
    }
  }

  std::vector<double> multiply(const std::vector<double>& x) const {
    if (int(x.size()) != n) throw std::invalid_argument("SparseSymmetric: size mismatch");
    std::vector<double> y(n);
    multiply(x.data(), y.data());
    return y;
  }

  double quadratic_form(const std::vector<double>& x) const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
        const int j = column_indices[k];
        s += (j == i ? 1.0 : 2.0) * values[k] * x[i] * x[j];
      }
    return s;
  }

  double sum() const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
        s += (column_indices[k] == i ? 1.0 : 2.0) * values[k];
    return s;
  }

  double trace() const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
        if (column_indices[k] == i) s += values[k];
    return s;
  }
};

}  // namespace nodalab
