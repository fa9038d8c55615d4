#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "corrugate/basis.hpp"

namespace testutil {

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240917);
  return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline corrugate::SymMatrix random_sym(int n, double scale = 1.0) {
  corrugate::SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = uniform(-scale, scale);
  return m;
}

// Independent full-matrix product used as oracle for the packed storage.
inline std::vector<double> full(const corrugate::SymMatrix& m) {
  const int n = m.dim();
  std::vector<double> f(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f[i * n + j] = m(i, j);
  return f;
}

// Slope of the least-squares line through (x_i, y_i).
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace testutil
