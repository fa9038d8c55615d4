#pragma once

// Tiny fixed-capacity dense kernels used per grid node. Matrices are row-major
// in caller-provided buffers; dimensions never exceed kMaxDim.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace corrugate::linalg {

inline constexpr int kMaxDim = 7;

/// Number of independent entries of an n x n symmetric matrix.
constexpr int sym_size(int n) { return n * (n + 1) / 2; }

/// Flat index of entry (i, j) in upper-triangle row-major storage.
constexpr int sym_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

/// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(std::span<const double> a, int n) {
  std::array<double, kMaxDim * kMaxDim> m{};
  std::copy(a.begin(), a.begin() + n * n, m.begin());
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(m[r * n + c]) > std::abs(m[piv * n + c])) piv = r;
    if (m[piv * n + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(m[c * n + k], m[piv * n + k]);
      det = -det;
    }
    det *= m[c * n + c];
    for (int r = c + 1; r < n; ++r) {
      const double f = m[r * n + c] / m[c * n + c];
      for (int k = c; k < n; ++k) m[r * n + k] -= f * m[c * n + k];
    }
  }
  return det;
}

/// Inverse of a square matrix (Gauss-Jordan, partial pivoting). Returns false
/// if singular.
inline bool invert(std::span<const double> a, int n, std::span<double> out) {
  std::array<double, kMaxDim * 2 * kMaxDim> m{};
  const int w = 2 * n;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m[r * w + c] = a[r * n + c];
    m[r * w + n + r] = 1.0;
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(m[r * w + c]) > std::abs(m[piv * w + c])) piv = r;
    if (m[piv * w + c] == 0.0) return false;
    if (piv != c)
      for (int k = 0; k < w; ++k) std::swap(m[c * w + k], m[piv * w + k]);
    const double d = m[c * w + c];
    for (int k = 0; k < w; ++k) m[c * w + k] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r * w + c];
      if (f == 0.0) continue;
      for (int k = 0; k < w; ++k) m[r * w + k] -= f * m[c * w + k];
    }
  }
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out[r * n + c] = m[r * w + n + c];
  return true;
}

/// Eigenvalues of a symmetric matrix given in full row-major storage (cyclic
/// Jacobi). Sorted ascending into `out`.
inline void sym_eigenvalues(std::span<const double> a, int n, std::span<double> out) {
  if (n == 1) {
    out[0] = a[0];
    return;
  }
  if (n == 2) {
    const double p = 0.5 * (a[0] + a[3]);
    const double q = std::hypot(0.5 * (a[0] - a[3]), a[1]);
    out[0] = p - q;
    out[1] = p + q;
    return;
  }
  std::array<double, kMaxDim * kMaxDim> m{};
  std::copy(a.begin(), a.begin() + n * n, m.begin());
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += m[p * n + q] * m[p * n + q];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m[p * n + q];
        if (apq == 0.0) continue;
        const double theta = 0.5 * (m[q * n + q] - m[p * n + p]) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m[k * n + p];
          const double mkq = m[k * n + q];
          m[k * n + p] = c * mkp - s * mkq;
          m[k * n + q] = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m[p * n + k];
          const double mqk = m[q * n + k];
          m[p * n + k] = c * mpk - s * mqk;
          m[q * n + k] = s * mpk + c * mqk;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) out[i] = m[i * n + i];
  std::sort(out.begin(), out.begin() + n);
}

/// Expands upper-triangle storage into a full row-major matrix.
inline void sym_to_full(std::span<const double> sym, int n, std::span<double> full) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) full[i * n + j] = sym[sym_index(n, i, j)];
}

/// Generalized cross product of the n columns of a (n+1) x n matrix: the
/// cofactor vector orthogonal to every column, with sign convention giving
/// e_{n+1} for [Id; 0].
inline void cofactor_normal(std::span<const double> a, int n, std::span<double> out) {
  const int rows = n + 1;
  if (n == 2) {
    const double a0 = a[0], a1 = a[2], a2 = a[4];  // first column
    const double b0 = a[1], b1 = a[3], b2 = a[5];  // second column
    out[0] = a1 * b2 - a2 * b1;
    out[1] = a2 * b0 - a0 * b2;
    out[2] = a0 * b1 - a1 * b0;
    return;
  }
  std::array<double, kMaxDim * kMaxDim> minor{};
  for (int k = 0; k < rows; ++k) {
    int r2 = 0;
    for (int r = 0; r < rows; ++r) {
      if (r == k) continue;
      for (int c = 0; c < n; ++c) minor[r2 * n + c] = a[r * n + c];
      ++r2;
    }
    const double sign = ((k + n) % 2 == 0) ? 1.0 : -1.0;
    out[k] = sign * determinant(minor, n);
  }
}

}  // namespace corrugate::linalg
