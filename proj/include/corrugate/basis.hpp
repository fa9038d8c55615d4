#pragma once

#include <array>
#include <span>
#include <vector>

#include "corrugate/small_linalg.hpp"

namespace corrugate {

inline constexpr int kMaxManifoldDim = 6;

/// Symmetric n x n matrix in upper-triangle storage. Symmetric by construction.
class SymMatrix {
 public:
  static constexpr int kCapacity = linalg::sym_size(kMaxManifoldDim);

  SymMatrix() = default;
  explicit SymMatrix(int n);
  /// From full row-major entries; only the upper triangle is read.
  static SymMatrix from_full(int n, std::span<const double> full);
  static SymMatrix identity(int n);
  /// v ⊗ v.
  static SymMatrix outer(std::span<const double> v);
  /// sym(a ⊗ b) = (a b^t + b a^t) / 2.
  static SymMatrix sym_outer(std::span<const double> a, std::span<const double> b);

  int dim() const { return n_; }
  int flat_size() const { return linalg::sym_size(n_); }
  double operator()(int i, int j) const { return data_[linalg::sym_index(n_, i, j)]; }
  double& operator()(int i, int j) { return data_[linalg::sym_index(n_, i, j)]; }
  std::span<const double> flat() const { return {data_.data(), static_cast<std::size_t>(flat_size())}; }
  std::span<double> flat() { return {data_.data(), static_cast<std::size_t>(flat_size())}; }

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

  /// Max-abs entry norm.
  double max_abs() const;

 private:
  int n_ = 0;
  std::array<double, kCapacity> data_{};
};

/// Coordinates (alpha, beta) of a symmetric matrix under the isomorphism
/// (alpha, beta) -> alpha ⊙ nu + sum_{j>n} beta_{j-n} nu_j ⊗ nu_j.
struct PsiCoordinates {
  std::vector<double> alpha;  // length n
  std::vector<double> beta;   // length n_star - n
};

/// The canonical primitive-metric basis {nu_i ⊗ nu_i} of Sym_n, the matrix
/// h0 = sum nu_i ⊗ nu_i, and the dual coefficient maps L_j.
///
/// Directions are the normalized (e_i + e_j), ordered e_1, then
/// (e_1 + e_j)/sqrt2 for j = 2..n, then e_2..e_n, then the remaining pairs;
/// exactly the first n directions have a nonzero e_1 component.
class PrimitiveBasis {
 public:
  /// Throws DimensionError unless 2 <= n <= kMaxManifoldDim.
  explicit PrimitiveBasis(int n);

  int n() const { return n_; }
  int n_star() const { return n_star_; }
  std::span<const double> direction(int i) const;
  const SymMatrix& h0() const { return h0_; }
  /// Row-major n_star x n_star inverse of the flattening matrix of {nu_i ⊗ nu_i}.
  std::span<const double> dual_coeffs() const { return dual_; }
  /// 2-norm condition number of the flattening matrix.
  double condition_number() const { return condition_; }

  /// Coefficients c with sum_j c_j nu_j ⊗ nu_j = h.
  std::vector<double> decompose(const SymMatrix& h) const;
  /// Same as decompose(), writing into `out` from flat upper-triangle input.
  void decompose_flat(std::span<const double> h_flat, std::span<double> out) const;
  /// sum_j c_j nu_j ⊗ nu_j.
  SymMatrix reconstruct(std::span<const double> coeffs) const;

  /// Row-major n_star x n_star matrix mapping flat(M) to (alpha, beta).
  /// Throws DirectionError if |nu| != 1 or |nu . e_1| <= threshold.
  std::vector<double> psi_matrix(std::span<const double> nu, double threshold = 1e-8) const;
  PsiCoordinates psi(const SymMatrix& m, std::span<const double> nu,
                     double threshold = 1e-8) const;
  SymMatrix phi(const PsiCoordinates& coords, std::span<const double> nu) const;

 private:
  int n_;
  int n_star_;
  std::vector<double> directions_;  // n_star rows of length n
  SymMatrix h0_;
  std::vector<double> dual_;
  double condition_ = 0.0;
};

/// Max-abs entry norm of h0 for dimension n (the |h0| of the stage guard).
double h0_norm(const PrimitiveBasis& basis);

}  // namespace corrugate
