#include "corrugate/basis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "corrugate/errors.hpp"

namespace corrugate {

SymMatrix::SymMatrix(int n) : n_(n) {
  if (n < 1 || n > kMaxManifoldDim) throw DimensionError("SymMatrix dimension out of range");
}

SymMatrix SymMatrix::from_full(int n, std::span<const double> full) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = full[i * n + j];
  return m;
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::outer(std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = v[i] * v[j];
  return m;
}

SymMatrix SymMatrix::sym_outer(std::span<const double> a, std::span<const double> b) {
  const int n = static_cast<int>(a.size());
  SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = 0.5 * (a[i] * b[j] + b[i] * a[j]);
  return m;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  for (int k = 0; k < flat_size(); ++k) data_[k] += o.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  for (int k = 0; k < flat_size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (int k = 0; k < flat_size(); ++k) data_[k] *= s;
  return *this;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (int k = 0; k < flat_size(); ++k) m = std::max(m, std::abs(data_[k]));
  return m;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> to_vector(const RowMatrix& m) {
  return {m.data(), m.data() + m.size()};
}

}  // namespace

PrimitiveBasis::PrimitiveBasis(int n) : n_(n), n_star_(linalg::sym_size(n)) {
  if (n < 2 || n > kMaxManifoldDim)
    throw DimensionError("basis dimension must lie in [2, " +
                         std::to_string(kMaxManifoldDim) + "], got " + std::to_string(n));

  const double r = 1.0 / std::sqrt(2.0);
  auto push = [&](int i, int j) {
    std::vector<double> v(n, 0.0);
    if (i == j) {
      v[i] = 1.0;
    } else {
      v[i] = r;
      v[j] = r;
    }
    directions_.insert(directions_.end(), v.begin(), v.end());
  };
  push(0, 0);
  for (int j = 1; j < n; ++j) push(0, j);
  for (int i = 1; i < n; ++i) push(i, i);
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) push(i, j);

  h0_ = SymMatrix(n);
  RowMatrix flattening(n_star_, n_star_);
  for (int k = 0; k < n_star_; ++k) {
    const SymMatrix p = SymMatrix::outer(direction(k));
    h0_ += p;
    for (int f = 0; f < n_star_; ++f) flattening(f, k) = p.flat()[f];
  }

  Eigen::PartialPivLU<RowMatrix> lu(flattening);
  RowMatrix inverse = lu.inverse();
  dual_ = to_vector(inverse);
  Eigen::JacobiSVD<RowMatrix> svd(flattening);
  const auto& s = svd.singularValues();
  condition_ = s(0) / s(s.size() - 1);
}

std::span<const double> PrimitiveBasis::direction(int i) const {
  return {directions_.data() + static_cast<std::size_t>(i) * n_, static_cast<std::size_t>(n_)};
}

void PrimitiveBasis::decompose_flat(std::span<const double> h_flat, std::span<double> out) const {
  for (int j = 0; j < n_star_; ++j) {
    double acc = 0.0;
    const double* row = dual_.data() + static_cast<std::size_t>(j) * n_star_;
    for (int f = 0; f < n_star_; ++f) acc += row[f] * h_flat[f];
    out[j] = acc;
  }
}

std::vector<double> PrimitiveBasis::decompose(const SymMatrix& h) const {
  if (h.dim() != n_) throw DimensionError("decompose: matrix dimension mismatch");
  std::vector<double> c(n_star_);
  decompose_flat(h.flat(), c);
  return c;
}

SymMatrix PrimitiveBasis::reconstruct(std::span<const double> coeffs) const {
  SymMatrix h(n_);
  for (int j = 0; j < n_star_; ++j) h += coeffs[j] * SymMatrix::outer(direction(j));
  return h;
}

std::vector<double> PrimitiveBasis::psi_matrix(std::span<const double> nu, double threshold) const {
  if (static_cast<int>(nu.size()) != n_) throw DimensionError("psi: direction dimension mismatch");
  double norm2 = 0.0;
  for (double x : nu) norm2 += x * x;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
    throw DirectionError("psi: direction is not a unit vector");
  if (std::abs(nu[0]) <= threshold)
    throw DirectionError("psi: |nu . e_1| = " + std::to_string(std::abs(nu[0])) +
                         " is below the direction threshold; Phi is not invertible");

  RowMatrix phi(n_star_, n_star_);
  std::vector<double> e(n_, 0.0);
  for (int k = 0; k < n_; ++k) {
    std::fill(e.begin(), e.end(), 0.0);
    e[k] = 1.0;
    const SymMatrix col = SymMatrix::sym_outer(e, nu);
    for (int f = 0; f < n_star_; ++f) phi(f, k) = col.flat()[f];
  }
  for (int j = n_; j < n_star_; ++j) {
    const SymMatrix col = SymMatrix::outer(direction(j));
    for (int f = 0; f < n_star_; ++f) phi(f, j) = col.flat()[f];
  }
  Eigen::PartialPivLU<RowMatrix> lu(phi);
  return to_vector(lu.inverse());
}

PsiCoordinates PrimitiveBasis::psi(const SymMatrix& m, std::span<const double> nu,
                                   double threshold) const {
  const std::vector<double> inv = psi_matrix(nu, threshold);
  PsiCoordinates out{std::vector<double>(n_), std::vector<double>(n_star_ - n_)};
  const auto flat = m.flat();
  for (int r = 0; r < n_star_; ++r) {
    double acc = 0.0;
    for (int f = 0; f < n_star_; ++f) acc += inv[static_cast<std::size_t>(r) * n_star_ + f] * flat[f];
    if (r < n_)
      out.alpha[r] = acc;
    else
      out.beta[r - n_] = acc;
  }
  return out;
}

SymMatrix PrimitiveBasis::phi(const PsiCoordinates& coords, std::span<const double> nu) const {
  SymMatrix m = SymMatrix::sym_outer(coords.alpha, nu);
  for (int j = n_; j < n_star_; ++j) m += coords.beta[j - n_] * SymMatrix::outer(direction(j));
  return m;
}

double h0_norm(const PrimitiveBasis& basis) { return basis.h0().max_abs(); }

}  // namespace corrugate
