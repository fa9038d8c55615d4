#pragma once

#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "corrugate/small_linalg.hpp"

namespace corrugate {

/// Axis-aligned rectangle in R^n sampled by a uniform tensor grid. Node
/// indices are row-major with the last axis fastest.
class GridDomain {
 public:
  GridDomain() = default;
  /// Throws DomainTooSmall if any axis has fewer than 9 points or a
  /// non-positive extent.
  GridDomain(std::vector<double> lower, std::vector<double> upper, std::vector<int> points);
  /// Unit cube [0,1]^n with `points` nodes per axis.
  static GridDomain unit(int n, int points);

  int dim() const { return static_cast<int>(points_.size()); }
  int points(int axis) const { return points_[axis]; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return lower_[axis] + spacing_[axis] * (points_[axis] - 1); }
  double spacing(int axis) const { return spacing_[axis]; }
  double min_spacing() const;
  double max_spacing() const;
  std::size_t stride(int axis) const { return strides_[axis]; }
  std::size_t node_count() const { return count_; }

  int index(std::size_t node, int axis) const {
    return static_cast<int>((node / strides_[axis]) % static_cast<std::size_t>(points_[axis]));
  }
  double coordinate(std::size_t node, int axis) const {
    return lower_[axis] + spacing_[axis] * index(node, axis);
  }
  void coordinates(std::size_t node, std::span<double> x) const;

  /// Domain with `nodes` grid nodes removed from both ends of every axis.
  GridDomain shrink(int nodes) const;
  /// Domain with per-axis node counts removed from both ends.
  GridDomain shrink(std::span<const int> nodes) const;

  /// Node offsets of `sub` inside this grid; throws AlignmentError if `sub`
  /// is not node-aligned with identical spacing or not contained.
  std::vector<int> offsets_of(const GridDomain& sub) const;
  bool same_grid(const GridDomain& other) const;

 private:
  GridDomain(std::vector<double> lower, std::vector<double> spacing, std::vector<int> points, int);
  void finish();

  std::vector<double> lower_;
  std::vector<double> spacing_;
  std::vector<int> points_;
  std::vector<std::size_t> strides_;
  std::size_t count_ = 0;
};

/// Value-shape tags for sampled fields.
struct ScalarKind {};
struct VectorKind {};  // d components
struct MatrixKind {};  // rows x cols, row-major
struct SymKind {};     // n x n symmetric, upper-triangle storage

/// Grid-sampled field: `components()` doubles per node, node-major. Carries
/// the highest oscillation frequency it is known to contain, used by the
/// resolution guard.
template <class Kind>
class Field {
 public:
  Field() = default;
  Field(GridDomain domain, int rows, int cols, double fill = 0.0)
      : domain_(std::move(domain)), rows_(rows), cols_(cols), comps_(count_components(rows, cols)),
        data_(domain_.node_count() * static_cast<std::size_t>(comps_), fill) {}

  const GridDomain& domain() const { return domain_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int components() const { return comps_; }
  std::size_t node_count() const { return domain_.node_count(); }

  std::span<double> at(std::size_t node) {
    return {data_.data() + node * comps_, static_cast<std::size_t>(comps_)};
  }
  std::span<const double> at(std::size_t node) const {
    return {data_.data() + node * comps_, static_cast<std::size_t>(comps_)};
  }
  double& operator()(std::size_t node, int c = 0) { return data_[node * comps_ + c]; }
  double operator()(std::size_t node, int c = 0) const { return data_[node * comps_ + c]; }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  double frequency() const { return frequency_; }
  void set_frequency(double f) { frequency_ = f; }

  static int count_components(int rows, int cols) {
    if constexpr (std::is_same_v<Kind, SymKind>) return linalg::sym_size(rows);
    else return rows * cols;
  }

 private:
  GridDomain domain_;
  int rows_ = 0;
  int cols_ = 0;
  int comps_ = 0;
  std::vector<double> data_;
  double frequency_ = 0.0;
};

using ScalarField = Field<ScalarKind>;
using VectorField = Field<VectorKind>;
using MatrixField = Field<MatrixKind>;
using SymField = Field<SymKind>;

inline ScalarField make_scalar(const GridDomain& d, double fill = 0.0) { return {d, 1, 1, fill}; }
inline VectorField make_vector(const GridDomain& d, int dim, double fill = 0.0) { return {d, dim, 1, fill}; }
inline MatrixField make_matrix(const GridDomain& d, int rows, int cols) { return {d, rows, cols}; }
inline SymField make_sym(const GridDomain& d, int n) { return {d, n, n}; }

}  // namespace corrugate
