#include "corrugate/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corrugate/errors.hpp"

namespace corrugate {

namespace {
constexpr int kMinPoints = 9;
}

GridDomain::GridDomain(std::vector<double> lower, std::vector<double> upper, std::vector<int> points)
    : lower_(std::move(lower)), points_(std::move(points)) {
  if (lower_.size() != upper.size() || lower_.size() != points_.size() || lower_.empty())
    throw DimensionError("grid: inconsistent corner/point dimensions");
  spacing_.resize(lower_.size());
  for (std::size_t a = 0; a < lower_.size(); ++a) {
    if (points_[a] < kMinPoints)
      throw DomainTooSmall("grid: axis " + std::to_string(a) + " has " + std::to_string(points_[a]) +
                           " points, need at least 9");
    if (!(upper[a] > lower_[a])) throw DomainTooSmall("grid: non-positive extent");
    spacing_[a] = (upper[a] - lower_[a]) / (points_[a] - 1);
  }
  finish();
}

GridDomain::GridDomain(std::vector<double> lower, std::vector<double> spacing, std::vector<int> points, int)
    : lower_(std::move(lower)), spacing_(std::move(spacing)), points_(std::move(points)) {
  for (int p : points_)
    if (p < kMinPoints) throw DomainTooSmall("grid: fewer than 9 points per axis after shrinking");
  finish();
}

GridDomain GridDomain::unit(int n, int points) {
  return GridDomain(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), std::vector<int>(n, points));
}

void GridDomain::finish() {
  const int n = dim();
  strides_.assign(n, 1);
  for (int a = n - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * static_cast<std::size_t>(points_[a + 1]);
  count_ = strides_[0] * static_cast<std::size_t>(points_[0]);
}

double GridDomain::min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }
double GridDomain::max_spacing() const { return *std::max_element(spacing_.begin(), spacing_.end()); }

void GridDomain::coordinates(std::size_t node, std::span<double> x) const {
  for (int a = 0; a < dim(); ++a) x[a] = coordinate(node, a);
}

GridDomain GridDomain::shrink(int nodes) const {
  std::vector<int> per_axis(dim(), nodes);
  return shrink(per_axis);
}

GridDomain GridDomain::shrink(std::span<const int> nodes) const {
  std::vector<double> lower(lower_);
  std::vector<int> points(points_);
  for (int a = 0; a < dim(); ++a) {
    lower[a] += nodes[a] * spacing_[a];
    points[a] -= 2 * nodes[a];
    if (points[a] < kMinPoints)
      throw DomainTooSmall("shrink leaves " + std::to_string(points[a]) + " points on axis " +
                           std::to_string(a));
  }
  return GridDomain(std::move(lower), spacing_, std::move(points), 0);
}

std::vector<int> GridDomain::offsets_of(const GridDomain& sub) const {
  if (sub.dim() != dim()) throw AlignmentError("restrict: dimension mismatch");
  std::vector<int> off(dim());
  for (int a = 0; a < dim(); ++a) {
    if (std::abs(sub.spacing_[a] - spacing_[a]) > 1e-12 * spacing_[a])
      throw AlignmentError("restrict: spacing differs on axis " + std::to_string(a));
    const double shift = (sub.lower_[a] - lower_[a]) / spacing_[a];
    const double rounded = std::round(shift);
    if (std::abs(shift - rounded) > 1e-6)
      throw AlignmentError("restrict: sub-domain is not node-aligned on axis " + std::to_string(a));
    off[a] = static_cast<int>(rounded);
    if (off[a] < 0 || off[a] + sub.points_[a] > points_[a])
      throw AlignmentError("restrict: sub-domain not contained on axis " + std::to_string(a));
  }
  return off;
}

bool GridDomain::same_grid(const GridDomain& other) const {
  if (other.dim() != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    if (other.points_[a] != points_[a]) return false;
    if (std::abs(other.lower_[a] - lower_[a]) > 1e-12 * (1.0 + std::abs(lower_[a]))) return false;
    if (std::abs(other.spacing_[a] - spacing_[a]) > 1e-12 * spacing_[a]) return false;
  }
  return true;
}

}  // namespace corrugate
