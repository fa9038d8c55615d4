#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <vector>

#include "corrugate/basis.hpp"
#include "corrugate/grid.hpp"

namespace corrugate {

inline constexpr int kDefaultSamplesPerPeriod = 16;

/// Throws ResolutionError unless every grid spacing is at most
/// 2π/(frequency·samples_per_period). A zero frequency always passes.
void check_resolution(const GridDomain& domain, double frequency,
                      int samples_per_period = kDefaultSamplesPerPeriod);

/// Largest frequency the grid resolves at the given sampling density.
double max_resolved_frequency(const GridDomain& domain,
                              int samples_per_period = kDefaultSamplesPerPeriod);

namespace fd {

/// Finite-difference weights for the derivative of the given order at x0
/// from samples at `offsets` (Fornberg's recursion).
std::vector<double> weights(double x0, std::span<const double> offsets, int order);

/// Worst relative error of the order-4 stencils used by derivative() on
/// e^{ikx}, for kh = wavenumber times spacing.
double relative_error(double kh, int order);

/// Raw kernel: derivative of component `c` of a node-major array with
/// `comps` components, written to component `out_c` of `out`.
void apply(const GridDomain& domain, const double* in, int comps, int c, int axis, int order,
           double* out, int out_comps, int out_c);

/// max |∂ f_c| over the grid without materializing the derivative.
double max_abs(const GridDomain& domain, const double* in, int comps, int c, int axis,
               int order);

/// Single-node derivative ∂_a∂_b of component `c` (a == b gives the pure
/// second derivative stencil).
double mixed_at(const GridDomain& domain, const double* in, int comps, int c, int a, int b,
                std::size_t node);

/// First derivative with centered `points`-node stencils (odd, order
/// points - 1) whose nodes are `stride` grid nodes apart. Where the centered
/// stencil does not fit, a `boundary_points`-node stencil is used, shifted
/// one-sided as needed; a shorter stencil there amplifies noise less. Meant
/// for slowly varying fields on fine grids: the wide step keeps rounding
/// noise from being amplified by 1/h. Throws DomainTooSmall if the axis holds
/// fewer than (points - 1) * stride + 1 nodes.
void apply_strided(const GridDomain& domain, const double* in, int comps, int c, int axis,
                   int stride, int points, int boundary_points, double* out, int out_comps,
                   int out_c);

/// Largest stride (at least 1) with stride * h <= 2π / (samples * k) that
/// still leaves room for a `points`-node stencil along `axis`.
int slow_stride(const GridDomain& domain, int axis, double k, double samples, int points);

}  // namespace fd

/// Order-4 finite-difference derivative along `axis` (order 1 or 2), with
/// six-node one-sided stencils within two nodes of the boundary. Checks the
/// field's frequency metadata against the Nyquist guard.
ScalarField derivative(const ScalarField& f, int axis, int order,
                       int samples_per_period = kDefaultSamplesPerPeriod);

/// Same as derivative(), for one component of any field.
template <class Kind>
ScalarField component_derivative(const Field<Kind>& f, int component, int axis, int order,
                                 int samples_per_period = kDefaultSamplesPerPeriod) {
  check_resolution(f.domain(), f.frequency(), samples_per_period);
  ScalarField out = make_scalar(f.domain());
  fd::apply(f.domain(), f.raw().data(), f.components(), component, axis, order,
            out.raw().data(), 1, 0);
  out.set_frequency(f.frequency());
  return out;
}

/// Du as a d x n matrix field, entry (r, a) = ∂_a u_r.
MatrixField jacobian(const VectorField& u, int samples_per_period = kDefaultSamplesPerPeriod);

/// Per-node A^t A of a matrix field.
SymField gram(const MatrixField& a);

/// Du^t Du.
SymField induced_metric(const VectorField& u, int samples_per_period = kDefaultSamplesPerPeriod);

namespace detail {
/// Half-width in nodes and normalized weights of the 1D mollifier.
std::vector<double> mollifier_weights(double ell, double spacing);
int mollifier_halfwidth(double ell, double spacing);
GridDomain mollify_raw(const GridDomain& domain, int comps, const std::vector<double>& in,
                       double ell, std::vector<double>& out);
void restrict_raw(const GridDomain& domain, int comps, const std::vector<double>& in,
                  const GridDomain& sub, std::vector<double>& out);
double holder_raw(const GridDomain& domain, int comps, const std::vector<double>& data,
                  double alpha);
}  // namespace detail

/// Separable convolution with the normalized bump (1 - (r/ell)^2)^4 on each
/// axis. The result lives on the domain shrunk by ceil(ell/spacing) nodes
/// per side. Requires ell >= 2 spacing; throws DomainTooSmall if fewer than
/// 9 points per axis remain.
template <class Kind>
Field<Kind> mollify(const Field<Kind>& f, double ell) {
  std::vector<double> out;
  GridDomain d = detail::mollify_raw(f.domain(), f.components(), f.raw(), ell, out);
  Field<Kind> g(d, f.rows(), f.cols());
  g.raw() = std::move(out);
  g.set_frequency(f.frequency());
  return g;
}

/// Exact sample extraction on a node-aligned sub-domain.
template <class Kind>
Field<Kind> restrict_field(const Field<Kind>& f, const GridDomain& sub) {
  Field<Kind> g(sub, f.rows(), f.cols());
  detail::restrict_raw(f.domain(), f.components(), f.raw(), sub, g.raw());
  g.set_frequency(f.frequency());
  return g;
}

/// Dyadic-pair lower bound of the α-Hölder seminorm: max over axis-aligned
/// node pairs at separations of 1, 2, 4, ... cells of |Δf|/|Δx|^α, and over
/// components.
template <class Kind>
double holder_seminorm(const Field<Kind>& f, double alpha) {
  return detail::holder_raw(f.domain(), f.components(), f.raw(), alpha);
}

/// Max-abs over all nodes and components.
template <class Kind>
double sup_norm(const Field<Kind>& f);

/// Max-abs of a - b; the fields must share a grid and shape.
template <class Kind>
double sup_distance(const Field<Kind>& a, const Field<Kind>& b);

/// max over components and axes of |∂_a f_c|.
template <class Kind>
double max_first_derivative(const Field<Kind>& f) {
  double m = 0.0;
  for (int c = 0; c < f.components(); ++c)
    for (int a = 0; a < f.domain().dim(); ++a)
      m = std::max(m, fd::max_abs(f.domain(), f.raw().data(), f.components(), c, a, 1));
  return m;
}

/// max over components and index pairs of |∂_a∂_b f_c|.
template <class Kind>
double max_second_derivative(const Field<Kind>& f);

/// ‖f‖_0 + max|∂f|, the C^1 norm with the max-over-multi-indices convention.
template <class Kind>
double c1_norm(const Field<Kind>& f) {
  return sup_norm(f) + max_first_derivative(f);
}

struct NormReport {
  double sup_norm = 0.0;
  std::vector<double> ck_norms;  // k = 1..K
  std::vector<double> alphas;
  std::vector<double> holder;  // seminorm of the field per alpha
};

/// C^0, C^k (k <= 2) and Hölder estimates of a field.
template <class Kind>
NormReport norm_report(const Field<Kind>& f, int max_k, std::span<const double> alphas = {});

/// Samples a scalar function of the node coordinates.
ScalarField sample_scalar(const GridDomain& d, const std::function<double(std::span<const double>)>& fn);

/// Samples a vector function; fn writes `dim` values into its output span.
VectorField sample_vector(const GridDomain& d, int dim,
                          const std::function<void(std::span<const double>, std::span<double>)>& fn);

/// Samples a symmetric-matrix function.
SymField sample_sym(const GridDomain& d, int n,
                    const std::function<SymMatrix(std::span<const double>)>& fn);

/// Per-node access to a SymField entry as a SymMatrix.
SymMatrix sym_at(const SymField& f, std::size_t node);
void set_sym(SymField& f, std::size_t node, const SymMatrix& m);

/// Minimum over nodes of the smallest eigenvalue.
double min_eigenvalue(const SymField& f);

}  // namespace corrugate
