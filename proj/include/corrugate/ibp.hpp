#pragma once

#include <span>
#include <vector>

#include "corrugate/basis.hpp"
#include "corrugate/corrugation.hpp"
#include "corrugate/fields.hpp"

namespace corrugate {

struct IbpOptions {
  double direction_threshold = 1e-8;
  int max_depth = 12;
  int samples_per_period = kDefaultSamplesPerPeriod;
  // Dα is taken with a strided stencil sized for content up to
  // slow_bandwidth * μ, sampled slow_samples times per period.
  double slow_bandwidth = 4.0;
  double slow_samples = 18.0;
  int slow_points = 9;
  int slow_boundary_points = 7;
};

/// γ(λx·ν)M = 2 sym(Dw) + γ_I(λx·ν)(μ/λ)^I E + F with F in span{ν_j⊗ν_j : j > n}.
struct IbpResult {
  VectorField w;                       // n components
  SymField E;                          // O(‖M‖) after the (λ/μ)^I rescaling
  std::vector<ScalarField> F_coeffs;   // coefficient of ν_j⊗ν_j, j = n+1..n_star
  CorrugationProfile gamma_I;          // depth-I antiderivative of γ
  int depth = 0;
  double lambda = 0.0;
  double mu = 0.0;
  std::vector<double> nu;
};

/// Iterated integration by parts to depth I. Per level with (α, β) = Ψ(M_cur):
///   w += s γ^{l}(λx·ν) α / (2λ),  F += s γ^{l-1}(λx·ν) Σ β_j ν_j⊗ν_j,
///   M_next = -(1/μ) sym(Dα),      s *= μ/λ.
/// Throws DirectionError, MeanError, ResolutionError or ParamError.
IbpResult integrate_by_parts(const SymField& M, const CorrugationProfile& gamma,
                             std::span<const double> nu, double lambda, double mu, int depth,
                             const PrimitiveBasis& basis, const IbpOptions& options = {});

/// F = Σ_j F_j ν_j⊗ν_j.
SymField reconstruct_F(const IbpResult& r, const PrimitiveBasis& basis);

/// γ(λx·ν)M - 2 sym(Dw) - γ_I(λx·ν)(μ/λ)^I E - F, with Dw by finite differences.
SymField ibp_identity_residual(const IbpResult& r, const SymField& M, const CorrugationProfile& gamma,
                               const PrimitiveBasis& basis);

/// ‖γ_I(λx·ν)(μ/λ)^I E‖∞.
double ibp_residual_term_norm(const IbpResult& r);

/// Identity tolerance max(1e-8, finite-difference error bound for Dw).
double ibp_identity_tolerance(const IbpResult& r);

/// Estimated sup error of the order-4 first derivative of a field whose
/// oscillating part has sup-norm `amplitude` and top wavenumber `k`.
double fd_derivative_error(const GridDomain& d, double k, double amplitude);

}  // namespace corrugate
