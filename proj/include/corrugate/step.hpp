#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corrugate/basis.hpp"
#include "corrugate/fields.hpp"
#include "corrugate/ibp.hpp"

namespace corrugate {

struct StepOptions {
  double immersion_threshold = 1e-6;  // floor on the smallest eigenvalue of Du^t Du
  double direction_threshold = 1e-8;
  int samples_per_period = kDefaultSamplesPerPeriod;
  int max_depth = 12;
  // M_i with sup-norm at or below this are left in the error instead of
  // integrated by parts; repeated differentiation would only amplify their
  // rounding noise.
  double ibp_noise_floor = 1e-6;
  bool keep_fields = true;  // keep predicted_increment / measured_error / F
};

/// T = Du (Du^t Du)^{-1} and the unit normal ζ of an immersion R^n -> R^{n+1}.
struct ImmersionFrame {
  MatrixField Du;     // (n+1) x n
  MatrixField T;      // (n+1) x n
  VectorField zeta;   // n+1
  SymField metric;    // Du^t Du
  double gram_condition = 0.0;  // worst λmax/λmin of Du^t Du
  double min_eigenvalue = 0.0;
};

/// ζ is the normalized cofactor vector of the columns of Du, with one
/// global sign chosen so that its last components sum to a nonnegative
/// value. Throws NonImmersion if Du^t Du drops below the threshold.
/// With slow_frequency > 0, Du is taken with the strided stencils of `slow`
/// sized for content up to slow.slow_bandwidth * slow_frequency, which keeps
/// grid-scale rounding noise in u out of T and ζ.
ImmersionFrame frame(const VectorField& u, const StepOptions& options = {}, double slow_frequency = 0.0,
                     const IbpOptions& slow = {});

/// v = u + δ T(a² γ1(λx·ν)/λ ν + w) + δ^{1/2} a γ2(λx·ν)/λ ζ; w may be null.
VectorField perturb(const VectorField& u, const ImmersionFrame& fr, const ScalarField& a,
                    std::span<const double> nu, double lambda, double delta, const VectorField* w,
                    int samples_per_period = kDefaultSamplesPerPeriod);

struct StepDiagnostics {
  std::string kind;  // "ordinary" or "sharper"
  std::vector<double> nu;
  double lambda = 0.0;
  double mu = 0.0;
  double delta = 0.0;
  int depth = 0;
  double error_sup = 0.0;         // ‖measured_error‖∞
  double floor_sup = 0.0;         // ‖terms of Dv^t Dv of order δ^{3/2} and δ²‖∞
  double error_above_floor = 0.0; // ‖measured_error - floor‖∞
  double increment_c0 = 0.0;      // ‖v - u‖_0
  double increment_c1 = 0.0;      // ‖v - u‖_{C^1}
  double w_sup = 0.0;
  double F_sup = 0.0;
  std::array<double, 4> M_sup{};  // ‖M_1..M_4‖∞ (sharper step)
  double ibp_residual_sup = 0.0;  // max over i of ‖(μ/λ)^I γ_{i,I} E_i‖∞
  double gram_condition = 0.0;
  double min_metric_eigenvalue_before = 0.0;
  double min_metric_eigenvalue_after = 0.0;
};

struct StepOutcome {
  VectorField v;
  std::optional<SymField> predicted_increment;
  std::optional<SymField> measured_error;
  std::optional<SymField> F;
  std::vector<ScalarField> F_coeffs;  // δ Σ_i F_i in the ν_j⊗ν_j basis, j > n
  StepDiagnostics diag;
};

/// Adds approximately δ a² ν⊗ν to the metric; any unit ν.
StepOutcome step_ordinary(const VectorField& u, const ScalarField& a, std::span<const double> nu,
                          double lambda, double delta, const PrimitiveBasis& basis,
                          const StepOptions& options = {});

/// Adds approximately δ a² ν⊗ν + δ(c̄/λ²)∇a⊗∇a + F, with the fast error
/// matrices M_1..M_4 removed to order (μ/λ)^I by integration by parts.
StepOutcome step_sharper(const VectorField& u, const ScalarField& a, std::span<const double> nu,
                         double lambda, double mu, double delta, int depth,
                         const PrimitiveBasis& basis, const StepOptions& options = {});

/// The four fast error matrices M_1..M_4 built from u, a and the frame.
/// With mu > 0 the slow factors are differentiated with the strided
/// stencils of `slow` (see IbpOptions) so grid-scale rounding noise is not
/// amplified by 1/h; mu <= 0 uses the plain order-4 stencils.
std::array<SymField, 4> fast_error_matrices(const ImmersionFrame& fr, const ScalarField& a,
                                            std::span<const double> nu, double lambda,
                                            double delta, double mu = 0.0,
                                            const IbpOptions& slow = {});

struct MetricTermNorms {
  std::array<double, 4> M_sup{};
  double R1_sup = 0.0;
  double R2_sup = 0.0;
  double sym_Dw_sup = 0.0;
};

/// Right-hand side of
///   Dv^t Dv = Du^t Du + δa²ν⊗ν + 2δ sym(Dw) + δ Σ γ_i M_i + δ(c̄/λ²)∇a⊗∇a + R
/// with every term, including R = R_1 + R_2, evaluated explicitly from the
/// chain rule (analytic profile derivatives, finite differences of the slow
/// factors only).
SymField predicted_metric_rhs(const VectorField& u, const ScalarField& a, std::span<const double> nu,
                              double lambda, double delta, const VectorField* w,
                              const ImmersionFrame& fr, const PrimitiveBasis& basis,
                              MetricTermNorms* norms = nullptr);

/// Tolerance for ‖Dv^t Dv - predicted_metric_rhs‖∞: max(1e-8, propagated
/// finite-difference error of the oscillating parts of v).
double step_identity_tolerance(const ImmersionFrame& fr, const ScalarField& a, double lambda,
                               double delta, const VectorField* w);

}  // namespace corrugate
