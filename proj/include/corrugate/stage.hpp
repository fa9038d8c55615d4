#pragma once

#include <vector>

#include "corrugate/basis.hpp"
#include "corrugate/decompose.hpp"
#include "corrugate/fields.hpp"
#include "corrugate/step.hpp"

namespace corrugate {

struct StageParams {
  double delta = 0.1;        // current deficit scale δ
  double delta_hat = 0.025;  // next scale δ̂
  int J = 3;                 // IBP depth and Källén sweep count
  double Lambda = 4.0;       // frequency ratio Λ
  double moll_constant = 4.0;    // Ĉ in ℓ = η/(Ĉ λ_in)
  double lambda_constant = 1.0;  // C in λ_0 = C/ℓ
  double r_threshold = 0.5;      // closeness tolerance r
  double lambda_in = 1.0;        // incoming frequency bound λ
  double eta = 0.25;             // margin budget η

  double kaellen_nearness = 0.0;  // ‖H - h0‖∞ bound; 0 means 2r
  double positivity = 1e-3;       // floor on L_i(H - p)
  double amplitude_floor = 1e-3;  // floor on a_j² - L_j(ℱ)/δ
  StepOptions step;               // step-level thresholds

  double ell() const { return eta / (moll_constant * lambda_in); }
};

struct StageReport {
  VectorField v;
  GridDomain domain_out;
  double ell = 0.0;
  double deficit_before = 0.0;    // ‖g - Du^t Du‖∞ on the input domain
  double deficit_after = 0.0;     // ‖g - Dv^t Dv‖∞ on domain_out
  double closeness_before = 0.0;  // ‖g - Du^t Du - δ h0‖∞
  double closeness_after = 0.0;   // ‖g - Dv^t Dv - δ̂ h0‖∞
  double mollification_floor = 0.0;  // ‖g - g_ℓ‖∞ on domain_out
  double fast_error = 0.0;  // Σ over steps of error_above_floor, the Λ-scaling part
  std::vector<StepDiagnostics> per_step;
  std::vector<double> frequencies;  // λ_0 .. λ_{n_star}
  int top_exponent = 0;             // J(n_star - n) + n
  double c2_estimate = 0.0;         // max |∂²v|
  double c1_increment = 0.0;        // ‖v - u‖_{C^1} on domain_out
  double cancellation_residual = 0.0;  // max |b_j² + L_j(ℱ)/δ - a_j²|
  double cancellation_matrix_residual = 0.0;
  std::vector<double> kaellen_history;
  double kaellen_lambda0_hat = 0.0;
  double min_amplitude = 0.0;
  double min_adjusted_amplitude = 0.0;
  double gram_condition = 0.0;
  double wall_ms = 0.0;
};

/// Validates δ, δ̂, Λ, J and the mollification length before any work.
void validate_stage_params(const StageParams& p, const PrimitiveBasis& basis);

/// Frequencies λ_0..λ_{n_star}: λ_i = Λ^i λ_0 for i <= n, then each ordinary
/// step multiplies by Λ^J. Integer exponents throughout.
std::vector<double> stage_frequencies(double lambda0, double Lambda, int J, int n, int n_star);

/// Mollify, decompose the rescaled deficit, run n sharper and n_star - n
/// ordinary steps with adjusted amplitudes, and measure the new deficit.
StageReport run_stage(const VectorField& u, const SymField& g, const StageParams& params,
                      const PrimitiveBasis& basis);

}  // namespace corrugate
