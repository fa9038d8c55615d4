#pragma once

#include <span>
#include <vector>

#include "corrugate/basis.hpp"
#include "corrugate/fields.hpp"

namespace corrugate {

struct KaellenOptions {
  double nearness = 0.1;     // max allowed ‖H - h0‖∞
  double positivity = 1e-3;  // floor on L_i(H - p) before square roots
};

struct KaellenResult {
  std::vector<ScalarField> amplitudes;  // a_1..a_{n_star}
  SymField residual;                    // E after the last sweep
  int iterations_used = 0;              // number of sweeps performed
  std::vector<double> residual_history; // ‖E^j‖∞ for j = 0..sweeps
  double lambda0_hat = 0.0;             // measured ‖H‖_1 / ‖H‖_0
  double min_amplitude = 0.0;
};

/// Picard decomposition
///   H = Σ a_i² ν_i⊗ν_i + Σ_{l<=n} (c̄/λ_l²) ∇a_l⊗∇a_l + E,
/// a^0 = √L(H), a^{j+1} = √L(H - p^j). E is obtained by substitution, so the
/// identity holds exactly on the grid.
KaellenResult kaellen_decompose(const SymField& H, std::span<const double> lambdas, int sweeps,
                                const PrimitiveBasis& basis, const KaellenOptions& options = {});

/// Σ_{l<=n} (c̄/λ_l²) ∇a_l⊗∇a_l.
SymField gradient_term(const std::vector<ScalarField>& amplitudes, std::span<const double> lambdas,
                       int n);

}  // namespace corrugate
