#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corrugate/basis.hpp"
#include "corrugate/fields.hpp"
#include "corrugate/schedule.hpp"
#include "corrugate/stage.hpp"

namespace corrugate {

inline constexpr const char* kPresetNote =
    "initial data from an analytic preset satisfying the stage hypothesis exactly; "
    "no short-map construction is performed";

struct Preset {
  SymField g;
  VectorField u0;
  StageParams seed;  // delta set to delta0; other fields at defaults
};

/// "exact-deficit":     u0 = s(x, 0), g = s² Id + δ0 h0.
/// "perturbed-deficit": g += δ0 ε sin(2πx_1) sin(2πx_2) h0.
/// "anisotropic":       g += δ0 ε sin(2πx_1) e_1⊗e_1.
/// Throws UnknownPreset, or ParamError if ε > r/2.
Preset make_preset(const std::string& name, int n, double delta0, const GridDomain& grid,
                   double scale = 1.0, double epsilon = 0.0, double r_threshold = 0.5);

struct RunConfig {
  int n = 2;
  std::string preset = "exact-deficit";
  double scale = 1.0;
  double epsilon = 0.0;
  int grid_points = 256;
  double lower = 0.0;
  double upper = 1.0;
  Schedule schedule;
  double eta0 = 0.25;
  double moll_constant = 4.0;
  double lambda_constant = 1.0;
  double r_threshold = 0.5;
  double kaellen_nearness = 0.0;
  double positivity = 1e-3;
  double amplitude_floor = 1e-3;
  double direction_threshold = 1e-8;
  double immersion_threshold = 1e-6;
  int samples_per_period = kDefaultSamplesPerPeriod;
  std::vector<double> holder_alphas{0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  bool deterministic = false;  // zero wall-clock columns so reports are byte-stable
  std::string csv_path;
  std::string json_path;
  std::string mesh_path;
  int mesh_stage = -1;  // -1 means the last completed stage
};

struct StageRecord {
  int q = 0;
  double delta_q = 0.0;
  double delta_next = 0.0;
  double lambda_q = 0.0;
  double Lambda_q = 0.0;
  double eta_q = 0.0;
  double lambda_in = 0.0;
  double c2_prediction = 0.0;  // δ^{1/2} λ_in η^{-1} Λ^{J(n_star-n)+n}
  StageReport report;
};

struct HolderTable {
  std::vector<double> alphas;
  std::vector<double> seminorm_last;               // [D u_Q]_α per α
  std::vector<std::vector<double>> increments;     // [α][q] C^{1,α} increment of u_{q+1} - u_q
  std::optional<double> alpha_hat;
};

struct RunReport {
  std::string note = kPresetNote;
  RunConfig config;
  std::vector<StageRecord> stages;
  std::vector<VectorField> iterates;  // u_0 .. u_Q (each on its own domain)
  std::vector<double> c1_increments;
  std::vector<double> deficit_trajectory;  // deficit_before of stage 0, then deficit_after per stage
  HolderTable holder;
  double c0_distance = 0.0;  // ‖u_Q - u_0‖∞ on the last domain
  std::optional<std::string> error;
  int failed_stage = -1;
};

/// Refuses configurations whose predicted frequency ladder or shrinkage does
/// not fit the grid.
void validate_run_config(const RunConfig& config);

/// Iterates run_stage for q = 0..Q-1 with δ = δ_q, δ̂ = δ_{q+1}, Λ = Λ_q,
/// λ_in = max(λ_q, measured ‖u_q‖_2 / δ_q^{1/2}) and η = 2^{-q} η0. On a stage
/// error the report is returned partial with `error` set; with
/// throw_on_error the error is rethrown as StageError instead.
RunReport run(const RunConfig& config, bool throw_on_error = false);

/// Hölder table of a sequence of iterates restricted to the last domain.
/// α̂ is the largest α whose consecutive C^{1,α} increment ratios are all
/// below 0.95; absent for fewer than two iterates.
HolderTable estimate_holder(const std::vector<VectorField>& iterates, const std::vector<double>& alphas);

}  // namespace corrugate
