#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "corrugate/basis.hpp"
#include "corrugate/config.hpp"
#include "corrugate/corrugation.hpp"
#include "corrugate/driver.hpp"
#include "corrugate/errors.hpp"
#include "corrugate/ibp.hpp"
#include "corrugate/report_io.hpp"
#include "corrugate/step.hpp"

using namespace corrugate;

namespace {

void print_summary(const RunReport& rep) {
  std::printf("# %s\n", rep.note.c_str());
  std::printf("%-3s %-12s %-12s %-10s %-14s %-14s %-12s %-12s\n", "q", "delta_q", "lambda_in", "Lambda_q",
              "deficit_bef", "deficit_aft", "c1_incr", "c2_est");
  for (const auto& s : rep.stages)
    std::printf("%-3d %-12.5g %-12.5g %-10.5g %-14.6g %-14.6g %-12.5g %-12.5g\n", s.q, s.delta_q,
                s.lambda_in, s.Lambda_q, s.report.deficit_before, s.report.deficit_after,
                s.report.c1_increment, s.report.c2_estimate);
  if (rep.holder.alpha_hat) std::printf("alpha_hat = %g\n", *rep.holder.alpha_hat);
  std::printf("c0 distance |u_Q - u_0| = %.6g\n", rep.c0_distance);
  if (rep.error) std::printf("stopped early: %s\n", rep.error->c_str());
}

int cmd_run(const std::string& config_path, const std::string& out_stem) {
  const RunConfig cfg = load_config(config_path);
  const RunReport rep = run(cfg);
  print_summary(rep);
  if (!out_stem.empty()) export_report(rep, out_stem);
  if (!cfg.csv_path.empty()) write_report_csv(rep, cfg.csv_path);
  if (!cfg.json_path.empty()) write_report_json(rep, cfg.json_path);
  if (!cfg.mesh_path.empty()) {
    const int q = cfg.mesh_stage < 0 ? static_cast<int>(rep.iterates.size()) - 1 : cfg.mesh_stage;
    if (q >= static_cast<int>(rep.iterates.size()))
      throw ParamError("mesh_stage " + std::to_string(q) + " was not reached");
    export_mesh(rep.iterates[q], cfg.mesh_path);
  }
  return rep.error ? 2 : 0;
}

int cmd_export(const std::string& config_path, int stage, const std::string& mesh) {
  RunConfig cfg = load_config(config_path);
  if (stage < 0 || stage > cfg.schedule.stages)
    throw ParamError("export: stage must lie in [0, " + std::to_string(cfg.schedule.stages) + "]");
  cfg.schedule.stages = stage;
  const RunReport rep = run(cfg, true);
  export_mesh(rep.iterates.back(), mesh);
  std::printf("wrote %s (stage %d, %zu vertices)\n", mesh.c_str(), stage, rep.iterates.back().node_count());
  return 0;
}

// Fast identity checks on small grids; the full suites live in the test binaries.
int cmd_verify() {
  struct Check {
    const char* name;
    std::function<std::pair<double, double>()> run;  // (value, tolerance)
  };
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Check> checks{
      {"basis roundtrip",
       [] {
         double worst = 0.0;
         for (int n = 2; n <= 4; ++n) {
           const PrimitiveBasis b(n);
           SymMatrix m = SymMatrix::identity(n);
           for (int i = 0; i < n; ++i)
             for (int j = i; j < n; ++j) m(i, j) += 0.1 * (i + 1) - 0.07 * j;
           worst = std::max(worst, (b.reconstruct(b.decompose(m)) - m).max_abs());
           const auto nu = b.direction(0);
           worst = std::max(worst, (b.phi(b.psi(m, nu), nu) - m).max_abs());
         }
         return std::pair{worst, 1e-12};
       }},
      {"corrugation identity 2g1' + g2'^2 = 1",
       [] {
         const auto d1 = gamma(1).derivative(), d2 = gamma(2).derivative();
         double worst = 0.0;
         for (int k = 0; k < 1000; ++k) {
           const double t = 2.0 * std::numbers::pi * k / 1000.0;
           worst = std::max(worst, std::abs(2.0 * d1(t) + d2(t) * d2(t) - 1.0));
         }
         return std::pair{worst, 1e-12};
       }},
      {"integration by parts identity",
       [two_pi] {
         const PrimitiveBasis b(2);
         const GridDomain d = GridDomain::unit(2, 513);
         const SymField M = sample_sym(d, 2, [two_pi](std::span<const double> x) {
           SymMatrix m(2);
           m(0, 1) = std::sin(two_pi * x[0]);
           return m;
         });
         const std::vector<double> nu{1.0, 0.0};
         const IbpResult r = integrate_by_parts(M, gamma(2), nu, 16.0, two_pi, 2, b);
         return std::pair{sup_norm(ibp_identity_residual(r, M, gamma(2), b)), ibp_identity_tolerance(r)};
       }},
      {"step identity (cylinder)",
       [two_pi] {
         const PrimitiveBasis b(2);
         const GridDomain d = GridDomain::unit(2, 513);
         const VectorField u = sample_vector(d, 3, [](std::span<const double> x, std::span<double> o) {
           o[0] = std::cos(x[0]);
           o[1] = std::sin(x[0]);
           o[2] = x[1];
         });
         const ScalarField a = sample_scalar(d, [two_pi](std::span<const double> x) {
           return 1.0 + 0.2 * std::sin(two_pi * x[0]);
         });
         const std::vector<double> nu{1.0, 0.0};
         const ImmersionFrame fr = frame(u);
         const VectorField v = perturb(u, fr, a, nu, 16.0, 0.1, nullptr);
         const SymField lhs = induced_metric(v);
         const SymField rhs = predicted_metric_rhs(u, a, nu, 16.0, 0.1, nullptr, fr, b);
         return std::pair{sup_distance(lhs, rhs), step_identity_tolerance(fr, a, 16.0, 0.1, nullptr)};
       }},
      {"beta below exponent ceiling",
       [] {
         double worst = 0.0;
         for (auto [n, J] : {std::pair{2, 10}, std::pair{3, 6}})
           if (!(beta_exponent(n, J) < exponent_ceiling(n))) worst = 1.0;
         return std::pair{worst, 0.0};
       }},
  };
  int failed = 0;
  for (const auto& c : checks) {
    double value = 0.0, tol = 0.0;
    bool ok = false;
    try {
      std::tie(value, tol) = c.run();
      ok = value <= tol;
    } catch (const std::exception& e) {
      std::printf("FAIL %-40s error: %s\n", c.name, e.what());
      ++failed;
      continue;
    }
    std::printf("%s %-40s %.3e (tol %.3e)\n", ok ? "PASS" : "FAIL", c.name, value, tol);
    failed += ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corrugate: staged corrugation of short immersions on grids"};
  app.require_subcommand(1);

  std::string config_path, out_stem, mesh_path;
  int stage = 0;
  auto* run_cmd = app.add_subcommand("run", "run a multi-stage configuration");
  run_cmd->add_option("--config", config_path, "key = value configuration file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_stem, "write <stem>.csv and <stem>.json");

  auto* verify_cmd = app.add_subcommand("verify", "run the fast identity checks");

  auto* export_cmd = app.add_subcommand("export", "export the iterate after a stage as an OBJ mesh");
  export_cmd->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--stage", stage, "stage index q (0 is the initial map)")->required();
  export_cmd->add_option("--mesh", mesh_path, "output OBJ path")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(config_path, out_stem);
    if (*verify_cmd) return cmd_verify();
    if (*export_cmd) return cmd_export(config_path, stage, mesh_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
