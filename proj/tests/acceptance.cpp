// Acceptance gate: runs the ten quantitative criteria at their stated sizes
// and tolerances and prints one PASS/FAIL line per criterion.
//
//   acceptance [--strict] [--only N[,N...]]
//
// The exit status is 0 once every criterion has been evaluated; with
// --strict it is 1 if any criterion failed.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "corrugate/basis.hpp"
#include "corrugate/corrugation.hpp"
#include "corrugate/decompose.hpp"
#include "corrugate/driver.hpp"
#include "corrugate/errors.hpp"
#include "corrugate/ibp.hpp"
#include "corrugate/report_io.hpp"
#include "corrugate/schedule.hpp"
#include "corrugate/stage.hpp"
#include "corrugate/step.hpp"

using namespace corrugate;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const std::vector<double> kE1{1.0, 0.0};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

VectorField flat(const GridDomain& d) {
  return sample_vector(d, 3, [](std::span<const double> x, std::span<double> o) {
    o[0] = x[0];
    o[1] = x[1];
    o[2] = 0.0;
  });
}

VectorField cylinder(const GridDomain& d) {
  VectorField u = sample_vector(d, 3, [](std::span<const double> x, std::span<double> o) {
    o[0] = std::cos(x[0]);
    o[1] = std::sin(x[0]);
    o[2] = x[1];
  });
  u.set_frequency(1.0);
  return u;
}

ScalarField wavy_amplitude(const GridDomain& d) {
  ScalarField a = sample_scalar(d, [](std::span<const double> x) { return 1.0 + 0.2 * std::sin(kTwoPi * x[0]); });
  a.set_frequency(kTwoPi);
  return a;
}

GridDomain strip(int points) {
  const double h = 1.0 / (points - 1);
  return GridDomain({0.0, 0.0}, {1.0, 8.0 * h}, {points, 9});
}

// ---------------------------------------------------------------------------

Verdict algebra() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double basis_err = 0.0, recon_err = 0.0;
  for (int n = 2; n <= 5; ++n) {
    const PrimitiveBasis b(n);
    for (int t = 0; t < 1000; ++t) {
      SymMatrix m(n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = 3.0 * U(rng);
      recon_err = std::max(recon_err, (b.reconstruct(b.decompose(m)) - m).max_abs() / (1.0 + m.max_abs()));
      std::vector<double> nu(n);
      double s = 0.0;
      do {
        s = 0.0;
        for (double& x : nu) s += (x = U(rng)) * x;
        s = std::sqrt(s);
      } while (std::abs(nu[0]) < 0.1 * s);
      for (double& x : nu) x /= s;
      basis_err = std::max(basis_err, (b.phi(b.psi(m, nu), nu) - m).max_abs() / (1.0 + m.max_abs()));
    }
  }
  double corr_err = 0.0;
  const auto d1 = gamma(1).derivative(), d2 = gamma(2).derivative();
  for (int k = 0; k < 10000; ++k) {
    const double t = 100.0 * U(rng);
    corr_err = std::max(corr_err, std::abs(2.0 * d1(t) + d2(t) * d2(t) - 1.0));
  }
  double chain_err = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const auto chain = antiderivative_chain(gamma(k), 12);
    for (std::size_t i = 1; i < chain.size(); ++i)
      for (int s = 0; s < 500; ++s) {
        const double t = kTwoPi * s / 500.0;
        chain_err = std::max(chain_err, std::abs(chain[i].derivative()(t) - chain[i - 1](t)));
      }
  }
  const double worst = std::max({basis_err, recon_err, corr_err, chain_err});
  return {worst <= 1e-12, fmt("phi(psi) %.2e, L-reconstruction %.2e, corrugation identity %.2e, chains %.2e (tol 1e-12)",
                              basis_err, recon_err, corr_err, chain_err)};
}

SymField sinusoidal_M(const GridDomain& d) {
  SymField M = sample_sym(d, 2, [](std::span<const double> x) {
    SymMatrix m(2);
    m(0, 1) = 0.5 * std::sin(kTwoPi * x[0]);
    return m;
  });
  M.set_frequency(kTwoPi);
  return M;
}

Verdict ibp_identity() {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 2048);
  const SymField M = sinusoidal_M(d);
  const IbpResult r = integrate_by_parts(M, gamma(2), kE1, 64.0, kTwoPi, 2, b);
  const double res = sup_norm(ibp_identity_residual(r, M, gamma(2), b));
  const SymField F = reconstruct_F(r, b);
  double lead = 0.0;
  for (std::size_t node = 0; node < d.node_count(); ++node) {
    const auto c = b.decompose(sym_at(F, node));
    lead = std::max({lead, std::abs(c[0]), std::abs(c[1])});
  }
  return {res <= 1e-6 && lead <= 1e-12,
          fmt("residual %.3e (tol 1e-6, FD bound %.3e), F off-span %.2e (tol 1e-12)", res,
              ibp_identity_tolerance(r), lead)};
}

Verdict ibp_scaling() {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 512);
  const SymField M = sinusoidal_M(d);
  const double mu = kTwoPi;
  std::vector<double> xs, ys;
  for (int I = 1; I <= 3; ++I) {
    xs.push_back(I);
    ys.push_back(std::log(ibp_residual_term_norm(integrate_by_parts(M, gamma(2), kE1, 64.0, mu, I, b))));
  }
  const double s = slope(xs, ys), expect = std::log(mu / 64.0);
  const double t64 = ibp_residual_term_norm(integrate_by_parts(M, gamma(2), kE1, 64.0, mu, 1, b));
  const double t128 = ibp_residual_term_norm(integrate_by_parts(M, gamma(2), kE1, 128.0, mu, 1, b));
  const double ratio = t128 / t64;
  const bool ok = std::abs(s / expect - 1.0) <= 0.25 && std::abs(ratio / 0.5 - 1.0) <= 0.2;
  return {ok, fmt("depth slope %.4f vs log(mu/lambda) %.4f; lambda 64->128 ratio %.4f (target 0.5 +-20%%)", s,
                  expect, ratio)};
}

Verdict kaellen() {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 257);
  const SymField H = sample_sym(d, 2, [&b](std::span<const double> x) {
    SymMatrix m = b.h0();
    m(0, 0) += 0.05 * std::sin(kTwoPi * x[0]);
    return m;
  });
  const std::vector<double> lambdas{40.0, 80.0};
  const KaellenResult r = kaellen_decompose(H, lambdas, 3, b);
  const double bound = 4.0 * std::pow(r.lambda0_hat / lambdas[0], 2);
  bool ok = r.residual_history.size() == 4;
  std::string ratios;
  for (std::size_t j = 1; j < r.residual_history.size(); ++j) {
    const double q = r.residual_history[j] / r.residual_history[j - 1];
    ok = ok && q <= bound;
    ratios += fmt(" %.3e", q);
  }
  return {ok, fmt("per-sweep ratios%s vs bound %.3e", ratios.c_str(), bound)};
}

Verdict step_identity() {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 1024);
  const ScalarField a = wavy_amplitude(d);
  const double lambda = 64.0, delta = 0.1;
  bool ok = true;
  std::string detail;
  const char* names[] = {"flat", "cylinder"};
  int k = 0;
  for (const VectorField& u : {flat(d), cylinder(d)}) {
    const ImmersionFrame fr = frame(u);
    const VectorField v = perturb(u, fr, a, kE1, lambda, delta, nullptr);
    const double res = sup_distance(induced_metric(v), predicted_metric_rhs(u, a, kE1, lambda, delta, nullptr, fr, b));
    const double tol = std::max(1e-8, step_identity_tolerance(fr, a, lambda, delta, nullptr));
    ok = ok && res <= tol;
    detail += fmt("%s %.3e (tol %.3e); ", names[k++], res, tol);
  }
  // Closed form on the flat base with constant amplitude.
  const VectorField u = flat(d);
  const double amp = 1.3;
  const ScalarField c = sample_scalar(d, [amp](auto) { return amp; });
  double cf_err = 0.0;
  for (const std::vector<double>& nu : {kE1, std::vector<double>{0.6, 0.8}}) {
    const ImmersionFrame fr = frame(u);
    const SymField rhs = predicted_metric_rhs(u, c, nu, lambda, delta, nullptr, fr, b);
    std::vector<double> x(2);
    for (std::size_t node = 0; node < d.node_count(); ++node) {
      d.coordinates(node, x);
      const double gp = gamma(1).slope(lambda * (x[0] * nu[0] + x[1] * nu[1]));
      const SymMatrix cf = SymMatrix::identity(2) +
                           (delta * amp * amp + delta * delta * std::pow(amp, 4) * gp * gp) * SymMatrix::outer(nu);
      cf_err = std::max(cf_err, (sym_at(rhs, node) - cf).max_abs());
    }
  }
  ok = ok && cf_err <= 1e-10;
  detail += fmt("closed form %.2e (tol 1e-10)", cf_err);
  return {ok, detail};
}

Verdict step_contraction() {
  const PrimitiveBasis b(2);
  const GridDomain d1 = strip(2049);
  const VectorField u1 = flat(d1);
  const ScalarField a1 = wavy_amplitude(d1);
  const double e64 = step_ordinary(u1, a1, kE1, 64.0, 0.1, b).diag.error_above_floor;
  const double e128 = step_ordinary(u1, a1, kE1, 128.0, 0.1, b).diag.error_above_floor;
  const double halving = e128 / e64;

  const GridDomain d2 = strip(8193);
  const VectorField u2 = flat(d2);
  const ScalarField a2 = wavy_amplitude(d2);
  const double lambda = 128.0, mu = kTwoPi;
  const double sharp = step_sharper(u2, a2, kE1, lambda, mu, 0.1, 2, b).diag.error_above_floor;
  const double ord = step_ordinary(u2, a2, kE1, lambda, 0.1, b).diag.error_above_floor;
  const double gain = ord / sharp, need = 0.5 * (lambda / mu);
  const bool ok = std::abs(halving / 0.5 - 1.0) <= 0.3 && gain >= need;
  return {ok, fmt("ordinary lambda 64->128 ratio %.4f (0.5 +-30%%); sharper I=2 gain %.2f >= %.2f", halving, gain,
                  need)};
}

Verdict stage_decay() {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 2048);
  const Preset pr = make_preset("exact-deficit", 2, 0.1, d);
  StageParams p;  // δ = 0.1, δ̂ = δ/4, J = 3, Λ = 4, η = 1/4, Ĉ = 4: ℓ = 1/16
  // λ_0 = 3/4, so λ_1 = 3 exceeds μ = 1 and the top frequency 768 fits the grid.
  p.lambda_constant = 0.75 * p.ell();
  try {
    const StageReport r = run_stage(pr.u0, pr.g, p, b);
    const bool ok = r.deficit_after <= r.deficit_before / 3.0 && r.cancellation_residual <= 1e-12;
    return {ok, fmt("deficit %.4e -> %.4e (ratio %.3f, need >= 3), cancellation %.2e", r.deficit_before,
                    r.deficit_after, r.deficit_before / r.deficit_after, r.cancellation_residual)};
  } catch (const Error& e) {
    return {false, std::string("stage aborted: ") + e.what()};
  }
}

Verdict multi_stage() {
  RunConfig c;
  c.n = 2;
  c.grid_points = 2048;
  c.schedule.growth_base = 4.0;
  c.schedule.b_exponent = 1.1;
  c.schedule.tau = 0.5;
  c.schedule.J = 3;
  c.schedule.stages = 3;
  c.lambda_constant = 0.75 * c.eta0 / c.moll_constant;
  try {
    const RunReport rep = run(c);
    if (rep.error) return {false, "run stopped early: " + *rep.error};
    bool ok = true;
    std::string detail = "deficits";
    for (double x : rep.deficit_trajectory) detail += fmt(" %.3e", x);
    for (std::size_t q = 1; q < rep.deficit_trajectory.size(); ++q)
      ok = ok && rep.deficit_trajectory[q] < rep.deficit_trajectory[q - 1];
    for (std::size_t q = 1; q < rep.c1_increments.size(); ++q)
      ok = ok && rep.c1_increments[q] < rep.c1_increments[q - 1];
    for (std::size_t q = 1; q < rep.stages.size(); ++q) {
      const auto& s = rep.stages[q];
      const double growth = s.report.c2_estimate / rep.stages[q - 1].report.c2_estimate;
      const double ledger = std::pow(s.Lambda_q, s.report.top_exponent);
      ok = ok && growth <= 2.0 * ledger;
      detail += fmt("; c2 growth %.3e vs 2x%.3e", growth, ledger);
    }
    return {ok, detail};
  } catch (const Error& e) {
    return {false, std::string("configuration refused: ") + e.what()};
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "corrugate_acceptance";
  fs::create_directories(dir);
  RunConfig c;
  c.grid_points = 513;
  c.upper = 0.25;
  c.schedule.growth_base = 1024.0;
  c.schedule.b_exponent = 1.2;
  c.schedule.J = 2;
  c.schedule.K_factor = 3.0;
  c.schedule.stages = 1;
  c.eta0 = 0.04;
  c.lambda_constant = 1.05 * 0.01 / 6.0;
  c.deterministic = true;
  std::string blobs[2];
  for (int k = 0; k < 2; ++k) {
    const RunReport rep = run(c);
    if (rep.error) return {false, "reference run failed: " + *rep.error};
    const fs::path stem = dir / ("run" + std::to_string(k));
    export_report(rep, stem.string());
    export_mesh(rep.iterates.back(), stem.string() + ".obj");
    blobs[k] = slurp(stem.string() + ".csv") + slurp(stem.string() + ".json") + slurp(stem.string() + ".obj");
  }
  const bool same = !blobs[0].empty() && blobs[0] == blobs[1];

  const RunReport rep = run(c);
  const VectorField& v = rep.iterates.back();
  const fs::path obj = dir / "edges.obj";
  export_mesh(v, obj.string());
  const ObjMesh m = load_obj(obj.string());
  double worst = 0.0;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      const int i = t[e], j = t[(e + 1) % 3];
      const double lm = std::hypot(m.vertices[i][0] - m.vertices[j][0], m.vertices[i][1] - m.vertices[j][1],
                                   m.vertices[i][2] - m.vertices[j][2]);
      const double lu = std::hypot(v(i, 0) - v(j, 0), v(i, 1) - v(j, 1), v(i, 2) - v(j, 2));
      worst = std::max(worst, std::abs(lm - lu));
    }
  return {same && worst <= 1e-7,
          fmt("reports and mesh %s across runs; OBJ edge roundtrip %.2e (tol 1e-7)",
              same ? "byte-identical" : "DIFFER", worst)};
}

Verdict exponents() {
  const Rational b1 = beta_exponent(2, 10), b2 = beta_exponent(3, 6);
  const bool ok = b1 == Rational{5, 19} && b2 == Rational{1, 9} && b1 < exponent_ceiling(2) &&
                  b2 < exponent_ceiling(3);
  return {ok, fmt("beta(2,10) = %lld/%lld < 1/3, beta(3,6) = %lld/%lld < 1/7", static_cast<long long>(b1.num),
                  static_cast<long long>(b1.den), static_cast<long long>(b2.num), static_cast<long long>(b2.den))};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  bool strict = false;
  std::vector<int> only;
  app.add_flag("--strict", strict, "exit 1 if any criterion fails");
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "algebraic exactness", 1.0, algebra},
      {2, "IBP identity at 2048^2", 30.0, ibp_identity},
      {3, "IBP scaling law", 0.0, ibp_scaling},
      {4, "Kaellen decay", 0.0, kaellen},
      {5, "step identity at 1024^2", 0.0, step_identity},
      {6, "step error contraction", 0.0, step_contraction},
      {7, "stage decay at 2048^2", 300.0, stage_decay},
      {8, "three-stage run", 1200.0, multi_stage},
      {9, "determinism and OBJ roundtrip", 0.0, determinism},
      {10, "exponent arithmetic", 0.0, exponents},
  };
  const std::set<int> chosen(only.begin(), only.end());
  int failed = 0;
  for (const auto& c : all) {
    if (!chosen.empty() && !chosen.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      v.pass = false;
      v.detail += fmt("; runtime %.1f s over budget %.0f s", secs, c.budget_s);
    }
    if (!v.pass) ++failed;
    std::printf("criterion %2d %-30s %s  [%.1f s]  %s\n", c.id, c.name, v.pass ? "PASS" : "FAIL", secs,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return strict && failed > 0 ? 1 : 0;
}
