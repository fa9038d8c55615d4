#include "corrugate/driver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "corrugate/errors.hpp"

namespace corrugate {

Preset make_preset(const std::string& name, int n, double delta0, const GridDomain& grid, double scale,
                   double epsilon, double r_threshold) {
  if (name != "exact-deficit" && name != "perturbed-deficit" && name != "anisotropic")
    throw UnknownPreset("unknown preset '" + name + "'");
  if (grid.dim() != n) throw DimensionError("preset: grid dimension differs from n");
  if (!(delta0 > 0.0 && delta0 <= 1.0)) throw ParamError("preset: delta0 must lie in (0, 1]");
  if (name != "exact-deficit" && !(std::abs(epsilon) <= r_threshold / 2.0))
    throw ParamError("preset: epsilon must not exceed r/2");
  const PrimitiveBasis basis(n);
  const SymMatrix h0 = basis.h0();
  const double two_pi = 2.0 * std::numbers::pi;

  Preset p;
  p.u0 = sample_vector(grid, n + 1, [&](std::span<const double> x, std::span<double> out) {
    for (int i = 0; i < n; ++i) out[i] = scale * x[i];
    out[n] = 0.0;
  });
  p.g = sample_sym(grid, n, [&](std::span<const double> x) {
    SymMatrix g = scale * scale * SymMatrix::identity(n) + delta0 * h0;
    if (name == "perturbed-deficit") {
      g += (delta0 * epsilon * std::sin(two_pi * x[0]) * std::sin(two_pi * x[1])) * h0;
    } else if (name == "anisotropic") {
      g(0, 0) += delta0 * epsilon * std::sin(two_pi * x[0]);
    }
    return g;
  });
  p.seed.delta = delta0;
  p.seed.r_threshold = r_threshold;
  return p;
}

namespace {

StageParams stage_params(const RunConfig& c, int q, double lambda_in) {
  const Schedule& s = c.schedule;
  StageParams p;
  p.delta = s.delta(q);
  p.delta_hat = s.delta(q + 1);
  p.J = s.J;
  p.Lambda = s.Lambda(q);
  p.moll_constant = c.moll_constant;
  p.lambda_constant = c.lambda_constant;
  p.r_threshold = c.r_threshold;
  p.lambda_in = lambda_in;
  p.eta = c.eta0 * std::pow(2.0, -q);
  p.kaellen_nearness = c.kaellen_nearness;
  p.positivity = c.positivity;
  p.amplitude_floor = c.amplitude_floor;
  p.step.direction_threshold = c.direction_threshold;
  p.step.immersion_threshold = c.immersion_threshold;
  p.step.samples_per_period = c.samples_per_period;
  return p;
}

GridDomain run_grid(const RunConfig& c) {
  return GridDomain(std::vector<double>(c.n, c.lower), std::vector<double>(c.n, c.upper),
                    std::vector<int>(c.n, c.grid_points));
}

}  // namespace

void validate_run_config(const RunConfig& c) {
  if (c.n < 2 || c.n > kMaxManifoldDim) throw DimensionError("run: n out of range");
  if (c.schedule.n != c.n) throw ParamError("run: schedule dimension differs from n");
  c.schedule.validate();
  if (!(c.eta0 > 0.0)) throw ParamError("run: eta0 must be positive");
  const GridDomain grid = run_grid(c);
  const PrimitiveBasis basis(c.n);
  const int ns = basis.n_star();
  const double fmax = max_resolved_frequency(grid, c.samples_per_period);
  std::vector<int> points(c.n, c.grid_points);
  for (int q = 0; q < c.schedule.stages; ++q) {
    const StageParams p = stage_params(c, q, c.schedule.lambda(q));
    validate_stage_params(p, basis);
    const double lambda0 = p.lambda_constant / p.ell();
    const double top = stage_frequencies(lambda0, p.Lambda, p.J, c.n, ns).back();
    if (top > fmax) {
      std::ostringstream os;
      os << "run: stage " << q << " needs frequency " << top << " but the grid resolves only "
         << fmax << " at " << c.samples_per_period << " samples per period";
      throw ResolutionError(os.str());
    }
    for (int a = 0; a < c.n; ++a) {
      detail::mollifier_weights(p.ell(), grid.spacing(a));
      points[a] -= 2 * detail::mollifier_halfwidth(p.ell(), grid.spacing(a));
      if (points[a] < 9)
        throw DomainTooSmall("run: the grid cannot afford " + std::to_string(c.schedule.stages) +
                             " stages of mollification shrinkage");
    }
  }
}

HolderTable estimate_holder(const std::vector<VectorField>& iterates, const std::vector<double>& alphas) {
  HolderTable t;
  t.alphas = alphas;
  if (iterates.empty()) return t;
  const GridDomain& common = iterates.back().domain();
  std::vector<VectorField> u;
  for (const auto& it : iterates) u.push_back(restrict_field(it, common));
  for (auto& f : u) f.set_frequency(0.0);

  const MatrixField du_last = jacobian(u.back());
  for (double a : alphas) t.seminorm_last.push_back(holder_seminorm(du_last, a));
  if (u.size() < 2) return t;

  t.increments.assign(alphas.size(), {});
  for (std::size_t q = 0; q + 1 < u.size(); ++q) {
    VectorField d = u[q + 1];
    for (std::size_t k = 0; k < d.raw().size(); ++k) d.raw()[k] -= u[q].raw()[k];
    const MatrixField dd = jacobian(d);
    const double c1 = sup_norm(d) + sup_norm(dd);
    for (std::size_t i = 0; i < alphas.size(); ++i)
      t.increments[i].push_back(c1 + holder_seminorm(dd, alphas[i]));
  }
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    bool summable = true;
    const auto& inc = t.increments[i];
    for (std::size_t q = 0; q + 1 < inc.size(); ++q) {
      if (inc[q + 1] == 0.0) continue;
      if (inc[q] == 0.0 || !(inc[q + 1] / inc[q] < 0.95)) {
        summable = false;
        break;
      }
    }
    if (summable && (!t.alpha_hat || alphas[i] > *t.alpha_hat)) t.alpha_hat = alphas[i];
  }
  return t;
}

RunReport run(const RunConfig& config, bool throw_on_error) {
  validate_run_config(config);
  RunReport rep;
  rep.config = config;
  const GridDomain grid = run_grid(config);
  const PrimitiveBasis basis(config.n);
  const Schedule& s = config.schedule;
  Preset pre = make_preset(config.preset, config.n, s.delta0, grid, config.scale, config.epsilon,
                           config.r_threshold);
  rep.iterates.push_back(pre.u0);
  double c2_prev = 0.0;
  for (int q = 0; q < s.stages; ++q) {
    const VectorField& u = rep.iterates.back();
    const double lambda_in = std::max(s.lambda(q), c2_prev / std::sqrt(s.delta(q)));
    StageRecord rec;
    rec.q = q;
    rec.delta_q = s.delta(q);
    rec.delta_next = s.delta(q + 1);
    rec.lambda_q = s.lambda(q);
    rec.Lambda_q = s.Lambda(q);
    rec.eta_q = config.eta0 * std::pow(2.0, -q);
    rec.lambda_in = lambda_in;
    const StageParams p = stage_params(config, q, lambda_in);
    const int top = config.n + s.J * (basis.n_star() - config.n);
    rec.c2_prediction = std::sqrt(p.delta) * lambda_in / p.eta * std::pow(p.Lambda, top);
    try {
      const SymField g = restrict_field(pre.g, u.domain());
      rec.report = run_stage(u, g, p, basis);
    } catch (const Error& e) {
      if (throw_on_error) throw StageError(q, e.what());
      rep.error = StageError(q, e.what()).what();
      rep.failed_stage = q;
      break;
    }
    if (config.deterministic) rec.report.wall_ms = 0.0;
    if (q == 0) rep.deficit_trajectory.push_back(rec.report.deficit_before);
    rep.deficit_trajectory.push_back(rec.report.deficit_after);
    rep.c1_increments.push_back(rec.report.c1_increment);
    c2_prev = rec.report.c2_estimate;
    rep.iterates.push_back(rec.report.v);
    rec.report.v = VectorField();
    rep.stages.push_back(std::move(rec));
  }
  rep.holder = estimate_holder(rep.iterates, config.holder_alphas);
  if (rep.iterates.size() >= 2) {
    const VectorField first = restrict_field(rep.iterates.front(), rep.iterates.back().domain());
    rep.c0_distance = sup_distance(first, restrict_field(rep.iterates.back(), rep.iterates.back().domain()));
  }
  return rep;
}

}  // namespace corrugate
