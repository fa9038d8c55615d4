#include "corrugate/stage.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "corrugate/errors.hpp"
#include "corrugate/parallel.hpp"

namespace corrugate {

namespace {

// ‖g - A^t A - c h0‖∞ with A^t A given.
double deficit_distance(const SymField& g, const SymField& metric, double c, const SymMatrix& h0) {
  const int comps = g.components();
  const auto h = h0.flat();
  return std::max(0.0, parallel_max(g.node_count(), [&](std::size_t node) {
    double m = 0.0;
    for (int k = 0; k < comps; ++k)
      m = std::max(m, std::abs(g(node, k) - metric(node, k) - c * h[k]));
    return m;
  }));
}

}  // namespace

void validate_stage_params(const StageParams& p, const PrimitiveBasis& basis) {
  if (!(p.delta > 0.0 && p.delta <= 1.0)) throw ParamError("stage: delta must lie in (0, 1]");
  const double bound = p.r_threshold * p.delta / h0_norm(basis);
  if (!(p.delta_hat > 0.0 && p.delta_hat < bound)) {
    std::ostringstream os;
    os << "stage: delta_hat = " << p.delta_hat << " must lie in (0, r delta/|h0|) = (0, " << bound << ")";
    throw ParamError(os.str());
  }
  if (!(p.Lambda > 1.0)) throw ParamError("stage: Lambda must exceed 1");
  if (p.J < 1) throw ParamError("stage: J must be >= 1");
  if (!(p.moll_constant > 0.0 && p.lambda_constant > 0.0 && p.lambda_in > 0.0 && p.eta > 0.0))
    throw ParamError("stage: moll_constant, lambda_constant, lambda_in and eta must be positive");
  if (!(p.r_threshold > 0.0)) throw ParamError("stage: r_threshold must be positive");
}

std::vector<double> stage_frequencies(double lambda0, double Lambda, int J, int n, int n_star) {
  std::vector<double> f(n_star + 1);
  for (int i = 0; i <= n_star; ++i) {
    const int exponent = i <= n ? i : n + J * (i - n);
    f[i] = lambda0 * std::pow(Lambda, exponent);
  }
  return f;
}

StageReport run_stage(const VectorField& u, const SymField& g, const StageParams& params,
                      const PrimitiveBasis& basis) {
  const auto start = std::chrono::steady_clock::now();
  validate_stage_params(params, basis);
  const int n = basis.n();
  const int ns = basis.n_star();
  const GridDomain& din = u.domain();
  if (din.dim() != n || u.rows() != n + 1 || g.rows() != n || !g.domain().same_grid(din))
    throw DimensionError("stage: u, g and basis dimensions disagree");
  const SymMatrix& h0 = basis.h0();
  const int spp = params.step.samples_per_period;

  StageReport rep;
  rep.ell = params.ell();
  const double lambda0 = params.lambda_constant / rep.ell;
  rep.frequencies = stage_frequencies(lambda0, params.Lambda, params.J, n, ns);
  rep.top_exponent = n + params.J * (ns - n);
  // Refuse before any work if the ladder or the mollifier does not fit.
  check_resolution(din, rep.frequencies.back(), spp);
  for (int a = 0; a < n; ++a) detail::mollifier_weights(rep.ell, din.spacing(a));
  {
    std::vector<int> half(n);
    for (int a = 0; a < n; ++a) half[a] = detail::mollifier_halfwidth(rep.ell, din.spacing(a));
    rep.domain_out = din.shrink(half);
  }

  {
    const SymField metric_u = induced_metric(u, spp);
    rep.deficit_before = deficit_distance(g, metric_u, 0.0, h0);
    rep.closeness_before = deficit_distance(g, metric_u, params.delta, h0);
  }
  if (!(rep.closeness_before <= params.r_threshold * params.delta)) {
    std::ostringstream os;
    os << "stage: ‖g - Du^t Du - delta h0‖ = " << rep.closeness_before << " exceeds r delta = "
       << params.r_threshold * params.delta;
    throw DeficitTooLarge(os.str());
  }

  // Step 1: mollification.
  VectorField cur = mollify(u, rep.ell);
  cur.set_frequency(lambda0);
  const GridDomain dout = cur.domain();
  SymField H = mollify(g, rep.ell);
  {
    const SymField metric = induced_metric(cur, spp);
    const double inv = 1.0 / params.delta;
    const double ratio = params.delta_hat / params.delta;
    const auto h = h0.flat();
    for (std::size_t node = 0; node < H.node_count(); ++node)
      for (int k = 0; k < H.components(); ++k)
        H(node, k) = (H(node, k) - metric(node, k)) * inv - ratio * h[k];
  }
  {
    const SymField g_out = restrict_field(g, dout);
    const SymField g_ell = mollify(g, rep.ell);
    rep.mollification_floor = sup_distance(g_out, g_ell);
  }

  // Step 2: decomposition of the rescaled deficit.
  KaellenOptions ko;
  ko.nearness = params.kaellen_nearness > 0.0 ? params.kaellen_nearness : 2.0 * params.r_threshold;
  ko.positivity = params.positivity;
  const std::vector<double> low(rep.frequencies.begin() + 1, rep.frequencies.begin() + 1 + n);
  KaellenResult kr = kaellen_decompose(H, low, params.J, basis, ko);
  H = SymField();
  rep.kaellen_history = kr.residual_history;
  rep.kaellen_lambda0_hat = kr.lambda0_hat;
  rep.min_amplitude = kr.min_amplitude;

  StepOptions so = params.step;
  so.keep_fields = false;

  // Step 3: sharper steps along the first n directions.
  std::vector<ScalarField> Fsum(ns - n, make_scalar(dout));
  for (int i = 1; i <= n; ++i) {
    const ScalarField& a = kr.amplitudes[i - 1];
    const double asup = sup_norm(a);
    const double ratio_a = asup > 0.0 ? max_first_derivative(a) / asup : 0.0;
    const double mu = std::max({1.0, rep.frequencies[i - 1], ratio_a});
    StepOutcome st = step_sharper(cur, a, basis.direction(i - 1), rep.frequencies[i], mu,
                                  params.delta, params.J, basis, so);
    for (int j = 0; j < ns - n; ++j)
      for (std::size_t k = 0; k < Fsum[j].raw().size(); ++k) Fsum[j].raw()[k] += st.F_coeffs[j].raw()[k];
    rep.gram_condition = std::max(rep.gram_condition, st.diag.gram_condition);
    rep.per_step.push_back(st.diag);
    cur = std::move(st.v);
  }

  // Step 4: adjusted amplitudes b_j = √(a_j² - L_j(ℱ)/δ).
  std::vector<ScalarField> b(ns - n, make_scalar(dout));
  {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t worst_node = 0;
    int worst_j = 0;
    for (int j = 0; j < ns - n; ++j) {
      const ScalarField& a = kr.amplitudes[n + j];
      for (std::size_t node = 0; node < dout.node_count(); ++node) {
        const double v = a(node) * a(node) - Fsum[j](node) / params.delta;
        if (v < worst) {
          worst = v;
          worst_node = node;
          worst_j = j;
        }
        b[j](node) = v > 0.0 ? std::sqrt(v) : 0.0;
      }
    }
    if (!(worst >= params.amplitude_floor)) {
      std::ostringstream os;
      os << "stage: a_j^2 - L_j(F)/delta = " << worst << " below amplitude floor "
         << params.amplitude_floor << " for j = " << n + worst_j + 1 << " at node " << worst_node
         << " (L_j(F) = " << Fsum[worst_j](worst_node) << ")";
      throw NegativeAmplitude(os.str());
    }
    rep.min_adjusted_amplitude = std::sqrt(worst);
    // Cancellation check at the coefficient and matrix level.
    double coef = 0.0, mat = 0.0;
    std::vector<double> c1(ns), c2(ns);
    for (std::size_t node = 0; node < dout.node_count(); ++node) {
      for (int j = 0; j < ns; ++j) {
        const double aj = kr.amplitudes[j](node);
        c1[j] = aj * aj;
        c2[j] = j < n ? aj * aj : b[j - n](node) * b[j - n](node) + Fsum[j - n](node) / params.delta;
        coef = std::max(coef, std::abs(c2[j] - c1[j]));
      }
      mat = std::max(mat, (basis.reconstruct(c2) - basis.reconstruct(c1)).max_abs());
    }
    rep.cancellation_residual = coef;
    rep.cancellation_matrix_residual = mat;
  }
  Fsum.clear();

  // Step 5: ordinary steps along the remaining directions.
  for (int j = n + 1; j <= ns; ++j) {
    StepOutcome st = step_ordinary(cur, b[j - n - 1], basis.direction(j - 1), rep.frequencies[j],
                                   params.delta, basis, so);
    rep.gram_condition = std::max(rep.gram_condition, st.diag.gram_condition);
    rep.per_step.push_back(st.diag);
    cur = std::move(st.v);
  }
  kr.amplitudes.clear();
  b.clear();

  // Conclusion measured on the shrunk domain against the unmollified data.
  {
    const SymField g_out = restrict_field(g, dout);
    const SymField metric_v = induced_metric(cur, spp);
    rep.deficit_after = deficit_distance(g_out, metric_v, 0.0, h0);
    rep.closeness_after = deficit_distance(g_out, metric_v, params.delta_hat, h0);
  }
  {
    VectorField diff = restrict_field(u, dout);
    for (std::size_t k = 0; k < diff.raw().size(); ++k) diff.raw()[k] = cur.raw()[k] - diff.raw()[k];
    diff.set_frequency(0.0);
    rep.c1_increment = c1_norm(diff);
  }
  for (const auto& st : rep.per_step) rep.fast_error += st.error_above_floor;
  rep.c2_estimate = max_second_derivative(cur);
  rep.v = std::move(cur);
  rep.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace corrugate
