#include "corrugate/step.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <mutex>
#include <sstream>

#include "corrugate/corrugation.hpp"
#include "corrugate/errors.hpp"
#include "corrugate/parallel.hpp"

namespace corrugate {

namespace {

using linalg::kMaxDim;
using linalg::sym_index;

// Entry (c, a) = ∂_a f_c at c * n + a.
std::vector<double> jac_raw(const GridDomain& d, const std::vector<double>& data, int comps) {
  const int n = d.dim();
  std::vector<double> out(d.node_count() * comps * n);
  for (int c = 0; c < comps; ++c)
    for (int a = 0; a < n; ++a) fd::apply(d, data.data(), comps, c, a, 1, out.data(), comps * n, c * n + a);
  return out;
}

// Same layout as jac_raw, with strided stencils sized for content up to
// io.slow_bandwidth * mu; mu <= 0 falls back to jac_raw.
std::vector<double> jac_slow(const GridDomain& d, const std::vector<double>& data, int comps, double mu,
                             const IbpOptions& io) {
  if (!(mu > 0.0)) return jac_raw(d, data, comps);
  const int n = d.dim();
  std::vector<double> out(d.node_count() * comps * n);
  for (int a = 0; a < n; ++a) {
    const int stride = fd::slow_stride(d, a, io.slow_bandwidth * mu, io.slow_samples, io.slow_points);
    for (int c = 0; c < comps; ++c)
      fd::apply_strided(d, data.data(), comps, c, a, stride, io.slow_points, io.slow_boundary_points,
                        out.data(), comps * n, c * n + a);
  }
  return out;
}

double phase(const GridDomain& d, std::span<const double> nu, double lambda, std::size_t node) {
  double s = 0.0;
  for (int a = 0; a < d.dim(); ++a) s += d.coordinate(node, a) * nu[a];
  return lambda * s;
}

void check_nu(std::span<const double> nu, int n) {
  if (static_cast<int>(nu.size()) != n) throw DimensionError("step: direction dimension mismatch");
  double s = 0.0;
  for (double x : nu) s += x * x;
  if (std::abs(std::sqrt(s) - 1.0) > 1e-12) throw DirectionError("step: direction is not a unit vector");
}

void check_shapes(const VectorField& u, const ScalarField& a) {
  const int n = u.domain().dim();
  if (u.rows() != n + 1) throw DimensionError("step: immersion must map R^n to R^{n+1}");
  if (!a.domain().same_grid(u.domain())) throw DimensionError("step: amplitude grid differs from u");
}

}  // namespace

ImmersionFrame frame(const VectorField& u, const StepOptions& options, double slow_frequency,
                     const IbpOptions& slow) {
  const GridDomain& d = u.domain();
  const int n = d.dim();
  const int rows = n + 1;
  if (u.rows() != rows) throw DimensionError("frame: immersion must map R^n to R^{n+1}");
  ImmersionFrame fr;
  if (slow_frequency > 0.0) {
    check_resolution(d, u.frequency(), options.samples_per_period);
    fr.Du = MatrixField(d, rows, n);
    fr.Du.raw() = jac_slow(d, u.raw(), rows, slow_frequency, slow);
    fr.Du.set_frequency(u.frequency());
  } else {
    fr.Du = jacobian(u, options.samples_per_period);
  }
  fr.metric = gram(fr.Du);
  fr.T = MatrixField(d, rows, n);
  fr.zeta = make_vector(d, rows);

  std::mutex m;
  std::size_t bad_node = std::numeric_limits<std::size_t>::max();
  double bad_value = 0.0;
  std::vector<double> cond(d.node_count());
  std::vector<double> lmin(d.node_count());
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    std::array<double, kMaxDim * kMaxDim> G{}, Gi{};
    std::array<double, kMaxDim> ev{};
    for (std::size_t node = b; node < e; ++node) {
      const auto du = fr.Du.at(node);
      linalg::sym_to_full(fr.metric.at(node), n, G);
      linalg::sym_eigenvalues(G, n, ev);
      lmin[node] = ev[0];
      if (!(ev[0] >= options.immersion_threshold)) {
        std::lock_guard<std::mutex> lock(m);
        if (node < bad_node) {
          bad_node = node;
          bad_value = ev[0];
        }
        continue;
      }
      cond[node] = ev[n - 1] / ev[0];
      linalg::invert(G, n, Gi);
      auto t = fr.T.at(node);
      for (int r = 0; r < rows; ++r)
        for (int k = 0; k < n; ++k) {
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += du[r * n + j] * Gi[j * n + k];
          t[r * n + k] = acc;
        }
      auto z = fr.zeta.at(node);
      linalg::cofactor_normal(du, n, z);
      double norm = 0.0;
      for (int r = 0; r < rows; ++r) norm += z[r] * z[r];
      norm = std::sqrt(norm);
      for (int r = 0; r < rows; ++r) z[r] /= norm;
    }
  });
  if (bad_node != std::numeric_limits<std::size_t>::max()) {
    std::ostringstream os;
    os << "Du^t Du has smallest eigenvalue " << bad_value << " below " << options.immersion_threshold
       << " at node " << bad_node;
    throw NonImmersion(os.str());
  }
  double last = 0.0;
  for (std::size_t node = 0; node < d.node_count(); ++node) last += fr.zeta(node, rows - 1);
  if (last < 0.0)
    for (double& x : fr.zeta.raw()) x = -x;
  fr.gram_condition = *std::max_element(cond.begin(), cond.end());
  fr.min_eigenvalue = *std::min_element(lmin.begin(), lmin.end());
  fr.T.set_frequency(u.frequency());
  fr.zeta.set_frequency(u.frequency());
  return fr;
}

VectorField perturb(const VectorField& u, const ImmersionFrame& fr, const ScalarField& a,
                    std::span<const double> nu, double lambda, double delta, const VectorField* w,
                    int samples_per_period) {
  check_shapes(u, a);
  const GridDomain& d = u.domain();
  const int n = d.dim();
  const int rows = n + 1;
  check_nu(nu, n);
  if (!(delta > 0.0 && delta <= 1.0)) throw ParamError("perturb: delta must lie in (0, 1]");
  if (!(lambda > 0.0)) throw ParamError("perturb: lambda must be positive");
  check_resolution(d, lambda, samples_per_period);
  if (w && (w->rows() != n || !w->domain().same_grid(d)))
    throw DimensionError("perturb: w must be an n-vector field on the grid of u");
  const CorrugationProfile g1 = gamma(1), g2 = gamma(2);
  const double sd = std::sqrt(delta);
  VectorField v = u;
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    std::array<double, kMaxDim> tan{};
    for (std::size_t node = b; node < e; ++node) {
      const double t = phase(d, nu, lambda, node);
      const double an = a(node);
      const double c1 = an * an * g1.value(t) / lambda;
      for (int k = 0; k < n; ++k) tan[k] = c1 * nu[k] + (w ? (*w)(node, k) : 0.0);
      const double cn = sd * an * g2.value(t) / lambda;
      const auto T = fr.T.at(node);
      const auto z = fr.zeta.at(node);
      auto out = v.at(node);
      for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += T[r * n + k] * tan[k];
        out[r] += delta * acc + cn * z[r];
      }
    }
  });
  v.set_frequency(std::max(u.frequency(), lambda));
  return v;
}

std::array<SymField, 4> fast_error_matrices(const ImmersionFrame& fr, const ScalarField& a,
                                            std::span<const double> nu, double lambda,
                                            double delta, double mu, const IbpOptions& slow) {
  const GridDomain& d = fr.Du.domain();
  const int n = d.dim();
  const int rows = n + 1;
  std::array<SymField, 4> M{make_sym(d, n), make_sym(d, n), make_sym(d, n), make_sym(d, n)};
  {
    // M1 = (2/λ) sym(Du^t D(a² Tν))
    std::vector<double> q(d.node_count() * rows);
    for (std::size_t node = 0; node < d.node_count(); ++node) {
      const auto T = fr.T.at(node);
      const double a2 = a(node) * a(node);
      for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += T[r * n + k] * nu[k];
        q[node * rows + r] = a2 * acc;
      }
    }
    const std::vector<double> dq = jac_slow(d, q, rows, mu, slow);
    parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
      for (std::size_t node = b; node < e; ++node) {
        const auto du = fr.Du.at(node);
        const double* D = dq.data() + node * rows * n;
        auto out = M[0].at(node);
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int r = 0; r < rows; ++r) acc += du[r * n + i] * D[r * n + j] + du[r * n + j] * D[r * n + i];
            out[sym_index(n, i, j)] = acc / lambda;
          }
      }
    });
  }
  {
    // M2 = (2/(δ^{1/2}λ)) sym(Du^t D(aζ)), M3 = (2a/λ) sym(ν⊗(ζ^t D(aζ)))
    std::vector<double> z(d.node_count() * rows);
    for (std::size_t node = 0; node < d.node_count(); ++node)
      for (int r = 0; r < rows; ++r) z[node * rows + r] = a(node) * fr.zeta(node, r);
    const std::vector<double> dz = jac_slow(d, z, rows, mu, slow);
    const double s2 = 1.0 / (std::sqrt(delta) * lambda);
    parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
      std::array<double, kMaxDim> g{};
      for (std::size_t node = b; node < e; ++node) {
        const auto du = fr.Du.at(node);
        const auto ze = fr.zeta.at(node);
        const double* D = dz.data() + node * rows * n;
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int r = 0; r < rows; ++r) acc += ze[r] * D[r * n + j];
          g[j] = acc;
        }
        auto m2 = M[1].at(node);
        auto m3 = M[2].at(node);
        const double an = a(node);
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int r = 0; r < rows; ++r) acc += du[r * n + i] * D[r * n + j] + du[r * n + j] * D[r * n + i];
            m2[sym_index(n, i, j)] = acc * s2;
            m3[sym_index(n, i, j)] = an * (nu[i] * g[j] + nu[j] * g[i]) / lambda;
          }
      }
    });
  }
  {
    // M4 = ∇a⊗∇a / λ²
    const std::vector<double> ga = jac_slow(d, a.raw(), 1, mu, slow);
    const double s4 = 1.0 / (lambda * lambda);
    parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
      for (std::size_t node = b; node < e; ++node) {
        const double* g = ga.data() + node * n;
        auto out = M[3].at(node);
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) out[sym_index(n, i, j)] = g[i] * g[j] * s4;
      }
    });
  }
  for (auto& m : M) m.set_frequency(fr.Du.frequency());
  return M;
}

namespace {

// The floor is the part of Dv^t Dv of order δ^{3/2} and above: with the
// tangential addend δTτ, τ = a²γ1ν/λ + w, and the normal addend δ^{1/2}q,
// q = aγ2ζ/λ, it is δ² D(Tτ)^t D(Tτ) + 2δ^{3/2} sym(Dq^t D(Tτ)).
std::vector<double> higher_order_floor(const ImmersionFrame& fr, const ScalarField& a,
                                       std::span<const double> nu, double lambda, double delta,
                                       const VectorField* w) {
  const GridDomain& d = fr.T.domain();
  const int n = d.dim();
  const int rows = n + 1;
  const int ns = n * (n + 1) / 2;
  const CorrugationProfile g1 = gamma(1), g2 = gamma(2);
  std::vector<double> t(d.node_count() * rows), q(d.node_count() * rows);
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    std::array<double, kMaxDim> tau{};
    for (std::size_t node = b; node < e; ++node) {
      const double ph = phase(d, nu, lambda, node);
      const double an = a(node);
      const double c1 = an * an * g1.value(ph) / lambda;
      for (int k = 0; k < n; ++k) tau[k] = c1 * nu[k] + (w ? (*w)(node, k) : 0.0);
      const double c2 = an * g2.value(ph) / lambda;
      const auto T = fr.T.at(node);
      const auto z = fr.zeta.at(node);
      for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += T[r * n + k] * tau[k];
        t[node * rows + r] = acc;
        q[node * rows + r] = c2 * z[r];
      }
    }
  });
  const std::vector<double> dt = jac_raw(d, t, rows), dq = jac_raw(d, q, rows);
  const double d2 = delta * delta, d32 = delta * std::sqrt(delta);
  std::vector<double> out(d.node_count() * ns);
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double* T = dt.data() + node * rows * n;
      const double* Q = dq.data() + node * rows * n;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double tt = 0.0, qt = 0.0;
          for (int r = 0; r < rows; ++r) {
            tt += T[r * n + i] * T[r * n + j];
            qt += Q[r * n + i] * T[r * n + j] + T[r * n + i] * Q[r * n + j];
          }
          out[node * ns + sym_index(n, i, j)] = d2 * tt + d32 * qt;
        }
    }
  });
  return out;
}

// Shared tail of both steps: measured error, floor and diagnostics.
void finish_step(StepOutcome& out, const VectorField& u, const ImmersionFrame& fr, const ScalarField& a,
                 std::span<const double> nu, double lambda, double delta, const SymField* grad_term,
                 const SymField* F, const VectorField* w, bool fr_fine, const StepOptions& options) {
  const GridDomain& d = u.domain();
  const int n = d.dim();
  const int ns = n * (n + 1) / 2;
  const std::vector<double> floor_m = higher_order_floor(fr, a, nu, lambda, delta, w);
  SymField metric_v = induced_metric(out.v, options.samples_per_period);
  // Du^t Du with the same stencils as Dv^t Dv, so their errors cancel.
  SymField fine;
  if (!fr_fine) fine = induced_metric(u, options.samples_per_period);
  const SymField& metric_u = fr_fine ? fr.metric : fine;
  out.diag.min_metric_eigenvalue_after = min_eigenvalue(metric_v);

  SymField pred = make_sym(d, n);
  SymField err = std::move(metric_v);
  std::vector<double> above(d.node_count()), floor_v(d.node_count());
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double an = a(node);
      const double* fl = floor_m.data() + node * ns;
      auto p = pred.at(node);
      auto m = err.at(node);
      const auto g = metric_u.at(node);
      double amax = 0.0, fmax = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const int k = sym_index(n, i, j);
          p[k] = delta * an * an * nu[i] * nu[j];
          if (grad_term) p[k] += delta * grad_term->at(node)[k];
          m[k] -= g[k] + p[k];
          if (F) m[k] -= F->at(node)[k];
          const double fk = fl[k];
          amax = std::max(amax, std::abs(m[k] - fk));
          fmax = std::max(fmax, std::abs(fk));
        }
      above[node] = amax;
      floor_v[node] = fmax;
    }
  });
  out.diag.error_sup = sup_norm(err);
  out.diag.error_above_floor = *std::max_element(above.begin(), above.end());
  out.diag.floor_sup = *std::max_element(floor_v.begin(), floor_v.end());

  VectorField diff = out.v;
  for (std::size_t i = 0; i < diff.raw().size(); ++i) diff.raw()[i] -= u.raw()[i];
  out.diag.increment_c0 = sup_norm(diff);
  out.diag.increment_c1 = out.diag.increment_c0 + max_first_derivative(diff);
  out.diag.gram_condition = fr.gram_condition;
  out.diag.min_metric_eigenvalue_before = fr.min_eigenvalue;
  if (options.keep_fields) {
    out.predicted_increment = std::move(pred);
    out.measured_error = std::move(err);
  }
}

}  // namespace

StepOutcome step_ordinary(const VectorField& u, const ScalarField& a, std::span<const double> nu,
                          double lambda, double delta, const PrimitiveBasis& basis,
                          const StepOptions& options) {
  check_shapes(u, a);
  if (basis.n() != u.domain().dim()) throw DimensionError("step: basis dimension mismatch");
  // The slow content of u is bounded by its frequency metadata.
  const double slow = u.frequency();
  IbpOptions io;
  io.samples_per_period = options.samples_per_period;
  const ImmersionFrame fr = frame(u, options, slow, io);
  StepOutcome out;
  out.v = perturb(u, fr, a, nu, lambda, delta, nullptr, options.samples_per_period);
  out.diag.kind = "ordinary";
  out.diag.nu.assign(nu.begin(), nu.end());
  out.diag.lambda = lambda;
  out.diag.delta = delta;
  finish_step(out, u, fr, a, nu, lambda, delta, nullptr, nullptr, nullptr, !(slow > 0.0), options);
  return out;
}

StepOutcome step_sharper(const VectorField& u, const ScalarField& a, std::span<const double> nu,
                         double lambda, double mu, double delta, int depth,
                         const PrimitiveBasis& basis, const StepOptions& options) {
  check_shapes(u, a);
  const GridDomain& d = u.domain();
  const int n = d.dim();
  if (basis.n() != n) throw DimensionError("step: basis dimension mismatch");
  check_nu(nu, n);
  if (std::abs(nu[0]) <= options.direction_threshold)
    throw DirectionError("sharper step: |nu . e_1| is below the direction threshold");
  if (!(lambda >= mu)) throw ParamError("sharper step: need lambda >= mu");
  if (!(delta > 0.0 && delta <= 1.0)) throw ParamError("sharper step: delta must lie in (0, 1]");
  check_resolution(d, lambda, options.samples_per_period);
  IbpOptions io;
  io.direction_threshold = options.direction_threshold;
  io.max_depth = options.max_depth;
  io.samples_per_period = options.samples_per_period;
  const ImmersionFrame fr = frame(u, options, mu, io);

  StepOutcome out;
  out.diag.kind = "sharper";
  out.diag.nu.assign(nu.begin(), nu.end());
  out.diag.lambda = lambda;
  out.diag.mu = mu;
  out.diag.delta = delta;
  out.diag.depth = depth;

  VectorField w = make_vector(d, n);
  w.set_frequency(lambda);
  out.F_coeffs.assign(basis.n_star() - n, make_scalar(d));
  {
    std::array<SymField, 4> M = fast_error_matrices(fr, a, nu, lambda, delta, mu, io);
    for (int i = 0; i < 4; ++i) {
      out.diag.M_sup[i] = sup_norm(M[i]);
      if (out.diag.M_sup[i] <= options.ibp_noise_floor) continue;
      IbpResult r = integrate_by_parts(M[i], gamma(i + 1), nu, lambda, mu, depth, basis, io);
      M[i] = SymField();
      out.diag.ibp_residual_sup = std::max(out.diag.ibp_residual_sup, ibp_residual_term_norm(r));
      for (std::size_t k = 0; k < w.raw().size(); ++k) w.raw()[k] -= r.w.raw()[k];
      for (int j = 0; j < basis.n_star() - n; ++j) {
        auto& dst = out.F_coeffs[j].raw();
        const auto& src = r.F_coeffs[j].raw();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += delta * src[k];
      }
    }
  }
  for (auto& f : out.F_coeffs) f.set_frequency(lambda);
  out.diag.w_sup = sup_norm(w);

  SymField F = make_sym(d, n);
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      auto o = F.at(node);
      for (int j = n; j < basis.n_star(); ++j) {
        const double c = out.F_coeffs[j - n](node);
        const auto dir = basis.direction(j);
        for (int i = 0; i < n; ++i)
          for (int k = i; k < n; ++k) o[sym_index(n, i, k)] += c * dir[i] * dir[k];
      }
    }
  });
  out.diag.F_sup = sup_norm(F);

  // (c̄/λ²)∇a⊗∇a
  SymField grad_term = make_sym(d, n);
  {
    const std::vector<double> ga = jac_raw(d, a.raw(), 1);
    const double c = gamma2_square_mean() / (lambda * lambda);
    parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
      for (std::size_t node = b; node < e; ++node) {
        const double* g = ga.data() + node * n;
        auto o = grad_term.at(node);
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) o[sym_index(n, i, j)] = c * g[i] * g[j];
      }
    });
  }

  out.v = perturb(u, fr, a, nu, lambda, delta, &w, options.samples_per_period);
  finish_step(out, u, fr, a, nu, lambda, delta, &grad_term, &F, &w, !(mu > 0.0), options);
  if (options.keep_fields) out.F = std::move(F);
  return out;
}

SymField predicted_metric_rhs(const VectorField& u, const ScalarField& a, std::span<const double> nu,
                              double lambda, double delta, const VectorField* w,
                              const ImmersionFrame& fr, const PrimitiveBasis& basis,
                              MetricTermNorms* norms) {
  check_shapes(u, a);
  const GridDomain& d = u.domain();
  const int n = d.dim();
  const int rows = n + 1;
  if (basis.n() != n) throw DimensionError("step: basis dimension mismatch");
  check_nu(nu, n);
  if (!(delta > 0.0 && delta <= 1.0)) throw ParamError("predicted_metric_rhs: delta must lie in (0, 1]");
  const std::size_t N = d.node_count();
  const double sd = std::sqrt(delta);
  const double cbar = gamma2_square_mean();
  const CorrugationProfile g1 = gamma(1), g2 = gamma(2), g3 = gamma(3), g4 = gamma(4);

  std::vector<double> q(N * rows), z(N * rows);
  for (std::size_t node = 0; node < N; ++node) {
    const auto T = fr.T.at(node);
    const double an = a(node);
    for (int r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += T[r * n + k] * nu[k];
      q[node * rows + r] = an * an * acc;
      z[node * rows + r] = an * fr.zeta(node, r);
    }
  }
  const std::vector<double> dq = jac_raw(d, q, rows);
  const std::vector<double> dz = jac_raw(d, z, rows);
  const std::vector<double> ga = jac_raw(d, a.raw(), 1);
  const std::vector<double> dT = jac_raw(d, fr.T.raw(), rows * n);  // ((r*n+k)*n + j)
  std::vector<double> dw;
  if (w) dw = jac_raw(d, w->raw(), n);

  SymField rhs = make_sym(d, n);
  std::vector<double> r1s(N), r2s(N), dws(N);
  std::array<std::vector<double>, 4> ms;
  for (auto& m : ms) m.assign(N, 0.0);
  parallel_for(N, [&](std::size_t b, std::size_t e) {
    std::array<double, kMaxDim * kMaxDim> S{}, B2{};
    std::array<double, kMaxDim> gz{};
    for (std::size_t node = b; node < e; ++node) {
      const double t = phase(d, nu, lambda, node);
      const double an = a(node);
      const double v1 = g1.value(t), d1 = g1.slope(t);
      const double v2 = g2.value(t), d2 = g2.slope(t);
      const double v3 = g3.value(t), v4 = g4.value(t);
      const auto du = fr.Du.at(node);
      const auto T = fr.T.at(node);
      const auto ze = fr.zeta.at(node);
      const double* Dq = dq.data() + node * rows * n;
      const double* Dz = dz.data() + node * rows * n;
      const double* Ga = ga.data() + node * n;
      const double* DT = dT.data() + node * rows * n * n;
      const double* Dw = w ? dw.data() + node * n * n : nullptr;
      const double* qv = q.data() + node * rows;

      // S = A + B + E, B2 = δ (DT) w
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < n; ++j) {
          double s = delta * d1 * qv[r] * nu[j] + sd * an * d2 * ze[r] * nu[j];
          s += delta * v1 / lambda * Dq[r * n + j] + sd * v2 / lambda * Dz[r * n + j];
          double b2 = 0.0;
          if (w) {
            double b1 = 0.0;
            for (int k = 0; k < n; ++k) {
              b1 += T[r * n + k] * Dw[k * n + j];
              b2 += DT[(r * n + k) * n + j] * (*w)(node, k);
            }
            s += delta * b1 + delta * b2;
            b2 *= delta;
          }
          S[r * n + j] = s;
          B2[r * n + j] = b2;
        }
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int r = 0; r < rows; ++r) acc += ze[r] * Dz[r * n + j];
        gz[j] = acc;
      }
      auto out = rhs.at(node);
      const auto G = fr.metric.at(node);
      double r1m = 0.0, r2m = 0.0, dwm = 0.0;
      double mm[4] = {0, 0, 0, 0};
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double duq = 0.0, duz = 0.0, r1 = 0.0, sts = 0.0;
          for (int r = 0; r < rows; ++r) {
            duq += du[r * n + i] * Dq[r * n + j] + du[r * n + j] * Dq[r * n + i];
            duz += du[r * n + i] * Dz[r * n + j] + du[r * n + j] * Dz[r * n + i];
            r1 += du[r * n + i] * B2[r * n + j] + du[r * n + j] * B2[r * n + i];
            sts += S[r * n + i] * S[r * n + j];
          }
          const double m1 = duq / lambda;
          const double m2 = duz / (sd * lambda);
          const double m3 = an * (nu[i] * gz[j] + nu[j] * gz[i]) / lambda;
          const double m4 = Ga[i] * Ga[j] / (lambda * lambda);
          const double nn = nu[i] * nu[j];
          const double slow = cbar * m4;  // (c̄/λ²)∇a⊗∇a
          const double r2 = sts - delta * an * an * d2 * d2 * nn - delta * (v3 * m3 + v4 * m4) -
                            delta * slow;
          const double symdw = w ? (Dw[i * n + j] + Dw[j * n + i]) : 0.0;
          out[sym_index(n, i, j)] = G[sym_index(n, i, j)] + delta * an * an * nn + delta * symdw +
                                    delta * (v1 * m1 + v2 * m2 + v3 * m3 + v4 * m4) + delta * slow +
                                    r1 + r2;
          r1m = std::max(r1m, std::abs(r1));
          r2m = std::max(r2m, std::abs(r2));
          dwm = std::max(dwm, std::abs(0.5 * symdw));
          mm[0] = std::max(mm[0], std::abs(m1));
          mm[1] = std::max(mm[1], std::abs(m2));
          mm[2] = std::max(mm[2], std::abs(m3));
          mm[3] = std::max(mm[3], std::abs(m4));
        }
      r1s[node] = r1m;
      r2s[node] = r2m;
      dws[node] = dwm;
      for (int k = 0; k < 4; ++k) ms[k][node] = mm[k];
    }
  });
  if (norms) {
    norms->R1_sup = *std::max_element(r1s.begin(), r1s.end());
    norms->R2_sup = *std::max_element(r2s.begin(), r2s.end());
    norms->sym_Dw_sup = *std::max_element(dws.begin(), dws.end());
    for (int k = 0; k < 4; ++k) norms->M_sup[k] = *std::max_element(ms[k].begin(), ms[k].end());
  }
  rhs.set_frequency(std::max(u.frequency(), lambda));
  return rhs;
}

double step_identity_tolerance(const ImmersionFrame& fr, const ScalarField& a, double lambda,
                               double delta, const VectorField* w) {
  const GridDomain& d = fr.Du.domain();
  const double amax = sup_norm(a);
  const double tmax = sup_norm(fr.T);
  const int rows = fr.T.rows();
  const int n = fr.T.cols();
  const double tnorm = tmax * std::sqrt(static_cast<double>(rows * n));
  double e = fd_derivative_error(d, 2.0 * lambda, delta * amax * amax * tnorm * 0.25 / lambda);
  e += fd_derivative_error(d, lambda, std::sqrt(delta) * amax * std::numbers::sqrt2 / lambda);
  if (w) e += 2.0 * fd_derivative_error(d, 2.0 * lambda, delta * tnorm * sup_norm(*w));
  const double dv = sup_norm(fr.Du) + std::sqrt(delta) * amax * std::numbers::sqrt2 +
                    0.5 * delta * amax * amax * tnorm + e;
  const double lim = 2.0 * dv * e * n + e * e * n;
  return std::max(1e-8, lim);
}

}  // namespace corrugate
