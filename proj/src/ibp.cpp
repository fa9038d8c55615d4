#include "corrugate/ibp.hpp"

#include <array>
#include <cmath>
#include <string>

#include "corrugate/errors.hpp"
#include "corrugate/parallel.hpp"

namespace corrugate {

namespace {

double phase(const GridDomain& d, std::span<const double> nu, double lambda, std::size_t node) {
  double s = 0.0;
  for (int a = 0; a < d.dim(); ++a) s += d.coordinate(node, a) * nu[a];
  return lambda * s;
}

}  // namespace

double fd_derivative_error(const GridDomain& d, double k, double amplitude) {
  if (k <= 0.0 || amplitude <= 0.0) return 0.0;
  return 8.0 * fd::relative_error(k * d.max_spacing(), 1) * k * amplitude;
}

IbpResult integrate_by_parts(const SymField& M, const CorrugationProfile& gamma,
                             std::span<const double> nu, double lambda, double mu, int depth,
                             const PrimitiveBasis& basis, const IbpOptions& options) {
  const int n = basis.n();
  const int ns = basis.n_star();
  const int nsym = linalg::sym_size(n);
  const GridDomain& d = M.domain();
  if (M.rows() != n || d.dim() != n) throw DimensionError("ibp: M dimension does not match basis");
  if (depth < 1 || depth > options.max_depth)
    throw ParamError("ibp: depth must lie in [1, " + std::to_string(options.max_depth) + "]");
  if (!(mu > 0.0) || !(lambda >= mu))
    throw ParamError("ibp: need lambda >= mu > 0");
  if (std::abs(gamma.mean()) > 1e-12)
    throw MeanError("ibp: profile mean " + std::to_string(gamma.mean()) + " is not zero");
  check_resolution(d, lambda, options.samples_per_period);
  const std::vector<double> psi = basis.psi_matrix(nu, options.direction_threshold);

  const std::vector<CorrugationProfile> chain = antiderivative_chain(gamma, depth);

  IbpResult r;
  r.depth = depth;
  r.lambda = lambda;
  r.mu = mu;
  r.nu.assign(nu.begin(), nu.end());
  r.gamma_I = chain[depth];
  r.w = make_vector(d, n);
  r.w.set_frequency(lambda);
  r.F_coeffs.assign(ns - n, make_scalar(d));
  for (auto& f : r.F_coeffs) f.set_frequency(lambda);

  SymField cur = M;
  VectorField alpha = make_vector(d, n);
  double s = 1.0;
  for (int l = 1; l <= depth; ++l) {
    const CorrugationProfile& p_prev = chain[l - 1];
    const CorrugationProfile& p_cur = chain[l];
    parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
      std::array<double, 21> ab{};
      for (std::size_t node = b; node < e; ++node) {
        const auto m = cur.at(node);
        for (int row = 0; row < ns; ++row) {
          double acc = 0.0;
          const double* prow = psi.data() + static_cast<std::size_t>(row) * ns;
          for (int f = 0; f < nsym; ++f) acc += prow[f] * m[f];
          ab[row] = acc;
        }
        const double t = phase(d, nu, lambda, node);
        const double gw = s * p_cur.value(t) / (2.0 * lambda);
        const double gf = s * p_prev.value(t);
        auto w = r.w.at(node);
        auto al = alpha.at(node);
        for (int i = 0; i < n; ++i) {
          al[i] = ab[i];
          w[i] += gw * ab[i];
        }
        for (int j = n; j < ns; ++j) r.F_coeffs[j - n](node) += gf * ab[j];
      }
    });
    // M_next = -(1/μ) sym(Dα)
    std::vector<double> dalpha(d.node_count() * n * n);
    for (int a = 0; a < n; ++a) {
      const int stride = fd::slow_stride(d, a, options.slow_bandwidth * mu, options.slow_samples, options.slow_points);
      for (int i = 0; i < n; ++i)
        fd::apply_strided(d, alpha.raw().data(), n, i, a, stride, options.slow_points,
                          options.slow_boundary_points, dalpha.data(), n * n,
                          i * n + a);
    }
    parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
      for (std::size_t node = b; node < e; ++node) {
        const double* da = dalpha.data() + node * n * n;
        auto out = cur.at(node);
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j)
            out[linalg::sym_index(n, i, j)] = -0.5 * (da[i * n + j] + da[j * n + i]) / mu;
      }
    });
    s *= mu / lambda;
  }
  r.E = std::move(cur);
  r.E.set_frequency(M.frequency());
  return r;
}

SymField reconstruct_F(const IbpResult& r, const PrimitiveBasis& basis) {
  const int n = basis.n();
  const GridDomain& d = r.w.domain();
  SymField F = make_sym(d, n);
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      auto out = F.at(node);
      for (int j = n; j < basis.n_star(); ++j) {
        const double c = r.F_coeffs[j - n](node);
        const auto dir = basis.direction(j);
        for (int i = 0; i < n; ++i)
          for (int k = i; k < n; ++k) out[linalg::sym_index(n, i, k)] += c * dir[i] * dir[k];
      }
    }
  });
  F.set_frequency(r.lambda);
  return F;
}

SymField ibp_identity_residual(const IbpResult& r, const SymField& M, const CorrugationProfile& gamma,
                               const PrimitiveBasis& basis) {
  const int n = basis.n();
  const GridDomain& d = M.domain();
  const SymField F = reconstruct_F(r, basis);
  std::vector<double> dw(d.node_count() * n * n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) fd::apply(d, r.w.raw().data(), n, i, a, 1, dw.data(), n * n, i * n + a);
  const double scale = std::pow(r.mu / r.lambda, r.depth);
  SymField res = make_sym(d, n);
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const double t = phase(d, r.nu, r.lambda, node);
      const double g = gamma.value(t);
      const double gi = r.gamma_I.value(t) * scale;
      const double* w = dw.data() + node * n * n;
      auto out = res.at(node);
      const auto m = M.at(node);
      const auto E = r.E.at(node);
      const auto f = F.at(node);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const int k = linalg::sym_index(n, i, j);
          out[k] = g * m[k] - (w[i * n + j] + w[j * n + i]) - gi * E[k] - f[k];
        }
    }
  });
  return res;
}

double ibp_residual_term_norm(const IbpResult& r) {
  const GridDomain& d = r.E.domain();
  const double scale = std::pow(r.mu / r.lambda, r.depth);
  const int comps = r.E.components();
  return std::max(0.0, parallel_max(d.node_count(), [&](std::size_t node) {
    const double gi = std::abs(r.gamma_I.value(phase(d, r.nu, r.lambda, node))) * scale;
    double m = 0.0;
    for (int k = 0; k < comps; ++k) m = std::max(m, std::abs(r.E(node, k)));
    return gi * m;
  }));
}

double ibp_identity_tolerance(const IbpResult& r) {
  const double k = r.lambda * std::max(1, r.gamma_I.max_harmonic());
  return std::max(1e-8, fd_derivative_error(r.w.domain(), k, sup_norm(r.w)));
}

}  // namespace corrugate
