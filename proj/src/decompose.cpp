#include "corrugate/decompose.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "corrugate/corrugation.hpp"
#include "corrugate/errors.hpp"
#include "corrugate/parallel.hpp"

namespace corrugate {

SymField gradient_term(const std::vector<ScalarField>& amplitudes, std::span<const double> lambdas,
                       int n) {
  const GridDomain& d = amplitudes.front().domain();
  const double cbar = gamma2_square_mean();
  SymField p = make_sym(d, n);
  for (int l = 0; l < n; ++l) {
    const ScalarField& a = amplitudes[l];
    std::vector<double> g(d.node_count() * n);
    for (int ax = 0; ax < n; ++ax) fd::apply(d, a.raw().data(), 1, 0, ax, 1, g.data(), n, ax);
    const double w = cbar / (lambdas[l] * lambdas[l]);
    parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
      for (std::size_t node = b; node < e; ++node) {
        const double* gv = g.data() + node * n;
        auto out = p.at(node);
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) out[linalg::sym_index(n, i, j)] += w * gv[i] * gv[j];
      }
    });
  }
  return p;
}

namespace {

// a_i = √L_i(H - p) at every node; p may be null.
void update_amplitudes(const SymField& H, const SymField* p, const PrimitiveBasis& basis,
                       double floor, int sweep, std::vector<ScalarField>& amps) {
  const int n = basis.n();
  const int ns = basis.n_star();
  const GridDomain& d = H.domain();
  struct Bad {
    std::size_t node = 0;
    int index = -1;
    double value = 0.0;
  };
  std::vector<Bad> bad(1);
  std::mutex m;
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    std::array<double, 21> flat{}, coeffs{};
    for (std::size_t node = b; node < e; ++node) {
      const auto h = H.at(node);
      for (int k = 0; k < linalg::sym_size(n); ++k) flat[k] = h[k] - (p ? p->at(node)[k] : 0.0);
      basis.decompose_flat(std::span<const double>(flat.data(), linalg::sym_size(n)),
                           std::span<double>(coeffs.data(), ns));
      for (int i = 0; i < ns; ++i) {
        if (!(coeffs[i] >= floor)) {
          std::lock_guard<std::mutex> lock(m);
          if (bad[0].index < 0 || node < bad[0].node) bad[0] = {node, i, coeffs[i]};
          continue;
        }
        amps[i](node) = std::sqrt(coeffs[i]);
      }
    }
  });
  if (bad[0].index >= 0) {
    std::ostringstream os;
    os << "L_" << bad[0].index + 1 << " = " << bad[0].value << " below positivity threshold "
       << floor << " at node " << bad[0].node << " in sweep " << sweep;
    throw NegativeCoefficient(os.str());
  }
}

SymField substitute(const SymField& H, const std::vector<ScalarField>& amps, const SymField& p,
                    const PrimitiveBasis& basis) {
  const int n = basis.n();
  SymField E = make_sym(H.domain(), n);
  parallel_for(H.node_count(), [&](std::size_t b, std::size_t e) {
    std::array<double, 21> coeffs{};
    for (std::size_t node = b; node < e; ++node) {
      for (int i = 0; i < basis.n_star(); ++i) coeffs[i] = amps[i](node) * amps[i](node);
      const SymMatrix rec =
          basis.reconstruct(std::span<const double>(coeffs.data(), basis.n_star()));
      auto out = E.at(node);
      const auto h = H.at(node);
      const auto pp = p.at(node);
      for (int k = 0; k < linalg::sym_size(n); ++k) out[k] = h[k] - rec.flat()[k] - pp[k];
    }
  });
  return E;
}

}  // namespace

KaellenResult kaellen_decompose(const SymField& H, std::span<const double> lambdas, int sweeps,
                                const PrimitiveBasis& basis, const KaellenOptions& options) {
  const int n = basis.n();
  if (H.rows() != n) throw DimensionError("kaellen: H dimension does not match basis");
  if (static_cast<int>(lambdas.size()) != n)
    throw DimensionError("kaellen: need exactly n frequencies");
  for (int l = 0; l < n; ++l) {
    if (!(lambdas[l] > 0.0)) throw ParamError("kaellen: frequencies must be positive");
    if (l > 0 && lambdas[l] < lambdas[l - 1]) throw ParamError("kaellen: frequencies must be nondecreasing");
  }
  if (sweeps < 0) throw ParamError("kaellen: sweeps must be >= 0");

  const auto& h0 = basis.h0().flat();
  const auto& raw = H.raw();
  const int comps = H.components();
  const double dist = parallel_max(H.node_count(), [&](std::size_t node) {
    double m = 0.0;
    for (int k = 0; k < comps; ++k) {
      const double v = raw[node * comps + k];
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
      m = std::max(m, std::abs(v - h0[k]));
    }
    return m;
  });
  if (!(dist <= options.nearness)) {
    std::ostringstream os;
    os << "‖H - h0‖∞ = " << dist << " exceeds nearness threshold " << options.nearness;
    throw NearH0Violation(os.str());
  }

  KaellenResult r;
  const double h_sup = sup_norm(H);
  r.lambda0_hat = h_sup > 0.0 ? (h_sup + max_first_derivative(H)) / h_sup : 0.0;
  r.amplitudes.assign(basis.n_star(), make_scalar(H.domain()));

  update_amplitudes(H, nullptr, basis, options.positivity, 0, r.amplitudes);
  SymField p = gradient_term(r.amplitudes, lambdas, n);
  SymField E = substitute(H, r.amplitudes, p, basis);
  r.residual_history.push_back(sup_norm(E));
  for (int j = 1; j <= sweeps; ++j) {
    update_amplitudes(H, &p, basis, options.positivity, j, r.amplitudes);
    p = gradient_term(r.amplitudes, lambdas, n);
    E = substitute(H, r.amplitudes, p, basis);
    r.residual_history.push_back(sup_norm(E));
  }
  r.iterations_used = sweeps;
  r.residual = std::move(E);
  double amin = std::numeric_limits<double>::infinity();
  for (const auto& a : r.amplitudes)
    amin = std::min(amin, -parallel_max(a.node_count(), [&](std::size_t i) { return -a(i); }));
  r.min_amplitude = amin;
  return r;
}

}  // namespace corrugate
