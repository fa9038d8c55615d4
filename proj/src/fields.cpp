#include "corrugate/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "corrugate/errors.hpp"
#include "corrugate/parallel.hpp"

namespace corrugate {

void check_resolution(const GridDomain& domain, double frequency, int samples_per_period) {
  if (frequency <= 0.0) return;
  const double limit = 2.0 * std::numbers::pi / (frequency * samples_per_period);
  if (domain.max_spacing() > limit * (1.0 + 1e-12))
    throw ResolutionError("grid spacing " + std::to_string(domain.max_spacing()) +
                          " does not resolve frequency " + std::to_string(frequency) + " with " +
                          std::to_string(samples_per_period) + " samples per period");
}

double max_resolved_frequency(const GridDomain& domain, int samples_per_period) {
  return 2.0 * std::numbers::pi / (domain.max_spacing() * samples_per_period);
}

namespace fd {

std::vector<double> weights(double x0, std::span<const double> x, int order) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = c[j][order];
  return w;
}

namespace {

struct Stencil {
  int lo = 0;  // offset of the first weight
  std::vector<double> w;
};

// Per order: stencils for node 0, node 1, interior, node N-2, node N-1.
struct StencilSet {
  std::array<Stencil, 5> s;
};

Stencil make_stencil(int lo, int hi, int order) {
  std::vector<double> off;
  for (int k = lo; k <= hi; ++k) off.push_back(k);
  return {lo, weights(0.0, off, order)};
}

const StencilSet& stencils(int order) {
  // Six-node one-sided stencils near the boundary: their error constant is
  // well below the centered one, so the interior order-4 error dominates.
  static const StencilSet first{{make_stencil(0, 5, 1), make_stencil(-1, 4, 1),
                                 make_stencil(-2, 2, 1), make_stencil(-4, 1, 1),
                                 make_stencil(-5, 0, 1)}};
  static const StencilSet second{{make_stencil(0, 5, 2), make_stencil(-1, 4, 2),
                                  make_stencil(-2, 2, 2), make_stencil(-4, 1, 2),
                                  make_stencil(-5, 0, 2)}};
  if (order == 1) return first;
  if (order == 2) return second;
  throw ParamError("derivative order must be 1 or 2");
}

const Stencil& pick(const StencilSet& set, int i, int points) {
  if (i == 0) return set.s[0];
  if (i == 1) return set.s[1];
  if (i == points - 1) return set.s[4];
  if (i == points - 2) return set.s[3];
  return set.s[2];
}

void require_fit(const GridDomain& d, int axis) {
  if (axis < 0 || axis >= d.dim()) throw DimensionError("derivative axis out of range");
  if (d.points(axis) < 6) throw ResolutionError("stencil does not fit on axis " + std::to_string(axis));
}

inline double at_node(const GridDomain& d, const double* in, int comps, int c, int axis,
                      const StencilSet& set, double scale, std::size_t node) {
  const int i = d.index(node, axis);
  const Stencil& st = pick(set, i, d.points(axis));
  const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(d.stride(axis));
  const double* base = in + static_cast<std::ptrdiff_t>(node) * comps + c;
  double acc = 0.0;
  for (std::size_t k = 0; k < st.w.size(); ++k)
    acc += st.w[k] * base[(st.lo + static_cast<std::ptrdiff_t>(k)) * stride * comps];
  return acc * scale;
}

}  // namespace

double relative_error(double kh, int order) {
  if (kh == 0.0) return 0.0;
  const StencilSet& set = stencils(order);
  const std::complex<double> exact = std::pow(std::complex<double>(0.0, kh), order);
  double worst = 0.0;
  for (const Stencil& st : set.s) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < st.w.size(); ++k)
      acc += st.w[k] * std::exp(std::complex<double>(0.0, kh * (st.lo + static_cast<int>(k))));
    worst = std::max(worst, std::abs(acc - exact) / std::abs(exact));
  }
  return worst;
}

void apply(const GridDomain& d, const double* in, int comps, int c, int axis, int order,
           double* out, int out_comps, int out_c) {
  require_fit(d, axis);
  const StencilSet& set = stencils(order);
  const double scale = 1.0 / std::pow(d.spacing(axis), order);
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node)
      out[node * out_comps + out_c] = at_node(d, in, comps, c, axis, set, scale, node);
  });
}

double max_abs(const GridDomain& d, const double* in, int comps, int c, int axis, int order) {
  require_fit(d, axis);
  const StencilSet& set = stencils(order);
  const double scale = 1.0 / std::pow(d.spacing(axis), order);
  return parallel_max(d.node_count(), [&](std::size_t node) {
    return std::abs(at_node(d, in, comps, c, axis, set, scale, node));
  });
}

double mixed_at(const GridDomain& d, const double* in, int comps, int c, int a, int b,
                std::size_t node) {
  require_fit(d, a);
  require_fit(d, b);
  if (a == b) return at_node(d, in, comps, c, a, stencils(2), 1.0 / std::pow(d.spacing(a), 2), node);
  const StencilSet& set = stencils(1);
  const Stencil& st = pick(set, d.index(node, a), d.points(a));
  const double sb = 1.0 / d.spacing(b);
  double acc = 0.0;
  for (std::size_t k = 0; k < st.w.size(); ++k) {
    const std::ptrdiff_t shift = (st.lo + static_cast<std::ptrdiff_t>(k)) *
                                 static_cast<std::ptrdiff_t>(d.stride(a));
    acc += st.w[k] * at_node(d, in, comps, c, b, set, sb, static_cast<std::size_t>(node + shift));
  }
  return acc / d.spacing(a);
}

void apply_strided(const GridDomain& d, const double* in, int comps, int c, int axis, int stride,
                   int points, int boundary_points, double* out, int out_comps, int out_c) {
  if (stride < 1 || points < 3 || points % 2 == 0 || boundary_points < 3 || boundary_points > points)
    throw ParamError("apply_strided: bad stride or stencil size");
  const int P = d.points(axis);
  if ((points - 1) * stride + 1 > P)
    throw DomainTooSmall("apply_strided: axis too short for the strided stencil");
  const double step = stride * d.spacing(axis);
  // weight sets indexed by the node's position k inside the stencil
  auto build = [step](int size) {
    std::vector<std::vector<double>> w(size);
    for (int k = 0; k < size; ++k) {
      std::vector<double> offs(size);
      for (int j = 0; j < size; ++j) offs[j] = (j - k) * step;
      w[k] = weights(0.0, offs, 1);
    }
    return w;
  };
  const auto wide = build(points);
  const auto edge = build(boundary_points);
  const int half = points / 2;
  const std::ptrdiff_t sa = static_cast<std::ptrdiff_t>(d.stride(axis)) * stride;
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const int i = d.index(node, axis);
      const int room_lo = i / stride, room_hi = (P - 1 - i) / stride;
      const bool centered = room_lo >= half && room_hi >= half;
      const int size = centered ? points : boundary_points;
      int k = size / 2;
      k = std::min(k, room_lo);
      k = std::max(k, size - 1 - room_hi);
      const std::vector<double>& wk = centered ? wide[k] : edge[k];
      double acc = 0.0;
      for (int j = 0; j < size; ++j) {
        const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(node) + (j - k) * sa;
        acc += wk[j] * in[static_cast<std::size_t>(nb) * comps + c];
      }
      out[node * out_comps + out_c] = acc;
    }
  });
}

int slow_stride(const GridDomain& d, int axis, double k, double samples, int points) {
  const int fit = (d.points(axis) - 1) / (points - 1);
  if (!(k > 0.0)) return std::max(1, fit);
  const int want = static_cast<int>(std::floor(2.0 * std::numbers::pi / (samples * k * d.spacing(axis))));
  return std::max(1, std::min(want, fit));
}

}  // namespace fd

ScalarField derivative(const ScalarField& f, int axis, int order, int samples_per_period) {
  return component_derivative(f, 0, axis, order, samples_per_period);
}

MatrixField jacobian(const VectorField& u, int samples_per_period) {
  check_resolution(u.domain(), u.frequency(), samples_per_period);
  const int d = u.rows();
  const int n = u.domain().dim();
  MatrixField du(u.domain(), d, n);
  for (int r = 0; r < d; ++r)
    for (int a = 0; a < n; ++a)
      fd::apply(u.domain(), u.raw().data(), d, r, a, 1, du.raw().data(), d * n, r * n + a);
  du.set_frequency(u.frequency());
  return du;
}

SymField gram(const MatrixField& a) {
  const int rows = a.rows();
  const int n = a.cols();
  SymField g = make_sym(a.domain(), n);
  parallel_for(a.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const auto m = a.at(node);
      auto out = g.at(node);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double acc = 0.0;
          for (int r = 0; r < rows; ++r) acc += m[r * n + i] * m[r * n + j];
          out[linalg::sym_index(n, i, j)] = acc;
        }
    }
  });
  g.set_frequency(a.frequency());
  return g;
}

SymField induced_metric(const VectorField& u, int samples_per_period) {
  return gram(jacobian(u, samples_per_period));
}

namespace detail {

int mollifier_halfwidth(double ell, double spacing) {
  return static_cast<int>(std::ceil(ell / spacing - 1e-9));
}

std::vector<double> mollifier_weights(double ell, double spacing) {
  if (ell < 2.0 * spacing * (1.0 - 1e-12))
    throw ResolutionError("mollification length " + std::to_string(ell) +
                          " is below two grid spacings");
  const int m = mollifier_halfwidth(ell, spacing);
  std::vector<double> w(2 * m + 1);
  double sum = 0.0;
  for (int t = -m; t <= m; ++t) {
    const double r = t * spacing / ell;
    const double v = std::abs(r) < 1.0 ? std::pow(1.0 - r * r, 4) : 0.0;
    w[t + m] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

GridDomain mollify_raw(const GridDomain& domain, int comps, const std::vector<double>& in,
                       double ell, std::vector<double>& out) {
  const int n = domain.dim();
  std::vector<int> half(n);
  std::vector<std::vector<double>> kernels(n);
  for (int a = 0; a < n; ++a) {
    kernels[a] = mollifier_weights(ell, domain.spacing(a));
    half[a] = mollifier_halfwidth(ell, domain.spacing(a));
  }
  GridDomain result = domain.shrink(half);

  std::vector<int> dims(n);
  for (int a = 0; a < n; ++a) dims[a] = domain.points(a);
  std::vector<double> cur = in;
  for (int a = 0; a < n; ++a) {
    const int m = half[a];
    std::size_t outer = 1, inner = static_cast<std::size_t>(comps);
    for (int k = 0; k < a; ++k) outer *= dims[k];
    for (int k = a + 1; k < n; ++k) inner *= dims[k];
    const int pin = dims[a];
    const int pout = pin - 2 * m;
    std::vector<double> next(outer * pout * inner);
    const auto& w = kernels[a];
    parallel_for(outer * pout, [&](std::size_t b, std::size_t e) {
      for (std::size_t row = b; row < e; ++row) {
        const std::size_t o = row / pout;
        const std::size_t i = row % pout;
        double* dst = next.data() + row * inner;
        std::fill(dst, dst + inner, 0.0);
        for (int t = 0; t <= 2 * m; ++t) {
          const double wt = w[t];
          if (wt == 0.0) continue;
          const double* src = cur.data() + (o * pin + i + t) * inner;
          for (std::size_t k = 0; k < inner; ++k) dst[k] += wt * src[k];
        }
      }
    });
    cur.swap(next);
    dims[a] = pout;
  }
  out.swap(cur);
  return result;
}

void restrict_raw(const GridDomain& domain, int comps, const std::vector<double>& in,
                  const GridDomain& sub, std::vector<double>& out) {
  const std::vector<int> off = domain.offsets_of(sub);
  const int n = domain.dim();
  out.resize(sub.node_count() * comps);
  parallel_for(sub.node_count(), [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      std::size_t parent = 0;
      for (int a = 0; a < n; ++a) parent += (sub.index(node, a) + off[a]) * domain.stride(a);
      std::copy_n(in.data() + parent * comps, comps, out.data() + node * comps);
    }
  });
}

double holder_raw(const GridDomain& d, int comps, const std::vector<double>& data, double alpha) {
  double best = 0.0;
  for (int a = 0; a < d.dim(); ++a) {
    std::vector<int> seps;
    std::vector<double> denom;
    for (int s = 1; s < d.points(a); s *= 2) {
      seps.push_back(s);
      denom.push_back(std::pow(s * d.spacing(a), alpha));
    }
    const std::size_t stride = d.stride(a);
    const double m = parallel_max(d.node_count(), [&](std::size_t node) {
      const int i = d.index(node, a);
      double local = 0.0;
      for (std::size_t k = 0; k < seps.size(); ++k) {
        if (i + seps[k] >= d.points(a)) break;
        const double* p = data.data() + node * comps;
        const double* q = data.data() + (node + seps[k] * stride) * comps;
        for (int c = 0; c < comps; ++c) local = std::max(local, std::abs(q[c] - p[c]) / denom[k]);
      }
      return local;
    });
    best = std::max(best, m);
  }
  return best;
}

}  // namespace detail

template <class Kind>
double sup_norm(const Field<Kind>& f) {
  const auto& v = f.raw();
  return std::max(0.0, parallel_max(v.size(), [&](std::size_t i) { return std::abs(v[i]); }));
}

template <class Kind>
double sup_distance(const Field<Kind>& a, const Field<Kind>& b) {
  if (a.raw().size() != b.raw().size() || a.components() != b.components())
    throw DimensionError("sup_distance: field shapes differ");
  const auto& x = a.raw();
  const auto& y = b.raw();
  return std::max(0.0, parallel_max(x.size(), [&](std::size_t i) { return std::abs(x[i] - y[i]); }));
}

template <class Kind>
double max_second_derivative(const Field<Kind>& f) {
  const GridDomain& d = f.domain();
  const int comps = f.components();
  const double* in = f.raw().data();
  double m = 0.0;
  for (int c = 0; c < comps; ++c)
    for (int a = 0; a < d.dim(); ++a)
      for (int b = a; b < d.dim(); ++b)
        m = std::max(m, parallel_max(d.node_count(), [&](std::size_t node) {
                       return std::abs(fd::mixed_at(d, in, comps, c, a, b, node));
                     }));
  return m;
}

template <class Kind>
NormReport norm_report(const Field<Kind>& f, int max_k, std::span<const double> alphas) {
  if (max_k < 0 || max_k > 2) throw ParamError("norm_report supports k <= 2");
  NormReport r;
  r.sup_norm = sup_norm(f);
  double acc = r.sup_norm;
  if (max_k >= 1) r.ck_norms.push_back(acc += max_first_derivative(f));
  if (max_k >= 2) r.ck_norms.push_back(acc += max_second_derivative(f));
  for (double alpha : alphas) {
    r.alphas.push_back(alpha);
    r.holder.push_back(holder_seminorm(f, alpha));
  }
  return r;
}

#define CORRUGATE_INSTANTIATE(K)                                                      \
  template double sup_norm<K>(const Field<K>&);                                       \
  template double sup_distance<K>(const Field<K>&, const Field<K>&);                  \
  template double max_second_derivative<K>(const Field<K>&);                          \
  template NormReport norm_report<K>(const Field<K>&, int, std::span<const double>);

CORRUGATE_INSTANTIATE(ScalarKind)
CORRUGATE_INSTANTIATE(VectorKind)
CORRUGATE_INSTANTIATE(MatrixKind)
CORRUGATE_INSTANTIATE(SymKind)
#undef CORRUGATE_INSTANTIATE

ScalarField sample_scalar(const GridDomain& d,
                          const std::function<double(std::span<const double>)>& fn) {
  ScalarField f = make_scalar(d);
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    std::array<double, linalg::kMaxDim> x{};
    const std::span<double> xs(x.data(), d.dim());
    for (std::size_t node = b; node < e; ++node) {
      d.coordinates(node, xs);
      f(node) = fn(xs);
    }
  });
  return f;
}

VectorField sample_vector(const GridDomain& d, int dim,
                          const std::function<void(std::span<const double>, std::span<double>)>& fn) {
  VectorField f = make_vector(d, dim);
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    std::array<double, linalg::kMaxDim> x{};
    const std::span<double> xs(x.data(), d.dim());
    for (std::size_t node = b; node < e; ++node) {
      d.coordinates(node, xs);
      fn(xs, f.at(node));
    }
  });
  return f;
}

SymField sample_sym(const GridDomain& d, int n,
                    const std::function<SymMatrix(std::span<const double>)>& fn) {
  SymField f = make_sym(d, n);
  parallel_for(d.node_count(), [&](std::size_t b, std::size_t e) {
    std::array<double, linalg::kMaxDim> x{};
    const std::span<double> xs(x.data(), d.dim());
    for (std::size_t node = b; node < e; ++node) {
      d.coordinates(node, xs);
      set_sym(f, node, fn(xs));
    }
  });
  return f;
}

SymMatrix sym_at(const SymField& f, std::size_t node) {
  SymMatrix m(f.rows());
  const auto src = f.at(node);
  std::copy(src.begin(), src.end(), m.flat().begin());
  return m;
}

void set_sym(SymField& f, std::size_t node, const SymMatrix& m) {
  const auto src = m.flat();
  std::copy(src.begin(), src.end(), f.at(node).begin());
}

double min_eigenvalue(const SymField& f) {
  const int n = f.rows();
  return -parallel_max(f.node_count(), [&](std::size_t node) {
    std::array<double, linalg::kMaxDim * linalg::kMaxDim> full{};
    std::array<double, linalg::kMaxDim> ev{};
    linalg::sym_to_full(f.at(node), n, full);
    linalg::sym_eigenvalues(full, n, ev);
    return -ev[0];
  });
}

}  // namespace corrugate
