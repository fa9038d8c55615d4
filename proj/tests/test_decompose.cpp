#include <doctest.h>

#include <cmath>
#include <numbers>

#include "corrugate/decompose.hpp"
#include "corrugate/errors.hpp"
#include "test_util.hpp"

using namespace corrugate;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SymField sinusoidal_H(const GridDomain& d, const PrimitiveBasis& b, double eps) {
  return sample_sym(d, 2, [&b, eps](std::span<const double> x) {
    SymMatrix m = b.h0();
    m(0, 0) += eps * std::sin(kTwoPi * x[0]);
    return m;
  });
}

// Σ a_i² ν_i⊗ν_i + gradient term + E, rebuilt node by node.
double identity_defect(const SymField& H, const KaellenResult& r, std::span<const double> lambdas,
                       const PrimitiveBasis& b) {
  const SymField G = gradient_term(r.amplitudes, lambdas, b.n());
  double worst = 0.0;
  std::vector<double> c(b.n_star());
  for (std::size_t node = 0; node < H.node_count(); ++node) {
    for (int j = 0; j < b.n_star(); ++j) c[j] = r.amplitudes[j](node) * r.amplitudes[j](node);
    const SymMatrix rebuilt = b.reconstruct(c) + sym_at(G, node) + sym_at(r.residual, node);
    worst = std::max(worst, (rebuilt - sym_at(H, node)).max_abs());
  }
  return worst;
}

}  // namespace

TEST_CASE("constant h0 decomposes trivially") {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 33);
  const SymField H = sample_sym(d, 2, [&b](auto) { return b.h0(); });
  const std::vector<double> lambdas{10.0, 20.0};
  const KaellenResult r = kaellen_decompose(H, lambdas, 3, b);
  CHECK(r.iterations_used == 3);
  REQUIRE(r.amplitudes.size() == 3);
  for (const auto& a : r.amplitudes)
    for (double v : a.raw()) CHECK(std::abs(v - 1.0) <= 1e-12);
  CHECK(sup_norm(r.residual) <= 1e-12);
}

TEST_CASE("nearness guard") {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 17);
  const SymField H = sample_sym(d, 2, [&b](auto) { return 2.0 * b.h0(); });
  const std::vector<double> lambdas{10.0, 20.0};
  CHECK_THROWS_AS(kaellen_decompose(H, lambdas, 1, b), NearH0Violation);
}

TEST_CASE("positivity guard") {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 17);
  // L_2 of h0 - 0.999 ν_2⊗ν_2 is 0.001 - tiny, below the default floor once lowered further.
  const SymField H = sample_sym(d, 2, [&b](auto) { return b.h0() - 0.9995 * SymMatrix::outer(b.direction(1)); });
  const std::vector<double> lambdas{10.0, 20.0};
  KaellenOptions o;
  o.nearness = 1.0;
  CHECK_THROWS_AS(kaellen_decompose(H, lambdas, 1, b, o), NegativeCoefficient);
}

TEST_CASE("sinusoidal H: identity, decay and amplitude floor") {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 257);
  const SymField H = sinusoidal_H(d, b, 0.05);
  const std::vector<double> lambdas{40.0, 80.0};
  const KaellenResult r = kaellen_decompose(H, lambdas, 3, b);
  REQUIRE(r.residual_history.size() == 4);
  CHECK(identity_defect(H, r, lambdas, b) <= 1e-13);

  const double bound = 4.0 * std::pow(r.lambda0_hat / lambdas[0], 2);
  MESSAGE("lambda0_hat = " << r.lambda0_hat << ", per-sweep bound = " << bound);
  for (std::size_t j = 1; j < r.residual_history.size(); ++j) {
    const double ratio = r.residual_history[j] / r.residual_history[j - 1];
    MESSAGE("sweep " << j << ": |E| = " << r.residual_history[j] << ", ratio " << ratio);
    CHECK(ratio <= bound);
  }
  for (std::size_t j = 2; j < r.residual_history.size(); ++j)
    CHECK(r.residual_history[j] <= r.residual_history[j - 1]);

  // Least-squares slope of log|E^j| against j over the sweeps above round-off.
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < r.residual_history.size(); ++j)
    if (r.residual_history[j] > 1e-14) {
      xs.push_back(static_cast<double>(j));
      ys.push_back(std::log(r.residual_history[j]));
    }
  if (xs.size() >= 2) CHECK(testutil::fit_slope(xs, ys) <= std::log(bound));

  // Amplitude floor: L_j(H) >= 1 - 0.05 * max|L_j(e1e1)| on this family.
  double radius = 1e300;
  for (std::size_t node = 0; node < H.node_count(); ++node)
    for (double c : b.decompose(sym_at(H, node))) radius = std::min(radius, c);
  CHECK(r.min_amplitude >= 0.5 * std::sqrt(radius));
}

TEST_CASE("residual follows the (lambda0/lambda1)^2 law") {
  const PrimitiveBasis b(2);
  const GridDomain d = GridDomain::unit(2, 129);
  const SymField H = sinusoidal_H(d, b, 0.05);
  // Doubling the frequencies divides E^0 by about 4.
  const std::vector<double> l1{20.0, 40.0}, l2{40.0, 80.0};
  const double e1 = kaellen_decompose(H, l1, 0, b).residual_history[0];
  const double e2 = kaellen_decompose(H, l2, 0, b).residual_history[0];
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}
