#include <doctest.h>

#include <cmath>
#include <numbers>

#include "corrugate/corrugation.hpp"
#include "corrugate/errors.hpp"
#include "test_util.hpp"

using namespace corrugate;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Trapezoid mean over one period; spectrally exact for trig polynomials of
// degree below the sample count.
double quadrature_mean(const CorrugationProfile& p, int samples = 4096) {
  double s = 0.0;
  for (int k = 0; k < samples; ++k) s += p(kTwoPi * k / samples);
  return s / samples;
}

double max_diff(const CorrugationProfile& p, double (*f)(double)) {
  double m = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double t = kTwoPi * k / 1000.0 - 1.0;
    m = std::max(m, std::abs(p(t) - f(t)));
  }
  return m;
}

}  // namespace

TEST_CASE("closed forms of the four profiles") {
  CHECK(max_diff(gamma(1), [](double t) { return -std::sin(2 * t) / 4; }) <= 1e-15);
  CHECK(max_diff(gamma(2), [](double t) { return std::sqrt(2.0) * std::sin(t); }) <= 1e-15);
  CHECK(max_diff(gamma(3), [](double t) { return std::sin(2 * t); }) <= 1e-15);
  CHECK(max_diff(gamma(4), [](double t) { return -std::cos(2 * t); }) <= 1e-15);
  CHECK(gamma(1)(std::numbers::pi / 4) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(gamma(4)(0.0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(gamma(0), IndexError);
  CHECK_THROWS_AS(gamma(5), IndexError);
}

TEST_CASE("mean of gamma2 squared by quadrature") {
  const double q = quadrature_mean(gamma(2) * gamma(2));
  CHECK(q == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma2_square_mean() == doctest::Approx(q).epsilon(1e-14));
}

TEST_CASE("gamma3 and gamma4 are built from gamma2") {
  const CorrugationProfile g2 = gamma(2);
  const CorrugationProfile g3 = g2 * g2.derivative();
  const CorrugationProfile g4 = g2 * g2 + CorrugationProfile::constant(-gamma2_square_mean());
  for (int k = 0; k < 200; ++k) {
    const double t = 0.0314 * k;
    CHECK(std::abs(g3(t) - gamma(3)(t)) <= 1e-14);
    CHECK(std::abs(g4(t) - gamma(4)(t)) <= 1e-14);
  }
}

TEST_CASE("corrugation identity 2 g1' + g2'^2 = 1 at random points") {
  const auto d1 = gamma(1).derivative(), d2 = gamma(2).derivative();
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = testutil::uniform(-50.0, 50.0);
    worst = std::max(worst, std::abs(2.0 * d1(t) + d2(t) * d2(t) - 1.0));
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("zero-mean antiderivatives") {
  CHECK(max_diff(gamma(1).antiderivative(), [](double t) { return std::cos(2 * t) / 8; }) <= 1e-15);
  CHECK(max_diff(gamma(2).antiderivative(), [](double t) { return -std::sqrt(2.0) * std::cos(t); }) <= 1e-15);
  CHECK(max_diff(gamma(4).antiderivative(), [](double t) { return -std::sin(2 * t) / 2; }) <= 1e-15);
  CHECK_THROWS_AS(CorrugationProfile::constant(0.5).antiderivative(), MeanError);
  CHECK_THROWS_AS((gamma(2) * gamma(2)).antiderivative(), MeanError);
}

TEST_CASE("profiles are 2π periodic and slope matches finite differences") {
  for (int k = 1; k <= 4; ++k) {
    const CorrugationProfile p = gamma(k);
    for (int s = 0; s < 50; ++s) {
      const double t = 0.37 * s;
      CHECK(std::abs(p(t + kTwoPi) - p(t)) <= 1e-14);
      const double h = 1e-5;
      const double fd = (p(t - 2 * h) - 8 * p(t - h) + 8 * p(t + h) - p(t + 2 * h)) / (12 * h);
      CHECK(std::abs(fd - p.slope(t)) <= 1e-8);
      CHECK(std::abs(p.slope(t) - p.derivative()(t)) <= 1e-14);
    }
  }
}

TEST_CASE("property: antiderivative chains of depth 12") {
  // Includes a profile with several harmonics.
  const CorrugationProfile mixed({0.0, 0.3, -1.2, 0.0, 0.05}, {0.0, 1.0, 0.0, 0.7});
  for (const CorrugationProfile& base : {gamma(1), gamma(2), gamma(3), gamma(4), mixed}) {
    const auto chain = antiderivative_chain(base, 12);
    REQUIRE(chain.size() == 13);
    const double sup0 = base.coefficient_bound();
    for (std::size_t i = 0; i < chain.size(); ++i) {
      CHECK(std::abs(quadrature_mean(chain[i])) <= 1e-13);
      CHECK(chain[i].coefficient_bound() <= sup0 + 1e-15);
      if (i == 0) continue;
      double worst = 0.0;
      for (int k = 0; k < 1000; ++k) {
        const double t = kTwoPi * k / 1000.0;
        worst = std::max(worst, std::abs(chain[i].slope(t) - chain[i - 1](t)));
        worst = std::max(worst, std::abs(chain[i](t + kTwoPi) - chain[i](t)));
      }
      CHECK(worst <= 1e-9);
    }
  }
}

TEST_CASE("trig polynomial arithmetic") {
  const CorrugationProfile a({1.0, 2.0}, {0.0, -1.0});
  const CorrugationProfile b({0.0, 0.0, 3.0}, {0.0, 0.5, 0.25});
  for (int k = 0; k < 100; ++k) {
    const double t = 0.1 * k;
    CHECK((a * b)(t) == doctest::Approx(a(t) * b(t)).epsilon(1e-13));
    CHECK((a + b)(t) == doctest::Approx(a(t) + b(t)).epsilon(1e-13));
    CHECK(a.scaled(-3.0)(t) == doctest::Approx(-3.0 * a(t)).epsilon(1e-13));
  }
  CHECK((a * b).max_harmonic() == 3);
  CHECK(a.mean() == 1.0);
}
