#include "corrugate/schedule.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "corrugate/errors.hpp"

namespace corrugate {

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ParamError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

Rational beta_exponent(int n, int J) {
  if (n < 2 || J < 1) throw ParamError("beta: need n >= 2 and J >= 1");
  const std::int64_t n_star = static_cast<std::int64_t>(n) * (n + 1) / 2;
  return Rational::make(J, J * (1 + 2 * (n_star - n)) + 4 * static_cast<std::int64_t>(n));
}

Rational exponent_ceiling(int n) {
  const std::int64_t nn = n;
  return Rational::make(1, 1 + nn * nn - nn);
}

void Schedule::validate() const {
  auto fail = [](const std::string& m) { throw ParamError("schedule: " + m); };
  if (!(tau > 0.0 && tau < 1.0)) fail("tau must lie in (0, 1)");
  if (!(b_exponent > 1.0 && b_exponent < 1.0 + tau / 2.0)) {
    std::ostringstream os;
    os << "b = " << b_exponent << " violates 1 < b < 1 + tau/2 = " << 1.0 + tau / 2.0;
    fail(os.str());
  }
  if (!(growth_base > 1.0)) fail("growth base a must exceed 1");
  if (!(delta0 > 0.0 && delta0 <= 1.0)) fail("delta0 must lie in (0, 1]");
  if (!(lambda0 > 0.0)) fail("lambda0 must be positive");
  if (!(K_factor > 0.0)) fail("K must be positive");
  if (J < 1) fail("J must be >= 1");
  if (stages < 0) fail("stages must be >= 0");
  const Rational b = beta();
  if (!(b < exponent_ceiling(n))) fail("beta is not below 1/(1 + n^2 - n)");
  if (alpha_target > 0.0 && !(alpha_target < b.value())) fail("alpha_target must be below beta");
}

double Schedule::delta(int q) const {
  const long double a = growth_base, b = b_exponent;
  return static_cast<double>(static_cast<long double>(delta0) * std::pow(a, 1.0L - std::pow(b, q)));
}

double Schedule::lambda(int q) const {
  const Rational be = beta();
  const long double a = growth_base, b = b_exponent;
  const long double expo = (std::pow(b, q) - 1.0L) * static_cast<long double>(be.den) /
                           (2.0L * static_cast<long double>(be.num));
  return static_cast<double>(static_cast<long double>(lambda0) * std::pow(a, expo));
}

double Schedule::Lambda(int q) const {
  const long double a = growth_base, b = b_exponent;
  // δ_q/δ_{q+1} = a^{b^{q+1} - b^q}
  const long double ratio = std::pow(a, std::pow(b, q + 1) - std::pow(b, q));
  return static_cast<double>(static_cast<long double>(K_factor) * std::pow(ratio, 1.0L / J));
}

}  // namespace corrugate
