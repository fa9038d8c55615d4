#pragma once

#include <cstdint>

namespace corrugate {

/// Exact fraction in lowest terms with a positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(const Rational& a, const Rational& b);
};

/// β = J / (J(1 + 2(n_star - n)) + 4n), exactly.
Rational beta_exponent(int n, int J);

/// 1 / (1 + n² - n), the exponent ceiling β must stay below.
Rational exponent_ceiling(int n);

/// Multi-stage parameter schedule:
///   δ_q = δ0 a^{1 - b^q},  λ_q = λ0 a^{(b^q - 1)/(2β)},  Λ_q = K (δ_q/δ_{q+1})^{1/J}.
struct Schedule {
  int n = 2;
  double delta0 = 0.1;
  double lambda0 = 1.0;
  double growth_base = 4.0;  // a
  double b_exponent = 1.1;   // b
  double tau = 0.5;          // τ
  int J = 3;
  double K_factor = 1.25;    // K
  int stages = 3;            // Q
  double alpha_target = 0.0; // optional; checked against β when positive

  /// Throws ParamError unless 1 < b < 1 + τ/2, τ ∈ (0,1), a > 1, δ0 ∈ (0,1],
  /// λ0 > 0, K > 0, J >= 1, Q >= 0 and α_target < β < 1/(1 + n² - n).
  void validate() const;
  Rational beta() const { return beta_exponent(n, J); }
  double delta(int q) const;
  double lambda(int q) const;
  double Lambda(int q) const;
};

}  // namespace corrugate
