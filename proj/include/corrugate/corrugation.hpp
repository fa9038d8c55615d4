#pragma once

#include <span>
#include <vector>

namespace corrugate {

/// A 2π-periodic trigonometric polynomial
///   p(t) = c_0 + Σ_{k>=1} c_k cos(kt) + s_k sin(kt),
/// closed under differentiation, zero-mean antiderivatives and products.
class CorrugationProfile {
 public:
  CorrugationProfile() = default;
  /// cos_coeffs[k] multiplies cos(kt) (k = 0 is the constant term);
  /// sin_coeffs[k] multiplies sin(kt) (entry 0 is ignored).
  CorrugationProfile(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

  static CorrugationProfile constant(double c);

  double operator()(double t) const { return value(t); }
  double value(double t) const;
  /// p'(t).
  double slope(double t) const;
  double mean() const { return cos_.empty() ? 0.0 : cos_[0]; }
  /// Highest harmonic with a nonzero coefficient.
  int max_harmonic() const;
  /// Σ |coefficients|, an upper bound for the sup norm.
  double coefficient_bound() const;

  std::span<const double> cos_coeffs() const { return cos_; }
  std::span<const double> sin_coeffs() const { return sin_; }

  CorrugationProfile derivative() const;
  /// The unique zero-mean periodic antiderivative. Throws MeanError if
  /// |mean| > 1e-12.
  CorrugationProfile antiderivative() const;
  CorrugationProfile operator*(const CorrugationProfile& o) const;
  CorrugationProfile operator+(const CorrugationProfile& o) const;
  CorrugationProfile scaled(double s) const;

 private:
  void trim();
  std::vector<double> cos_;
  std::vector<double> sin_;
};

/// The corrugation profiles, k = 1..4:
///   γ1 = -sin(2t)/4, γ2 = √2 sin t, γ3 = γ2 γ2' = sin 2t,
///   γ4 = γ2² - mean(γ2²) = -cos 2t.
/// Throws IndexError for other k.
CorrugationProfile gamma(int k);

/// mean(γ2²) = 1: the constant paired with the ∇a⊗∇a slow term.
double gamma2_square_mean();

/// p, p^(1), p^(2), ...: entry i is the i-fold zero-mean antiderivative.
std::vector<CorrugationProfile> antiderivative_chain(const CorrugationProfile& p, int depth);

}  // namespace corrugate
