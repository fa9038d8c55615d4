#include "corrugate/corrugation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "corrugate/errors.hpp"

namespace corrugate {

CorrugationProfile::CorrugationProfile(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
  const std::size_t k = std::max(cos_.size(), sin_.size());
  cos_.resize(std::max<std::size_t>(k, 1), 0.0);
  sin_.resize(std::max<std::size_t>(k, 1), 0.0);
  sin_[0] = 0.0;
  trim();
}

CorrugationProfile CorrugationProfile::constant(double c) { return {{c}, {0.0}}; }

void CorrugationProfile::trim() {
  while (cos_.size() > 1 && cos_.back() == 0.0 && sin_.back() == 0.0) {
    cos_.pop_back();
    sin_.pop_back();
  }
}

double CorrugationProfile::value(double t) const {
  const double c1 = std::cos(t), s1 = std::sin(t);
  double ck = 1.0, sk = 0.0;
  double acc = cos_[0];
  for (std::size_t k = 1; k < cos_.size(); ++k) {
    const double cn = ck * c1 - sk * s1;
    const double sn = sk * c1 + ck * s1;
    ck = cn;
    sk = sn;
    acc += cos_[k] * ck + sin_[k] * sk;
  }
  return acc;
}

double CorrugationProfile::slope(double t) const {
  const double c1 = std::cos(t), s1 = std::sin(t);
  double ck = 1.0, sk = 0.0;
  double acc = 0.0;
  for (std::size_t k = 1; k < cos_.size(); ++k) {
    const double cn = ck * c1 - sk * s1;
    const double sn = sk * c1 + ck * s1;
    ck = cn;
    sk = sn;
    acc += static_cast<double>(k) * (sin_[k] * ck - cos_[k] * sk);
  }
  return acc;
}

int CorrugationProfile::max_harmonic() const { return static_cast<int>(cos_.size()) - 1; }

double CorrugationProfile::coefficient_bound() const {
  double s = 0.0;
  for (std::size_t k = 0; k < cos_.size(); ++k) s += std::abs(cos_[k]) + std::abs(sin_[k]);
  return s;
}

CorrugationProfile CorrugationProfile::derivative() const {
  std::vector<double> c(cos_.size(), 0.0), s(sin_.size(), 0.0);
  for (std::size_t k = 1; k < cos_.size(); ++k) {
    c[k] = static_cast<double>(k) * sin_[k];
    s[k] = -static_cast<double>(k) * cos_[k];
  }
  return {c, s};
}

CorrugationProfile CorrugationProfile::antiderivative() const {
  if (std::abs(mean()) > 1e-12)
    throw MeanError("antiderivative of a profile with mean " + std::to_string(mean()) +
                    " is not periodic");
  std::vector<double> c(cos_.size(), 0.0), s(sin_.size(), 0.0);
  for (std::size_t k = 1; k < cos_.size(); ++k) {
    c[k] = -sin_[k] / static_cast<double>(k);
    s[k] = cos_[k] / static_cast<double>(k);
  }
  return {c, s};
}

CorrugationProfile CorrugationProfile::operator*(const CorrugationProfile& o) const {
  const int kmax = max_harmonic() + o.max_harmonic();
  std::vector<double> c(kmax + 1, 0.0), s(kmax + 1, 0.0);
  for (int j = 0; j <= max_harmonic(); ++j) {
    for (int k = 0; k <= o.max_harmonic(); ++k) {
      const int sum = j + k;
      const int diff = std::abs(j - k);
      const double sign = j >= k ? 1.0 : -1.0;  // sin((j-k)t) = sign * sin(|j-k| t)
      // cos(jt)cos(kt)
      const double cc = cos_[j] * o.cos_[k];
      c[sum] += 0.5 * cc;
      c[diff] += 0.5 * cc;
      // sin(jt)sin(kt)
      const double ss = sin_[j] * o.sin_[k];
      c[diff] += 0.5 * ss;
      c[sum] -= 0.5 * ss;
      // sin(jt)cos(kt) = [sin((j+k)t) + sin((j-k)t)]/2
      const double sc = sin_[j] * o.cos_[k];
      s[sum] += 0.5 * sc;
      s[diff] += 0.5 * sign * sc;
      // cos(jt)sin(kt) = [sin((j+k)t) - sin((j-k)t)]/2
      const double cs = cos_[j] * o.sin_[k];
      s[sum] += 0.5 * cs;
      s[diff] -= 0.5 * sign * cs;
    }
  }
  s[0] = 0.0;
  return {c, s};
}

CorrugationProfile CorrugationProfile::operator+(const CorrugationProfile& o) const {
  const std::size_t k = std::max(cos_.size(), o.cos_.size());
  std::vector<double> c(k, 0.0), s(k, 0.0);
  for (std::size_t i = 0; i < cos_.size(); ++i) {
    c[i] += cos_[i];
    s[i] += sin_[i];
  }
  for (std::size_t i = 0; i < o.cos_.size(); ++i) {
    c[i] += o.cos_[i];
    s[i] += o.sin_[i];
  }
  return {c, s};
}

CorrugationProfile CorrugationProfile::scaled(double f) const {
  std::vector<double> c(cos_), s(sin_);
  for (double& x : c) x *= f;
  for (double& x : s) x *= f;
  return {c, s};
}

CorrugationProfile gamma(int k) {
  switch (k) {
    case 1: return {{0.0, 0.0, 0.0}, {0.0, 0.0, -0.25}};
    case 2: return {{0.0, 0.0}, {0.0, std::numbers::sqrt2}};
    case 3: return {{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
    case 4: return {{0.0, 0.0, -1.0}, {0.0, 0.0, 0.0}};
    default: throw IndexError("corrugation profile index must be 1..4, got " + std::to_string(k));
  }
}

double gamma2_square_mean() { return 1.0; }

std::vector<CorrugationProfile> antiderivative_chain(const CorrugationProfile& p, int depth) {
  std::vector<CorrugationProfile> chain{p};
  for (int i = 0; i < depth; ++i) chain.push_back(chain.back().antiderivative());
  return chain;
}

}  // namespace corrugate
