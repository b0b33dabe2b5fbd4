#include "hsp/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hsp/error.hpp"

namespace hsp {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2,
// for |mu| <= 1/2.
struct TemmeGammas {
  double gam1;
  double gam2;
  double gampl;  // 1/G(1+mu)
  double gammi;  // 1/G(1-mu)
};

TemmeGammas temme_gammas(double mu) {
  TemmeGammas g{};
  g.gampl = 1.0 / std::tgamma(1.0 + mu);
  g.gammi = 1.0 / std::tgamma(1.0 - mu);
  g.gam2 = 0.5 * (g.gammi + g.gampl);
  if (std::abs(mu) > 1e-3) {
    g.gam1 = (g.gammi - g.gampl) / (2.0 * mu);
  } else {
    // Odd part of the Taylor series of 1/G(1+x).
    const double m2 = mu * mu;
    g.gam1 = -std::numbers::egamma_v<double> + 0.0420026350340952 * m2 +
             0.0421977345555443 * m2 * m2;
  }
  return g;
}

}  // namespace

double log_bessel_k(double nu, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_bessel_k: x must be positive");
  if (!std::isfinite(nu)) throw DomainError("log_bessel_k: order must be finite");
  nu = std::abs(nu);  // K_{-nu} = K_nu

  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;  // |mu| <= 1/2
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;

  // K_mu and K_{mu+1}, either plain (x < 2) or scaled by exp(x) (x >= 2).
  double kmu = 0.0;
  double k1 = 0.0;
  double log_scale = 0.0;

  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
      c *= d / i;
      p /= i - mu;
      q /= i + mu;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i > kMaxIter) throw NumericalError("log_bessel_k: series did not converge", x);
    kmu = sum;
    k1 = sum1 * xi2;
  } else {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i <= kMaxIter; ++i) {
      a -= 2.0 * (i - 1);
      c = -a * c / i;
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    if (i > kMaxIter) throw NumericalError("log_bessel_k: continued fraction did not converge", x);
    h = a1 * h;
    kmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    k1 = kmu * (mu + x + 0.5 - h) * xi;
    log_scale = -x;
  }

  // Forward recurrence K_{m+1} = (2m/x) K_m + K_{m-1}, rescaling to stay finite.
  for (int i = 1; i <= nl; ++i) {
    const double next = (mu + i) * xi2 * k1 + kmu;
    kmu = k1;
    k1 = next;
    if (k1 > 1e250) {
      kmu *= 1e-250;
      k1 *= 1e-250;
      log_scale += 250.0 * std::numbers::ln10;
    }
  }
  return std::log(kmu) + log_scale;
}

double bessel_k(double nu, double x) { return std::exp(log_bessel_k(nu, x)); }

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double log_normal_density(double x, double var) {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  return -kHalfLog2Pi - 0.5 * std::log(var) - 0.5 * x * x / var;
}

}  // namespace hsp
