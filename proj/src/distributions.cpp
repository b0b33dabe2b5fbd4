#include "hsp/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hsp/error.hpp"
#include "hsp/special.hpp"

namespace hsp {
namespace {

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void GammaParams::validate() const {
  if (!positive_finite(shape) || !positive_finite(rate))
    throw DomainError("gamma parameters must be positive and finite");
}

void GammaGammaParams::validate() const {
  if (!positive_finite(shape) || !positive_finite(tail) || !positive_finite(scale))
    throw DomainError("gamma-gamma parameters must be positive and finite");
}

double GammaGammaParams::mean() const {
  if (tail <= 1.0) throw DomainError("gamma-gamma mean requires tail > 1");
  return shape * scale / (tail - 1.0);
}

double gamma_logdensity(double x, const GammaParams& p) {
  p.validate();
  if (!positive_finite(x)) throw DomainError("gamma_logdensity: x must be positive");
  return p.shape * std::log(p.rate) - std::lgamma(p.shape) + (p.shape - 1.0) * std::log(x) -
         p.rate * x;
}

double gg_logdensity(double psi, const GammaGammaParams& p) {
  p.validate();
  if (!positive_finite(psi)) throw DomainError("gg_logdensity: psi must be positive");
  const double lam = p.shape;
  const double c = p.tail;
  return -lam * std::log(p.scale) + std::lgamma(lam + c) - std::lgamma(lam) - std::lgamma(c) +
         (lam - 1.0) * std::log(psi) - (lam + c) * std::log1p(psi / p.scale);
}

double gg_log_sample(const GammaGammaParams& p, Rng& rng) {
  // B/(1-B) with B ~ Beta(shape, tail) is G1/G2 for independent unit-rate gammas.
  return std::log(p.scale) + rng.log_gamma(p.shape) - rng.log_gamma(p.tail);
}

double gg_sample(const GammaGammaParams& p, Rng& rng) { return std::exp(gg_log_sample(p, rng)); }

double product_two_gammas_logdensity(double psi, double lambda1, double lambda2) {
  if (!positive_finite(psi)) throw DomainError("product_two_gammas_logdensity: psi must be positive");
  if (!positive_finite(lambda1) || !positive_finite(lambda2))
    throw DomainError("product_two_gammas_logdensity: shapes must be positive");
  return std::log(2.0) - std::lgamma(lambda1) - std::lgamma(lambda2) +
         (0.5 * (lambda1 + lambda2) - 1.0) * std::log(psi) +
         log_bessel_k(std::abs(lambda1 - lambda2), 2.0 * std::sqrt(psi));
}

void validate(const MixingLaw& law) {
  std::visit(Overloaded{[](const GammaParams& p) { p.validate(); },
                        [](const GammaGammaParams& p) { p.validate(); },
                        [](const PointMass& p) {
                          if (!positive_finite(p.value))
                            throw DomainError("point mass must sit at a positive value");
                        }},
             law);
}

double mixing_logdensity(const MixingLaw& law, double x) {
  return std::visit(Overloaded{[x](const GammaParams& p) { return gamma_logdensity(x, p); },
                               [x](const GammaGammaParams& p) { return gg_logdensity(x, p); },
                               [x](const PointMass& p) {
                                 return x == p.value ? 0.0
                                                     : -std::numeric_limits<double>::infinity();
                               }},
                    law);
}

double mixing_sample(const MixingLaw& law, Rng& rng) {
  return std::visit(
      Overloaded{[&rng](const GammaParams& p) { return rng.gamma(p.shape, p.rate); },
                 [&rng](const GammaGammaParams& p) { return gg_sample(p, rng); },
                 [](const PointMass& p) { return p.value; }},
      law);
}

double mixing_mean(const MixingLaw& law) {
  return std::visit(Overloaded{[](const GammaParams& p) { return p.mean(); },
                               [](const GammaGammaParams& p) { return p.mean(); },
                               [](const PointMass& p) { return p.value; }},
                    law);
}

double mixing_sparsity_shape(const MixingLaw& law) {
  return std::visit(Overloaded{[](const GammaParams& p) { return p.shape; },
                               [](const GammaGammaParams& p) { return p.shape; },
                               [](const PointMass&) {
                                 return std::numeric_limits<double>::infinity();
                               }},
                    law);
}

std::vector<double> default_eps_grid() {
  std::vector<double> grid(12);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = std::pow(10.0, -2.0 - 3.0 * static_cast<double>(i) / 11.0);
  return grid;
}

SparsityShapeEstimate estimate_sparsity_shape(const std::function<double(Rng&)>& draw,
                                              std::size_t n, std::span<const double> eps_grid,
                                              Rng& rng) {
  if (n < 1000000) throw ConfigError("estimate_sparsity_shape needs at least 1e6 draws");
  if (eps_grid.size() < 2) throw ConfigError("eps grid needs at least two points");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0 && eps_grid[i] <= 0.1))
      throw ConfigError("eps grid values must lie in (0, 0.1]");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))
      throw ConfigError("eps grid must be strictly decreasing");
  }

  const double top = eps_grid.front();
  std::vector<double> small;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = draw(rng);
    if (v <= top) small.push_back(v);
  }
  if (small.size() < 100)
    throw InsufficientDataError("too few draws below the largest eps (" +
                                    std::to_string(small.size()) + " observed)",
                                small.size());
  std::sort(small.begin(), small.end());

  SparsityShapeEstimate est;
  est.counts.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    const auto c = static_cast<std::size_t>(std::upper_bound(small.begin(), small.end(), eps) -
                                            small.begin());
    if (c == 0)
      throw InsufficientDataError("no draws below eps = " + std::to_string(eps), 0);
    est.counts.push_back(c);
  }

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double w = static_cast<double>(est.counts[i]);
    sw += w;
    sx += w * std::log(eps_grid[i]);
    sy += w * std::log(w / static_cast<double>(n));
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double w = static_cast<double>(est.counts[i]);
    const double dx = std::log(eps_grid[i]) - mx;
    sxx += w * dx * dx;
    sxy += w * dx * (std::log(w / static_cast<double>(n)) - my);
  }
  est.shape = sxy / sxx;
  est.standard_error = std::sqrt(1.0 / sxx);
  return est;
}

}  // namespace hsp
