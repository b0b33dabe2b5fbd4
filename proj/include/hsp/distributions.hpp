#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "hsp/rng.hpp"

namespace hsp {

/// Ga(shape, rate): density proportional to x^{shape-1} exp(-rate x).
struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;

  void validate() const;
  double mean() const { return shape / rate; }
};

/// Gamma-gamma (inverted-beta-2) law GG(shape, tail, scale): Psi/(Psi+scale)
/// is Beta(shape, tail). Shape controls the behaviour at zero, tail the decay
/// at infinity, and scale is the median when shape == tail.
struct GammaGammaParams {
  double shape = 1.0;
  double tail = 3.0;
  double scale = 1.0;

  void validate() const;
  /// Finite only for tail > 1; throws DomainError otherwise.
  double mean() const;
};

/// Degenerate law at a fixed positive value.
struct PointMass {
  double value = 1.0;
};

/// Mixing distribution for the variance of a scale mixture of normals.
using MixingLaw = std::variant<GammaParams, GammaGammaParams, PointMass>;

double gamma_logdensity(double x, const GammaParams& p);

double gg_logdensity(double psi, const GammaGammaParams& p);

/// Draw via B ~ Beta(shape, tail), Psi = scale * B / (1 - B).
double gg_sample(const GammaGammaParams& p, Rng& rng);

/// log of a GG draw; exact in the far left tail where the draw itself underflows.
double gg_log_sample(const GammaGammaParams& p, Rng& rng);

/// log density of Psi = eta1 * eta2 with eta_i ~ Ga(lambda_i, 1), the
/// K-distribution: 2 / (G(l1) G(l2)) Psi^{(l1+l2)/2 - 1} K_{|l1-l2|}(2 sqrt(Psi)).
double product_two_gammas_logdensity(double psi, double lambda1, double lambda2);

void validate(const MixingLaw& law);
/// log density w.r.t. Lebesgue measure; PointMass returns 0 at its atom and
/// -inf elsewhere.
double mixing_logdensity(const MixingLaw& law, double x);
double mixing_sample(const MixingLaw& law, Rng& rng);
double mixing_mean(const MixingLaw& law);
/// Shape parameter governing the density near zero (+inf for a point mass).
double mixing_sparsity_shape(const MixingLaw& law);

/// Fitted power-law exponent of a density at zero.
struct SparsityShapeEstimate {
  double shape = 0.0;
  double standard_error = 0.0;
  /// Number of draws at or below each grid point.
  std::vector<std::size_t> counts;
};

/// 12 log-spaced points from 1e-2 down to 1e-5.
std::vector<double> default_eps_grid();

/// Estimates z with density(Psi) ~ Psi^{z-1} near zero from n draws. The
/// empirical CDF satisfies F(eps) ~ k eps^z / z, so z is the slope of log F on
/// log eps over eps_grid, fitted by least squares weighted by the counts
/// (the variance of log F is roughly 1/count).
///
/// Requires n >= 1e6 and a strictly decreasing grid in (0, 0.1]. Throws
/// InsufficientDataError when fewer than 100 draws fall below max(eps_grid)
/// or any grid point sees no draws.
SparsityShapeEstimate estimate_sparsity_shape(const std::function<double(Rng&)>& draw,
                                              std::size_t n, std::span<const double> eps_grid,
                                              Rng& rng);

}  // namespace hsp
