#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hsp/distributions.hpp"
#include "hsp/rng.hpp"

namespace hsp {

// Priors for a single coefficient, beta ~ N(0, Psi). The product forms use
// Psi = lambda2 * d * eta1 * eta2 with unit-mean factors.

/// Psi = scale * X, X ~ mixing.
struct NGPrior {
  GammaParams mixing;
  double scale = 1.0;
};
/// Psi ~ GG(shape, tail, scale).
struct NGGPrior {
  GammaGammaParams mixing;
};
/// eta_i ~ Ga(lambda_i, lambda_i).
struct ProductNGPrior {
  double lambda1 = 1.0, lambda2 = 1.0, d = 1.0;
};
/// eta_i ~ GG(lambda_i, c, (c - 1) / lambda_i).
struct ProductNGGPrior {
  double lambda1 = 1.0, lambda2 = 1.0, c = 3.0, d = 1.0;
};
/// Shape-induced shrinkage: the same law as ProductNGPrior.
struct ShISPrior {
  double lambda1 = 1.0, lambda2 = 1.0, d = 1.0;
};
/// Scale-induced shrinkage: both factors Ga(lambda1, lambda1), variance lambda2 * d.
struct ScISPrior {
  double lambda1 = 1.0, lambda2 = 1.0, d = 1.0;
};
struct FixedVariancePrior {
  double psi = 1.0;
};

using ShrinkageVariant = std::variant<NGPrior, NGGPrior, ProductNGPrior, ProductNGGPrior, ShISPrior,
                                      ScISPrior, FixedVariancePrior>;

struct ShrinkagePrior {
  ShrinkageVariant variant;
  double se = 1.0;  // standard error of the least-squares estimate

  void validate() const;
};

/// beta ~ N(0, lambda * d * eta), eta ~ Ga(lambda, lambda).
ShrinkagePrior ng_prior(double lambda, double d, double se = 1.0);
/// beta ~ N(0, lambda * d * eta), eta ~ GG(lambda, c, (c - 1) / lambda).
ShrinkagePrior ngg_prior(double lambda, double c, double d, double se = 1.0);

/// Short identifier without commas, e.g. "ProductNG(l1=1;l2=0.1;d=1;se=1)".
std::string prior_id(const ShrinkagePrior& prior);

/// Multiplies SE^2 and every prior scale by `factor`.
ShrinkagePrior rescaled(const ShrinkagePrior& prior, double factor);

/// One prior draw of the variance Psi.
double sample_psi(const ShrinkagePrior& prior, Rng& rng);

struct ShrinkageValue {
  double value = 0.0;
  double abs_error = 0.0;
};

/// S(t) = E[1 / (1 + Psi / SE^2) | t] computed by adaptive quadrature on
/// log Psi (nested for the two-factor priors). At t = 0 the same expectation
/// is evaluated at t = 0. Throws NumericalError when the quadrature does not
/// converge.
ShrinkageValue shrinkage_at(const ShrinkagePrior& prior, double t);

/// log h(s), h(s) = integral of N(s; 0, 1 + Psi / SE^2) dG(Psi).
ShrinkageValue log_marginal(const ShrinkagePrior& prior, double s);

/// S(t) = -(1/t) d/ds log h(s) at s = t, by Richardson-extrapolated central
/// differences of log_marginal. Requires t != 0.
ShrinkageValue shrinkage_by_derivative(const ShrinkagePrior& prior, double t);

/// Self-normalized Monte-Carlo estimate of S(t) from n prior draws of Psi
/// abs_error is the delta-method standard error.
ShrinkageValue shrinkage_monte_carlo(const ShrinkagePrior& prior, double t, std::size_t n, Rng& rng);

/// S(t) for ProductNGPrior through the closed-form K-distribution density of
/// eta1 * eta2 (one-dimensional quadrature).
ShrinkageValue shrinkage_product_ng_bessel(const ProductNGPrior& prior, double se, double t);

struct ShrinkageProfile {
  std::vector<double> t_grid;
  std::vector<double> s_values;
  ShrinkagePrior prior;
  double numerical_error = 0.0;
};

/// 60 points evenly spaced on [0.1, 10].
std::vector<double> default_t_grid();

/// Requires a nonempty, strictly increasing grid.
ShrinkageProfile profile(const ShrinkagePrior& prior, const std::vector<double>& t_grid);

/// Profiles of beta2 under shape-induced and scale-induced shrinkage with
/// equal prior variance. Requires lambda2 < lambda1.
std::pair<ShrinkageProfile, ShrinkageProfile> shis_vs_scis(double lambda1, double lambda2, double d,
                                                           const std::vector<double>& t_grid,
                                                           double se = 1.0);

/// Rows t,S,prior-id,est-error for each profile.
void write_profiles_csv(const std::string& path, const std::vector<ShrinkageProfile>& profiles);

/// Labelled priors of the published comparison figures (1, 2 or 3) with
/// d = 1/SE^2 and SE = 1.
std::vector<ShrinkagePrior> figure_priors(int figure, double lambda2 = 0.1);

}  // namespace hsp
