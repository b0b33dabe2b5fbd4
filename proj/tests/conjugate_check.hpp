#pragma once

// Conjugate-block check shared by the unit tests and the acceptance harness:
// repeated (alpha, beta) draws at frozen Psi and sigma2 against the closed-form
// Gaussian.

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsp/sampler.hpp"

namespace hsp::testing {

struct ConjugateCheck {
  double mean_z = 0.0;        // standardized chi-square of the whitened mean
  double cov_z = 0.0;         // same for the whitened covariance entries
  double worst_mean_z = 0.0;  // largest single-coordinate |z|
  double worst_cov_z = 0.0;
};

inline ConjugateCheck conjugate_block_check(Eigen::Index n, Eigen::Index p, double alpha_var, int draws,
                                            std::uint64_t seed) {
  Rng drng(static_cast<std::uint64_t>(n * 100 + p), 0);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = drng.normal();
    y(i) = 0.5 + X(i, 0) + 0.3 * drng.normal();
  }
  ModelPriors priors;
  priors.alpha_prior_var = alpha_var;
  RegressionModel m(build_independent(static_cast<std::size_t>(p), 0.5), X, y, priors);
  ModelState s = m.initial_state();
  for (std::size_t j = 0; j < s.eta.size(); ++j) s.eta[j] = 0.3 + 0.4 * static_cast<double>(j);
  s.d = 1.3;
  s.sigma2 = 0.4;
  m.refresh(s);
  const auto psi = compute_psi(m.graph(), s.eta, s.d, s.phi);

  // Joint posterior of (alpha, beta); a flat intercept has zero prior precision.
  const Eigen::Index P = p + 1;
  Eigen::MatrixXd Z(n, P);
  Z.col(0).setOnes();
  Z.rightCols(p) = X;
  Eigen::MatrixXd Q = Z.transpose() * Z / s.sigma2;
  Q(0, 0) += std::isinf(alpha_var) ? 0.0 : 1.0 / alpha_var;
  for (Eigen::Index j = 0; j < p; ++j) Q(j + 1, j + 1) += 1.0 / psi[static_cast<std::size_t>(j)];
  const Eigen::MatrixXd Sigma = Q.inverse();
  const Eigen::VectorXd mu = Sigma * Z.transpose() * y / s.sigma2;
  const Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  const Eigen::MatrixXd L = llt.matrixL();

  Rng rng(seed, 0);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(P), wsum = Eigen::VectorXd::Zero(P);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(P, P), wsq = Eigen::MatrixXd::Zero(P, P);
  Eigen::VectorXd v(P);
  for (int it = 0; it < draws; ++it) {
    gibbs_regression_block(m, s, rng);
    v(0) = s.alpha;
    v.tail(p) = s.beta;
    const Eigen::VectorXd c = v - mu;
    const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(c);
    sum += c;
    sq += c * c.transpose();
    wsum += w;
    wsq += w * w.transpose();
  }
  const double N = draws;
  ConjugateCheck out;
  // N |mean(w)|^2 ~ chi2_P; whitened second moments have variance 2/N on the
  // diagonal and 1/N off it, uncorrelated across entries.
  const double k_mean = static_cast<double>(P);
  out.mean_z = (N * (wsum / N).squaredNorm() - k_mean) / std::sqrt(2.0 * k_mean);
  double t_cov = 0.0, k_cov = 0.0;
  for (Eigen::Index a = 0; a < P; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double e = wsq(a, b) / N - (a == b ? 1.0 : 0.0);
      t_cov += e * e * N / (a == b ? 2.0 : 1.0);
      k_cov += 1.0;
    }
  out.cov_z = (t_cov - k_cov) / std::sqrt(2.0 * k_cov);
  for (Eigen::Index a = 0; a < P; ++a) {
    out.worst_mean_z = std::max(out.worst_mean_z, std::abs(sum(a) / N) / std::sqrt(Sigma(a, a) / N));
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double se = std::sqrt((Sigma(a, a) * Sigma(b, b) + Sigma(a, b) * Sigma(a, b)) / N);
      out.worst_cov_z = std::max(out.worst_cov_z, std::abs(sq(a, b) / N - Sigma(a, b)) / se);
    }
  }
  return out;
}

}  // namespace hsp::testing
