#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsp/hyperprior.hpp"
#include "hsp/prior_graph.hpp"
#include "hsp/rng.hpp"
#include "hsp/sample_store.hpp"

namespace hsp {

struct ChainConfig {
  std::size_t n_iter = 50000;  // total sweeps, burn-in included
  std::size_t n_burn = 10000;
  std::size_t thin = 10;
  double a = 0.55;           // adaptation step exponent, 1/2 < a <= 1
  double tau_target = 0.3;   // target acceptance probability
  double upper_bound = 1e8;  // eta, d and hyperparameters are capped here
  double lower_bound = 1e-100;
  std::size_t n_temperatures = 4;
  double ladder_ratio = 1.5;  // T_k = ladder_ratio^k
  bool adapt_ladder = true;   // tune ladder_ratio during burn-in
  double swap_target = 0.23;
  bool adapt = true;  // diminishing adaptation of proposal variances
  double initial_proposal_var = 1.0;
  std::uint64_t seed = 1;
  bool store_eta = true;
  bool store_psi = true;
  /// Nodes whose psi is stored when store_psi is set; empty means all.
  std::vector<bool> psi_mask;

  void validate() const;
};

/// Priors outside the sparsity prior. The defaults are p(alpha, sigma2) ∝ 1/sigma2
/// and p(d) ∝ (1 + d)^-2; proper alternatives exist for simulation checks.
struct ModelPriors {
  HyperPrior d_prior = HeavyTailScaleHyper{};
  double sigma2_shape = 0.0;  // inverse-gamma prior on sigma2; (0, 0) is Jeffreys
  double sigma2_scale = 0.0;
  double alpha_prior_var = std::numeric_limits<double>::infinity();  // inf is flat
};

/// One MCMC state. log_psi caches log Psi per node and is kept equal to
/// log compute_psi(graph, eta, d, phi); beta_sq caches the per-node sum of
/// squared coefficients.
struct ModelState {
  double alpha = 0.0;
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
  std::vector<double> eta;
  double d = 1.0;
  std::vector<double> phi;
  std::vector<double> log_psi;
  std::vector<double> beta_sq;
};

/// Adaptive random-walk proposal for one scalar.
struct AdaptScalar {
  double log_var = 0.0;
  std::size_t updates = 0;  // i in the step size i^-a
  double accept_sum = 0.0;  // sum of acceptance probabilities since last reset
  std::size_t accept_n = 0;

  double acceptance_rate() const { return accept_n ? accept_sum / static_cast<double>(accept_n) : 0.0; }
};

struct AdaptState {
  std::vector<AdaptScalar> eta;
  AdaptScalar d;
  std::vector<AdaptScalar> phi;

  void reset_statistics();
};

enum class TargetKind { Eta, Scale, Hyper };

struct Target {
  TargetKind kind = TargetKind::Eta;
  std::size_t index = 0;
};

/// Data, prior graph and precomputed quantities for y = alpha + X beta + e.
class RegressionModel {
 public:
  RegressionModel(PriorGraph graph, Eigen::MatrixXd X, Eigen::VectorXd y,
                  ModelPriors priors = {});

  const PriorGraph& graph() const { return graph_; }
  const ModelPriors& priors() const { return priors_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& y() const { return y_; }
  std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
  std::size_t p() const { return static_cast<std::size_t>(X_.cols()); }
  bool flat_intercept() const { return std::isinf(priors_.alpha_prior_var); }

  /// alpha = mean(y), beta = 0, sigma2 = var(y), eta = 1, d = 1 and the
  /// graph's hyperparameter values.
  ModelState initial_state() const;
  /// Recomputes log_psi and beta_sq from the primary variables.
  void refresh(ModelState& s) const;
  double residual_sum_of_squares(const ModelState& s) const;
  double log_likelihood(const ModelState& s) const;
  /// Replaces the response (used by joint-distribution checks).
  void set_response(Eigen::VectorXd y);

  // Design for the Gaussian block: centred X (flat intercept) or [1 X].
  const Eigen::MatrixXd& block_design() const { return Z_; }
  const Eigen::VectorXd& block_response() const { return yz_; }
  const Eigen::MatrixXd& block_gram() const { return ZtZ_; }
  const Eigen::VectorXd& block_cross() const { return Zty_; }
  bool use_gram() const { return use_gram_; }
  double x_mean_dot(const Eigen::VectorXd& beta) const { return x_mean_.dot(beta); }
  double y_mean() const { return y_mean_; }

 private:
  void precompute();

  PriorGraph graph_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  ModelPriors priors_;
  Eigen::MatrixXd Z_;
  Eigen::VectorXd yz_;
  Eigen::MatrixXd ZtZ_;
  Eigen::VectorXd Zty_;
  Eigen::VectorXd x_mean_;
  double y_mean_ = 0.0;
  bool use_gram_ = false;
};

/// Joint draw of (alpha, beta) from their Gaussian full conditional with the
/// likelihood raised to inv_temp.
void gibbs_regression_block(const RegressionModel& m, ModelState& s, Rng& rng,
                            double inv_temp = 1.0);

/// sigma2 from its inverse-gamma full conditional (shape n/2, scale RSS/2
/// under the default prior, both scaled by inv_temp).
void gibbs_sigma2(const RegressionModel& m, ModelState& s, Rng& rng, double inv_temp = 1.0);

/// Unnormalized log full conditional of a scalar target at `value`, on the
/// scale of the variable itself (no proposal Jacobian). Only terms that
/// depend on the target are included.
double log_full_conditional(const RegressionModel& m, Target t, const ModelState& s, double value);

struct AmhOutcome {
  double accept_prob = 0.0;
  bool accepted = false;
};

/// One adaptive random-walk Metropolis-Hastings update on the log (or logit,
/// for (0, 1) hyperparameters) scale. Proposals outside the configured bounds
/// are rejected. Adapts `adapt` afterwards when config.adapt is set.
AmhOutcome amh_update_scalar(const RegressionModel& m, Target t, ModelState& s, AdaptScalar& adapt,
                             const ChainConfig& config, Rng& rng);

/// As above with a fixed proposal increment (log-scale), for tests.
AmhOutcome amh_update_with_increment(const RegressionModel& m, Target t, ModelState& s,
                                     double increment, const ChainConfig& config, Rng& rng);

/// log sigma^2 += i^-a (accept_prob - tau).
void adapt_proposal(AdaptScalar& adapt, double accept_prob, std::size_t i, double a, double tau);

AdaptState make_adapt_state(const RegressionModel& m, const ChainConfig& config);

/// sigma2, then (alpha, beta), then every eta, d, and every hyperparameter
/// with a prior.
void sweep(const RegressionModel& m, ModelState& s, AdaptState& adapt, const ChainConfig& config,
           double inv_temp, Rng& rng);

/// Acceptance probability for exchanging the states of two tempered chains.
double swap_acceptance(double inv_temp_i, double inv_temp_j, double loglik_i, double loglik_j);

/// Chains at inverse temperatures 1 = b_0 > b_1 > ... with their own random
/// streams; adaptation state stays with the temperature level.
struct TemperedChains {
  std::vector<ModelState> states;
  std::vector<AdaptState> adapts;
  std::vector<Rng> rngs;
  Rng swap_rng;
  double log_ladder = 0.0;  // log of the temperature ratio
  std::size_t swap_updates = 0;
  std::vector<double> swap_accept_sum;
  std::vector<std::size_t> swap_attempts;

  TemperedChains(const RegressionModel& m, const ChainConfig& config);
  double inv_temp(std::size_t k) const;
};

/// One sweep of every chain followed by adjacent-pair swap proposals. During
/// burn-in the ladder ratio is tuned towards config.swap_target.
void tempered_sweep(const RegressionModel& m, TemperedChains& chains, const ChainConfig& config,
                    bool burn_in);

/// Column names of the stored draws.
std::vector<std::string> sample_columns(const PriorGraph& g, const ChainConfig& config);

/// Runs the tempered sampler and returns thinned post-burn-in draws of the
/// cold chain. Deterministic for a given seed.
SampleStore run_chain(const RegressionModel& m, const ChainConfig& config);

}  // namespace hsp
