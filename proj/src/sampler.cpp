#include "hsp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hsp/error.hpp"
#include "hsp/special.hpp"

namespace hsp {

void ChainConfig::validate() const {
  if (!(a > 0.5 && a <= 1.0)) throw ConfigError("adaptation exponent a must lie in (1/2, 1]");
  if (!(tau_target > 0.0 && tau_target < 1.0)) throw ConfigError("target acceptance must lie in (0, 1)");
  if (!(upper_bound > 0.0) || !(lower_bound > 0.0) || !(lower_bound < upper_bound))
    throw ConfigError("need 0 < lower_bound < upper_bound");
  if (n_temperatures < 1) throw ConfigError("need at least one temperature");
  if (!(ladder_ratio >= 1.0)) throw ConfigError("ladder ratio must be >= 1");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (n_burn > n_iter) throw ConfigError("burn-in longer than the run");
  if (!(initial_proposal_var > 0.0)) throw ConfigError("initial proposal variance must be positive");
  if (n_iter <= n_burn) throw ConfigError("no draws are kept after burn-in");
}

void AdaptState::reset_statistics() {
  for (auto& a : eta) a.accept_sum = 0.0, a.accept_n = 0;
  for (auto& a : phi) a.accept_sum = 0.0, a.accept_n = 0;
  d.accept_sum = 0.0;
  d.accept_n = 0;
}

// ---------------------------------------------------------------------------
// Model

RegressionModel::RegressionModel(PriorGraph graph, Eigen::MatrixXd X, Eigen::VectorXd y,
                                 ModelPriors priors)
    : graph_(std::move(graph)), X_(std::move(X)), y_(std::move(y)), priors_(priors) {
  if (X_.rows() != y_.size()) throw ConfigError("design and response have different lengths");
  if (y_.size() == 0) throw ConfigError("no observations");
  if (static_cast<std::size_t>(X_.cols()) != graph_.coefficient_count())
    throw ConfigError("design has " + std::to_string(X_.cols()) + " columns but the prior has " +
                      std::to_string(graph_.coefficient_count()) + " coefficients");
  if (!(priors_.sigma2_shape >= 0.0 && priors_.sigma2_scale >= 0.0))
    throw ConfigError("sigma2 prior parameters must be non-negative");
  if (!(priors_.alpha_prior_var > 0.0)) throw ConfigError("intercept prior variance must be positive");
  precompute();
}

void RegressionModel::precompute() {
  const auto n = X_.rows();
  y_mean_ = y_.mean();
  x_mean_ = X_.cols() > 0 ? Eigen::VectorXd(X_.colwise().mean().transpose())
                          : Eigen::VectorXd(Eigen::VectorXd::Zero(0));
  if (flat_intercept()) {
    Z_ = X_.rowwise() - x_mean_.transpose();
    yz_ = y_.array() - y_mean_;
  } else {
    Z_.resize(n, X_.cols() + 1);
    Z_.col(0).setOnes();
    Z_.rightCols(X_.cols()) = X_;
    yz_ = y_;
  }
  use_gram_ = Z_.cols() <= n;
  if (use_gram_) {
    ZtZ_ = Z_.transpose() * Z_;
    Zty_ = Z_.transpose() * yz_;
  } else {
    ZtZ_.resize(0, 0);
    Zty_.resize(0);
  }
}

void RegressionModel::set_response(Eigen::VectorXd y) {
  if (y.size() != y_.size()) throw ConfigError("response length mismatch");
  y_ = std::move(y);
  precompute();
}

ModelState RegressionModel::initial_state() const {
  ModelState s;
  s.alpha = y_mean_;
  s.beta = Eigen::VectorXd::Zero(X_.cols());
  const double var = y_.size() > 1 ? (y_.array() - y_mean_).square().sum() / (y_.size() - 1) : 1.0;
  s.sigma2 = var > 0.0 ? var : 1.0;
  s.eta.assign(graph_.size(), 1.0);
  s.d = 1.0;
  s.phi = graph_.hyper_values();
  refresh(s);
  return s;
}

void RegressionModel::refresh(ModelState& s) const {
  const double log_d = std::log(s.d);
  s.log_psi.resize(graph_.size());
  for (std::size_t j = 0; j < graph_.size(); ++j)
    s.log_psi[j] = log_psi_node(graph_, j, s.eta, log_d, s.phi);
  s.beta_sq.assign(graph_.size(), 0.0);
  const auto& map = graph_.coeff_map();
  for (std::size_t c = 0; c < map.size(); ++c) s.beta_sq[map[c]] += s.beta[c] * s.beta[c];
}

double RegressionModel::residual_sum_of_squares(const ModelState& s) const {
  Eigen::VectorXd r = y_.array() - s.alpha;
  if (X_.cols() > 0) r.noalias() -= X_ * s.beta;
  return r.squaredNorm();
}

double RegressionModel::log_likelihood(const ModelState& s) const {
  const double nn = static_cast<double>(n());
  return -0.5 * nn * std::log(2.0 * M_PI * s.sigma2) -
         0.5 * residual_sum_of_squares(s) / s.sigma2;
}

// ---------------------------------------------------------------------------
// Gibbs steps

namespace {

// Cholesky with jitter escalation; throws with a condition estimate.
Eigen::LLT<Eigen::MatrixXd> robust_llt(Eigen::MatrixXd A) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) return llt;
  const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
  for (double jitter = 1e-10; jitter <= 1e-6 * 1.0001; jitter *= 10.0) {
    A.diagonal().array() += jitter * scale;
    llt.compute(A);
    if (llt.info() == Eigen::Success) return llt;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  std::ostringstream os;
  os << "Gaussian block: matrix not positive definite after jitter; eigenvalue range ["
     << es.eigenvalues().minCoeff() << ", " << es.eigenvalues().maxCoeff() << "]";
  throw NumericalError(os.str(), es.eigenvalues().minCoeff());
}

Eigen::VectorXd standard_normals(Eigen::Index k, Rng& rng) {
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z[i] = rng.normal();
  return z;
}

}  // namespace

void gibbs_regression_block(const RegressionModel& m, ModelState& s, Rng& rng, double inv_temp) {
  const double noise_var = s.sigma2 / inv_temp;
  const auto& map = m.graph().coeff_map();
  const Eigen::Index P = static_cast<Eigen::Index>(m.p());
  const Eigen::Index off = m.flat_intercept() ? 0 : 1;
  const Eigen::Index q = P + off;

  // Prior variances of the block coefficients.
  Eigen::VectorXd prior_var(q);
  if (off) prior_var[0] = m.priors().alpha_prior_var;
  for (Eigen::Index c = 0; c < P; ++c)
    prior_var[c + off] = std::exp(s.log_psi[map[static_cast<std::size_t>(c)]]);

  Eigen::VectorXd coef(q);
  if (q > 0) {
    const Eigen::MatrixXd& Z = m.block_design();
    if (m.use_gram()) {
      // beta = D^{1/2} z, z | . ~ N(Q^{-1} D^{1/2} Z'y / v, Q^{-1}),
      // Q = D^{1/2} Z'Z D^{1/2} / v + I.
      const Eigen::VectorXd sd = prior_var.cwiseSqrt();
      Eigen::MatrixXd Q = (sd.asDiagonal() * m.block_gram() * sd.asDiagonal()) / noise_var;
      Q.diagonal().array() += 1.0;
      const auto llt = robust_llt(std::move(Q));
      const Eigen::VectorXd rhs = sd.cwiseProduct(m.block_cross()) / noise_var;
      Eigen::VectorXd z = llt.solve(rhs);
      z += llt.matrixU().solve(standard_normals(q, rng));
      coef = sd.cwiseProduct(z);
    } else {
      // u ~ N(0, D), e ~ N(0, I_n), v = Phi u + e with Phi = Z / sqrt(noise_var);
      // solve (Phi D Phi' + I) w = y / sqrt(noise_var) - v; beta = u + D Phi' w.
      const double inv_sd = 1.0 / std::sqrt(noise_var);
      const Eigen::VectorXd sd = prior_var.cwiseSqrt();
      const Eigen::VectorXd u = sd.cwiseProduct(standard_normals(q, rng));
      const Eigen::VectorXd e = standard_normals(Z.rows(), rng);
      const Eigen::MatrixXd PhiS = (Z * sd.asDiagonal()) * inv_sd;
      Eigen::MatrixXd M = PhiS * PhiS.transpose();
      M.diagonal().array() += 1.0;
      const Eigen::VectorXd v = inv_sd * (Z * u) + e;
      const auto llt = robust_llt(std::move(M));
      const Eigen::VectorXd w = llt.solve(inv_sd * m.block_response() - v);
      coef = u + sd.cwiseProduct(PhiS.transpose() * w);
    }
  }

  if (off) {
    s.alpha = coef[0];
    s.beta = coef.tail(P);
  } else {
    s.beta = coef;
    const double mean = m.y_mean() - (P > 0 ? m.x_mean_dot(s.beta) : 0.0);
    s.alpha = mean + std::sqrt(noise_var / static_cast<double>(m.n())) * rng.normal();
  }
  std::fill(s.beta_sq.begin(), s.beta_sq.end(), 0.0);
  for (std::size_t c = 0; c < map.size(); ++c) s.beta_sq[map[c]] += s.beta[c] * s.beta[c];
}

void gibbs_sigma2(const RegressionModel& m, ModelState& s, Rng& rng, double inv_temp) {
  if (m.n() == 0) throw ConfigError("sigma2 update needs observations");
  const double rss = m.residual_sum_of_squares(s);
  const double shape = m.priors().sigma2_shape + 0.5 * inv_temp * static_cast<double>(m.n());
  const double scale = m.priors().sigma2_scale + 0.5 * inv_temp * rss;
  if (!(scale > 0.0)) throw NumericalError("sigma2 update: non-positive inverse-gamma scale", scale);
  s.sigma2 = scale / rng.gamma(shape);
}

// ---------------------------------------------------------------------------
// Adaptive Metropolis-Hastings

namespace {

// Sum over the coefficients of one node of log N(beta; 0, Psi), constants dropped.
double coef_terms(const ModelState& s, const PriorGraph& g, std::size_t node, double log_psi) {
  const double m = static_cast<double>(g.coefficients_of(node).size());
  if (m == 0.0) return 0.0;
  const double sq = s.beta_sq[node];
  const double quad = sq == 0.0 ? 0.0 : 0.5 * sq * std::exp(-log_psi);
  return -0.5 * m * log_psi - quad;
}

bool is_ratio(const PriorGraph& g, std::size_t h) {
  const auto& hp = g.hyperparameters()[h];
  return hp.prior && is_unit_interval(*hp.prior);
}

// Nodes whose log Psi changes with eta_j.
void affected_by_eta(const PriorGraph& g, std::size_t j, std::vector<std::size_t>& out) {
  out.clear();
  out.push_back(j);
  for (std::size_t c : g.children(j)) out.push_back(c);
}

struct Proposal {
  double value;
  double log_jacobian_ratio;  // log |d value'/d z'| - log |d value/d z|
};

}  // namespace

double log_full_conditional(const RegressionModel& m, Target t, const ModelState& s, double value) {
  const PriorGraph& g = m.graph();
  switch (t.kind) {
    case TargetKind::Eta: {
      const std::size_t j = t.index;
      ModelState& mut = const_cast<ModelState&>(s);
      const double old = mut.eta[j];
      mut.eta[j] = value;
      const double log_d = std::log(s.d);
      double lp = mixing_logdensity(g.law(j, s.phi), value);
      lp += coef_terms(s, g, j, log_psi_node(g, j, s.eta, log_d, s.phi));
      for (std::size_t c : g.children(j))
        lp += coef_terms(s, g, c, log_psi_node(g, c, s.eta, log_d, s.phi));
      mut.eta[j] = old;
      return lp;
    }
    case TargetKind::Scale: {
      const double shift = std::log(value) - std::log(s.d);
      double lp = hyperprior_logdensity(m.priors().d_prior, value);
      for (std::size_t k = 0; k < g.size(); ++k) lp += coef_terms(s, g, k, s.log_psi[k] + shift);
      return lp;
    }
    case TargetKind::Hyper: {
      const std::size_t h = t.index;
      const auto& hp = g.hyperparameters()[h];
      double lp = hp.prior ? hyperprior_logdensity(*hp.prior, value) : 0.0;
      std::vector<double> phi = s.phi;
      phi[h] = value;
      const double log_d = std::log(s.d);
      for (std::size_t k : g.nodes_using(h)) {
        lp += mixing_logdensity(g.law(k, phi), s.eta[k]);
        lp += coef_terms(s, g, k, log_psi_node(g, k, s.eta, log_d, phi));
      }
      return lp;
    }
  }
  return 0.0;
}

namespace {

double current_value(const ModelState& s, Target t) {
  switch (t.kind) {
    case TargetKind::Eta:
      return s.eta[t.index];
    case TargetKind::Scale:
      return s.d;
    case TargetKind::Hyper:
      return s.phi[t.index];
  }
  return 0.0;
}

// Applies an accepted value and refreshes the Psi cache.
void commit(const RegressionModel& m, Target t, ModelState& s, double value) {
  const PriorGraph& g = m.graph();
  switch (t.kind) {
    case TargetKind::Eta: {
      s.eta[t.index] = value;
      const double log_d = std::log(s.d);
      std::vector<std::size_t> nodes;
      affected_by_eta(g, t.index, nodes);
      for (std::size_t k : nodes) s.log_psi[k] = log_psi_node(g, k, s.eta, log_d, s.phi);
      break;
    }
    case TargetKind::Scale: {
      const double shift = std::log(value) - std::log(s.d);
      s.d = value;
      for (double& lp : s.log_psi) lp += shift;
      break;
    }
    case TargetKind::Hyper: {
      s.phi[t.index] = value;
      const double log_d = std::log(s.d);
      for (std::size_t k : g.nodes_using(t.index))
        s.log_psi[k] = log_psi_node(g, k, s.eta, log_d, s.phi);
      break;
    }
  }
}

AmhOutcome metropolis_step(const RegressionModel& m, Target t, ModelState& s, double increment,
                           const ChainConfig& config, Rng& rng) {
  const double x = current_value(s, t);
  const bool logit = t.kind == TargetKind::Hyper && is_ratio(m.graph(), t.index);
  double y;
  double log_jac;
  if (logit) {
    const double z = std::log(x) - std::log1p(-x) + increment;
    y = 1.0 / (1.0 + std::exp(-z));
    log_jac = (std::log(y) + std::log1p(-y)) - (std::log(x) + std::log1p(-x));
    if (!(y > 0.0 && y < 1.0)) return {0.0, false};
  } else {
    y = x * std::exp(increment);
    log_jac = std::log(y) - std::log(x);
    if (!(y <= config.upper_bound && y >= config.lower_bound)) return {0.0, false};
  }
  if (y == x) {
    commit(m, t, s, y);
    return {1.0, true};
  }
  const double log_ratio = log_full_conditional(m, t, s, y) - log_full_conditional(m, t, s, x) + log_jac;
  const double prob = std::isnan(log_ratio) ? 0.0 : std::min(1.0, std::exp(log_ratio));
  const bool accept = rng.uniform() < prob;
  if (accept) commit(m, t, s, y);
  return {prob, accept};
}

}  // namespace

void adapt_proposal(AdaptScalar& adapt, double accept_prob, std::size_t i, double a, double tau) {
  if (i < 1) throw ConfigError("adaptation index starts at 1");
  adapt.log_var += std::pow(static_cast<double>(i), -a) * (accept_prob - tau);
  adapt.log_var = std::clamp(adapt.log_var, -40.0, 10.0);
}

AmhOutcome amh_update_scalar(const RegressionModel& m, Target t, ModelState& s, AdaptScalar& adapt,
                             const ChainConfig& config, Rng& rng) {
  const double inc = std::exp(0.5 * adapt.log_var) * rng.normal();
  const AmhOutcome out = metropolis_step(m, t, s, inc, config, rng);
  adapt.accept_sum += out.accept_prob;
  ++adapt.accept_n;
  if (config.adapt) {
    ++adapt.updates;
    adapt_proposal(adapt, out.accept_prob, adapt.updates, config.a, config.tau_target);
  }
  return out;
}

AmhOutcome amh_update_with_increment(const RegressionModel& m, Target t, ModelState& s,
                                     double increment, const ChainConfig& config, Rng& rng) {
  return metropolis_step(m, t, s, increment, config, rng);
}

AdaptState make_adapt_state(const RegressionModel& m, const ChainConfig& config) {
  AdaptScalar init;
  init.log_var = std::log(config.initial_proposal_var);
  AdaptState a;
  a.eta.assign(m.graph().size(), init);
  a.phi.assign(m.graph().hyperparameters().size(), init);
  a.d = init;
  return a;
}

void sweep(const RegressionModel& m, ModelState& s, AdaptState& adapt, const ChainConfig& config,
           double inv_temp, Rng& rng) {
  const PriorGraph& g = m.graph();
  gibbs_sigma2(m, s, rng, inv_temp);
  gibbs_regression_block(m, s, rng, inv_temp);
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g.node(j).family == LawFamily::Fixed) continue;
    amh_update_scalar(m, {TargetKind::Eta, j}, s, adapt.eta[j], config, rng);
  }
  amh_update_scalar(m, {TargetKind::Scale, 0}, s, adapt.d, config, rng);
  for (std::size_t h = 0; h < g.hyperparameters().size(); ++h) {
    if (!g.hyperparameters()[h].prior) continue;
    amh_update_scalar(m, {TargetKind::Hyper, h}, s, adapt.phi[h], config, rng);
  }
}

// ---------------------------------------------------------------------------
// Parallel tempering

double swap_acceptance(double inv_temp_i, double inv_temp_j, double loglik_i, double loglik_j) {
  const double log_r = (inv_temp_i - inv_temp_j) * (loglik_j - loglik_i);
  return log_r >= 0.0 ? 1.0 : std::exp(log_r);
}

TemperedChains::TemperedChains(const RegressionModel& m, const ChainConfig& config)
    : swap_rng(config.seed, 1000003) {
  config.validate();
  const std::size_t T = config.n_temperatures;
  states.assign(T, m.initial_state());
  adapts.assign(T, make_adapt_state(m, config));
  for (std::size_t k = 0; k < T; ++k) rngs.emplace_back(config.seed, k);
  log_ladder = std::log(config.ladder_ratio);
  swap_accept_sum.assign(T > 1 ? T - 1 : 0, 0.0);
  swap_attempts.assign(T > 1 ? T - 1 : 0, 0);
}

double TemperedChains::inv_temp(std::size_t k) const {
  return std::exp(-static_cast<double>(k) * log_ladder);
}

void tempered_sweep(const RegressionModel& m, TemperedChains& c, const ChainConfig& config,
                    bool burn_in) {
  const std::size_t T = c.states.size();
  for (std::size_t k = 0; k < T; ++k) sweep(m, c.states[k], c.adapts[k], config, c.inv_temp(k), c.rngs[k]);
  if (T < 2) return;

  std::vector<double> loglik(T);
  for (std::size_t k = 0; k < T; ++k) loglik[k] = m.log_likelihood(c.states[k]);
  double mean_acc = 0.0;
  for (std::size_t k = T - 1; k-- > 0;) {
    const double prob = swap_acceptance(c.inv_temp(k), c.inv_temp(k + 1), loglik[k], loglik[k + 1]);
    mean_acc += prob;
    c.swap_accept_sum[k] += prob;
    ++c.swap_attempts[k];
    if (c.swap_rng.uniform() < prob) {
      std::swap(c.states[k], c.states[k + 1]);
      std::swap(loglik[k], loglik[k + 1]);
    }
  }
  mean_acc /= static_cast<double>(T - 1);
  if (burn_in && config.adapt_ladder) {
    ++c.swap_updates;
    // Too many swaps accepted means the temperatures are too close.
    const double step = std::pow(static_cast<double>(c.swap_updates), -config.a);
    double log_log = std::log(std::max(c.log_ladder, 1e-6));
    log_log += step * (mean_acc - config.swap_target);
    c.log_ladder = std::clamp(std::exp(log_log), 1e-4, 10.0);
  }
}

// ---------------------------------------------------------------------------
// Orchestration

std::vector<std::string> sample_columns(const PriorGraph& g, const ChainConfig& config) {
  std::vector<std::string> cols{"alpha", "sigma2", "d"};
  for (const auto& h : g.hyperparameters()) {
    cols.push_back(h.name);
    if (h.derived_base) cols.push_back(h.derived_name);
  }
  const auto& map = g.coeff_map();
  std::vector<std::size_t> seen(g.size(), 0);
  for (std::size_t c = 0; c < map.size(); ++c) {
    const auto& label = g.node(map[c]).label;
    std::string name = "beta:" + (label.empty() ? std::to_string(map[c] + 1) : label);
    if (g.coefficients_of(map[c]).size() > 1) name += "#" + std::to_string(++seen[map[c]]);
    cols.push_back(name);
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto& label = g.node(j).label.empty() ? std::to_string(j + 1) : g.node(j).label;
    if (config.store_eta) cols.push_back("eta:" + label);
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto& label = g.node(j).label.empty() ? std::to_string(j + 1) : g.node(j).label;
    if (config.store_psi && (config.psi_mask.empty() || config.psi_mask[j])) cols.push_back("psi:" + label);
  }
  return cols;
}

namespace {

void append_state(const PriorGraph& g, const ChainConfig& config, const ModelState& s,
                  std::vector<double>& row) {
  row.clear();
  row.push_back(s.alpha);
  row.push_back(s.sigma2);
  row.push_back(s.d);
  const auto& hs = g.hyperparameters();
  for (std::size_t h = 0; h < hs.size(); ++h) {
    row.push_back(s.phi[h]);
    if (hs[h].derived_base) row.push_back(s.phi[h] * s.phi[*hs[h].derived_base]);
  }
  for (Eigen::Index c = 0; c < s.beta.size(); ++c) row.push_back(s.beta[c]);
  if (config.store_eta) row.insert(row.end(), s.eta.begin(), s.eta.end());
  if (config.store_psi)
    for (std::size_t j = 0; j < s.log_psi.size(); ++j)
      if (config.psi_mask.empty() || config.psi_mask[j]) row.push_back(std::exp(s.log_psi[j]));
}

}  // namespace

SampleStore run_chain(const RegressionModel& m, const ChainConfig& config) {
  config.validate();
  if (!config.psi_mask.empty() && config.psi_mask.size() != m.graph().size())
    throw ConfigError("psi mask must have one entry per node");
  const PriorGraph& g = m.graph();
  TemperedChains chains(m, config);
  SampleStore store(sample_columns(g, config));
  std::vector<double> row;
  for (std::size_t it = 0; it < config.n_iter; ++it) {
    const bool burn = it < config.n_burn;
    tempered_sweep(m, chains, config, burn);
    if (it + 1 == config.n_burn) {
      for (auto& a : chains.adapts) a.reset_statistics();
      std::fill(chains.swap_accept_sum.begin(), chains.swap_accept_sum.end(), 0.0);
      std::fill(chains.swap_attempts.begin(), chains.swap_attempts.end(), 0);
    }
    if (!burn && (it - config.n_burn) % config.thin == 0) {
      append_state(g, config, chains.states[0], row);
      store.add_row(row);
    }
  }

  const AdaptState& cold = chains.adapts[0];
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g.node(j).family == LawFamily::Fixed) continue;
    const auto& label = g.node(j).label.empty() ? std::to_string(j + 1) : g.node(j).label;
    store.diagnostics["acceptance:eta:" + label] = cold.eta[j].acceptance_rate();
  }
  store.diagnostics["acceptance:d"] = cold.d.acceptance_rate();
  for (std::size_t h = 0; h < g.hyperparameters().size(); ++h)
    if (g.hyperparameters()[h].prior)
      store.diagnostics["acceptance:" + g.hyperparameters()[h].name] = cold.phi[h].acceptance_rate();
  for (std::size_t k = 0; k < chains.swap_attempts.size(); ++k)
    if (chains.swap_attempts[k])
      store.diagnostics["swap_rate:" + std::to_string(k) + "-" + std::to_string(k + 1)] =
          chains.swap_accept_sum[k] / static_cast<double>(chains.swap_attempts[k]);
  store.diagnostics["ladder_ratio"] = std::exp(chains.log_ladder);
  store.diagnostics["n_temperatures"] = static_cast<double>(config.n_temperatures);
  return store;
}

}  // namespace hsp
