#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hsp/distributions.hpp"
#include "hsp/error.hpp"
#include "hsp/quadrature.hpp"
#include "hsp/sampler.hpp"
#include "conjugate_check.hpp"

using namespace hsp;

namespace {

struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Problem make_problem(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed, 0);
  Problem pr{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) pr.X(i, j) = rng.normal();
    pr.y(i) = 0.5 + pr.X(i, 0) - (p > 1 ? 0.5 * pr.X(i, 1) : 0.0) + 0.3 * rng.normal();
  }
  return pr;
}

double log_normal0(double x, double var) { return -0.5 * std::log(2 * M_PI * var) - 0.5 * x * x / var; }

// Full joint log density up to a constant, computed from scratch.
double joint_logdensity(const RegressionModel& m, const ModelState& s) {
  const auto& g = m.graph();
  const auto psi = compute_psi(g, s.eta, s.d, s.phi);
  double lp = m.log_likelihood(s);
  for (std::size_t k = 0; k < g.coefficient_count(); ++k)
    lp += log_normal0(s.beta(static_cast<Eigen::Index>(k)), psi[g.coeff_map()[k]]);
  lp += prior_logdensity(g, s.eta, s.phi);
  lp += hyperprior_logdensity(m.priors().d_prior, s.d);
  for (std::size_t h = 0; h < g.hyperparameters().size(); ++h)
    if (const auto& pr = g.hyperparameters()[h].prior) lp += hyperprior_logdensity(*pr, s.phi[h]);
  return lp;
}

void check_cache(const RegressionModel& m, const ModelState& s) {
  const auto psi = compute_psi(m.graph(), s.eta, s.d, s.phi);
  for (std::size_t j = 0; j < psi.size(); ++j)
    CHECK(s.log_psi[j] == doctest::Approx(std::log(psi[j])).epsilon(1e-12));
}

}  // namespace

TEST_CASE("conjugate block matches the closed-form Gaussian") {
  const double inf = std::numeric_limits<double>::infinity();
  auto run = [](Eigen::Index n, Eigen::Index p, double av) {
    const auto r = testing::conjugate_block_check(n, p, av, 100000, 9);
    MESSAGE("largest single-entry |z|: mean " << r.worst_mean_z << ", cov " << r.worst_cov_z);
    CHECK(r.mean_z < 3.0);
    CHECK(r.cov_z < 3.0);
  };
  SUBCASE("gram route, flat intercept") { run(40, 3, inf); }
  SUBCASE("gram route, normal intercept") { run(40, 3, 2.0); }
  SUBCASE("wide route, flat intercept") { run(6, 9, inf); }
  SUBCASE("wide route, normal intercept") { run(6, 9, 2.0); }
}

TEST_CASE("ridge shrinkage of a single column") {
  // One standardized column, Psi fixed: E[beta | .] = (1 - S) betahat.
  const Eigen::Index n = 50;
  Rng rng(3, 0);
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) X(i, 0) = rng.normal();
  X.col(0).array() -= X.col(0).mean();
  X.col(0) /= X.col(0).norm();
  for (Eigen::Index i = 0; i < n; ++i) y(i) = 2.0 * X(i, 0) + 0.5 * rng.normal();
  RegressionModel m(build_independent(1, 1.0), X, y);
  ModelState s = m.initial_state();
  s.sigma2 = 0.25;
  s.d = 0.7;
  m.refresh(s);
  const double psi = std::exp(s.log_psi[0]);
  const double se2 = s.sigma2;  // X'X = 1
  const double betahat = X.col(0).dot(y);
  const double S = 1.0 / (1.0 + psi / se2);
  double acc = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    gibbs_regression_block(m, s, rng);
    acc += s.beta(0);
  }
  const double sd = std::sqrt(1.0 / (1.0 / se2 + 1.0 / psi));
  CHECK(std::abs(acc / N - (1 - S) * betahat) < 3 * sd / std::sqrt(N));
}

TEST_CASE("intercept-only model") {
  // No predictors: alpha | rest ~ N(ybar, sigma2 / n).
  const Eigen::Index n = 8;
  Eigen::MatrixXd X(n, 0);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = static_cast<double>(i);
  RegressionModel m(PriorGraph{}, X, y);
  ModelState s = m.initial_state();
  s.sigma2 = 2.0;
  Rng rng(6, 0);
  const int N = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < N; ++i) {
    gibbs_regression_block(m, s, rng);
    sum += s.alpha;
    sq += (s.alpha - 3.5) * (s.alpha - 3.5);
  }
  CHECK(std::abs(sum / N - 3.5) < 3 * std::sqrt(0.25 / N));
  CHECK(sq / N == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("sigma2 draws follow the inverse-gamma conditional") {
  Eigen::MatrixXd X(4, 1);
  X << 1.0, -1.0, 0.5, -0.5;
  Eigen::VectorXd y(4);
  y << 1.0, -1.0, 0.0, 0.0;
  RegressionModel m(build_independent(1, 1.0), X, y);
  ModelState s = m.initial_state();
  s.alpha = 0.0;
  s.beta.setZero();
  CHECK(m.residual_sum_of_squares(s) == 2.0);
  Rng rng(4, 0);
  const int N = 1000000;
  double prec = 0.0, mean = 0.0;
  std::vector<double> draws(N);
  for (int i = 0; i < N; ++i) {
    gibbs_sigma2(m, s, rng);
    draws[i] = s.sigma2;
    prec += 1.0 / s.sigma2;
    mean += s.sigma2;
  }
  // 1 / sigma2 ~ Ga(2, 1): mean 2, variance 2.
  CHECK(std::abs(prec / N - 2.0) < 4 * std::sqrt(2.0 / N));
  CHECK(mean / N == doctest::Approx(1.0).epsilon(0.03));
  std::nth_element(draws.begin(), draws.begin() + N / 2, draws.end());
  CHECK(draws[N / 2] == doctest::Approx(1.0 / 1.678346990016661).epsilon(0.01));
}

TEST_CASE("zero proposal increment is always accepted") {
  const auto pr = make_problem(20, 3, 1);
  Eigen::MatrixXd X(20, 6);
  X.leftCols(3) = pr.X;
  X.rightCols(3) = pr.X.cwiseAbs();
  RegressionModel m(build_strong_heredity(3, 1.0, 0.5), X, pr.y);
  ModelState s = m.initial_state();
  s.beta << 0.3, -0.2, 0.1, 0.05, 0.0, -0.4;
  m.refresh(s);
  ChainConfig cfg;
  Rng rng(1, 0);
  for (std::size_t j = 0; j < m.graph().size(); ++j)
    CHECK(amh_update_with_increment(m, {TargetKind::Eta, j}, s, 0.0, cfg, rng).accept_prob == 1.0);
  CHECK(amh_update_with_increment(m, {TargetKind::Scale, 0}, s, 0.0, cfg, rng).accept_prob == 1.0);
}

TEST_CASE("full conditionals are differences of the joint density") {
  const auto pr = make_problem(20, 3, 2);
  auto g = build_strong_heredity(3, 1.2, 0.4);
  g.reparameterize_as_ratio("lambda2", "lambda1", "r", BetaHyper{2.0, 6.0});
  g.set_hyperprior("lambda1", ExponentialHyper{1.0});
  Eigen::MatrixXd X(20, 6);
  X.leftCols(3) = pr.X;
  X.col(3) = pr.X.col(1).cwiseProduct(pr.X.col(0));
  X.col(4) = pr.X.col(2).cwiseProduct(pr.X.col(0));
  X.col(5) = pr.X.col(2).cwiseProduct(pr.X.col(1));
  RegressionModel m(g, X, pr.y);
  ModelState s = m.initial_state();
  s.beta << 0.9, -0.4, 0.02, 0.1, -0.05, 0.01;
  s.eta = {1.3, 0.6, 0.2, 2.0, 0.4, 0.9};
  s.d = 0.8;
  m.refresh(s);

  auto compare = [&](Target t, auto set, double a, double b) {
    ModelState sa = s, sb = s;
    set(sa, a);
    set(sb, b);
    m.refresh(sa);
    m.refresh(sb);
    const double joint = joint_logdensity(m, sb) - joint_logdensity(m, sa);
    const double cond = log_full_conditional(m, t, s, b) - log_full_conditional(m, t, s, a);
    CHECK(cond == doctest::Approx(joint).epsilon(1e-10));
  };
  for (std::size_t j = 0; j < 6; ++j)
    compare({TargetKind::Eta, j}, [j](ModelState& x, double v) { x.eta[j] = v; }, 0.3, 1.7);
  compare({TargetKind::Scale, 0}, [](ModelState& x, double v) { x.d = v; }, 0.2, 3.0);
  for (std::size_t h = 0; h < 2; ++h)
    compare({TargetKind::Hyper, h}, [h](ModelState& x, double v) { x.phi[h] = v; }, 0.15, 0.6);
}

TEST_CASE("parent eta update keeps the descendant cache coherent") {
  const auto pr = make_problem(20, 3, 3);
  Eigen::MatrixXd X(20, 6);
  X.leftCols(3) = pr.X;
  X.rightCols(3) = pr.X;
  RegressionModel m(build_strong_heredity(3, 1.0, 0.5), X, pr.y);
  ModelState s = m.initial_state();
  s.beta << 0.3, -0.2, 0.1, 0.05, 0.01, -0.4;
  m.refresh(s);
  ChainConfig cfg;
  Rng rng(2, 0);
  const double before = s.log_psi[3];
  int accepted = 0;
  for (int i = 0; i < 50 && !accepted; ++i)
    accepted += amh_update_with_increment(m, {TargetKind::Eta, 0}, s, 0.5, cfg, rng).accepted;
  REQUIRE(accepted == 1);
  CHECK(s.log_psi[3] != before);  // int[2.1] has main[1] as a parent
  check_cache(m, s);
}

TEST_CASE("eta chain on a one-node graph matches its quadrature conditional") {
  Eigen::MatrixXd X(5, 1);
  X << 0.1, -0.3, 0.2, 0.5, -0.4;
  Eigen::VectorXd y = X.col(0);
  RegressionModel m(build_independent(1, 0.5), X, y);
  ModelState s = m.initial_state();
  s.beta(0) = 0.4;
  s.d = 1.0;
  m.refresh(s);
  ChainConfig cfg;
  cfg.adapt = false;
  AdaptScalar ad;
  ad.log_var = std::log(2.0);
  Rng rng(17, 0);
  const Target t{TargetKind::Eta, 0};
  for (int i = 0; i < 2000; ++i) amh_update_scalar(m, t, s, ad, cfg, rng);
  std::vector<double> draws;
  for (int i = 0; i < 1000000; ++i) {
    amh_update_scalar(m, t, s, ad, cfg, rng);
    if (i % 10 == 0) draws.push_back(s.eta[0]);
  }
  std::sort(draws.begin(), draws.end());

  // Conditional density on the log scale, normalized by quadrature.
  const double mode_shift = log_full_conditional(m, t, s, 0.1);
  auto dens = [&](double u) { return std::exp(log_full_conditional(m, t, s, std::exp(u)) - mode_shift + u); };
  const double lo = -40.0, hi = 8.0;
  const double Z = integrate(dens, lo, hi).value[0];
  double ks = 0.0;
  for (double q : {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99}) {
    const double x = draws[static_cast<std::size_t>(q * static_cast<double>(draws.size()))];
    const double F = integrate(dens, lo, std::log(x)).value[0] / Z;
    ks = std::max(ks, std::abs(F - q));
  }
  CHECK(ks < 0.02);
}

TEST_CASE("adaptation recursion") {
  AdaptScalar a;
  adapt_proposal(a, 0.3, 1, 0.55, 0.3);
  CHECK(a.log_var == 0.0);
  adapt_proposal(a, 1.0, 1, 0.55, 0.3);
  CHECK(a.log_var == doctest::Approx(0.7));
  adapt_proposal(a, 0.0, 4, 0.55, 0.3);
  CHECK(a.log_var == doctest::Approx(0.7 - std::pow(4.0, -0.55) * 0.3));
  CHECK_THROWS_AS(adapt_proposal(a, 0.5, 0, 0.55, 0.3), ConfigError);
}

TEST_CASE("swap acceptance") {
  CHECK(swap_acceptance(1.0, 0.5, -10.0, -10.0) == 1.0);
  CHECK(swap_acceptance(1.0, 0.5, -10.0, -12.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(swap_acceptance(1.0, 0.5, -12.0, -10.0) == 1.0);
}

TEST_CASE("single temperature is the plain sampler") {
  const auto pr = make_problem(25, 3, 5);
  RegressionModel m(build_independent(3, 0.5), pr.X, pr.y);
  ChainConfig cfg;
  cfg.n_temperatures = 1;
  cfg.seed = 77;
  TemperedChains chains(m, cfg);
  ModelState s = m.initial_state();
  AdaptState ad = make_adapt_state(m, cfg);
  Rng rng(77, 0);
  for (int i = 0; i < 300; ++i) {
    tempered_sweep(m, chains, cfg, i < 100);
    sweep(m, s, ad, cfg, 1.0, rng);
  }
  const auto& t = chains.states[0];
  CHECK(t.alpha == s.alpha);
  CHECK(t.beta == s.beta);
  CHECK(t.sigma2 == s.sigma2);
  CHECK(t.eta == s.eta);
  CHECK(t.d == s.d);
  CHECK(t.log_psi == s.log_psi);
}

TEST_CASE("run_chain is reproducible and keeps its invariants") {
  const auto pr = make_problem(30, 4, 6);
  auto g = build_independent(4, 0.5);
  g.set_hyperprior("lambda1", GammaHyper{1.0, 1.0});
  RegressionModel m(g, pr.X, pr.y);
  ChainConfig cfg;
  cfg.n_iter = 3000;
  cfg.n_burn = 1000;
  cfg.thin = 5;
  cfg.n_temperatures = 3;
  cfg.seed = 12;
  const auto a = run_chain(m, cfg);
  const auto b = run_chain(m, cfg);
  CHECK(a == b);
  cfg.seed = 13;
  CHECK(!(run_chain(m, cfg) == a));
  CHECK(a.rows() == 400);

  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::vector<double> eta(4);
    for (std::size_t j = 0; j < 4; ++j) eta[j] = a.at(r, a.index_of("eta:coef[" + std::to_string(j + 1) + "]"));
    const double d = a.at(r, a.index_of("d"));
    std::vector<double> phi{a.at(r, a.index_of("lambda1"))};
    const auto psi = compute_psi(g, eta, d, phi);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(a.at(r, a.index_of("psi:coef[" + std::to_string(j + 1) + "]")) ==
            doctest::Approx(psi[j]).epsilon(1e-12));
      CHECK(eta[j] <= cfg.upper_bound);
    }
    CHECK(d <= cfg.upper_bound);
    CHECK(phi[0] <= cfg.upper_bound);
  }
  CHECK(a.diagnostics.count("acceptance:d") == 1);
  CHECK(a.diagnostics.count("swap_rate:0-1") == 1);
}

TEST_CASE("adapted acceptance rates approach the target") {
  const auto pr = make_problem(40, 3, 8);
  auto g = build_independent(3, 0.5);
  g.set_hyperprior("lambda1", GammaHyper{1.0, 1.0});
  RegressionModel m(g, pr.X, pr.y);
  ChainConfig cfg;
  cfg.n_iter = 30000;
  cfg.n_burn = 10000;
  cfg.thin = 20;
  cfg.n_temperatures = 1;
  const auto st = run_chain(m, cfg);
  for (const auto& [k, v] : st.diagnostics) {
    if (k.rfind("acceptance:", 0) != 0) continue;
    CAPTURE(k);
    CHECK(std::abs(v - 0.3) < 0.05);
  }
}

TEST_CASE("tempering moves between the modes of a collinear problem") {
  // Two nearly identical columns and a sparse prior: the posterior puts the
  // signal on one column or the other.
  Rng rng(21, 0);
  const Eigen::Index n = 20;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = X(i, 0) + 0.02 * rng.normal();
    y(i) = 2.0 * X(i, 0) + 0.3 * rng.normal();
  }
  RegressionModel m(build_independent(2, 0.1), X, y);
  auto switches = [&](std::size_t temps) {
    ChainConfig cfg;
    cfg.n_iter = 101000;
    cfg.n_burn = 1000;
    cfg.thin = 1;
    cfg.n_temperatures = temps;
    cfg.ladder_ratio = 3.0;
    cfg.store_eta = false;
    cfg.store_psi = false;
    const auto st = run_chain(m, cfg);
    const auto b1 = st.column("beta:coef[1]");
    const auto b2 = st.column("beta:coef[2]");
    int count = 0;
    for (std::size_t i = 1; i < b1.size(); ++i)
      count += ((b1[i] - b2[i] > 0) != (b1[i - 1] - b2[i - 1] > 0));
    return count;
  };
  const int tempered = switches(4);
  MESSAGE("mode switches: tempered " << tempered << ", untempered " << switches(1));
  CHECK(tempered >= 20);
}

TEST_CASE("effective sample size and batch means") {
  Rng rng(30, 0);
  std::vector<double> iid(20000), ar(20000);
  double x = 0.0;
  for (std::size_t i = 0; i < iid.size(); ++i) {
    iid[i] = rng.normal();
    x = 0.8 * x + std::sqrt(1 - 0.64) * rng.normal();
    ar[i] = x;
  }
  CHECK(effective_sample_size(iid) == doctest::Approx(20000).epsilon(0.1));
  CHECK(effective_sample_size(ar) == doctest::Approx(20000.0 * 0.2 / 1.8).epsilon(0.2));
  CHECK(batch_means_standard_error(ar) == doctest::Approx(std::sqrt(9.0 / 20000)).epsilon(0.3));
}

TEST_CASE("config validation") {
  ChainConfig c;
  c.a = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.n_temperatures = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.n_burn = c.n_iter;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
