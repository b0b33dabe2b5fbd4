#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "hsp/distributions.hpp"
#include "hsp/error.hpp"
#include "hsp/quadrature.hpp"
#include "hsp/rng.hpp"

using namespace hsp;

namespace {

double integrate_density(const std::function<double(double)>& logf) {
  return integrate([&](double x) { return x > 0.0 ? std::exp(logf(x)) : 0.0; }, 0.0, INFINITY).value[0];
}

}  // namespace

TEST_CASE("gamma log density matches the closed form") {
  const GammaParams g{2.5, 1.5};
  const double x = 0.8;
  const double expect = 2.5 * std::log(1.5) - std::lgamma(2.5) + 1.5 * std::log(x) - 1.5 * x;
  CHECK(gamma_logdensity(x, g) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_logdensity(-1.0, g), DomainError);
  CHECK_THROWS_AS(GammaParams({0.0, 1.0}).validate(), DomainError);
}

TEST_CASE("gamma-gamma density integrates to one and matches the beta-prime form") {
  for (const GammaGammaParams p : {GammaGammaParams{0.5, 3.0, 2.0}, GammaGammaParams{2.0, 1.5, 0.3}}) {
    CHECK(integrate_density([&](double x) { return gg_logdensity(x, p); }) == doctest::Approx(1.0).epsilon(1e-8));
    // Psi / scale is beta-prime(shape, tail).
    const double x = 0.7;
    const double u = x / p.scale;
    const double bp = std::lgamma(p.shape + p.tail) - std::lgamma(p.shape) - std::lgamma(p.tail) +
                      (p.shape - 1.0) * std::log(u) - (p.shape + p.tail) * std::log1p(u) - std::log(p.scale);
    CHECK(gg_logdensity(x, p) == doctest::Approx(bp).epsilon(1e-13));
  }
}

TEST_CASE("gamma-gamma mean needs tail above one") {
  CHECK(GammaGammaParams({2.0, 3.0, 4.0}).mean() == doctest::Approx(4.0));
  CHECK_THROWS_AS(GammaGammaParams({2.0, 1.0, 4.0}).mean(), DomainError);
}

TEST_CASE("gamma-gamma sampler moments and median") {
  Rng rng(11, 0);
  const GammaGammaParams p{1.5, 6.0, 2.0};
  const std::size_t n = 400000;
  double s = 0.0;
  std::vector<double> xs(n);
  for (auto& x : xs) {
    x = gg_sample(p, rng);
    s += x;
  }
  const double mean = s / n;
  const double expect = p.shape * p.scale / (p.tail - 1.0);
  // variance = scale^2 shape (shape + tail - 1) / ((tail - 1)^2 (tail - 2))
  const double var = p.scale * p.scale * p.shape * (p.shape + p.tail - 1.0) / ((p.tail - 1.0) * (p.tail - 1.0) * (p.tail - 2.0));
  CHECK(std::abs(mean - expect) < 4.0 * std::sqrt(var / n));

  const GammaGammaParams sym{0.7, 0.7, 3.0};
  std::size_t below = 0;
  for (std::size_t i = 0; i < n; ++i) below += gg_sample(sym, rng) < 3.0;
  CHECK(std::abs(static_cast<double>(below) / n - 0.5) < 4.0 * std::sqrt(0.25 / n));
}

TEST_CASE("log sample stays finite deep in the left tail") {
  Rng rng(5, 0);
  const GammaGammaParams p{0.01, 3.0, 1.0};
  double lo = 0.0;
  for (int i = 0; i < 10000; ++i) lo = std::min(lo, gg_log_sample(p, rng));
  CHECK(std::isfinite(lo));
  CHECK(lo < -745.0);  // exp would underflow
}

TEST_CASE("product of two gammas density") {
  for (auto [l1, l2] : {std::pair{0.5, 1.5}, std::pair{2.0, 2.0}, std::pair{0.3, 3.1}})
    CHECK(integrate_density([&](double x) { return product_two_gammas_logdensity(x, l1, l2); }) ==
          doctest::Approx(1.0).epsilon(1e-7));
  // Equal shapes 1, 1: density 2 K_0(2 sqrt(x)).
  const double x = 0.4;
  CHECK(std::exp(product_two_gammas_logdensity(x, 1.0, 1.0)) ==
        doctest::Approx(2.0 * 0.2916752064075817 /* K_0(2 sqrt 0.4) */).epsilon(1e-12));
}

TEST_CASE("product of two gammas agrees with simulated moments") {
  Rng rng(3, 0);
  const double l1 = 1.5, l2 = 2.5;
  const std::size_t n = 200000;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += rng.gamma(l1) * rng.gamma(l2);
  const double m = integrate([&](double x) { return x > 0 ? x * std::exp(product_two_gammas_logdensity(x, l1, l2)) : 0.0; },
                             0.0, INFINITY)
                       .value[0];
  CHECK(m == doctest::Approx(l1 * l2).epsilon(1e-7));
  const double var = l1 * l2 * (l1 + l2 + 1.0);  // E[X^2 Y^2] - (E XY)^2
  CHECK(std::abs(s / n - l1 * l2) < 4.0 * std::sqrt(var / n));
}

TEST_CASE("mixing law helpers") {
  const MixingLaw g = GammaParams{0.4, 2.0};
  const MixingLaw gg = GammaGammaParams{0.6, 3.0, 1.0};
  const MixingLaw pm = PointMass{2.0};
  CHECK(mixing_mean(g) == doctest::Approx(0.2));
  CHECK(mixing_mean(gg) == doctest::Approx(0.3));
  CHECK(mixing_mean(pm) == 2.0);
  CHECK(mixing_sparsity_shape(g) == 0.4);
  CHECK(mixing_sparsity_shape(gg) == 0.6);
  CHECK(std::isinf(mixing_sparsity_shape(pm)));
  CHECK(mixing_logdensity(pm, 2.0) == 0.0);
  CHECK(std::isinf(mixing_logdensity(pm, 1.0)));
  Rng rng(1, 0);
  CHECK(mixing_sample(pm, rng) == 2.0);
  CHECK_THROWS_AS(validate(MixingLaw{PointMass{-1.0}}), DomainError);
}

TEST_CASE("random number generator moments") {
  Rng rng(42, 0);
  const std::size_t n = 400000;
  for (double shape : {0.05, 0.5, 1.0, 7.0}) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = rng.gamma(shape, 2.0);
      s += x;
      s2 += x * x;
    }
    const double mean = shape / 2.0, var = shape / 4.0;
    CAPTURE(shape);
    CHECK(std::abs(s / n - mean) < 4.0 * std::sqrt(var / n));
    CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(var).epsilon(0.05));
  }
  double b = 0.0;
  for (std::size_t i = 0; i < n; ++i) b += rng.beta(2.0, 6.0);
  CHECK(std::abs(b / n - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / 9.0 / n));
  Rng a1(7, 3), a2(7, 3), a3(7, 4);
  CHECK(a1.next_u64() == a2.next_u64());
  CHECK(a1.next_u64() != a3.next_u64());
}

TEST_CASE("sparsity shape of a single gamma") {
  Rng rng(9, 0);
  const auto grid = default_eps_grid();
  REQUIRE(grid.size() == 12);
  CHECK(grid.front() == doctest::Approx(1e-2));
  CHECK(grid.back() == doctest::Approx(1e-5));
  const auto est = estimate_sparsity_shape([](Rng& r) { return r.gamma(0.4); }, 1000000, grid, rng);
  CHECK(est.shape == doctest::Approx(0.4).epsilon(0.05));
  CHECK(est.counts.size() == grid.size());
  CHECK(std::is_sorted(est.counts.rbegin(), est.counts.rend()));
}

TEST_CASE("sparsity shape estimator preconditions") {
  Rng rng(1, 0);
  const auto grid = default_eps_grid();
  CHECK_THROWS_AS(estimate_sparsity_shape([](Rng& r) { return r.gamma(0.4); }, 1000, grid, rng), ConfigError);
  std::vector<double> bad{1e-3, 1e-2};
  CHECK_THROWS_AS(estimate_sparsity_shape([](Rng& r) { return r.gamma(0.4); }, 1000000, bad, rng), ConfigError);
  std::vector<double> too_big{0.5, 1e-3};
  CHECK_THROWS_AS(estimate_sparsity_shape([](Rng& r) { return r.gamma(0.4); }, 1000000, too_big, rng), ConfigError);
  try {
    estimate_sparsity_shape([](Rng&) { return 1.0; }, 1000000, grid, rng);
    FAIL("expected InsufficientDataError");
  } catch (const InsufficientDataError& e) {
    CHECK(e.observed() == 0);
  }
}
