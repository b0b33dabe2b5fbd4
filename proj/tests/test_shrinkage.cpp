#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "hsp/error.hpp"
#include "hsp/shrinkage.hpp"

using namespace hsp;

namespace {

std::vector<ShrinkagePrior> assorted_priors() {
  return {ng_prior(0.5, 1.0),
          ng_prior(2.0, 0.5, 1.5),
          ngg_prior(0.3, 3.0, 1.0),
          ngg_prior(1.0, 5.0, 2.0, 0.7),
          {ProductNGPrior{1.0, 0.1, 1.0}, 1.0},
          {ProductNGGPrior{0.8, 0.2, 3.0, 1.0}, 1.0},
          {ShISPrior{1.0, 0.1, 1.0}, 1.0},
          {ScISPrior{1.0, 0.1, 1.0}, 1.0}};
}

}  // namespace

TEST_CASE("ridge case is exact") {
  for (double psi : {0.1, 1.0, 7.5})
    for (double t : {0.0, 0.5, 3.0}) {
      const ShrinkagePrior pr{FixedVariancePrior{psi}, 2.0};
      CHECK(std::abs(shrinkage_at(pr, t).value - 1.0 / (1.0 + psi / 4.0)) < 1e-12);
    }
}

TEST_CASE("the two evaluation routes agree") {
  for (const auto& pr : assorted_priors())
    for (double t : {0.3, 1.0, 2.5, 6.0}) {
      CAPTURE(prior_id(pr));
      CAPTURE(t);
      const auto a = shrinkage_at(pr, t);
      const auto b = shrinkage_by_derivative(pr, t);
      CHECK(std::abs(a.value - b.value) < 1e-4);
      CHECK(a.value > 0.0);
      CHECK(a.value < 1.0);
    }
}

TEST_CASE("Bessel-form density route matches nested quadrature") {
  for (const auto& p : {ProductNGPrior{1.0, 0.1, 1.0}, ProductNGPrior{1.5, 2.5, 0.5}})
    for (double t : {0.5, 2.0, 8.0}) {
      const double a = shrinkage_at({p, 1.0}, t).value;
      const double b = shrinkage_product_ng_bessel(p, 1.0, t).value;
      CHECK(a == doctest::Approx(b).epsilon(1e-7));
    }
}

TEST_CASE("Monte Carlo agrees with quadrature") {
  Rng rng(8, 0);
  for (const auto& pr : assorted_priors()) {
    CAPTURE(prior_id(pr));
    const auto mc = shrinkage_monte_carlo(pr, 1.5, 400000, rng);
    CHECK(std::abs(mc.value - shrinkage_at(pr, 1.5).value) < 4 * mc.abs_error);
  }
}

TEST_CASE("shrinkage depends on t only through the standardized estimate") {
  for (const auto& pr : assorted_priors()) {
    const auto r = rescaled(pr, 3.7);
    CHECK(r.se == doctest::Approx(pr.se * std::sqrt(3.7)));
    CHECK(shrinkage_at(r, 1.2).value == doctest::Approx(shrinkage_at(pr, 1.2).value).epsilon(1e-8));
  }
}

TEST_CASE("value at t = 0 is the prior mean shrinkage") {
  const auto pr = ng_prior(1.0, 1.0);
  const double s0 = shrinkage_at(pr, 0.0).value;
  CHECK(std::isfinite(s0));
  CHECK(s0 == doctest::Approx(shrinkage_at(pr, 1e-4).value).epsilon(1e-6));
  CHECK_THROWS(shrinkage_by_derivative(pr, 0.0));
}

TEST_CASE("shape-induced shrinkage is stronger near zero and weaker in the tail") {
  const auto [shis, scis] = shis_vs_scis(1.0, 0.1, 1.0, {0.5, 8.0});
  CHECK(shis.s_values[0] > scis.s_values[0]);
  CHECK(shis.s_values[1] < scis.s_values[1]);
  CHECK_THROWS_AS(shis_vs_scis(0.1, 0.1, 1.0, {0.5}), ConfigError);
}

TEST_CASE("profiles and output") {
  const auto grid = default_t_grid();
  CHECK(grid.size() == 60);
  CHECK(grid.front() == doctest::Approx(0.1));
  CHECK(grid.back() == doctest::Approx(10.0));
  CHECK_THROWS_AS(profile(ng_prior(1, 1), {1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(profile(ng_prior(1, 1), {}), ConfigError);
  CHECK(figure_priors(1).size() >= 2);
  CHECK(figure_priors(3).size() == 3);
  CHECK_THROWS_AS(figure_priors(4), ConfigError);
  for (const auto& pr : figure_priors(2)) CHECK(prior_id(pr).find(',') == std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "hsp_profiles_test.csv";
  write_profiles_csv(path.string(), {profile(ng_prior(1, 1), {0.5, 1.0})});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,S,prior-id,est-error");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  std::filesystem::remove(path);
}

TEST_CASE("invalid priors") {
  CHECK_THROWS(ng_prior(-1.0, 1.0).validate());
  CHECK_THROWS(ngg_prior(1.0, 1.0, 1.0).validate());
  CHECK_THROWS((ShrinkagePrior{FixedVariancePrior{1.0}, 0.0}).validate());
}
