#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>

#include "hsp/analysis.hpp"
#include "hsp/error.hpp"

using namespace hsp;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const auto p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

std::string error_message(const std::string& csv) {
  const auto p = write_temp("hsp_ingest_test.csv", csv);
  try {
    ingest_csv(p.string());
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

RunConfig quick_config() {
  RunConfig c;
  c.response = "y";
  c.family = ModelFamily::GAM;
  c.K = 3;
  c.chain.n_iter = 2500;
  c.chain.n_burn = 500;
  c.chain.thin = 10;
  c.chain.n_temperatures = 1;
  c.chain.store_eta = false;
  c.output_dir = "";
  return c;
}

}  // namespace

TEST_CASE("percentiles use interpolation between order statistics") {
  std::vector<double> x(1000);
  std::iota(x.begin(), x.end(), 1.0);
  const auto s = posterior_summary(x);
  CHECK(s.median == doctest::Approx(500.5));
  CHECK(s.ci_low == doctest::Approx(25.975));
  CHECK(s.ci_high == doctest::Approx(975.025));
  CHECK(sorted_quantile(x, 0.0) == 1.0);
  CHECK(sorted_quantile(x, 1.0) == 1000.0);
}

TEST_CASE("summaries of constant and normal draws") {
  const std::vector<double> c(200, 3.25);
  const auto s = posterior_summary(c);
  CHECK(s.median == 3.25);
  CHECK(s.ci_low == 3.25);
  CHECK(s.ci_high == 3.25);
  CHECK_THROWS_AS(posterior_summary(std::vector<double>(99, 1.0)), InsufficientDataError);

  Rng rng(1, 0);
  std::vector<double> z(1000000);
  for (auto& v : z) v = rng.normal();
  const auto n = posterior_summary(z);
  CHECK(std::abs(n.median) < 0.01);
  CHECK(n.ci_low == doctest::Approx(-1.959964).epsilon(0.01));
  CHECK(n.ci_high == doctest::Approx(1.959964).epsilon(0.01));
}

TEST_CASE("ingest reads quoted headers and reports bad cells") {
  const auto p = write_temp("hsp_ingest_ok.csv", "\"a\",b\n1,2.5\n\"3\",-4e-1\n");
  const auto t = ingest_csv(p.string());
  CHECK(t.columns == std::vector<std::string>{"a", "b"});
  CHECK(t.rows() == 2);
  CHECK(t.values(1, 1) == -0.4);
  CHECK(t.index_of("b") == 1);
  CHECK_THROWS_AS(t.index_of("z"), ConfigError);

  const auto missing = error_message("a,b\n1,2\n3,\n");
  CHECK(missing.find("row 2") != std::string::npos);
  CHECK(missing.find("'b'") != std::string::npos);
  const auto text = error_message("a,b\n1,x\n");
  CHECK(text.find("row 1") != std::string::npos);
  CHECK(!error_message("a,b\n1,2,3\n").empty());
  CHECK_THROWS_AS(ingest_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("bundled CPU data") {
  const auto cfg = load_run_config(std::string(HSP_SOURCE_DIR) + "/configs/cpu.json");
  const auto t = ingest_csv(cfg.data_path);
  CHECK(t.rows() == 209);
  const auto d = prepare_dataset(cfg, t);
  CHECK(d.predictor_names.size() == 5);
  CHECK(d.binary.empty());
  CHECK(d.y.minCoeff() > 0.0);  // log performance
  const auto setup = setup_model(cfg, d, d.X);
  CHECK(setup.design.cols() == 1065);
  CHECK(setup.graph.size() == 1065);
  CHECK(setup.graph.hyperparameters()[setup.graph.find_hyperparameter("r")].derived_name == "lambda2");
}

TEST_CASE("binary detection") {
  CHECK(is_binary(std::vector<double>{0, 1, 1, 0}));
  CHECK(!is_binary(std::vector<double>{0, 1, 2}));
  CHECK(!is_binary(std::vector<double>{1, 1}));
}

TEST_CASE("fold assignment is a seeded partition") {
  const auto f = fold_assignment(97, 5, 3);
  std::vector<std::size_t> size(5, 0);
  for (auto k : f) {
    REQUIRE(k < 5);
    ++size[k];
  }
  for (auto s : size) CHECK((s == 19 || s == 20));
  CHECK(fold_assignment(97, 5, 3) == f);
  CHECK(fold_assignment(97, 5, 4) != f);
  CHECK_THROWS(fold_assignment(3, 5, 1));
}

TEST_CASE("predictions do not depend on row order") {
  SampleStore s({"alpha", "sigma2", "beta:x"});
  Rng rng(2, 0);
  for (int r = 0; r < 300; ++r) {
    const double row[] = {0.5 + 0.1 * rng.normal(), 0.2 + 0.1 * rng.uniform(), 2.0 + 0.1 * rng.normal()};
    s.add_row(row);
  }
  Eigen::MatrixXd X(4, 1);
  X << 0.1, 0.5, 0.9, 0.3;
  Eigen::VectorXd y(4);
  y << 0.7, 1.4, 2.4, 1.0;
  const auto a = predict(s, 1, X, y);
  const std::vector<Eigen::Index> perm{2, 0, 3, 1};
  const auto b = predict(s, 1, X(perm, Eigen::all), y(perm));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(b.median[i] == a.median[static_cast<std::size_t>(perm[i])]);
    CHECK(b.log_density[i] == a.log_density[static_cast<std::size_t>(perm[i])]);
  }
  // Symmetric mixture: the median is the mean of the component means.
  CHECK(a.median[1] == doctest::Approx(0.5 + 2.0 * 0.5).epsilon(0.02));
}

TEST_CASE("cross-validation recovers an almost noiseless linear signal") {
  Rng rng(5, 0);
  Dataset d;
  d.predictor_names = {"x1", "x2"};
  d.X.resize(60, 2);
  d.y.resize(60);
  for (Eigen::Index i = 0; i < 60; ++i) {
    d.X(i, 0) = rng.uniform();
    d.X(i, 1) = rng.uniform();
    d.y(i) = 1.0 + 2.0 * d.X(i, 0) + 1e-3 * rng.normal();
  }
  const auto rep = cross_validate(quick_config(), d, 5);
  CHECK(rep.fold_rmse.size() == 5);
  CHECK(rep.rmse < 0.02);
  CHECK(rep.lps < -2.0);

  Dataset flat = d;
  flat.y.setConstant(2.0);
  CHECK_THROWS_AS(cross_validate(quick_config(), flat, 5), DataError);
}

TEST_CASE("fit is reproducible byte for byte") {
  Rng rng(6, 0);
  Dataset d;
  d.predictor_names = {"x1", "x2"};
  d.X.resize(40, 2);
  d.y.resize(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    d.X(i, 0) = rng.uniform();
    d.X(i, 1) = rng.uniform();
    d.y(i) = std::sin(3 * d.X(i, 0)) + 0.1 * rng.normal();
  }
  auto run = [&](const std::string& dir) {
    auto c = quick_config();
    c.output_dir = (fs::temp_directory_path() / dir).string();
    fit(c, d);
    std::ifstream in(fs::path(c.output_dir) / "psi_summary.csv");
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const auto a = run("hsp_fit_a"), b = run("hsp_fit_b");
  CHECK(!a.empty());
  CHECK(a == b);
  fs::remove_all(fs::temp_directory_path() / "hsp_fit_a");
  fs::remove_all(fs::temp_directory_path() / "hsp_fit_b");
}

TEST_CASE("config errors") {
  nlohmann::json j{{"response", "y"}, {"bogus", 1}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = {{"response", "y"}, {"design", {{"family", "spline"}}}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = {{"response", "y"}, {"design", {{"K", 1}}}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = {{"response", "y"}, {"chain", {{"a", 0.4}}}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = {{"response", "y"}, {"prior", {{"lambda1", {{"prior", {{"type", "cauchy"}}}}}}}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"data", "x.csv"}}), ConfigError);

  const auto c = load_run_config(std::string(HSP_SOURCE_DIR) + "/configs/cpu.json");
  const auto again = config_from_json(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));
}

TEST_CASE("variable-level psi mask") {
  std::vector<double> l3(3, 0.1), l4(3, 0.01);
  const auto g = build_gam_interactions(3, 2, 1.0, 0.3, l3, l4);
  const auto mask = variable_level_mask(g);
  CHECK(std::count(mask.begin(), mask.end(), true) == 6);
}
