#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "hsp/analysis.hpp"
#include "hsp/error.hpp"
#include "hsp/shrinkage.hpp"

namespace {

using nlohmann::json;

int report_error(const std::string& kind, const std::string& message, int code) {
  json rec{{"status", "error"}, {"kind", kind}, {"message", message}};
  std::cerr << rec.dump() << std::endl;
  return code;
}

hsp::ShrinkagePrior prior_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  const double se = j.value("se", 1.0);
  const double d = j.value("d", 1.0 / (se * se));
  hsp::ShrinkagePrior p;
  if (type == "ng") {
    p = hsp::ng_prior(j.at("lambda").get<double>(), d, se);
  } else if (type == "ngg") {
    p = hsp::ngg_prior(j.at("lambda").get<double>(), j.value("c", 3.0), d, se);
  } else if (type == "product_ng") {
    p = {hsp::ProductNGPrior{j.at("lambda1"), j.at("lambda2"), d}, se};
  } else if (type == "product_ngg") {
    p = {hsp::ProductNGGPrior{j.at("lambda1"), j.at("lambda2"), j.value("c", 3.0), d}, se};
  } else if (type == "shis") {
    p = {hsp::ShISPrior{j.at("lambda1"), j.at("lambda2"), d}, se};
  } else if (type == "scis") {
    p = {hsp::ScISPrior{j.at("lambda1"), j.at("lambda2"), d}, se};
  } else if (type == "fixed") {
    p = {hsp::FixedVariancePrior{j.at("psi")}, se};
  } else {
    throw hsp::ConfigError("unknown shrinkage prior type '" + type +
                           "' (ng, ngg, product_ng, product_ngg, shis, scis, fixed)");
  }
  p.validate();
  return p;
}

std::vector<double> parse_grid(const std::string& spec) {
  if (spec.empty()) return hsp::default_t_grid();
  double a = 0.0, b = 0.0;
  std::size_t n = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(spec);
  if (!(is >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || (n > 1 && !(b > a)))
    throw hsp::ConfigError("grid must look like lo:hi:count, got '" + spec + "'");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

void write_manifest(const std::string& dir, json m) {
  std::ofstream out(std::filesystem::path(dir) / "manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical sparsity priors for Bayesian regression"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto* fit_cmd = app.add_subcommand("fit", "fit a model and write posterior summaries");
  fit_cmd->add_option("-c,--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("-o,--out", out_dir, "output directory (overrides the config)");
  fit_cmd->add_option("-s,--seed", seed, "random seed (overrides the config)")->each([&](const std::string&) { seed_set = true; });

  std::size_t folds = 0;
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation (RMSE and log predictive score)");
  cv_cmd->add_option("-c,--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cv_cmd->add_option("-o,--out", out_dir, "output directory (overrides the config)");
  cv_cmd->add_option("-s,--seed", seed, "random seed (overrides the config)")->each([&](const std::string&) { seed_set = true; });
  cv_cmd->add_option("-k,--folds", folds, "number of folds (overrides the config)");

  int figure = 0;
  double lambda2 = 0.1;
  std::string prior_json, grid_spec, shrink_out = "shrinkage.csv";
  auto* shrink_cmd = app.add_subcommand("shrink", "shrinkage profiles as CSV");
  shrink_cmd->add_option("-f,--figure", figure, "published comparison (1, 2 or 3)")->check(CLI::Range(1, 3));
  shrink_cmd->add_option("--lambda2", lambda2, "sparsity shape of the comparison priors");
  shrink_cmd->add_option("-p,--prior", prior_json,
                         R"(prior as JSON, e.g. {"type":"product_ng","lambda1":1,"lambda2":0.1,"d":1})");
  shrink_cmd->add_option("-g,--grid", grid_spec, "t grid lo:hi:count (default 0.1:10:60)");
  shrink_cmd->add_option("-o,--out", shrink_out, "output CSV");

  std::size_t draws = 10'000'000;
  std::string verify_out = "verify";
  bool strict = false;
  auto* verify_cmd = app.add_subcommand("verify", "check sparsity-shape results by simulation");
  verify_cmd->add_option("-n,--draws", draws, "draws per case");
  verify_cmd->add_option("-s,--seed", seed, "random seed")->each([&](const std::string&) { seed_set = true; });
  verify_cmd->add_option("-o,--out", verify_out, "output directory");
  verify_cmd->add_flag("--strict", strict, "exit nonzero when a case fails");

  std::string samples_path, summary_out = "summary.csv";
  auto* sum_cmd = app.add_subcommand("summarize", "posterior median and 95% interval of every sample column");
  sum_cmd->add_option("samples", samples_path, "samples CSV")->required()->check(CLI::ExistingFile);
  sum_cmd->add_option("-o,--out", summary_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("UsageError", e.what(), 2);
  }

  try {
    if (*fit_cmd || *cv_cmd) {
      hsp::RunConfig config = hsp::load_run_config(config_path);
      if (!out_dir.empty()) config.output_dir = out_dir;
      if (seed_set) config.chain.seed = seed;
      if (*fit_cmd) {
        const auto res = hsp::fit(config);
        std::cout << "wrote " << config.output_dir << " (" << res.samples.rows() << " draws)\n";
      } else {
        const auto rep = hsp::cross_validate(config, folds ? folds : config.cv_folds);
        hsp::write_cv_report(config, rep);
        std::cout << "rmse " << rep.rmse << "  lps " << rep.lps << '\n';
      }
    } else if (*shrink_cmd) {
      const auto grid = parse_grid(grid_spec);
      std::vector<hsp::ShrinkagePrior> priors;
      if (!prior_json.empty()) {
        json j;
        try {
          j = json::parse(prior_json);
        } catch (const json::exception& e) {
          throw hsp::ConfigError(std::string("--prior is not valid JSON: ") + e.what());
        }
        try {
          if (j.is_array())
            for (const auto& e : j) priors.push_back(prior_from_json(e));
          else
            priors.push_back(prior_from_json(j));
        } catch (const json::exception& e) {
          throw hsp::ConfigError(std::string("bad --prior: ") + e.what());
        }
      }
      if (figure) {
        const auto fp = hsp::figure_priors(figure, lambda2);
        priors.insert(priors.end(), fp.begin(), fp.end());
      }
      if (priors.empty()) throw hsp::ConfigError("give --figure and/or --prior");
      std::vector<hsp::ShrinkageProfile> profiles;
      for (const auto& p : priors) profiles.push_back(hsp::profile(p, grid));
      hsp::write_profiles_csv(shrink_out, profiles);
      std::cout << "wrote " << shrink_out << " (" << profiles.size() << " profiles)\n";
    } else if (*verify_cmd) {
      hsp::VerificationOptions opt;
      opt.n_draws = draws;
      if (seed_set) opt.seed = seed;
      const auto rows = hsp::verify_theorems(opt);
      std::filesystem::create_directories(verify_out);
      hsp::write_verification_csv((std::filesystem::path(verify_out) / "verification.csv").string(), rows);
      std::size_t failed = 0;
      for (const auto& r : rows) {
        std::cout << (r.pass ? "pass " : "FAIL ") << r.name << "  estimate " << r.estimate << "  expected "
                  << r.expected << " +/- " << r.tolerance << '\n';
        failed += !r.pass;
      }
      write_manifest(verify_out, {{"command", "verify"},
                                  {"draws", opt.n_draws},
                                  {"seed", opt.seed},
                                  {"cases", rows.size()},
                                  {"failed", failed},
                                  {"files", {"verification.csv"}}});
      if (strict && failed) return 1;
    } else if (*sum_cmd) {
      const auto rows = hsp::summarize_samples(samples_path);
      hsp::write_summaries_csv(summary_out, rows);
      std::cout << "wrote " << summary_out << " (" << rows.size() << " columns)\n";
    }
  } catch (const hsp::ConfigError& e) {
    return report_error("ConfigError", e.what(), 2);
  } catch (const hsp::DataError& e) {
    return report_error("DataError", e.what(), 3);
  } catch (const hsp::InsufficientDataError& e) {
    return report_error("InsufficientDataError", e.what(), 3);
  } catch (const hsp::NumericalError& e) {
    return report_error("NumericalError", e.what(), 4);
  } catch (const std::exception& e) {
    return report_error("Error", e.what(), 1);
  }
  return 0;
}
