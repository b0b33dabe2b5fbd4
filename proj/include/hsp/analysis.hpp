#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hsp/design.hpp"
#include "hsp/hyperprior.hpp"
#include "hsp/prior_graph.hpp"
#include "hsp/sample_store.hpp"
#include "hsp/sampler.hpp"

namespace hsp {

// ---------------------------------------------------------------------------
// Data

/// Numeric table read from CSV. values is rows x columns.
struct DataTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t index_of(const std::string& name) const;
};

/// Reads a header row and numeric cells. Fields may be double-quoted. Missing
/// or non-numeric cells raise DataError naming the row and column.
DataTable ingest_csv(const std::string& path);

/// Exactly two distinct values.
bool is_binary(std::span<const double> x);

// ---------------------------------------------------------------------------
// Configuration

enum class ResponseTransform { None, Log };
enum class PriorKind { Hierarchical, IndependentNGG };
enum class Heredity { Strong, Weak };

/// Starting value and optional prior of a shape hyperparameter (no prior
/// means the value is held fixed).
struct HyperSetting {
  double value = 1.0;
  std::optional<HyperPrior> prior;
};

struct PriorSettings {
  PriorKind kind = PriorKind::Hierarchical;
  Heredity heredity = Heredity::Strong;  // linear-interaction models only
  double c = 3.0;
  HyperSetting lambda1{1.0, GammaHyper{1.0, 1.0}};
  HyperSetting lambda2{0.1, GammaHyper{1.0, 10.0}};  // per variable for GAM
  HyperSetting lambda3{0.1, GammaHyper{1.0, 10.0}};  // per variable
  HyperSetting lambda4{0.01, GammaHyper{1.0, 100.0}};  // per pair
  /// When set, lambda2 = ratio * lambda1 with this setting for the ratio.
  std::optional<HyperSetting> lambda2_ratio;
  HyperPrior d_prior = HeavyTailScaleHyper{};
};

struct RunConfig {
  std::string data_path;
  std::string response;
  ResponseTransform response_transform = ResponseTransform::None;
  std::vector<std::string> predictors;  // empty: every column except the response
  ModelFamily family = ModelFamily::GAM;
  std::size_t K = 10;
  std::map<std::string, Transform> transforms;
  bool normalize = true;
  /// Binary predictors; when absent they are detected (exactly two values).
  std::optional<std::vector<std::string>> binary;
  PriorSettings prior;
  ChainConfig chain;
  std::size_t cv_folds = 5;
  std::string output_dir = "out";
  bool write_samples = true;

  /// Structural checks that need no data.
  void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_run_config(const std::string& path);

std::string family_name(ModelFamily f);

// ---------------------------------------------------------------------------
// Model assembly

/// Raw predictors and response pulled from a table per the config.
struct Dataset {
  std::vector<std::string> predictor_names;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;  // after the response transform
  std::vector<std::size_t> binary;  // predictor indices
};

Dataset prepare_dataset(const RunConfig& config, const DataTable& table);

/// Prior graph matching the design family; node j carries design column j.
PriorGraph build_prior(const RunConfig& config, const DesignMatrix& design, std::size_t p,
                       std::span<const std::size_t> binary);

/// Preprocessing, design and prior for a training set.
struct ModelSetup {
  DesignSpec spec;
  Preprocessor preprocessor;
  DesignMatrix design;
  PriorGraph graph;
};

ModelSetup setup_model(const RunConfig& config, const Dataset& data, const Eigen::MatrixXd& X_train);

/// Psi columns kept in the sample store: nodes that are not basis nodes.
std::vector<bool> variable_level_mask(const PriorGraph& g);

// ---------------------------------------------------------------------------
// Summaries

/// 2.5%, 50% and 97.5% percentiles.
struct PosteriorSummary {
  double median = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Percentile with linear interpolation between order statistics at
/// h = (n - 1) q (the "type 7" convention). Requires sorted input.
double sorted_quantile(std::span<const double> sorted, double q);

/// Requires at least 100 draws.
PosteriorSummary posterior_summary(std::span<const double> draws);

struct EffectCurve {
  std::string variable;
  std::vector<double> x;      // normalized scale, 101 points on [0, 1]
  std::vector<double> x_raw;  // original scale
  std::vector<PosteriorSummary> f;
  /// f(x) / x; empty optional below x = 0.01.
  std::vector<std::optional<PosteriorSummary>> beta;
};

/// Main-effect curves f_j(x) = sum of the variable's linear and hinge terms.
std::vector<EffectCurve> effect_curves(const RunConfig& config, const ModelSetup& setup,
                                       const Dataset& data, const SampleStore& samples);

struct NamedSummary {
  std::string name;
  PosteriorSummary summary;
};

/// One row per stored psi column.
std::vector<NamedSummary> psi_summaries(const SampleStore& samples);
/// One row per hyperparameter (and derived shape) plus d and sigma2.
std::vector<NamedSummary> hyper_summaries(const PriorGraph& g, const SampleStore& samples);

// ---------------------------------------------------------------------------
// Runs

struct FitResult {
  ModelSetup setup;
  SampleStore samples;
  std::vector<EffectCurve> curves;
  std::vector<NamedSummary> psi;
  std::vector<NamedSummary> hypers;
};

/// Fits on the whole data set. Writes samples.csv (if enabled),
/// effects.csv, psi_summary.csv, hyper_summary.csv and manifest.json into
/// output_dir when it is nonempty.
FitResult fit(const RunConfig& config);
FitResult fit(const RunConfig& config, const Dataset& data);

struct CVReport {
  std::size_t folds = 0;
  double rmse = 0.0;
  double lps = 0.0;
  std::vector<double> fold_rmse;
  std::vector<double> fold_lps;
  std::vector<std::size_t> fold_sizes;
};

/// Fold id per observation: seeded uniform shuffle, then contiguous blocks.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Point predictions and log predictive densities for held-out rows of an
/// already-built design. The point prediction is the median of the posterior
/// predictive mixture of N(alpha + x beta, sigma2) over draws, found exactly
/// rather than from simulated noise, so it does not depend on row order.
struct Prediction {
  std::vector<double> median;
  std::vector<double> log_density;
};

Prediction predict(const SampleStore& samples, std::size_t n_coef, const Eigen::MatrixXd& design,
                   const Eigen::VectorXd& y);

/// k-fold cross-validation with RMSE of the predictive median and
/// LPS = -mean log predictive density (smaller is better).
CVReport cross_validate(const RunConfig& config, std::size_t folds);
CVReport cross_validate(const RunConfig& config, const Dataset& data, std::size_t folds);

/// Writes cv.csv and manifest.json into config.output_dir.
void write_cv_report(const RunConfig& config, const CVReport& report);

// ---------------------------------------------------------------------------
// Verification of the sparsity-shape results

struct VerificationRow {
  std::string name;
  double expected = 0.0;
  double estimate = 0.0;
  double standard_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct VerificationOptions {
  std::size_t n_draws = 10'000'000;
  std::uint64_t seed = 20240601;
};

/// Sparsity-shape estimates for products and sums of gamma and gamma-gamma
/// factors, plus the K-density checks. Failures are rows, not exceptions.
std::vector<VerificationRow> verify_theorems(const VerificationOptions& opt = {});
void write_verification_csv(const std::string& path, const std::vector<VerificationRow>& rows);

/// Largest relative gap between the K-density and a histogram of n products
/// of Ga(l1, 1) and Ga(l2, 1) draws, over `bins` equal bins on [lo, hi]; each
/// bin is compared with the integral of the density over it.
double k_density_histogram_gap(double l1, double l2, std::size_t n, double lo, double hi,
                               std::size_t bins, std::uint64_t seed);
/// Density at psi divided by its small-value form
/// G(|l1 - l2|) / (G(l1) G(l2)) psi^{min(l1, l2) - 1}.
double k_density_small_value_ratio(double l1, double l2, double psi);

// ---------------------------------------------------------------------------
// Output helpers

void write_summaries_csv(const std::string& path, const std::vector<NamedSummary>& rows);
void write_effects_csv(const std::string& path, const std::vector<EffectCurve>& curves);
/// Reads a samples CSV and writes summary.csv with one row per column.
std::vector<NamedSummary> summarize_samples(const std::string& samples_csv);

}  // namespace hsp
