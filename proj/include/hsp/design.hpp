#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hsp {

enum class ModelFamily { LinearInteractions, GAM, GAMInteractions };

enum class Transform { None, Log1p };

/// Recipe for turning raw predictors into a design matrix.
struct DesignSpec {
  ModelFamily family = ModelFamily::GAM;
  std::size_t K = 10;
  /// Per predictor; empty means no transforms.
  std::vector<Transform> transforms;
  bool normalize = true;
  /// Predictor indices that only get a linear column.
  std::vector<std::size_t> binary_columns;
};

enum class ColumnKind { MainLinear, InteractionLinear, MainBasis, InteractionBasis };

/// Which term a design column carries. j, k are predictors (k < j for pairs);
/// l, m are knot indices.
struct ColumnRole {
  ColumnKind kind = ColumnKind::MainLinear;
  std::size_t j = 0;
  std::size_t k = 0;
  std::size_t l = 0;
  std::size_t m = 0;
};

/// Design matrix without the intercept column, plus the prior-graph node each
/// column's coefficient attaches to. Columns follow the node order of the
/// matching prior builder, so node_ids[c] == c for the built-in families.
struct DesignMatrix {
  Eigen::MatrixXd values;
  std::vector<ColumnRole> roles;
  std::vector<std::size_t> node_ids;

  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

/// Training-set extremes used to map a predictor onto [0, 1].
struct MinMax {
  double min = 0.0;
  double max = 1.0;
  double apply(double x) const { return (x - min) / (max - min); }
};

/// Throws DataError for a constant (or empty) column.
MinMax fit_minmax(std::span<const double> x);
/// (x - min) / (max - min) with the column's own extremes. Values from other
/// data mapped through the same MinMax may fall outside [0, 1]; no clamping.
std::vector<double> normalize_minmax(std::span<const double> x, MinMax* fitted = nullptr);

/// Knot tau_k = (k - 1) / (K - 1), k = 1..K.
double knot(std::size_t k, std::size_t K);
/// Hinge basis ((x - tau_k)_+ for k = 1..K); requires K >= 2.
std::vector<double> spline_basis(double x, std::size_t K);

/// p mains then p(p-1)/2 products X_j X_k (j = 2..p, k < j).
DesignMatrix build_linear_interactions(const Eigen::MatrixXd& X);
/// p linear columns, then K hinge columns for each non-binary predictor.
DesignMatrix build_gam_design(const Eigen::MatrixXd& X, std::size_t K,
                              std::span<const std::size_t> binary_columns = {});
/// Mains, pairwise products, main hinges and products of hinges
/// g(X_j, tau_l) g(X_k, tau_m) for l, m = 1..K; p + P + pK + P K^2 columns
/// with P = p(p-1)/2.
DesignMatrix build_gam_interaction_design(const Eigen::MatrixXd& X, std::size_t K);

/// Transform + min-max state fitted on training predictors and replayed on
/// held-out rows.
class Preprocessor {
 public:
  Preprocessor() = default;
  explicit Preprocessor(const DesignSpec& spec) : spec_(spec) {}

  Eigen::MatrixXd fit_transform(const Eigen::MatrixXd& X);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
  const std::vector<MinMax>& ranges() const { return ranges_; }

 private:
  Eigen::MatrixXd apply_transforms(const Eigen::MatrixXd& X) const;

  DesignSpec spec_;
  std::vector<MinMax> ranges_;
};

/// Builds the design for spec.family from already-preprocessed predictors.
DesignMatrix build_design(const DesignSpec& spec, const Eigen::MatrixXd& X);

}  // namespace hsp
