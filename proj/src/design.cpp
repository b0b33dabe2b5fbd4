#include "hsp/design.hpp"

#include <algorithm>
#include <cmath>

#include "hsp/error.hpp"

namespace hsp {

MinMax fit_minmax(std::span<const double> x) {
  if (x.empty()) throw DataError("cannot normalize an empty column");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (!(*hi > *lo)) throw DataError("cannot normalize a constant column");
  return {*lo, *hi};
}

std::vector<double> normalize_minmax(std::span<const double> x, MinMax* fitted) {
  const MinMax mm = fit_minmax(x);
  if (fitted) *fitted = mm;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = mm.apply(x[i]);
  // Exact endpoints regardless of rounding in (x - min) / (max - min).
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == mm.min) out[i] = 0.0;
    if (x[i] == mm.max) out[i] = 1.0;
  }
  return out;
}

double knot(std::size_t k, std::size_t K) {
  return static_cast<double>(k - 1) / static_cast<double>(K - 1);
}

std::vector<double> spline_basis(double x, std::size_t K) {
  if (K < 2) throw ConfigError("spline basis needs K >= 2");
  std::vector<double> b(K);
  for (std::size_t k = 1; k <= K; ++k) b[k - 1] = std::max(0.0, x - knot(k, K));
  return b;
}

namespace {

double hinge(double x, std::size_t l, std::size_t K) { return std::max(0.0, x - knot(l + 1, K)); }

void push_column(DesignMatrix& dm, Eigen::Index c, ColumnRole role) {
  dm.roles.push_back(role);
  dm.node_ids.push_back(static_cast<std::size_t>(c));
}

}  // namespace

DesignMatrix build_linear_interactions(const Eigen::MatrixXd& X) {
  const auto n = X.rows();
  const auto p = static_cast<std::size_t>(X.cols());
  if (p < 2) throw ConfigError("interaction design needs p >= 2");
  DesignMatrix dm;
  dm.values.resize(n, static_cast<Eigen::Index>(p + p * (p - 1) / 2));
  Eigen::Index c = 0;
  for (std::size_t j = 0; j < p; ++j, ++c) {
    dm.values.col(c) = X.col(j);
    push_column(dm, c, {ColumnKind::MainLinear, j});
  }
  for (std::size_t j = 1; j < p; ++j)
    for (std::size_t k = 0; k < j; ++k, ++c) {
      dm.values.col(c) = X.col(j).cwiseProduct(X.col(k));
      push_column(dm, c, {ColumnKind::InteractionLinear, j, k});
    }
  return dm;
}

DesignMatrix build_gam_design(const Eigen::MatrixXd& X, std::size_t K,
                              std::span<const std::size_t> binary_columns) {
  if (K < 2) throw ConfigError("GAM design needs K >= 2");
  const auto n = X.rows();
  const auto p = static_cast<std::size_t>(X.cols());
  std::vector<bool> binary(p, false);
  for (std::size_t b : binary_columns) {
    if (b >= p) throw ConfigError("binary column index out of range");
    binary[b] = true;
  }
  const auto n_cont = static_cast<std::size_t>(std::count(binary.begin(), binary.end(), false));
  DesignMatrix dm;
  dm.values.resize(n, static_cast<Eigen::Index>(p + n_cont * K));
  Eigen::Index c = 0;
  for (std::size_t j = 0; j < p; ++j, ++c) {
    dm.values.col(c) = X.col(j);
    push_column(dm, c, {ColumnKind::MainLinear, j});
  }
  for (std::size_t j = 0; j < p; ++j) {
    if (binary[j]) continue;
    for (std::size_t l = 0; l < K; ++l, ++c) {
      for (Eigen::Index i = 0; i < n; ++i) dm.values(i, c) = hinge(X(i, j), l, K);
      push_column(dm, c, {ColumnKind::MainBasis, j, 0, l});
    }
  }
  return dm;
}

DesignMatrix build_gam_interaction_design(const Eigen::MatrixXd& X, std::size_t K) {
  if (K < 2) throw ConfigError("GAM design needs K >= 2");
  const auto n = X.rows();
  const auto p = static_cast<std::size_t>(X.cols());
  if (p < 2) throw ConfigError("interaction design needs p >= 2");
  const std::size_t pairs = p * (p - 1) / 2;
  DesignMatrix dm;
  dm.values.resize(n, static_cast<Eigen::Index>(p + pairs + p * K + pairs * K * K));

  // Hinge values per predictor, reused for the tensor-product columns.
  std::vector<Eigen::MatrixXd> H(p, Eigen::MatrixXd(n, static_cast<Eigen::Index>(K)));
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t l = 0; l < K; ++l)
      for (Eigen::Index i = 0; i < n; ++i) H[j](i, static_cast<Eigen::Index>(l)) = hinge(X(i, j), l, K);

  Eigen::Index c = 0;
  for (std::size_t j = 0; j < p; ++j, ++c) {
    dm.values.col(c) = X.col(j);
    push_column(dm, c, {ColumnKind::MainLinear, j});
  }
  std::vector<std::pair<std::size_t, std::size_t>> pair_idx;
  for (std::size_t j = 1; j < p; ++j)
    for (std::size_t k = 0; k < j; ++k, ++c) {
      pair_idx.emplace_back(j, k);
      dm.values.col(c) = X.col(j).cwiseProduct(X.col(k));
      push_column(dm, c, {ColumnKind::InteractionLinear, j, k});
    }
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t l = 0; l < K; ++l, ++c) {
      dm.values.col(c) = H[j].col(static_cast<Eigen::Index>(l));
      push_column(dm, c, {ColumnKind::MainBasis, j, 0, l});
    }
  for (const auto& [j, k] : pair_idx)
    for (std::size_t l = 0; l < K; ++l)
      for (std::size_t m = 0; m < K; ++m, ++c) {
        dm.values.col(c) = H[j].col(static_cast<Eigen::Index>(l))
                               .cwiseProduct(H[k].col(static_cast<Eigen::Index>(m)));
        push_column(dm, c, {ColumnKind::InteractionBasis, j, k, l, m});
      }
  return dm;
}

Eigen::MatrixXd Preprocessor::apply_transforms(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out = X;
  if (spec_.transforms.empty()) return out;
  if (spec_.transforms.size() != static_cast<std::size_t>(X.cols()))
    throw ConfigError("need one transform per predictor");
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (spec_.transforms[static_cast<std::size_t>(j)] != Transform::Log1p) continue;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (!(X(i, j) > -1.0)) throw DataError("log(1 + x) transform needs x > -1");
      out(i, j) = std::log1p(X(i, j));
    }
  }
  return out;
}

Eigen::MatrixXd Preprocessor::fit_transform(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out = apply_transforms(X);
  ranges_.clear();
  if (!spec_.normalize) return out;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    std::vector<double> col(out.col(j).data(), out.col(j).data() + out.rows());
    MinMax mm;
    try {
      const auto z = normalize_minmax(col, &mm);
      out.col(j) = Eigen::Map<const Eigen::VectorXd>(z.data(), out.rows());
    } catch (const DataError&) {
      throw DataError("predictor " + std::to_string(j + 1) + " is constant");
    }
    ranges_.push_back(mm);
  }
  return out;
}

Eigen::MatrixXd Preprocessor::transform(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out = apply_transforms(X);
  if (!spec_.normalize) return out;
  if (ranges_.size() != static_cast<std::size_t>(out.cols()))
    throw ConfigError("preprocessor used before fit_transform");
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      out(i, j) = ranges_[static_cast<std::size_t>(j)].apply(out(i, j));
  return out;
}

DesignMatrix build_design(const DesignSpec& spec, const Eigen::MatrixXd& X) {
  switch (spec.family) {
    case ModelFamily::LinearInteractions:
      return build_linear_interactions(X);
    case ModelFamily::GAM:
      return build_gam_design(X, spec.K, spec.binary_columns);
    case ModelFamily::GAMInteractions:
      return build_gam_interaction_design(X, spec.K);
  }
  throw ConfigError("unknown model family");
}

}  // namespace hsp
