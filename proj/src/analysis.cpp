#include "hsp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "hsp/distributions.hpp"
#include "hsp/error.hpp"
#include "hsp/quadrature.hpp"
#include "hsp/special.hpp"

namespace hsp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits one CSV record; double quotes group commas and "" is a literal quote.
std::vector<std::string> split_record(const std::string& line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      out.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += ch;
    }
  }
  if (quoted) throw DataError("unterminated quote on line " + std::to_string(lineno));
  out.push_back(was_quoted ? cur : trim(cur));
  return out;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::size_t beta_offset(const SampleStore& s) {
  for (std::size_t c = 0; c < s.cols(); ++c)
    if (s.columns()[c].rfind("beta:", 0) == 0) return c;
  throw DomainError("sample store has no coefficient columns");
}

ModelPriors model_priors(const RunConfig& config) {
  ModelPriors p;
  p.d_prior = config.prior.d_prior;
  return p;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// Data

std::size_t DataTable::index_of(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return c;
  throw ConfigError("unknown column '" + name + "'");
}

DataTable ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read data file '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DataError("'" + path + "' has no header row");
  DataTable t;
  t.columns = split_record(line, lineno);
  {
    std::set<std::string> seen;
    for (const auto& c : t.columns) {
      if (c.empty()) throw DataError("'" + path + "': empty column name in header");
      if (!seen.insert(c).second) throw DataError("'" + path + "': duplicate column '" + c + "'");
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_record(line, lineno);
    const std::size_t r = rows.size() + 1;
    if (cells.size() != t.columns.size())
      throw DataError("'" + path + "' row " + std::to_string(r) + " (line " + std::to_string(lineno) + "): " +
                      std::to_string(cells.size()) + " fields, expected " + std::to_string(t.columns.size()));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      const std::string where = "'" + path + "' row " + std::to_string(r) + ", column '" + t.columns[c] + "'";
      if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan")
        throw DataError(where + ": missing value");
      char* end = nullptr;
      row[c] = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size() || !std::isfinite(row[c]))
        throw DataError(where + ": non-numeric value '" + cell + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("'" + path + "' has no data rows");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return t;
}

bool is_binary(std::span<const double> x) {
  std::set<double> v;
  for (double e : x) {
    v.insert(e);
    if (v.size() > 2) return false;
  }
  return v.size() == 2;
}

// ---------------------------------------------------------------------------
// Model assembly

Dataset prepare_dataset(const RunConfig& config, const DataTable& table) {
  Dataset d;
  const std::size_t yi = table.index_of(config.response);
  if (config.predictors.empty()) {
    for (const auto& c : table.columns)
      if (c != config.response) d.predictor_names.push_back(c);
  } else {
    d.predictor_names = config.predictors;
  }
  if (d.predictor_names.empty()) throw ConfigError("no predictors");
  const auto n = static_cast<Eigen::Index>(table.rows());
  d.X.resize(n, static_cast<Eigen::Index>(d.predictor_names.size()));
  for (std::size_t j = 0; j < d.predictor_names.size(); ++j)
    d.X.col(static_cast<Eigen::Index>(j)) = table.values.col(static_cast<Eigen::Index>(table.index_of(d.predictor_names[j])));
  for (const auto& [name, tr] : config.transforms)
    if (std::find(d.predictor_names.begin(), d.predictor_names.end(), name) == d.predictor_names.end())
      throw ConfigError("transform given for unknown predictor '" + name + "'");

  d.y = table.values.col(static_cast<Eigen::Index>(yi));
  if (config.response_transform == ResponseTransform::Log) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(d.y[i] > 0.0))
        throw DataError("response '" + config.response + "' row " + std::to_string(i + 1) +
                        ": log transform needs positive values");
      d.y[i] = std::log(d.y[i]);
    }
  }

  auto column = [&](std::size_t j) {
    const Eigen::VectorXd c = d.X.col(static_cast<Eigen::Index>(j));
    return std::vector<double>(c.data(), c.data() + c.size());
  };
  if (config.binary) {
    for (const auto& name : *config.binary) {
      auto it = std::find(d.predictor_names.begin(), d.predictor_names.end(), name);
      if (it == d.predictor_names.end()) throw ConfigError("binary column '" + name + "' is not a predictor");
      const auto j = static_cast<std::size_t>(it - d.predictor_names.begin());
      if (!is_binary(column(j)))
        throw DataError("column '" + name + "' is listed as binary but does not take exactly two values");
      d.binary.push_back(j);
    }
    std::sort(d.binary.begin(), d.binary.end());
  } else {
    for (std::size_t j = 0; j < d.predictor_names.size(); ++j)
      if (is_binary(column(j))) d.binary.push_back(j);
  }
  return d;
}

PriorGraph build_prior(const RunConfig& config, const DesignMatrix& design, std::size_t p,
                       std::span<const std::size_t> binary) {
  const PriorSettings& ps = config.prior;
  PriorGraph g;
  auto apply = [&](const std::string& name, const HyperSetting& s) {
    g.set_hyper_value(name, s.value);
    if (s.prior) g.set_hyperprior(name, *s.prior);
  };
  if (ps.kind == PriorKind::IndependentNGG) {
    g = build_independent(design.cols(), ps.lambda1.value, ps.c);
    apply("lambda1", ps.lambda1);
  } else {
    switch (config.family) {
      case ModelFamily::GAM: {
        std::vector<bool> mask(p, true);
        for (std::size_t b : binary) mask[b] = false;
        std::vector<double> l2(p, ps.lambda2.value);
        std::unique_ptr<bool[]> m(new bool[p]);
        for (std::size_t j = 0; j < p; ++j) m[j] = mask[j];
        g = build_gam(p, config.K, ps.lambda1.value, l2, ps.c, std::span<const bool>(m.get(), p));
        apply("lambda1", ps.lambda1);
        for (std::size_t j = 0; j < p; ++j)
          if (mask[j]) apply("lambda2[" + std::to_string(j + 1) + "]", ps.lambda2);
        break;
      }
      case ModelFamily::GAMInteractions: {
        const std::size_t pairs = p * (p - 1) / 2;
        std::vector<double> l3(p, ps.lambda3.value), l4(pairs, ps.lambda4.value);
        const double l2 = ps.lambda2_ratio ? ps.lambda2_ratio->value * ps.lambda1.value : ps.lambda2.value;
        g = build_gam_interactions(p, config.K, ps.lambda1.value, l2, l3, l4, ps.c);
        apply("lambda1", ps.lambda1);
        for (std::size_t j = 0; j < p; ++j) apply("lambda3[" + std::to_string(j + 1) + "]", ps.lambda3);
        for (std::size_t j = 1; j < p; ++j)
          for (std::size_t k = 0; k < j; ++k)
            apply("lambda4[" + std::to_string(j + 1) + "." + std::to_string(k + 1) + "]", ps.lambda4);
        break;
      }
      case ModelFamily::LinearInteractions: {
        const double l2 = ps.lambda2_ratio ? ps.lambda2_ratio->value * ps.lambda1.value : ps.lambda2.value;
        g = ps.heredity == Heredity::Weak ? build_weak_heredity(p, ps.lambda1.value, l2, ps.c)
                                          : build_strong_heredity(p, ps.lambda1.value, l2, ps.c);
        apply("lambda1", ps.lambda1);
        break;
      }
    }
    if (config.family != ModelFamily::GAM) {
      if (ps.lambda2_ratio) {
        g.reparameterize_as_ratio("lambda2", "lambda1", "r", *ps.lambda2_ratio->prior);
      } else {
        apply("lambda2", ps.lambda2);
      }
    }
  }
  if (g.coefficient_count() != design.cols())
    throw ConfigError("prior has " + std::to_string(g.coefficient_count()) + " coefficients but the design has " +
                      std::to_string(design.cols()) + " columns");
  return g;
}

ModelSetup setup_model(const RunConfig& config, const Dataset& data, const Eigen::MatrixXd& X_train) {
  ModelSetup s;
  s.spec.family = config.family;
  s.spec.K = config.K;
  s.spec.normalize = config.normalize;
  s.spec.binary_columns = data.binary;
  if (!config.transforms.empty()) {
    s.spec.transforms.assign(data.predictor_names.size(), Transform::None);
    for (std::size_t j = 0; j < data.predictor_names.size(); ++j) {
      auto it = config.transforms.find(data.predictor_names[j]);
      if (it != config.transforms.end()) s.spec.transforms[j] = it->second;
    }
  }
  s.preprocessor = Preprocessor(s.spec);
  const Eigen::MatrixXd Xp = s.preprocessor.fit_transform(X_train);
  s.design = build_design(s.spec, Xp);
  s.graph = build_prior(config, s.design, data.predictor_names.size(), data.binary);
  return s;
}

std::vector<bool> variable_level_mask(const PriorGraph& g) {
  std::vector<bool> mask(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto& l = g.node(j).label;
    mask[j] = l.rfind("gamma", 0) != 0 && l.rfind("coef", 0) != 0;
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Summaries

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

PosteriorSummary posterior_summary(std::span<const double> draws) {
  if (draws.size() < 100)
    throw InsufficientDataError("posterior summary needs at least 100 draws, got " + std::to_string(draws.size()),
                                draws.size());
  std::vector<double> s(draws.begin(), draws.end());
  for (double x : s)
    if (std::isnan(x)) throw DomainError("posterior summary: NaN draw");
  std::sort(s.begin(), s.end());
  PosteriorSummary out{sorted_quantile(s, 0.5), sorted_quantile(s, 0.025), sorted_quantile(s, 0.975)};
  // Interpolation can leave the median a rounding error outside the band.
  out.ci_low = std::min(out.ci_low, out.median);
  out.ci_high = std::max(out.ci_high, out.median);
  return out;
}

std::vector<EffectCurve> effect_curves(const RunConfig& config, const ModelSetup& setup, const Dataset& data,
                                       const SampleStore& samples) {
  const std::size_t off = beta_offset(samples);
  const std::size_t p = data.predictor_names.size();
  const std::size_t R = samples.rows();
  const std::size_t K = config.K;
  constexpr std::size_t kGrid = 101;
  std::vector<EffectCurve> out;
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<std::size_t> lin_cols;
    std::vector<std::pair<std::size_t, std::size_t>> basis_cols;  // column, knot index
    for (std::size_t c = 0; c < setup.design.cols(); ++c) {
      const ColumnRole& r = setup.design.roles[c];
      if (r.kind == ColumnKind::MainLinear && r.j == j) lin_cols.push_back(c);
      if (r.kind == ColumnKind::MainBasis && r.j == j) basis_cols.emplace_back(c, r.l);
    }
    EffectCurve ec;
    ec.variable = data.predictor_names[j];
    const MinMax mm = setup.preprocessor.ranges().empty() ? MinMax{0.0, 1.0} : setup.preprocessor.ranges()[j];
    const bool log1p_tr = !setup.spec.transforms.empty() && setup.spec.transforms[j] == Transform::Log1p;
    std::vector<double> f(R);
    for (std::size_t g = 0; g < kGrid; ++g) {
      const double x = static_cast<double>(g) / static_cast<double>(kGrid - 1);
      double raw = config.normalize ? mm.min + x * (mm.max - mm.min) : x;
      if (log1p_tr) raw = std::expm1(raw);
      ec.x.push_back(x);
      ec.x_raw.push_back(raw);
      for (std::size_t r = 0; r < R; ++r) {
        double v = 0.0;
        for (std::size_t c : lin_cols) v += samples.at(r, off + c) * x;
        for (const auto& [c, l] : basis_cols) v += samples.at(r, off + c) * std::max(0.0, x - knot(l + 1, K));
        f[r] = v;
      }
      ec.f.push_back(posterior_summary(f));
      if (x >= 0.01) {
        for (double& v : f) v /= x;
        ec.beta.push_back(posterior_summary(f));
      } else {
        ec.beta.push_back(std::nullopt);
      }
    }
    out.push_back(std::move(ec));
  }
  return out;
}

std::vector<NamedSummary> psi_summaries(const SampleStore& samples) {
  std::vector<NamedSummary> out;
  for (std::size_t c = 0; c < samples.cols(); ++c) {
    const auto& name = samples.columns()[c];
    if (name.rfind("psi:", 0) != 0) continue;
    out.push_back({name.substr(4), posterior_summary(samples.column(c))});
  }
  return out;
}

std::vector<NamedSummary> hyper_summaries(const PriorGraph& g, const SampleStore& samples) {
  std::vector<NamedSummary> out;
  for (const auto& h : g.hyperparameters()) {
    if (!h.prior) continue;
    out.push_back({h.name, posterior_summary(samples.column(h.name))});
    if (h.derived_base) out.push_back({h.derived_name, posterior_summary(samples.column(h.derived_name))});
  }
  out.push_back({"d", posterior_summary(samples.column("d"))});
  out.push_back({"sigma2", posterior_summary(samples.column("sigma2"))});
  return out;
}

// ---------------------------------------------------------------------------
// Output helpers

void write_summaries_csv(const std::string& path, const std::vector<NamedSummary>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "name,median,ci_low,ci_high\n";
  for (const auto& r : rows)
    out << r.name << ',' << fmt(r.summary.median) << ',' << fmt(r.summary.ci_low) << ',' << fmt(r.summary.ci_high)
        << '\n';
}

void write_effects_csv(const std::string& path, const std::vector<EffectCurve>& curves) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "variable,x,x_raw,f_median,f_low,f_high,beta_median,beta_low,beta_high\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      out << c.variable << ',' << fmt(c.x[i]) << ',' << fmt(c.x_raw[i]) << ',' << fmt(c.f[i].median) << ','
          << fmt(c.f[i].ci_low) << ',' << fmt(c.f[i].ci_high);
      if (c.beta[i])
        out << ',' << fmt(c.beta[i]->median) << ',' << fmt(c.beta[i]->ci_low) << ',' << fmt(c.beta[i]->ci_high);
      else
        out << ",,,";
      out << '\n';
    }
}

std::vector<NamedSummary> summarize_samples(const std::string& samples_csv) {
  const SampleStore s = SampleStore::read_csv(samples_csv);
  std::vector<NamedSummary> out;
  for (std::size_t c = 0; c < s.cols(); ++c) out.push_back({s.columns()[c], posterior_summary(s.column(c))});
  return out;
}

// ---------------------------------------------------------------------------
// Runs

FitResult fit(const RunConfig& config) {
  config.validate();
  const DataTable t = ingest_csv(config.data_path);
  return fit(config, prepare_dataset(config, t));
}

FitResult fit(const RunConfig& config, const Dataset& data) {
  config.validate();
  FitResult res;
  res.setup = setup_model(config, data, data.X);
  const RegressionModel model(res.setup.graph, res.setup.design.values, data.y, model_priors(config));
  ChainConfig chain = config.chain;
  chain.psi_mask = variable_level_mask(res.setup.graph);
  res.samples = run_chain(model, chain);
  res.curves = effect_curves(config, res.setup, data, res.samples);
  res.psi = psi_summaries(res.samples);
  res.hypers = hyper_summaries(res.setup.graph, res.samples);

  if (!config.output_dir.empty()) {
    ensure_dir(config.output_dir);
    std::vector<std::string> files{"effects.csv", "psi_summary.csv", "hyper_summary.csv"};
    if (config.write_samples) {
      res.samples.write_csv(join(config.output_dir, "samples.csv"));
      files.push_back("samples.csv");
    }
    write_effects_csv(join(config.output_dir, "effects.csv"), res.curves);
    write_summaries_csv(join(config.output_dir, "psi_summary.csv"), res.psi);
    write_summaries_csv(join(config.output_dir, "hyper_summary.csv"), res.hypers);
    nlohmann::json m;
    m["command"] = "fit";
    m["config"] = config_to_json(config);
    m["n"] = data.y.size();
    m["predictors"] = data.predictor_names;
    m["design_columns"] = res.setup.design.cols();
    m["nodes"] = res.setup.graph.size();
    m["draws"] = res.samples.rows();
    m["diagnostics"] = res.samples.diagnostics;
    m["warnings"] = res.setup.graph.warnings;
    m["files"] = files;
    write_json(join(config.output_dir, "manifest.json"), m);
  }
  return res;
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("need at least 2 folds");
  if (n < folds) throw ConfigError("fewer observations than folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed, 0xF01D);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::size_t> fold(n);
  for (std::size_t r = 0; r < n; ++r) fold[perm[r]] = r * folds / n;
  return fold;
}

namespace {

// Median of the equal-weight normal mixture sum_r N(mu_r, sigma2_r) / R, by
// bisection on its CDF.
double mixture_median(const Eigen::VectorXd& mu, const Eigen::VectorXd& sd) {
  double lo = (mu - 12.0 * sd).minCoeff(), hi = (mu + 12.0 * sd).maxCoeff();
  auto cdf = [&](double x) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < mu.size(); ++r) acc += 0.5 * std::erfc(-(x - mu[r]) / (sd[r] * M_SQRT2));
    return acc / static_cast<double>(mu.size());
  };
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Prediction predict(const SampleStore& samples, std::size_t n_coef, const Eigen::MatrixXd& design,
                   const Eigen::VectorXd& y) {
  if (static_cast<std::size_t>(design.cols()) != n_coef) throw DomainError("design width does not match");
  const std::size_t R = samples.rows();
  if (R == 0) throw DomainError("no posterior draws");
  const std::size_t off = beta_offset(samples);
  const std::size_t ia = samples.index_of("alpha"), is = samples.index_of("sigma2");
  Eigen::MatrixXd B(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(n_coef));
  Eigen::VectorXd alpha(static_cast<Eigen::Index>(R)), sigma2(static_cast<Eigen::Index>(R));
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < n_coef; ++c) B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = samples.at(r, off + c);
    alpha[static_cast<Eigen::Index>(r)] = samples.at(r, ia);
    sigma2[static_cast<Eigen::Index>(r)] = samples.at(r, is);
  }
  const Eigen::MatrixXd mu = (B * design.transpose()).colwise() + alpha;  // R x n_test
  const Eigen::VectorXd sd = sigma2.cwiseSqrt();
  Prediction out;
  std::vector<double> logs(R);
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    for (std::size_t r = 0; r < R; ++r) {
      const auto rr = static_cast<Eigen::Index>(r);
      logs[r] = log_normal_density(y[i] - mu(rr, i), sigma2[rr]);
    }
    out.median.push_back(mixture_median(mu.col(i), sd));
    out.log_density.push_back(log_sum_exp(logs) - std::log(static_cast<double>(R)));
  }
  return out;
}

CVReport cross_validate(const RunConfig& config, std::size_t folds) {
  config.validate();
  const DataTable t = ingest_csv(config.data_path);
  return cross_validate(config, prepare_dataset(config, t), folds);
}

CVReport cross_validate(const RunConfig& config, const Dataset& data, std::size_t folds) {
  config.validate();
  const auto n = static_cast<std::size_t>(data.y.size());
  const auto fold = fold_assignment(n, folds, config.chain.seed);
  CVReport rep;
  rep.folds = folds;
  double sq_total = 0.0, log_total = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> tr, te;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
    const Eigen::MatrixXd Xtr = data.X(tr, Eigen::all), Xte = data.X(te, Eigen::all);
    const Eigen::VectorXd ytr = data.y(tr), yte = data.y(te);
    if (ytr.maxCoeff() == ytr.minCoeff())
      throw DataError("degenerate fold " + std::to_string(f + 1) + ": constant training response");
    const ModelSetup setup = setup_model(config, data, Xtr);
    const RegressionModel model(setup.graph, setup.design.values, ytr, model_priors(config));
    ChainConfig chain = config.chain;
    chain.seed = config.chain.seed + 7919 * (f + 1);
    chain.store_eta = false;
    chain.store_psi = false;
    const SampleStore s = run_chain(model, chain);
    const DesignMatrix test_design = build_design(setup.spec, setup.preprocessor.transform(Xte));
    const Prediction pred = predict(s, setup.design.cols(), test_design.values, yte);
    double sq = 0.0, lg = 0.0;
    for (std::size_t i = 0; i < te.size(); ++i) {
      const double e = yte[static_cast<Eigen::Index>(i)] - pred.median[i];
      sq += e * e;
      lg += pred.log_density[i];
    }
    sq_total += sq;
    log_total += lg;
    rep.fold_rmse.push_back(std::sqrt(sq / static_cast<double>(te.size())));
    rep.fold_lps.push_back(-lg / static_cast<double>(te.size()));
    rep.fold_sizes.push_back(te.size());
  }
  rep.rmse = std::sqrt(sq_total / static_cast<double>(n));
  rep.lps = -log_total / static_cast<double>(n);
  return rep;
}

void write_cv_report(const RunConfig& config, const CVReport& report) {
  ensure_dir(config.output_dir);
  std::ofstream out(join(config.output_dir, "cv.csv"));
  if (!out) throw DataError("cannot write cv.csv");
  out << "fold,size,rmse,lps\n";
  for (std::size_t f = 0; f < report.folds; ++f)
    out << f + 1 << ',' << report.fold_sizes[f] << ',' << fmt(report.fold_rmse[f]) << ',' << fmt(report.fold_lps[f])
        << '\n';
  out << "all," << std::accumulate(report.fold_sizes.begin(), report.fold_sizes.end(), std::size_t{0}) << ','
      << fmt(report.rmse) << ',' << fmt(report.lps) << '\n';
  nlohmann::json m;
  m["command"] = "cv";
  m["config"] = config_to_json(config);
  m["folds"] = report.folds;
  m["rmse"] = report.rmse;
  m["lps"] = report.lps;
  m["files"] = {"cv.csv"};
  write_json(join(config.output_dir, "manifest.json"), m);
}

// ---------------------------------------------------------------------------
// Verification

namespace {

// 12 log-spaced points from hi down to lo.
std::vector<double> log_grid(double hi, double lo) {
  std::vector<double> g(12);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = std::exp(std::log(hi) + (std::log(lo) - std::log(hi)) * static_cast<double>(i) / 11.0);
  return g;
}

// Grid reaching as close to zero as the draw count allows while keeping a
// few thousand draws below the smallest point.
std::vector<double> shape_grid(double z, std::size_t n, double hi) {
  const double lo = std::clamp(std::pow(3000.0 / static_cast<double>(n), 1.0 / z), hi / 1000.0, hi / 4.0);
  return log_grid(hi, lo);
}

std::string shapes_str(const std::vector<double>& l) {
  std::string s;
  for (std::size_t i = 0; i < l.size(); ++i) s += (i ? "x" : "") + fmt(l[i]);
  return s;
}

}  // namespace

double k_density_histogram_gap(double l1, double l2, std::size_t n, double lo, double hi, std::size_t bins,
                               std::uint64_t seed) {
  if (!(lo > 0.0 && hi > lo) || bins < 1) throw DomainError("bad histogram range");
  Rng rng(seed, 0);
  std::vector<std::size_t> counts(bins, 0);
  const double w = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.gamma(l1, 1.0) * rng.gamma(l2, 1.0);
    if (x < lo || x >= hi) continue;
    counts[std::min(bins - 1, static_cast<std::size_t>((x - lo) / w))]++;
  }
  double gap = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = lo + w * static_cast<double>(b);
    const auto q = integrate([&](double x) { return std::exp(product_two_gammas_logdensity(x, l1, l2)); }, a, a + w,
                             QuadOptions{0.0, 1e-10, 200});
    const double expected = q.value[0] * static_cast<double>(n);
    gap = std::max(gap, std::abs(static_cast<double>(counts[b]) / expected - 1.0));
  }
  return gap;
}

double k_density_small_value_ratio(double l1, double l2, double psi) {
  if (l1 == l2) throw DomainError("small-value form needs distinct shapes");
  const double lmin = std::min(l1, l2);
  const double log_approx =
      std::lgamma(std::abs(l1 - l2)) - std::lgamma(l1) - std::lgamma(l2) + (lmin - 1.0) * std::log(psi);
  return std::exp(product_two_gammas_logdensity(psi, l1, l2) - log_approx);
}

std::vector<VerificationRow> verify_theorems(const VerificationOptions& opt) {
  std::vector<VerificationRow> rows;
  std::uint64_t stream = 0;
  const double c = 3.0;

  auto run = [&](const std::string& name, const std::vector<double>& shapes, bool gg, bool sum) {
    VerificationRow row;
    row.name = std::string(sum ? "sum" : "product") + (gg ? "-gg-" : "-gamma-") + shapes_str(shapes);
    row.expected = sum ? std::accumulate(shapes.begin(), shapes.end(), 0.0)
                       : *std::min_element(shapes.begin(), shapes.end());
    row.tolerance = sum ? 0.1 * row.expected : 0.05;
    if (!name.empty()) row.note = name;
    Rng rng(opt.seed, ++stream);
    auto draw = [&](Rng& r) {
      double v = sum ? 0.0 : 1.0;
      for (double l : shapes) {
        const double x = gg ? gg_sample(GammaGammaParams{l, c, 1.0}, r) : r.gamma(l, 1.0);
        v = sum ? v + x : v * x;
      }
      return v;
    };
    const auto grid = shape_grid(row.expected, opt.n_draws, sum ? 0.05 : 1e-3);
    try {
      const auto est = estimate_sparsity_shape(draw, opt.n_draws, grid, rng);
      row.estimate = est.shape;
      row.standard_error = est.standard_error;
      row.pass = std::abs(est.shape - row.expected) <= row.tolerance;
    } catch (const InsufficientDataError& e) {
      row.note = e.what();
      row.pass = false;
    }
    rows.push_back(row);
  };

  for (bool gg : {false, true}) {
    run("", {0.3, 1.0}, gg, false);
    run("", {0.5, 2.0}, gg, false);
    run("", {0.3, 1.0, 2.0}, gg, false);
    run("", {0.5, 1.0, 2.0}, gg, false);
  }
  run("", {0.3, 1.5}, false, false);
  run("", {0.5, 0.7}, false, true);
  for (bool gg : {false, true}) {
    run("", {0.3, 0.5}, gg, true);
    run("", {0.5, 1.0}, gg, true);
    run("", {0.3, 0.5, 1.0}, gg, true);
  }

  {
    VerificationRow row;
    row.name = "k-density-histogram-1.5x2.5";
    row.expected = 0.0;
    row.tolerance = 0.02;
    row.estimate = k_density_histogram_gap(1.5, 2.5, opt.n_draws, 0.1, 5.0, 20, opt.seed + 1);
    row.pass = row.estimate < row.tolerance;
    row.note = "sup relative error over 20 bins on [0.1; 5]";
    rows.push_back(row);
  }
  for (const auto& [l1, l2] : {std::pair{0.5, 1.5}, std::pair{1.5, 2.5}}) {
    VerificationRow row;
    row.name = "k-density-small-value-" + fmt(l1) + "x" + fmt(l2);
    row.expected = 1.0;
    row.tolerance = 1e-3;
    row.estimate = k_density_small_value_ratio(l1, l2, 1e-8);
    row.pass = std::abs(row.estimate - 1.0) < row.tolerance;
    row.note = "density over small-value form at psi = 1e-8";
    rows.push_back(row);
  }
  return rows;
}

void write_verification_csv(const std::string& path, const std::vector<VerificationRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "case,expected,estimate,standard_error,tolerance,pass,note\n";
  for (const auto& r : rows) {
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    out << r.name << ',' << fmt(r.expected) << ',' << fmt(r.estimate) << ',' << fmt(r.standard_error) << ','
        << fmt(r.tolerance) << ',' << (r.pass ? "pass" : "FAIL") << ',' << note << '\n';
  }
}

}  // namespace hsp
