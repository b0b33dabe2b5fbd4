#include "hsp/shrinkage.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <limits>
#include <sstream>

#include "hsp/error.hpp"
#include "hsp/quadrature.hpp"
#include "hsp/special.hpp"

namespace hsp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogCutoff = 36.0;  // integrand ignored below exp(-36) of its peak

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

void require_positive(double x, const char* what) {
  if (!positive_finite(x)) throw DomainError(std::string("shrinkage prior: ") + what + " must be positive");
}

// log density of w = log X for X ~ Ga(a, b).
double log_gamma_logscale(double w, double a, double b) {
  return a * std::log(b) - std::lgamma(a) + a * w - b * std::exp(w);
}

// log density of w = log X for X ~ GG(l, c, s).
double log_gg_logscale(double w, double l, double c, double s) {
  const double ls = std::log(s);
  return l * (w - ls) + std::lgamma(l + c) - std::lgamma(l) - std::lgamma(c) - (l + c) * log1p_exp(w - ls);
}

// 1 / (1 + e^z)
double shrink_factor(double z) {
  if (z > 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

// log N(t; 0, 1 + e^z)
double log_normal_mix(double t, double z) {
  return -0.5 * std::log(2.0 * M_PI) - 0.5 * log1p_exp(z) - 0.5 * t * t * shrink_factor(z);
}

template <std::size_t N>
struct LogMoments {
  double log_mass = kNegInf;
  std::array<double, N> mean{};
  std::array<double, N> abs_error{};  // of the means
  double log_mass_error = 0.0;        // absolute, on the log scale
};

// Integrates exp(logw(x)) and its weighted means of a(x) over the real line,
// where f(x) returns {logw, a}. The range is found by scanning outward from
// [lo, hi] until the log weight falls kLogCutoff below its running maximum.
template <std::size_t N, class F>
LogMoments<N> integrate_log_weight(const F& f, double lo, double hi, const char* where) {
  if (lo > hi) std::swap(lo, hi);
  double peak = kNegInf;
  for (double x = lo; x <= hi; x += 0.25) peak = std::max(peak, f(x).first);

  auto extend = [&](double start, double dir) {
    double x = start;
    double step = 0.25;
    for (int k = 0; k < 20000; ++k) {
      x += dir * step;
      const double lw = f(x).first;
      if (lw > peak) peak = lw;
      if (!(lw >= peak - kLogCutoff)) return x;
      if (k % 16 == 15) step = std::min(step * 2.0, 32.0);
    }
    throw NumericalError(std::string(where) + ": integrand range did not close", x);
  };
  const double a = extend(lo, -1.0);
  const double b = extend(hi, 1.0);
  if (!std::isfinite(peak)) throw NumericalError(std::string(where) + ": integrand vanishes", 0.0);

  auto g = [&](double x) {
    const auto [lw, vals] = f(x);
    std::array<double, N + 1> out{};
    const double w = std::isfinite(lw) ? std::exp(lw - peak) : 0.0;
    out[0] = w;
    for (std::size_t i = 0; i < N; ++i) out[i + 1] = w * vals[i];
    return out;
  };
  QuadOptions opt;
  opt.rel_tol = 1e-11;
  opt.abs_tol = 1e-16;
  opt.max_intervals = 4000;
  const auto r = integrate_n<N + 1>(g, a, b, opt);
  if (!r.converged || !(r.value[0] > 0.0)) {
    const double achieved = r.value[0] > 0.0 ? r.abs_error[0] / r.value[0] : r.abs_error[0];
    std::ostringstream os;
    os << where << ": quadrature did not converge (relative error " << achieved << ")";
    throw NumericalError(os.str(), achieved);
  }
  LogMoments<N> out;
  out.log_mass = peak + std::log(r.value[0]);
  out.log_mass_error = r.abs_error[0] / r.value[0];
  for (std::size_t i = 0; i < N; ++i) {
    out.mean[i] = r.value[i + 1] / r.value[0];
    out.abs_error[i] = (r.abs_error[i + 1] + std::abs(out.mean[i]) * r.abs_error[0]) / r.value[0];
  }
  return out;
}

// Laws of log eta for the factors of a two-factor prior.
struct FactorLaw {
  bool gg = false;
  double shape = 1.0;
  double tail = 3.0;
  double log_density(double w) const {
    return gg ? log_gg_logscale(w, shape, tail, (tail - 1.0) / shape) : log_gamma_logscale(w, shape, shape);
  }
};

struct TwoFactor {
  FactorLaw f1, f2;
  double log_scale = 0.0;  // log(lambda2 * d)
};

struct OneFactor {
  // log v = offset + w, with w carrying the density below.
  std::function<double(double)> log_density;
  double offset = 0.0;
  double center = 0.0;
};

double bump_center(double t) { return std::abs(t) > 1.0 ? 2.0 * std::log(std::abs(t)) : 0.0; }

std::optional<TwoFactor> as_two_factor(const ShrinkagePrior& p) {
  const double log_se2 = 2.0 * std::log(p.se);
  return std::visit(
      Overloaded{
          [&](const ProductNGPrior& q) -> std::optional<TwoFactor> {
            return TwoFactor{{false, q.lambda1, 0.0}, {false, q.lambda2, 0.0}, std::log(q.lambda2 * q.d) - log_se2};
          },
          [&](const ShISPrior& q) -> std::optional<TwoFactor> {
            return TwoFactor{{false, q.lambda1, 0.0}, {false, q.lambda2, 0.0}, std::log(q.lambda2 * q.d) - log_se2};
          },
          [&](const ScISPrior& q) -> std::optional<TwoFactor> {
            return TwoFactor{{false, q.lambda1, 0.0}, {false, q.lambda1, 0.0}, std::log(q.lambda2 * q.d) - log_se2};
          },
          [&](const ProductNGGPrior& q) -> std::optional<TwoFactor> {
            return TwoFactor{{true, q.lambda1, q.c}, {true, q.lambda2, q.c}, std::log(q.lambda2 * q.d) - log_se2};
          },
          [](const auto&) -> std::optional<TwoFactor> { return std::nullopt; }},
      p.variant);
}

OneFactor as_one_factor(const ShrinkagePrior& p) {
  const double log_se2 = 2.0 * std::log(p.se);
  return std::visit(
      Overloaded{[&](const NGPrior& q) {
                   const GammaParams g = q.mixing;
                   return OneFactor{[g](double w) { return log_gamma_logscale(w, g.shape, g.rate); },
                                    std::log(q.scale) - log_se2, std::log(g.mean())};
                 },
                 [&](const NGGPrior& q) {
                   const GammaGammaParams g = q.mixing;
                   return OneFactor{[g](double w) { return log_gg_logscale(w, g.shape, g.tail, g.scale); },
                                    -log_se2, std::log(g.scale)};
                 },
                 [](const auto&) -> OneFactor { throw DomainError("not a one-factor prior"); }},
      p.variant);
}

const FixedVariancePrior* as_fixed(const ShrinkagePrior& p) { return std::get_if<FixedVariancePrior>(&p.variant); }

// {log h(t), S(t)} with errors.
LogMoments<1> evaluate(const ShrinkagePrior& prior, double t) {
  prior.validate();
  if (!std::isfinite(t)) throw DomainError("shrinkage: t must be finite");
  if (const auto* fx = as_fixed(prior)) {
    const double z = std::log(fx->psi) - 2.0 * std::log(prior.se);
    LogMoments<1> out;
    out.log_mass = log_normal_mix(t, z);
    out.mean[0] = 1.0 / (1.0 + fx->psi / (prior.se * prior.se));
    return out;
  }
  if (const auto two = as_two_factor(prior)) {
    const TwoFactor tf = *two;
    const double bump = bump_center(t);
    double inner_err = 0.0;
    auto outer = [&](double w1) {
      const double l1 = tf.f1.log_density(w1);
      if (!(l1 > -700.0 - kLogCutoff)) return std::pair<double, std::array<double, 1>>{kNegInf, {0.0}};
      auto inner = [&](double w2) {
        const double z = tf.log_scale + w1 + w2;
        return std::pair<double, std::array<double, 1>>{tf.f2.log_density(w2) + log_normal_mix(t, z),
                                                        {shrink_factor(z)}};
      };
      const double c2 = bump - tf.log_scale - w1;
      const auto r = integrate_log_weight<1>(inner, std::min(0.0, c2) - 1.0, std::max(0.0, c2) + 1.0,
                                             "shrinkage inner quadrature");
      inner_err = std::max(inner_err, r.abs_error[0]);
      return std::pair<double, std::array<double, 1>>{l1 + r.log_mass, {r.mean[0]}};
    };
    const double c1 = bump - tf.log_scale;
    auto out = integrate_log_weight<1>(outer, std::min(0.0, c1) - 1.0, std::max(0.0, c1) + 1.0,
                                       "shrinkage outer quadrature");
    out.abs_error[0] += inner_err;
    return out;
  }
  const OneFactor of = as_one_factor(prior);
  auto f = [&](double w) {
    const double z = of.offset + w;
    return std::pair<double, std::array<double, 1>>{of.log_density(w) + log_normal_mix(t, z), {shrink_factor(z)}};
  };
  const double c = bump_center(t) - of.offset;
  return integrate_log_weight<1>(f, std::min(of.center, c) - 1.0, std::max(of.center, c) + 1.0,
                                 "shrinkage quadrature");
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace

void ShrinkagePrior::validate() const {
  require_positive(se, "se");
  std::visit(Overloaded{[](const NGPrior& q) {
                          q.mixing.validate();
                          require_positive(q.scale, "scale");
                        },
                        [](const NGGPrior& q) { q.mixing.validate(); },
                        [](const ProductNGPrior& q) {
                          require_positive(q.lambda1, "lambda1");
                          require_positive(q.lambda2, "lambda2");
                          require_positive(q.d, "d");
                        },
                        [](const ProductNGGPrior& q) {
                          require_positive(q.lambda1, "lambda1");
                          require_positive(q.lambda2, "lambda2");
                          require_positive(q.d, "d");
                          if (!(q.c > 1.0) || !std::isfinite(q.c)) throw DomainError("shrinkage prior: c must exceed 1");
                        },
                        [](const ShISPrior& q) {
                          require_positive(q.lambda1, "lambda1");
                          require_positive(q.lambda2, "lambda2");
                          require_positive(q.d, "d");
                        },
                        [](const ScISPrior& q) {
                          require_positive(q.lambda1, "lambda1");
                          require_positive(q.lambda2, "lambda2");
                          require_positive(q.d, "d");
                        },
                        [](const FixedVariancePrior& q) { require_positive(q.psi, "psi"); }},
             variant);
}

ShrinkagePrior ng_prior(double lambda, double d, double se) {
  ShrinkagePrior p{NGPrior{GammaParams{lambda, lambda}, lambda * d}, se};
  p.validate();
  return p;
}

ShrinkagePrior ngg_prior(double lambda, double c, double d, double se) {
  ShrinkagePrior p{NGGPrior{GammaGammaParams{lambda, c, (c - 1.0) * d}}, se};
  p.validate();
  return p;
}

std::string prior_id(const ShrinkagePrior& p) {
  const std::string se = ";se=" + fmt(p.se) + ")";
  return std::visit(
      Overloaded{[&](const NGPrior& q) {
                   return "NG(shape=" + fmt(q.mixing.shape) + ";rate=" + fmt(q.mixing.rate) + ";scale=" +
                          fmt(q.scale) + se;
                 },
                 [&](const NGGPrior& q) {
                   return "NGG(shape=" + fmt(q.mixing.shape) + ";tail=" + fmt(q.mixing.tail) + ";scale=" +
                          fmt(q.mixing.scale) + se;
                 },
                 [&](const ProductNGPrior& q) {
                   return "ProductNG(l1=" + fmt(q.lambda1) + ";l2=" + fmt(q.lambda2) + ";d=" + fmt(q.d) + se;
                 },
                 [&](const ProductNGGPrior& q) {
                   return "ProductNGG(l1=" + fmt(q.lambda1) + ";l2=" + fmt(q.lambda2) + ";c=" + fmt(q.c) +
                          ";d=" + fmt(q.d) + se;
                 },
                 [&](const ShISPrior& q) {
                   return "ShIS(l1=" + fmt(q.lambda1) + ";l2=" + fmt(q.lambda2) + ";d=" + fmt(q.d) + se;
                 },
                 [&](const ScISPrior& q) {
                   return "ScIS(l1=" + fmt(q.lambda1) + ";l2=" + fmt(q.lambda2) + ";d=" + fmt(q.d) + se;
                 },
                 [&](const FixedVariancePrior& q) { return "Fixed(psi=" + fmt(q.psi) + se; }},
      p.variant);
}

ShrinkagePrior rescaled(const ShrinkagePrior& prior, double factor) {
  require_positive(factor, "rescaling factor");
  ShrinkagePrior out = prior;
  out.se *= std::sqrt(factor);
  std::visit(Overloaded{[&](NGPrior& q) { q.scale *= factor; }, [&](NGGPrior& q) { q.mixing.scale *= factor; },
                        [&](ProductNGPrior& q) { q.d *= factor; }, [&](ProductNGGPrior& q) { q.d *= factor; },
                        [&](ShISPrior& q) { q.d *= factor; }, [&](ScISPrior& q) { q.d *= factor; },
                        [&](FixedVariancePrior& q) { q.psi *= factor; }},
             out.variant);
  return out;
}

double sample_psi(const ShrinkagePrior& prior, Rng& rng) {
  prior.validate();
  auto unit_gg = [&](double l, double c) { return gg_sample(GammaGammaParams{l, c, (c - 1.0) / l}, rng); };
  return std::visit(
      Overloaded{[&](const NGPrior& q) { return q.scale * rng.gamma(q.mixing.shape, q.mixing.rate); },
                 [&](const NGGPrior& q) { return gg_sample(q.mixing, rng); },
                 [&](const ProductNGPrior& q) {
                   return q.lambda2 * q.d * rng.gamma(q.lambda1, q.lambda1) * rng.gamma(q.lambda2, q.lambda2);
                 },
                 [&](const ProductNGGPrior& q) {
                   return q.lambda2 * q.d * unit_gg(q.lambda1, q.c) * unit_gg(q.lambda2, q.c);
                 },
                 [&](const ShISPrior& q) {
                   return q.lambda2 * q.d * rng.gamma(q.lambda1, q.lambda1) * rng.gamma(q.lambda2, q.lambda2);
                 },
                 [&](const ScISPrior& q) {
                   return q.lambda2 * q.d * rng.gamma(q.lambda1, q.lambda1) * rng.gamma(q.lambda1, q.lambda1);
                 },
                 [&](const FixedVariancePrior& q) { return q.psi; }},
      prior.variant);
}

ShrinkageValue shrinkage_at(const ShrinkagePrior& prior, double t) {
  const auto r = evaluate(prior, t);
  return {r.mean[0], r.abs_error[0]};
}

ShrinkageValue log_marginal(const ShrinkagePrior& prior, double s) {
  const auto r = evaluate(prior, s);
  return {r.log_mass, r.log_mass_error};
}

ShrinkageValue shrinkage_by_derivative(const ShrinkagePrior& prior, double t) {
  if (t == 0.0 || !std::isfinite(t)) throw DomainError("derivative route needs finite t != 0");
  const double h = 0.01 * std::max(1.0, std::abs(t));
  double err = 0.0;
  auto central = [&](double step) {
    const auto up = log_marginal(prior, t + step);
    const auto dn = log_marginal(prior, t - step);
    err = std::max(err, (up.abs_error + dn.abs_error) / (2.0 * step));
    return (up.value - dn.value) / (2.0 * step);
  };
  const double d1 = central(h);
  const double d2 = central(0.5 * h);
  const double deriv = (4.0 * d2 - d1) / 3.0;
  return {-deriv / t, (err + std::abs(d2 - d1) / 3.0 * 1e-3) / std::abs(t)};
}

ShrinkageValue shrinkage_monte_carlo(const ShrinkagePrior& prior, double t, std::size_t n, Rng& rng) {
  if (n < 2) throw DomainError("Monte-Carlo shrinkage needs at least two draws");
  const double se2 = prior.se * prior.se;
  std::vector<double> lw(n), a(n);
  double peak = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = sample_psi(prior, rng) / se2;
    const double z = v > 0.0 ? std::log(v) : -745.0;
    lw[i] = log_normal_mix(t, z);
    a[i] = shrink_factor(z);
    peak = std::max(peak, lw[i]);
  }
  double sw = 0.0, swa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(lw[i] - peak);
    sw += w;
    swa += w * a[i];
  }
  const double s = swa / sw;
  const double mean_w = sw / static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::exp(lw[i] - peak) * (a[i] - s);
    var += r * r;
  }
  var /= static_cast<double>(n - 1);
  return {s, std::sqrt(var / static_cast<double>(n)) / mean_w};
}

ShrinkageValue shrinkage_product_ng_bessel(const ProductNGPrior& q, double se, double t) {
  ShrinkagePrior check{q, se};
  check.validate();
  // eta1 * eta2 = P / (lambda1 lambda2), P K-distributed; v = d P / (lambda1 se^2).
  const double offset = std::log(q.d / q.lambda1) - 2.0 * std::log(se);
  auto f = [&](double w) {
    const double P = std::exp(w);
    if (!(P > 0.0) || !std::isfinite(P)) return std::pair<double, std::array<double, 1>>{kNegInf, {0.0}};
    const double z = offset + w;
    return std::pair<double, std::array<double, 1>>{
        product_two_gammas_logdensity(P, q.lambda1, q.lambda2) + w + log_normal_mix(t, z), {shrink_factor(z)}};
  };
  const double center = std::log(q.lambda1 * q.lambda2);
  const double c = bump_center(t) - offset;
  const auto r = integrate_log_weight<1>(f, std::min(center, c) - 1.0, std::max(center, c) + 1.0,
                                         "K-density shrinkage quadrature");
  return {r.mean[0], r.abs_error[0]};
}

std::vector<double> default_t_grid() {
  std::vector<double> g(60);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.1 + (10.0 - 0.1) * static_cast<double>(i) / 59.0;
  return g;
}

ShrinkageProfile profile(const ShrinkagePrior& prior, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ConfigError("profile: empty t grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ConfigError("profile: t grid must be strictly increasing");
  ShrinkageProfile out;
  out.t_grid = t_grid;
  out.prior = prior;
  out.s_values.reserve(t_grid.size());
  for (double t : t_grid) {
    const auto v = shrinkage_at(prior, t);
    out.s_values.push_back(v.value);
    out.numerical_error = std::max(out.numerical_error, v.abs_error);
  }
  return out;
}

std::pair<ShrinkageProfile, ShrinkageProfile> shis_vs_scis(double lambda1, double lambda2, double d,
                                                           const std::vector<double>& t_grid, double se) {
  if (!(lambda2 < lambda1)) throw ConfigError("shape-versus-scale comparison needs lambda2 < lambda1");
  return {profile(ShrinkagePrior{ShISPrior{lambda1, lambda2, d}, se}, t_grid),
          profile(ShrinkagePrior{ScISPrior{lambda1, lambda2, d}, se}, t_grid)};
}

void write_profiles_csv(const std::string& path, const std::vector<ShrinkageProfile>& profiles) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "t,S,prior-id,est-error\n";
  char buf[128];
  for (const auto& p : profiles) {
    const std::string id = prior_id(p.prior);
    for (std::size_t i = 0; i < p.t_grid.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10g,%.12g,", p.t_grid[i], p.s_values[i]);
      out << buf << id;
      std::snprintf(buf, sizeof buf, ",%.3g\n", p.numerical_error);
      out << buf;
    }
  }
  if (!out) throw DataError("write to '" + path + "' failed");
}

std::vector<ShrinkagePrior> figure_priors(int figure, double lambda2) {
  require_positive(lambda2, "lambda2");
  std::vector<ShrinkagePrior> out;
  switch (figure) {
    case 1:
      for (double r : {1.0, 5.0, 10.0}) out.push_back({ProductNGPrior{r * lambda2, lambda2, 1.0}, 1.0});
      out.push_back(ng_prior(lambda2, 1.0));
      break;
    case 2:
      for (double r : {1.0, 5.0, 10.0}) out.push_back({ProductNGGPrior{r * lambda2, lambda2, 3.0, 1.0}, 1.0});
      out.push_back(ngg_prior(lambda2, 3.0, 1.0));
      break;
    case 3:
      out.push_back({ShISPrior{10.0 * lambda2, lambda2, 1.0}, 1.0});
      out.push_back({ScISPrior{10.0 * lambda2, lambda2, 1.0}, 1.0});
      out.push_back(ng_prior(10.0 * lambda2, 1.0));
      break;
    default:
      throw ConfigError("figure must be 1, 2 or 3");
  }
  return out;
}

}  // namespace hsp
