#include "hsp/prior_graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hsp/error.hpp"
#include "hsp/special.hpp"

namespace hsp {

std::size_t PriorGraph::add_hyperparameter(Hyperparameter h) {
  if (!(h.value > 0.0) || !std::isfinite(h.value))
    throw ConfigError("hyperparameter '" + h.name + "' must start at a positive value");
  for (const auto& existing : hypers_)
    if (existing.name == h.name) throw ConfigError("duplicate hyperparameter '" + h.name + "'");
  hypers_.push_back(std::move(h));
  hyper_users_.emplace_back();
  return hypers_.size() - 1;
}

std::size_t PriorGraph::add_node(EtaNode node) {
  node.id = nodes_.size();
  if (node.level < 1) throw ConfigError("node level must be >= 1");
  for (std::size_t p : node.parents) {
    if (p >= node.id) throw ConfigError("parents must precede their children");
    if (nodes_[p].level >= node.level)
      throw ConfigError("parents must sit at strictly lower levels");
  }
  if (node.combinator == Combinator::MeanOfParents && node.parents.empty())
    throw ConfigError("a mean-of-parents node needs at least one parent");
  if (node.family == LawFamily::GammaGamma && !(node.tail > 1.0))
    throw ConfigError("unit-mean gamma-gamma law needs tail c > 1");
  if (node.shape.hyper >= hypers_.size() ||
      (node.shape.times && *node.shape.times >= hypers_.size()))
    throw ConfigError("node references an unknown hyperparameter");

  nodes_.push_back(node);
  children_.emplace_back();
  node_coeffs_.emplace_back();
  for (std::size_t p : node.parents) children_[p].push_back(node.id);
  if (node.family != LawFamily::Fixed) {
    hyper_users_[node.shape.hyper].push_back(node.id);
    if (node.shape.times) hyper_users_[*node.shape.times].push_back(node.id);
  }
  levels_ = std::max(levels_, node.level);
  return node.id;
}

std::size_t PriorGraph::add_coefficient(std::size_t node) {
  if (node >= nodes_.size()) throw ConfigError("coefficient mapped to unknown node");
  coeff_map_.push_back(node);
  node_coeffs_[node].push_back(coeff_map_.size() - 1);
  return coeff_map_.size() - 1;
}

std::vector<double> PriorGraph::hyper_values() const {
  std::vector<double> v;
  v.reserve(hypers_.size());
  for (const auto& h : hypers_) v.push_back(h.value);
  return v;
}

std::size_t PriorGraph::find_hyperparameter(const std::string& name) const {
  for (std::size_t i = 0; i < hypers_.size(); ++i)
    if (hypers_[i].name == name) return i;
  throw ConfigError("unknown hyperparameter '" + name + "'");
}

void PriorGraph::set_hyper_value(const std::string& name, double value) {
  if (!(value > 0.0)) throw ConfigError("hyperparameter values must be positive");
  hypers_[find_hyperparameter(name)].value = value;
}

void PriorGraph::set_hyperprior(const std::string& name, HyperPrior prior) {
  auto& h = hypers_[find_hyperparameter(name)];
  if (is_unit_interval(prior) && !(h.value < 1.0))
    throw ConfigError("hyperparameter '" + name + "' must lie in (0, 1) under a beta prior");
  h.prior = prior;
}

void PriorGraph::reparameterize_as_ratio(const std::string& name, const std::string& base,
                                         const std::string& ratio_name, HyperPrior prior) {
  const std::size_t h = find_hyperparameter(name);
  const std::size_t b = find_hyperparameter(base);
  if (h == b) throw ConfigError("a hyperparameter cannot be a ratio of itself");
  if (!is_unit_interval(prior)) throw ConfigError("ratio hyperparameters need a (0, 1) prior");
  for (const auto& n : nodes_)
    if (n.shape.hyper == h && n.shape.times)
      throw ConfigError("hyperparameter '" + name + "' is already a ratio");
  const double ratio = hypers_[h].value / hypers_[b].value;
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ConfigError("initial " + name + " / " + base + " must lie in (0, 1)");

  hypers_[h].name = ratio_name;
  hypers_[h].value = ratio;
  hypers_[h].prior = prior;
  hypers_[h].derived_name = name;
  hypers_[h].derived_base = b;
  for (auto& n : nodes_) {
    if (n.family != LawFamily::Fixed && n.shape.hyper == h) {
      n.shape.times = b;
      hyper_users_[b].push_back(n.id);
    }
  }
  std::sort(hyper_users_[b].begin(), hyper_users_[b].end());
  hyper_users_[b].erase(std::unique(hyper_users_[b].begin(), hyper_users_[b].end()),
                        hyper_users_[b].end());
}

double PriorGraph::shape(std::size_t j, std::span<const double> phi) const {
  const auto& s = nodes_[j].shape;
  double v = phi[s.hyper];
  if (s.times) v *= phi[*s.times];
  return v;
}

MixingLaw PriorGraph::law(std::size_t j, std::span<const double> phi) const {
  const EtaNode& n = nodes_[j];
  const double s = shape(j, phi);
  switch (n.family) {
    case LawFamily::Gamma:
      return GammaParams{s, s};
    case LawFamily::GammaGamma:
      return GammaGammaParams{s, n.tail, (n.tail - 1.0) / s};
    case LawFamily::Fixed:
      break;
  }
  return PointMass{1.0};
}

double PriorGraph::expected_factor(std::size_t j, std::span<const double> phi) const {
  const EtaNode& n = nodes_[j];
  if (n.parents.empty()) return 1.0;
  if (n.combinator == Combinator::ProductOfParents) {
    double e = 1.0;
    for (std::size_t p : n.parents) e *= mixing_mean(law(p, phi));
    return e;
  }
  double e = 0.0;
  for (std::size_t p : n.parents) e += mixing_mean(law(p, phi));
  return e / static_cast<double>(n.parents.size());
}

double log_psi_node(const PriorGraph& g, std::size_t j, std::span<const double> eta, double log_d,
                    std::span<const double> phi) {
  const EtaNode& n = g.node(j);
  double log_f = 0.0;
  if (!n.parents.empty()) {
    if (n.combinator == Combinator::ProductOfParents) {
      for (std::size_t p : n.parents) log_f += std::log(eta[p]);
    } else {
      double buf[8];
      std::vector<double> big;
      std::span<double> logs;
      if (n.parents.size() <= 8) {
        logs = std::span<double>(buf, n.parents.size());
      } else {
        big.resize(n.parents.size());
        logs = big;
      }
      for (std::size_t i = 0; i < n.parents.size(); ++i) logs[i] = std::log(eta[n.parents[i]]);
      log_f = log_sum_exp(logs) - std::log(static_cast<double>(n.parents.size()));
    }
  }
  return std::log(g.shape(j, phi)) + log_d + log_f - std::log(g.expected_factor(j, phi)) +
         std::log(eta[j]);
}

namespace {

void check_inputs(const PriorGraph& g, std::span<const double> eta) {
  if (eta.size() != g.size()) throw DomainError("eta has the wrong length");
  for (double e : eta)
    if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("eta must be positive and finite");
}

}  // namespace

std::vector<double> compute_psi(const PriorGraph& g, std::span<const double> eta, double d,
                                std::span<const double> phi) {
  check_inputs(g, eta);
  if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("d must be positive and finite");
  std::vector<double> psi(g.size());
  const double log_d = std::log(d);
  for (std::size_t j = 0; j < g.size(); ++j) psi[j] = std::exp(log_psi_node(g, j, eta, log_d, phi));
  return psi;
}

std::vector<double> compute_psi(const PriorGraph& g, std::span<const double> eta, double d) {
  const auto phi = g.hyper_values();
  return compute_psi(g, eta, d, phi);
}

double prior_logdensity(const PriorGraph& g, std::span<const double> eta,
                        std::span<const double> phi) {
  check_inputs(g, eta);
  double lp = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) lp += mixing_logdensity(g.law(j, phi), eta[j]);
  return lp;
}

double prior_logdensity(const PriorGraph& g, std::span<const double> eta) {
  const auto phi = g.hyper_values();
  return prior_logdensity(g, eta, phi);
}

std::vector<double> sample_eta(const PriorGraph& g, std::span<const double> phi, Rng& rng) {
  std::vector<double> eta(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) eta[j] = mixing_sample(g.law(j, phi), rng);
  return eta;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

void warn_if_not_sparser(PriorGraph& g, double lambda_low, double lambda_high,
                         const std::string& what) {
  if (!(lambda_high < lambda_low)) {
    std::ostringstream os;
    os << what << " shape " << lambda_high << " is not below the lower-level shape " << lambda_low
       << "; higher levels are usually sparser";
    g.warnings.push_back(os.str());
  }
}

std::size_t gg_node(PriorGraph& g, int level, std::vector<std::size_t> parents, std::size_t hyper,
                    double c, Combinator comb, std::string label) {
  EtaNode n;
  n.level = level;
  n.parents = std::move(parents);
  n.family = LawFamily::GammaGamma;
  n.tail = c;
  n.shape.hyper = hyper;
  n.combinator = comb;
  n.label = std::move(label);
  const std::size_t id = g.add_node(std::move(n));
  g.add_coefficient(id);
  return id;
}

std::string idx(std::size_t i) { return std::to_string(i + 1); }

PriorGraph build_heredity(std::size_t p, double lambda1, double lambda2, double c,
                          Combinator comb) {
  if (p < 2) throw ConfigError("interaction models need p >= 2");
  if (!(c > 1.0)) throw ConfigError("tail parameter c must exceed 1");
  PriorGraph g;
  const auto h1 = g.add_hyperparameter({"lambda1", lambda1, std::nullopt, "", std::nullopt});
  const auto h2 = g.add_hyperparameter({"lambda2", lambda2, std::nullopt, "", std::nullopt});
  warn_if_not_sparser(g, lambda1, lambda2, "interaction");
  for (std::size_t j = 0; j < p; ++j)
    gg_node(g, 1, {}, h1, c, Combinator::ProductOfParents, "main[" + idx(j) + "]");
  for (std::size_t j = 1; j < p; ++j)
    for (std::size_t k = 0; k < j; ++k)
      gg_node(g, 2, {j, k}, h2, c, comb, "int[" + idx(j) + "." + idx(k) + "]");
  return g;
}

}  // namespace

PriorGraph build_strong_heredity(std::size_t p, double lambda1, double lambda2, double c) {
  return build_heredity(p, lambda1, lambda2, c, Combinator::ProductOfParents);
}

PriorGraph build_weak_heredity(std::size_t p, double lambda1, double lambda2, double c) {
  return build_heredity(p, lambda1, lambda2, c, Combinator::MeanOfParents);
}

PriorGraph build_independent(std::size_t n_coef, double lambda, double c,
                             const std::vector<std::string>& labels) {
  if (n_coef < 1) throw ConfigError("independent prior needs at least one coefficient");
  if (!(c > 1.0)) throw ConfigError("tail parameter c must exceed 1");
  if (!labels.empty() && labels.size() != n_coef) throw ConfigError("one label per coefficient");
  PriorGraph g;
  const auto h = g.add_hyperparameter({"lambda1", lambda, std::nullopt, "", std::nullopt});
  for (std::size_t j = 0; j < n_coef; ++j)
    gg_node(g, 1, {}, h, c, Combinator::ProductOfParents,
            labels.empty() ? "coef[" + idx(j) + "]" : labels[j]);
  return g;
}

PriorGraph build_gam(std::size_t p, std::size_t K, double lambda1, std::span<const double> lambda2,
                     double c, std::span<const bool> has_basis) {
  if (p < 1 || K < 1) throw ConfigError("GAM prior needs p >= 1 and K >= 1");
  if (lambda2.size() != p) throw ConfigError("GAM prior needs one lambda2 per variable");
  if (!has_basis.empty() && has_basis.size() != p)
    throw ConfigError("basis mask must have one entry per variable");
  if (!(c > 1.0)) throw ConfigError("tail parameter c must exceed 1");
  auto basis = [&](std::size_t j) { return has_basis.empty() || has_basis[j]; };

  PriorGraph g;
  const auto h1 = g.add_hyperparameter({"lambda1", lambda1, std::nullopt, "", std::nullopt});
  std::vector<std::size_t> h2(p, 0);
  for (std::size_t j = 0; j < p; ++j) {
    if (!basis(j)) continue;
    h2[j] = g.add_hyperparameter({"lambda2[" + idx(j) + "]", lambda2[j], std::nullopt, "",
                                  std::nullopt});
    warn_if_not_sparser(g, lambda1, lambda2[j], "basis level " + idx(j));
  }
  for (std::size_t j = 0; j < p; ++j)
    gg_node(g, 1, {}, h1, c, Combinator::ProductOfParents, "theta[" + idx(j) + "]");
  for (std::size_t j = 0; j < p; ++j) {
    if (!basis(j)) continue;
    for (std::size_t k = 0; k < K; ++k)
      gg_node(g, 2, {j}, h2[j], c, Combinator::ProductOfParents,
              "gamma[" + idx(j) + "." + idx(k) + "]");
  }
  return g;
}

PriorGraph build_gam_interactions(std::size_t p, std::size_t K, double lambda1, double lambda2,
                                  std::span<const double> lambda3,
                                  std::span<const double> lambda4, double c) {
  if (p < 2 || K < 1) throw ConfigError("GAM-with-interactions prior needs p >= 2 and K >= 1");
  const std::size_t pairs = p * (p - 1) / 2;
  if (lambda3.size() != p) throw ConfigError("need one lambda3 per variable");
  if (lambda4.size() != pairs) throw ConfigError("need one lambda4 per variable pair");
  if (!(c > 1.0)) throw ConfigError("tail parameter c must exceed 1");

  PriorGraph g;
  const auto h1 = g.add_hyperparameter({"lambda1", lambda1, std::nullopt, "", std::nullopt});
  const auto h2 = g.add_hyperparameter({"lambda2", lambda2, std::nullopt, "", std::nullopt});
  warn_if_not_sparser(g, lambda1, lambda2, "interaction");
  std::vector<std::size_t> h3(p), h4(pairs);
  for (std::size_t j = 0; j < p; ++j)
    h3[j] = g.add_hyperparameter({"lambda3[" + idx(j) + "]", lambda3[j], std::nullopt, "",
                                  std::nullopt});
  {
    std::size_t q = 0;
    for (std::size_t j = 1; j < p; ++j)
      for (std::size_t k = 0; k < j; ++k, ++q)
        h4[q] = g.add_hyperparameter({"lambda4[" + idx(j) + "." + idx(k) + "]", lambda4[q],
                                      std::nullopt, "", std::nullopt});
  }

  for (std::size_t j = 0; j < p; ++j)
    gg_node(g, 1, {}, h1, c, Combinator::ProductOfParents, "thetaM[" + idx(j) + "]");
  std::vector<std::size_t> pair_node(pairs);
  std::vector<std::pair<std::size_t, std::size_t>> pair_idx(pairs);
  {
    std::size_t q = 0;
    for (std::size_t j = 1; j < p; ++j)
      for (std::size_t k = 0; k < j; ++k, ++q) {
        pair_idx[q] = {j, k};
        pair_node[q] = gg_node(g, 2, {j, k}, h2, c, Combinator::ProductOfParents,
                               "thetaI[" + idx(j) + "." + idx(k) + "]");
      }
  }
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t l = 0; l < K; ++l)
      gg_node(g, 3, {j}, h3[j], c, Combinator::ProductOfParents,
              "gammaM[" + idx(j) + "." + idx(l) + "]");
  for (std::size_t q = 0; q < pairs; ++q) {
    const auto [j, k] = pair_idx[q];
    for (std::size_t l = 0; l < K; ++l)
      for (std::size_t m = 0; m < K; ++m)
        gg_node(g, 4, {pair_node[q], j, k}, h4[q], c, Combinator::ProductOfParents,
                "gammaI[" + idx(j) + "." + idx(k) + "." + idx(l) + "." + idx(m) + "]");
  }
  return g;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json graph_to_json(const PriorGraph& g) {
  nlohmann::json hs = nlohmann::json::array();
  for (const auto& h : g.hyperparameters()) {
    nlohmann::json e{{"name", h.name}, {"value", h.value}};
    e["prior"] = h.prior ? hyperprior_to_json(*h.prior) : nlohmann::json(nullptr);
    if (h.derived_base) {
      e["derived_name"] = h.derived_name;
      e["derived_base"] = *h.derived_base;
    }
    hs.push_back(e);
  }
  nlohmann::json ns = nlohmann::json::array();
  for (const auto& n : g.nodes()) {
    nlohmann::json e{{"level", n.level},
                     {"parents", n.parents},
                     {"combinator", n.combinator == Combinator::ProductOfParents ? "product" : "mean"},
                     {"label", n.label}};
    switch (n.family) {
      case LawFamily::Gamma:
        e["family"] = "gamma";
        break;
      case LawFamily::GammaGamma:
        e["family"] = "gamma_gamma";
        e["tail"] = n.tail;
        break;
      case LawFamily::Fixed:
        e["family"] = "fixed";
        break;
    }
    e["shape"] = {{"hyper", n.shape.hyper}};
    if (n.shape.times) e["shape"]["times"] = *n.shape.times;
    ns.push_back(e);
  }
  return {{"hyperparameters", hs}, {"nodes", ns}, {"coefficients", g.coeff_map()}};
}

PriorGraph graph_from_json(const nlohmann::json& j) {
  PriorGraph g;
  try {
    for (const auto& e : j.at("hyperparameters")) {
      Hyperparameter h;
      h.name = e.at("name").get<std::string>();
      h.value = e.at("value").get<double>();
      if (e.contains("prior") && !e.at("prior").is_null())
        h.prior = hyperprior_from_json(e.at("prior"));
      if (e.contains("derived_base")) {
        h.derived_name = e.at("derived_name").get<std::string>();
        h.derived_base = e.at("derived_base").get<std::size_t>();
      }
      g.add_hyperparameter(std::move(h));
    }
    for (const auto& e : j.at("nodes")) {
      EtaNode n;
      n.level = e.at("level").get<int>();
      n.parents = e.at("parents").get<std::vector<std::size_t>>();
      const auto comb = e.at("combinator").get<std::string>();
      if (comb == "product") {
        n.combinator = Combinator::ProductOfParents;
      } else if (comb == "mean") {
        n.combinator = Combinator::MeanOfParents;
      } else {
        throw ConfigError("unknown combinator '" + comb + "'");
      }
      const auto fam = e.at("family").get<std::string>();
      if (fam == "gamma") {
        n.family = LawFamily::Gamma;
      } else if (fam == "gamma_gamma") {
        n.family = LawFamily::GammaGamma;
        n.tail = e.at("tail").get<double>();
      } else if (fam == "fixed") {
        n.family = LawFamily::Fixed;
      } else {
        throw ConfigError("unknown law family '" + fam + "'");
      }
      n.shape.hyper = e.at("shape").at("hyper").get<std::size_t>();
      if (e.at("shape").contains("times")) n.shape.times = e.at("shape").at("times").get<std::size_t>();
      n.label = e.value("label", std::string{});
      g.add_node(std::move(n));
    }
    for (std::size_t node : j.at("coefficients").get<std::vector<std::size_t>>())
      g.add_coefficient(node);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed prior graph document: ") + ex.what());
  }
  return g;
}

}  // namespace hsp
