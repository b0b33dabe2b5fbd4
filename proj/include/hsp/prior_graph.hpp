#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsp/distributions.hpp"
#include "hsp/hyperprior.hpp"

namespace hsp {

/// How a node's parent scales combine into its scale factor f.
enum class Combinator { ProductOfParents, MeanOfParents };

/// Family of the unit-mean law of a latent scale. With shape s the laws are
/// Ga(s, s), GG(s, c, (c - 1) / s) and the point mass at 1.
enum class LawFamily { Gamma, GammaGamma, Fixed };

/// Shape of a node: phi[hyper], or phi[hyper] * phi[*times] when the shape is
/// parameterized as a ratio of another hyperparameter.
struct ShapeRef {
  std::size_t hyper = 0;
  std::optional<std::size_t> times;
};

struct Hyperparameter {
  std::string name;
  double value = 1.0;
  /// Absent for a hyperparameter held fixed during sampling.
  std::optional<HyperPrior> prior;
  /// For ratio hyperparameters: the name of the shape they stand in for
  /// (value * base), reported alongside the samples.
  std::string derived_name;
  std::optional<std::size_t> derived_base;
};

/// One latent scale eta. Parents are earlier nodes at strictly lower levels.
struct EtaNode {
  std::size_t id = 0;
  int level = 1;
  std::vector<std::size_t> parents;
  LawFamily family = LawFamily::GammaGamma;
  double tail = 3.0;
  ShapeRef shape;
  Combinator combinator = Combinator::ProductOfParents;
  std::string label;
};

/// Hierarchical sparsity prior over regression coefficients. Coefficient k has
/// variance Psi of node coeff_map[k], where for node j
///
///   Psi_j = s_j * d * f_j(parent eta) / E[f_j] * eta_j,
///
/// s_j is the node's shape, d the shared scale, and every eta has mean one.
/// Nodes are stored in topological order.
class PriorGraph {
 public:
  std::size_t add_hyperparameter(Hyperparameter h);
  /// Appends a node and returns its id; validates parents and the law.
  std::size_t add_node(EtaNode node);
  /// Appends a coefficient attached to `node` and returns its column index.
  std::size_t add_coefficient(std::size_t node);

  const std::vector<EtaNode>& nodes() const { return nodes_; }
  const EtaNode& node(std::size_t j) const { return nodes_.at(j); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::size_t>& coeff_map() const { return coeff_map_; }
  std::size_t coefficient_count() const { return coeff_map_.size(); }
  int levels() const { return levels_; }

  const std::vector<Hyperparameter>& hyperparameters() const { return hypers_; }
  std::vector<double> hyper_values() const;
  std::size_t find_hyperparameter(const std::string& name) const;
  void set_hyper_value(const std::string& name, double value);
  void set_hyperprior(const std::string& name, HyperPrior prior);
  /// Replaces hyperparameter `name` by name_ratio * base, where the new ratio
  /// hyperparameter has the given prior on (0, 1). Nodes that used `name` now
  /// reference the ratio times the base.
  void reparameterize_as_ratio(const std::string& name, const std::string& base,
                               const std::string& ratio_name, HyperPrior prior);

  double shape(std::size_t j, std::span<const double> phi) const;
  MixingLaw law(std::size_t j, std::span<const double> phi) const;
  /// E[f_j] over independent parents, from the parents' law means.
  double expected_factor(std::size_t j, std::span<const double> phi) const;

  const std::vector<std::size_t>& children(std::size_t j) const { return children_.at(j); }
  const std::vector<std::size_t>& coefficients_of(std::size_t j) const {
    return node_coeffs_.at(j);
  }
  /// Nodes whose shape depends on hyperparameter h.
  const std::vector<std::size_t>& nodes_using(std::size_t h) const { return hyper_users_.at(h); }

  /// Soft warnings raised by the builders (e.g. lambda2 >= lambda1).
  std::vector<std::string> warnings;

 private:
  std::vector<EtaNode> nodes_;
  std::vector<Hyperparameter> hypers_;
  std::vector<std::size_t> coeff_map_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> node_coeffs_;
  std::vector<std::vector<std::size_t>> hyper_users_;
  int levels_ = 0;
};

/// Psi per node for the graph's current hyperparameter values.
std::vector<double> compute_psi(const PriorGraph& g, std::span<const double> eta, double d);
std::vector<double> compute_psi(const PriorGraph& g, std::span<const double> eta, double d,
                                std::span<const double> phi);
/// log Psi_j; finite even where Psi_j itself would underflow.
double log_psi_node(const PriorGraph& g, std::size_t j, std::span<const double> eta, double log_d,
                    std::span<const double> phi);

/// Sum over nodes of log p(eta_j) under each node's law (nodes are independent).
double prior_logdensity(const PriorGraph& g, std::span<const double> eta);
double prior_logdensity(const PriorGraph& g, std::span<const double> eta,
                        std::span<const double> phi);

/// Draws eta from the prior at the given hyperparameters.
std::vector<double> sample_eta(const PriorGraph& g, std::span<const double> phi, Rng& rng);

/// One GG node per coefficient, all with shape lambda and no dependence.
PriorGraph build_independent(std::size_t n_coef, double lambda, double c = 3.0,
                             const std::vector<std::string>& labels = {});
/// Main effects (p nodes, shape lambda1) then interactions delta_{jk}, k < j,
/// with scale eta_j * eta_k (shape lambda2). All laws GG with tail c.
PriorGraph build_strong_heredity(std::size_t p, double lambda1, double lambda2, double c = 3.0);
/// As strong heredity with scale (eta_j + eta_k) / 2 for the interactions.
PriorGraph build_weak_heredity(std::size_t p, double lambda1, double lambda2, double c = 3.0);
/// Variable level theta_j (shape lambda1) and basis level gamma_{jk}, k = 1..K,
/// with parent j (shape lambda2[j]). Variables with has_basis[j] == false
/// (binary inputs) get no basis nodes; an empty mask means all have a basis.
PriorGraph build_gam(std::size_t p, std::size_t K, double lambda1, std::span<const double> lambda2,
                     double c = 3.0, std::span<const bool> has_basis = {});
/// Four levels: mains, interactions (parents j, k), main bases (parent j) and
/// interaction bases (parents jk, j, k), with shapes lambda1, lambda2,
/// lambda3[j], lambda4[jk]. Pairs are ordered j = 1..p-1, k < j.
PriorGraph build_gam_interactions(std::size_t p, std::size_t K, double lambda1, double lambda2,
                                  std::span<const double> lambda3,
                                  std::span<const double> lambda4, double c = 3.0);

nlohmann::json graph_to_json(const PriorGraph& g);
PriorGraph graph_from_json(const nlohmann::json& j);

}  // namespace hsp
