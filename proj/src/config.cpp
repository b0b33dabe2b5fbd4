#include <fstream>
#include <set>

#include "hsp/analysis.hpp"
#include "hsp/error.hpp"

namespace hsp {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

HyperSetting setting_from_json(const json& j, const HyperSetting& fallback, const std::string& where) {
  check_keys(j, {"value", "prior"}, where);
  HyperSetting s = fallback;
  if (j.contains("value")) s.value = j.at("value").get<double>();
  if (j.contains("prior")) {
    if (j.at("prior").is_null())
      s.prior.reset();
    else
      s.prior = hyperprior_from_json(j.at("prior"));
  }
  if (!(s.value > 0.0)) throw ConfigError(where + ": value must be positive");
  return s;
}

json setting_to_json(const HyperSetting& s) {
  json j{{"value", s.value}};
  j["prior"] = s.prior ? hyperprior_to_json(*s.prior) : json(nullptr);
  return j;
}

ModelFamily family_from_string(const std::string& s) {
  if (s == "gam") return ModelFamily::GAM;
  if (s == "gam_interactions") return ModelFamily::GAMInteractions;
  if (s == "linear_interactions") return ModelFamily::LinearInteractions;
  throw ConfigError("unknown model family '" + s + "' (gam, gam_interactions, linear_interactions)");
}

Transform transform_from_string(const std::string& s) {
  if (s == "none") return Transform::None;
  if (s == "log1p") return Transform::Log1p;
  throw ConfigError("unknown transform '" + s + "' (none, log1p)");
}

ChainConfig chain_from_json(const json& j) {
  check_keys(j,
             {"n_iter", "n_burn", "thin", "a", "tau_target", "upper_bound", "lower_bound", "n_temperatures",
              "ladder_ratio", "adapt_ladder", "swap_target", "adapt", "initial_proposal_var", "seed",
              "store_eta", "store_psi"},
             "chain");
  ChainConfig c;
  c.n_iter = get_or<std::size_t>(j, "n_iter", c.n_iter);
  c.n_burn = get_or<std::size_t>(j, "n_burn", c.n_burn);
  c.thin = get_or<std::size_t>(j, "thin", c.thin);
  c.a = get_or<double>(j, "a", c.a);
  c.tau_target = get_or<double>(j, "tau_target", c.tau_target);
  c.upper_bound = get_or<double>(j, "upper_bound", c.upper_bound);
  c.lower_bound = get_or<double>(j, "lower_bound", c.lower_bound);
  c.n_temperatures = get_or<std::size_t>(j, "n_temperatures", c.n_temperatures);
  c.ladder_ratio = get_or<double>(j, "ladder_ratio", c.ladder_ratio);
  c.adapt_ladder = get_or<bool>(j, "adapt_ladder", c.adapt_ladder);
  c.swap_target = get_or<double>(j, "swap_target", c.swap_target);
  c.adapt = get_or<bool>(j, "adapt", c.adapt);
  c.initial_proposal_var = get_or<double>(j, "initial_proposal_var", c.initial_proposal_var);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.store_eta = get_or<bool>(j, "store_eta", false);
  c.store_psi = get_or<bool>(j, "store_psi", true);
  c.validate();
  return c;
}

json chain_to_json(const ChainConfig& c) {
  return {{"n_iter", c.n_iter},
          {"n_burn", c.n_burn},
          {"thin", c.thin},
          {"a", c.a},
          {"tau_target", c.tau_target},
          {"upper_bound", c.upper_bound},
          {"lower_bound", c.lower_bound},
          {"n_temperatures", c.n_temperatures},
          {"ladder_ratio", c.ladder_ratio},
          {"adapt_ladder", c.adapt_ladder},
          {"swap_target", c.swap_target},
          {"adapt", c.adapt},
          {"initial_proposal_var", c.initial_proposal_var},
          {"seed", c.seed},
          {"store_eta", c.store_eta},
          {"store_psi", c.store_psi}};
}

}  // namespace

std::string family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::GAM:
      return "gam";
    case ModelFamily::GAMInteractions:
      return "gam_interactions";
    case ModelFamily::LinearInteractions:
      return "linear_interactions";
  }
  return "?";
}

void RunConfig::validate() const {
  if (response.empty()) throw ConfigError("response column not set");
  if (family != ModelFamily::LinearInteractions && K < 2) throw ConfigError("K must be at least 2");
  if (cv_folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (!(prior.c > 1.0)) throw ConfigError("c must exceed 1");
  if (prior.lambda2_ratio) {
    if (family == ModelFamily::GAM)
      throw ConfigError("lambda2_ratio applies to models with an interaction level");
    if (!prior.lambda2_ratio->prior || !is_unit_interval(*prior.lambda2_ratio->prior))
      throw ConfigError("lambda2_ratio needs a prior on (0, 1)");
    if (!(prior.lambda2_ratio->value < 1.0)) throw ConfigError("lambda2_ratio value must lie in (0, 1)");
  }
  for (const auto& p : predictors)
    if (p == response) throw ConfigError("response '" + response + "' also listed as a predictor");
  chain.validate();
}

RunConfig config_from_json(const json& j) {
  try {
    check_keys(j,
               {"data", "response", "response_transform", "predictors", "design", "prior", "chain", "cv",
                "output_dir", "write_samples"},
               "config");
    RunConfig c;
    c.data_path = get_or<std::string>(j, "data", "");
    c.response = j.at("response").get<std::string>();
    const auto rt = get_or<std::string>(j, "response_transform", "none");
    if (rt == "log")
      c.response_transform = ResponseTransform::Log;
    else if (rt != "none")
      throw ConfigError("unknown response_transform '" + rt + "' (none, log)");
    if (j.contains("predictors")) c.predictors = j.at("predictors").get<std::vector<std::string>>();
    if (j.contains("design")) {
      const json& d = j.at("design");
      check_keys(d, {"family", "K", "transforms", "normalize", "binary"}, "design");
      c.family = family_from_string(get_or<std::string>(d, "family", "gam"));
      c.K = get_or<std::size_t>(d, "K", c.K);
      c.normalize = get_or<bool>(d, "normalize", true);
      if (d.contains("transforms"))
        for (const auto& [k, v] : d.at("transforms").items()) c.transforms[k] = transform_from_string(v.get<std::string>());
      if (d.contains("binary")) c.binary = d.at("binary").get<std::vector<std::string>>();
    }
    if (j.contains("prior")) {
      const json& p = j.at("prior");
      check_keys(p, {"kind", "heredity", "c", "lambda1", "lambda2", "lambda3", "lambda4", "lambda2_ratio", "d_prior"},
                 "prior");
      const auto kind = get_or<std::string>(p, "kind", "hierarchical");
      if (kind == "independent_ngg")
        c.prior.kind = PriorKind::IndependentNGG;
      else if (kind != "hierarchical")
        throw ConfigError("unknown prior kind '" + kind + "' (hierarchical, independent_ngg)");
      const auto her = get_or<std::string>(p, "heredity", "strong");
      if (her == "weak")
        c.prior.heredity = Heredity::Weak;
      else if (her != "strong")
        throw ConfigError("unknown heredity '" + her + "' (strong, weak)");
      c.prior.c = get_or<double>(p, "c", c.prior.c);
      if (p.contains("lambda1")) c.prior.lambda1 = setting_from_json(p.at("lambda1"), c.prior.lambda1, "lambda1");
      if (p.contains("lambda2")) c.prior.lambda2 = setting_from_json(p.at("lambda2"), c.prior.lambda2, "lambda2");
      if (p.contains("lambda3")) c.prior.lambda3 = setting_from_json(p.at("lambda3"), c.prior.lambda3, "lambda3");
      if (p.contains("lambda4")) c.prior.lambda4 = setting_from_json(p.at("lambda4"), c.prior.lambda4, "lambda4");
      if (p.contains("lambda2_ratio") && !p.at("lambda2_ratio").is_null())
        c.prior.lambda2_ratio = setting_from_json(p.at("lambda2_ratio"), HyperSetting{0.3, BetaHyper{2.0, 6.0}},
                                                  "lambda2_ratio");
      if (p.contains("d_prior")) c.prior.d_prior = hyperprior_from_json(p.at("d_prior"));
    }
    if (j.contains("chain")) {
      c.chain = chain_from_json(j.at("chain"));
    } else {
      c.chain.store_eta = false;
    }
    if (j.contains("cv")) {
      check_keys(j.at("cv"), {"folds"}, "cv");
      c.cv_folds = get_or<std::size_t>(j.at("cv"), "folds", c.cv_folds);
    }
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
    c.write_samples = get_or<bool>(j, "write_samples", c.write_samples);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

json config_to_json(const RunConfig& c) {
  json j;
  j["data"] = c.data_path;
  j["response"] = c.response;
  j["response_transform"] = c.response_transform == ResponseTransform::Log ? "log" : "none";
  j["predictors"] = c.predictors;
  json d{{"family", family_name(c.family)}, {"K", c.K}, {"normalize", c.normalize}};
  json tr = json::object();
  for (const auto& [k, v] : c.transforms) tr[k] = v == Transform::Log1p ? "log1p" : "none";
  d["transforms"] = tr;
  if (c.binary) d["binary"] = *c.binary;
  j["design"] = d;
  json p{{"kind", c.prior.kind == PriorKind::IndependentNGG ? "independent_ngg" : "hierarchical"},
         {"heredity", c.prior.heredity == Heredity::Weak ? "weak" : "strong"},
         {"c", c.prior.c},
         {"lambda1", setting_to_json(c.prior.lambda1)},
         {"lambda2", setting_to_json(c.prior.lambda2)},
         {"lambda3", setting_to_json(c.prior.lambda3)},
         {"lambda4", setting_to_json(c.prior.lambda4)},
         {"d_prior", hyperprior_to_json(c.prior.d_prior)}};
  p["lambda2_ratio"] = c.prior.lambda2_ratio ? setting_to_json(*c.prior.lambda2_ratio) : json(nullptr);
  j["prior"] = p;
  j["chain"] = chain_to_json(c.chain);
  j["cv"] = {{"folds", c.cv_folds}};
  j["output_dir"] = c.output_dir;
  j["write_samples"] = c.write_samples;
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  RunConfig c = config_from_json(j);
  // Relative data paths are taken relative to the config file.
  if (!c.data_path.empty() && c.data_path.front() != '/') {
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) c.data_path = path.substr(0, slash + 1) + c.data_path;
  }
  return c;
}

}  // namespace hsp
