#include "hsp/hyperprior.hpp"

#include <cmath>
#include <limits>

#include "hsp/error.hpp"

namespace hsp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double hyperprior_logdensity(const HyperPrior& prior, double x) {
  return std::visit(
      Overloaded{
          [x](const GammaHyper& p) {
            if (!(x > 0.0)) return kNegInf;
            return p.shape * std::log(p.rate) - std::lgamma(p.shape) +
                   (p.shape - 1.0) * std::log(x) - p.rate * x;
          },
          [x](const ExponentialHyper& p) {
            if (!(x > 0.0)) return kNegInf;
            return std::log(p.rate) - p.rate * x;
          },
          [x](const BetaHyper& p) {
            if (!(x > 0.0 && x < 1.0)) return kNegInf;
            return std::lgamma(p.a + p.b) - std::lgamma(p.a) - std::lgamma(p.b) +
                   (p.a - 1.0) * std::log(x) + (p.b - 1.0) * std::log1p(-x);
          },
          [x](const HeavyTailScaleHyper&) {
            if (!(x > 0.0)) return kNegInf;
            return -2.0 * std::log1p(x);
          }},
      prior);
}

bool is_unit_interval(const HyperPrior& prior) { return std::holds_alternative<BetaHyper>(prior); }

std::string describe(const HyperPrior& prior) {
  return std::visit(
      Overloaded{[](const GammaHyper& p) {
                   return "Ga(" + std::to_string(p.shape) + ", " + std::to_string(p.rate) + ")";
                 },
                 [](const ExponentialHyper& p) { return "Ex(" + std::to_string(p.rate) + ")"; },
                 [](const BetaHyper& p) {
                   return "Be(" + std::to_string(p.a) + ", " + std::to_string(p.b) + ")";
                 },
                 [](const HeavyTailScaleHyper&) { return std::string("(1+x)^-2"); }},
      prior);
}

nlohmann::json hyperprior_to_json(const HyperPrior& prior) {
  return std::visit(
      Overloaded{[](const GammaHyper& p) {
                   return nlohmann::json{{"type", "gamma"}, {"shape", p.shape}, {"rate", p.rate}};
                 },
                 [](const ExponentialHyper& p) {
                   return nlohmann::json{{"type", "exponential"}, {"rate", p.rate}};
                 },
                 [](const BetaHyper& p) {
                   return nlohmann::json{{"type", "beta"}, {"a", p.a}, {"b", p.b}};
                 },
                 [](const HeavyTailScaleHyper&) {
                   return nlohmann::json{{"type", "heavy_tail_scale"}};
                 }},
      prior);
}

HyperPrior hyperprior_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  HyperPrior out;
  if (type == "gamma") {
    out = GammaHyper{j.at("shape").get<double>(), j.at("rate").get<double>()};
  } else if (type == "exponential") {
    out = ExponentialHyper{j.at("rate").get<double>()};
  } else if (type == "beta") {
    out = BetaHyper{j.at("a").get<double>(), j.at("b").get<double>()};
  } else if (type == "heavy_tail_scale") {
    out = HeavyTailScaleHyper{};
  } else {
    throw ConfigError("unknown hyperprior type '" + type + "'");
  }
  std::visit(Overloaded{[](const GammaHyper& p) {
                          if (!(p.shape > 0 && p.rate > 0)) throw ConfigError("bad gamma hyperprior");
                        },
                        [](const ExponentialHyper& p) {
                          if (!(p.rate > 0)) throw ConfigError("bad exponential hyperprior");
                        },
                        [](const BetaHyper& p) {
                          if (!(p.a > 0 && p.b > 0)) throw ConfigError("bad beta hyperprior");
                        },
                        [](const HeavyTailScaleHyper&) {}},
             out);
  return out;
}

}  // namespace hsp
