#pragma once

#include <string>
#include <variant>

#include <json.hpp>

namespace hsp {

struct GammaHyper {
  double shape = 1.0;
  double rate = 1.0;
};

struct ExponentialHyper {
  double rate = 1.0;
};

/// Beta prior on a quantity in (0, 1), e.g. the ratio lambda2 / lambda1.
struct BetaHyper {
  double a = 1.0;
  double b = 1.0;
};

/// p(x) = (1 + x)^{-2} on (0, inf); proper with median 1 and no mean.
struct HeavyTailScaleHyper {};

using HyperPrior = std::variant<GammaHyper, ExponentialHyper, BetaHyper, HeavyTailScaleHyper>;

double hyperprior_logdensity(const HyperPrior& prior, double x);
/// True for priors supported on (0, 1).
bool is_unit_interval(const HyperPrior& prior);
std::string describe(const HyperPrior& prior);

/// {"type": "gamma", "shape": .., "rate": ..}, {"type": "exponential", "rate": ..},
/// {"type": "beta", "a": .., "b": ..} or {"type": "heavy_tail_scale"}.
nlohmann::json hyperprior_to_json(const HyperPrior& prior);
HyperPrior hyperprior_from_json(const nlohmann::json& j);

}  // namespace hsp
