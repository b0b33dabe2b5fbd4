#include "hsp/quadrature.hpp"

#include "hsp/error.hpp"

namespace hsp {

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt) {
  if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: NaN limit");
  if (a > b) {
    QuadResult r = integrate(f, b, a, opt);
    r.value[0] = -r.value[0];
    return r;
  }
  const bool lo_inf = std::isinf(a);
  const bool hi_inf = std::isinf(b);
  if (!lo_inf && !hi_inf) {
    return integrate_n<1>([&](double x) { return std::array<double, 1>{f(x)}; }, a, b, opt);
  }
  if (lo_inf && hi_inf) {
    return integrate_n<1>(
        [&](double t) {
          const double d = 1.0 - t * t;
          return std::array<double, 1>{f(t / d) * (1.0 + t * t) / (d * d)};
        },
        -1.0, 1.0, opt);
  }
  if (hi_inf) {
    return integrate_n<1>(
        [&](double t) {
          const double d = 1.0 - t;
          return std::array<double, 1>{f(a + t / d) / (d * d)};
        },
        0.0, 1.0, opt);
  }
  return integrate_n<1>(
      [&](double t) {
        const double d = 1.0 - t;
        return std::array<double, 1>{f(b - t / d) / (d * d)};
      },
      0.0, 1.0, opt);
}

}  // namespace hsp
