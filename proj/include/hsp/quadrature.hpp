#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace hsp {

struct QuadOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  std::size_t max_intervals = 2000;
};

template <std::size_t N>
struct QuadResultN {
  std::array<double, N> value{};
  std::array<double, N> abs_error{};
  std::size_t evaluations = 0;
  bool converged = false;
};

using QuadResult = QuadResultN<1>;

namespace detail {

// 15-point Kronrod rule with its embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
  double a, b;
  std::array<double, N> value;
  std::array<double, N> error;
  double priority;
  bool operator<(const Panel& o) const { return priority < o.priority; }
};

template <std::size_t N, class F>
Panel<N> kronrod15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, N> k{}, g{};
  const std::array<double, N> fc = f(c);
  for (std::size_t i = 0; i < N; ++i) {
    k[i] = kKronrodWeights[7] * fc[i];
    g[i] = kGaussWeights[3] * fc[i];
  }
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = h * kKronrodNodes[j];
    const std::array<double, N> f1 = f(c - dx);
    const std::array<double, N> f2 = f(c + dx);
    for (std::size_t i = 0; i < N; ++i) {
      const double s = f1[i] + f2[i];
      k[i] += kKronrodWeights[j] * s;
      if (j % 2 == 1) g[i] += kGaussWeights[j / 2] * s;
    }
  }
  Panel<N> p{a, b, {}, {}, 0.0};
  for (std::size_t i = 0; i < N; ++i) {
    p.value[i] = k[i] * h;
    p.error[i] = std::abs((k[i] - g[i]) * h);
  }
  return p;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of a vector-valued
/// integrand on a finite interval. Converges when every component meets
/// max(abs_tol, rel_tol * |value|).
template <std::size_t N, class F>
QuadResultN<N> integrate_n(const F& f, double a, double b, const QuadOptions& opt = {}) {
  QuadResultN<N> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::array<double, N> val{}, err{};
  auto priority = [&](const detail::Panel<N>& p) {
    double pr = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double scale = std::max(opt.abs_tol, opt.rel_tol * std::abs(val[i]));
      pr = std::max(pr, p.error[i] / std::max(scale, 1e-300));
    }
    return pr;
  };
  std::vector<detail::Panel<N>> heap;
  auto push = [&](detail::Panel<N> p) {
    out.evaluations += 15;
    for (std::size_t i = 0; i < N; ++i) {
      val[i] += p.value[i];
      err[i] += p.error[i];
    }
    p.priority = priority(p);
    heap.push_back(p);
    std::push_heap(heap.begin(), heap.end());
  };
  // Exact totals and fresh priorities; running sums drift and, for vector
  // integrands, the ranking depends on the totals.
  auto rebuild = [&] {
    val.fill(0.0);
    err.fill(0.0);
    for (const auto& p : heap)
      for (std::size_t i = 0; i < N; ++i) {
        val[i] += p.value[i];
        err[i] += p.error[i];
      }
    for (auto& p : heap) p.priority = priority(p);
    std::make_heap(heap.begin(), heap.end());
  };
  push(detail::kronrod15<N>(f, a, b));

  // Split the worst panel until the summed error estimate meets the tolerance.
  for (std::size_t it = 1;; ++it) {
    if (it % 64 == 0) rebuild();
    bool ok = true;
    for (std::size_t i = 0; i < N; ++i)
      if (err[i] > std::max(opt.abs_tol, opt.rel_tol * std::abs(val[i]))) ok = false;
    if (ok || heap.size() >= opt.max_intervals) {
      rebuild();
      ok = true;
      for (std::size_t i = 0; i < N; ++i)
        if (err[i] > std::max(opt.abs_tol, opt.rel_tol * std::abs(val[i]))) ok = false;
      if (ok || heap.size() >= opt.max_intervals) {
        out.converged = ok;
        break;
      }
    }
    std::pop_heap(heap.begin(), heap.end());
    const auto worst = heap.back();
    heap.pop_back();
    for (std::size_t i = 0; i < N; ++i) {
      val[i] -= worst.value[i];
      err[i] -= worst.error[i];
    }
    const double mid = 0.5 * (worst.a + worst.b);
    push(detail::kronrod15<N>(f, worst.a, mid));
    push(detail::kronrod15<N>(f, mid, worst.b));
  }
  out.value = val;
  out.abs_error = err;
  return out;
}

/// Scalar adaptive quadrature. Infinite limits are mapped onto finite ones
/// (x = a + t/(1-t) for [a, inf), x = t/(1-t^2) for the whole line).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt = {});

}  // namespace hsp
