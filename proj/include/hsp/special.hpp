#pragma once

#include <span>

namespace hsp {

/// log K_nu(x), the modified Bessel function of the third kind, for real
/// nu >= 0 and x > 0. Temme's series for x < 2 and Steed's continued fraction
/// otherwise, then forward recurrence in the order. Relative accuracy is near
/// machine precision; the log form avoids overflow for small x and underflow
/// for large x.
double log_bessel_k(double nu, double x);

/// K_nu(x); may overflow or underflow where log_bessel_k would not.
double bessel_k(double nu, double x);

/// log(sum(exp(v))) without overflow. Empty input gives -inf.
double log_sum_exp(std::span<const double> v);

/// log(1 + exp(x)) without overflow.
double log1p_exp(double x);

/// log N(x; 0, var).
double log_normal_density(double x, double var);

}  // namespace hsp
