#pragma once

// Scalar special-function kernel: log-gamma, beta, ascending Pochhammer
// symbol, and the Gauss hypergeometric function 2F1 evaluated through its
// Euler integral representation. Everything here is pure and thread-safe.

#include "gb2/quadrature.hpp"

namespace gb2::specfun {

// ln Gamma(x) for x > 0, relative error <= 1e-13.
double log_gamma(double x);

// B(a,b) = Gamma(a)Gamma(b)/Gamma(a+b), a,b > 0. Computed in log space.
double beta_fn(double a, double b);
double log_beta(double a, double b);

// Ascending Pochhammer symbol (c)^(d) = Gamma(c+d)/Gamma(c).
// Requires c > 0 and c+d > 0.
double pochhammer(double c, double d);
double log_pochhammer(double c, double d);

// 2F1(a,b;c;z) = (1/B(b,c-b)) * int_0^1 t^(b-1) (1-t)^(c-b-1) (1-zt)^(-a) dt,
// valid for c > b > 0 and z < 1 (the only domain this library needs).
// The quadrature absorbs the endpoint singularities when b < 1 or c-b < 1.
double gauss_2f1(double a, double b, double c, double z, const quad::Config& cfg = {});

}  // namespace gb2::specfun
