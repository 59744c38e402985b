#pragma once

// Second-order three-term recurrences with coefficients linear in x, in the
// normal form
//
//   (x+b1+b2+2) f(x+2) - ((r1+r2)(x+1) + b1*r2 + b2*r1) f(x+1) + r1*r2*x f(x) = 0
//
// evaluated on the lattice beta3 + {0,1,2,...}. Provides the parameter
// extraction from the transform model, the difference ladder that lifts b2,
// integral-representation fundamental solutions, coefficient fitting,
// forward propagation, and the first-order closed form at alpha = 1.

#include <functional>
#include <utility>
#include <vector>

#include "gb2/quadrature.hpp"

namespace gb2::hde {

struct HdeSpec {
  double rho1;
  double rho2;
  double beta1;
  double beta2;
  double beta3;
};

struct FitCoeffs {
  double delta1;
  double delta2;
};

using Ell = std::function<double(double)>;

// Recurrence satisfied by x -> L_U(0, 0, x - beta3) for
// U ~ gb2(-lambda, a, b; alpha), alpha != 1:
//   rho1 = 1, rho2 = alpha/(alpha-1), beta1 = b-lambda-1, beta2 = lambda-a,
//   beta3 = a+lambda.
HdeSpec hde_spec_from_model(double alpha, double lambda, double a, double b);

// Three-term residual of ell at x (zero for exact solutions).
double hde_residual(const HdeSpec& spec, const Ell& ell, double x);

// n-th ladder iterate: ell_n(x) = ell_{n-1}(x+1) - rho2 * ell_{n-1}(x),
// ell_1 = ell; computed by the explicit binomial expansion. Satisfies the
// recurrence with beta2 replaced by beta2 + n - 1.
Ell ell_ladder(Ell ell, double rho2, int n);

// Smallest ladder depth n >= 1 with beta2 + n - 1 > -1 + margin.
int ladder_depth(double beta2, double margin = 0.05);

// Fundamental solution pair by integral representation. Requires
// beta1 > -1, beta2 > -1, x > 0, x - beta3 a nonnegative integer, and either
// rho2 < 0 < rho1 or 0 < rho1 < rho2.
std::pair<double, double> integral_solutions(const HdeSpec& spec, double x,
                                             const quad::Config& cfg = {});

// Coefficients (d1, d2) with d1*ell1 + d2*ell2 matching the values
// (v0, v1) at (beta3, beta3+1).
FitCoeffs fit_solution(const HdeSpec& spec, double v0, double v1,
                       const quad::Config& cfg = {});

// Forward propagation of the recurrence from f(beta3)=v0, f(beta3+1)=v1;
// returns values at beta3 + {0, ..., count-1}, count >= 2.
std::vector<double> propagate(const HdeSpec& spec, double v0, double v1, int count);

// Closed form at alpha = 1: L_U(0,0,x) = B(b-lambda, a+lambda+x) / B(b-lambda, a+lambda)
// for nonnegative integer x; satisfies (x+a+b) L(x+1) = (x+a+lambda) L(x).
double lu_alpha1(double lambda, double a, double b, int x);

// Relative residual of the three-term recurrence in the third exponent slot
// satisfied by L_U for U ~ gb2(-lambda, a, b; alpha): with
// n1(z)=z+b+lambda, n2(z)=z+a-lambda, n3(z)=z+a+lambda and
// Lj = L_U(s, sigma, theta+j) (increments land in the last slot),
//   [n1(s+theta) + n2(sigma) - (1-alpha)(n1(s+theta+1) + n3(theta))] L1
//     = alpha n3(theta) L0 - (1-alpha) n1(s+theta+1) L2.
double residual_theta_recurrence(double alpha, double lambda, double a, double b,
                                 int s, int theta, int sigma,
                                 const quad::Config& cfg = {});

}  // namespace gb2::hde
