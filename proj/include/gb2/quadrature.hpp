#pragma once

// Double-exponential (tanh-sinh) quadrature on (0,1), plus a half-line
// adapter. The change of variables x = 1/(1 + exp(-pi*sinh(t))) pushes the
// endpoints to infinity in t, so integrable endpoint singularities
// (exponents > -1) are absorbed into the doubly-exponentially decaying
// weight. Integrands receive both x and its complement xc = 1-x computed
// without cancellation, which is what makes kernels like (1-x)^(b-1)
// evaluable to full precision near x = 1.

#include <cmath>
#include <stdexcept>
#include <string>

namespace gb2::quad {

struct Config {
  double rel_tol = 1e-11;
  double abs_tol = 0.0;
  int max_subdivisions = 12;  // step halvings after the coarse pass
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void validate(const Config& cfg) {
  if (!(cfg.rel_tol > 0.0)) throw std::domain_error("quad: rel_tol must be > 0");
  if (!(cfg.abs_tol >= 0.0)) throw std::domain_error("quad: abs_tol must be >= 0");
  if (cfg.max_subdivisions < 1) throw std::domain_error("quad: max_subdivisions must be >= 1");
}

namespace detail {

// Truncation of the t-axis. pi*sinh(6) ~ 633, so node coordinates stay
// normal doubles and endpoint exponents down to about -0.9 still leave the
// weighted terms below 1e-27 at the cut.
inline constexpr double kTMax = 6.0;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Node {
  double x, xc, w;
};

inline Node node_at(double t) {
  const double u = kPi * std::sinh(t);
  const double x = 1.0 / (1.0 + std::exp(-u));
  const double xc = 1.0 / (1.0 + std::exp(u));
  return {x, xc, kPi * std::cosh(t) * x * xc};
}

}  // namespace detail

// Integral of f over (0,1); f is called as f(x, xc) with xc = 1-x exact to
// the working precision at both ends. Converges when two successive
// refinement levels agree to tolerance; throws ConvergenceError otherwise.
template <class F>
double integrate_01(F&& f, const Config& cfg = {}) {
  validate(cfg);
  auto eval = [&](double t) {
    const detail::Node n = detail::node_at(t);
    const double v = f(n.x, n.xc) * n.w;
    if (!std::isfinite(v)) throw std::domain_error("quad: non-finite integrand value");
    return v;
  };

  double sum = eval(0.0);
  const int n0 = static_cast<int>(detail::kTMax);
  for (int k = 1; k <= n0; ++k) sum += eval(k) + eval(-k);

  double h = 1.0;
  double prev = sum * h;
  for (int level = 1; level <= cfg.max_subdivisions; ++level) {
    h *= 0.5;
    for (double t = h; t <= detail::kTMax; t += 2.0 * h) sum += eval(t) + eval(-t);
    const double cur = sum * h;
    const double err = std::abs(cur - prev);
    if (level >= 3 && err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(cur))) return cur;
    prev = cur;
  }
  throw ConvergenceError("tanh-sinh quadrature did not reach tolerance within max_subdivisions");
}

// Integral of f over (0,inf) via x = u/(1-u). Suitable for integrands that
// decay at least like x^(-1-eps); probability densities and the moment
// kernels used in this library all qualify.
template <class F>
double integrate_0inf(F&& f, const Config& cfg = {}) {
  return integrate_01(
      [&](double u, double uc) {
        const double x = u / uc;
        if (!std::isfinite(x)) return 0.0;
        // Two divisions: uc*uc underflows to 0 at the outermost nodes even
        // though the quotient itself is representable.
        return f(x) / uc / uc;
      },
      cfg);
}

}  // namespace gb2::quad
