#include "gb2/hde.hpp"

#include <cmath>
#include <stdexcept>

#include "gb2/specfun.hpp"
#include "gb2/transforms.hpp"

namespace gb2::hde {

namespace {

void check(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

enum class RootCase { NegativeRho2, LargeRho2 };

RootCase classify(const HdeSpec& spec) {
  check(std::isfinite(spec.rho1) && std::isfinite(spec.rho2) && spec.rho1 > 0.0,
        "hde: rho1 must be finite and > 0");
  if (spec.rho2 < 0.0) return RootCase::NegativeRho2;
  if (spec.rho2 > spec.rho1) return RootCase::LargeRho2;
  throw std::domain_error("hde: roots must satisfy rho2 < 0 < rho1 or 0 < rho1 < rho2");
}

// Lattice offset k = x - beta3 as an exact nonnegative integer.
long lattice_index(const HdeSpec& spec, double x) {
  const double diff = x - spec.beta3;
  const long k = std::lround(diff);
  if (k < 0 || std::abs(diff - static_cast<double>(k)) >= 1e-9) {
    throw std::invalid_argument("hde: x must lie on beta3 + {0,1,2,...}");
  }
  return k;
}

}  // namespace

HdeSpec hde_spec_from_model(double alpha, double lambda, double a, double b) {
  check(std::isfinite(alpha) && alpha > 0.0 && alpha != 1.0,
        "hde_spec_from_model: requires alpha > 0, alpha != 1");
  check(std::isfinite(lambda) && std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0 &&
            std::abs(lambda) < std::min(a, b),
        "hde_spec_from_model: requires |lambda| < min(a, b)");
  return {1.0, alpha / (alpha - 1.0), b - lambda - 1.0, lambda - a, a + lambda};
}

double hde_residual(const HdeSpec& spec, const Ell& ell, double x) {
  const double c2 = x + spec.beta1 + spec.beta2 + 2.0;
  const double c1 = (spec.rho1 + spec.rho2) * (x + 1.0) + spec.beta1 * spec.rho2 +
                    spec.beta2 * spec.rho1;
  const double c0 = spec.rho1 * spec.rho2 * x;
  return c2 * ell(x + 2.0) - c1 * ell(x + 1.0) + c0 * ell(x);
}

Ell ell_ladder(Ell ell, double rho2, int n) {
  check(n >= 1, "ell_ladder: n must be >= 1");
  // Explicit expansion of the (shift - rho2)^(n-1) operator.
  const int m = n - 1;
  std::vector<double> coef(static_cast<std::size_t>(m) + 1);
  double binom = 1.0;
  for (int j = 0; j <= m; ++j) {
    coef[j] = binom * std::pow(-rho2, m - j);
    binom = binom * (m - j) / (j + 1.0);
  }
  return [ell = std::move(ell), coef](double x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < coef.size(); ++j) {
      acc += coef[j] * ell(x + static_cast<double>(j));
    }
    return acc;
  };
}

int ladder_depth(double beta2, double margin) {
  check(std::isfinite(beta2), "ladder_depth: beta2 must be finite");
  int n = 1;
  while (beta2 + n - 1.0 <= -1.0 + margin) ++n;
  return n;
}

std::pair<double, double> integral_solutions(const HdeSpec& spec, double x,
                                             const quad::Config& cfg) {
  const RootCase root_case = classify(spec);
  check(spec.beta1 > -1.0, "integral_solutions: requires beta1 > -1");
  check(spec.beta2 > -1.0, "integral_solutions: requires beta2 > -1 (ladder-lift first)");
  check(x > 0.0, "integral_solutions: requires x > 0");
  const long k = lattice_index(spec, x);
  const double r1 = spec.rho1;

  if (root_case == RootCase::NegativeRho2) {
    const double r = -spec.rho2;
    const double l1 =
        std::pow(r1, x + spec.beta1) *
        quad::integrate_01(
            [&](double w, double wc) {
              return std::exp((x - 1.0) * std::log(w) + spec.beta1 * std::log(wc) +
                              spec.beta2 * std::log(r1 * w + r));
            },
            cfg);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double l2 =
        sign * std::pow(r, x + spec.beta2) *
        quad::integrate_01(
            [&](double w, double wc) {
              return std::exp((x - 1.0) * std::log(w) + spec.beta2 * std::log(wc) +
                              spec.beta1 * std::log(r1 + r * w));
            },
            cfg);
    return {l1, l2};
  }

  const double gap = spec.rho2 - r1;
  const double l1 =
      std::pow(r1, x + spec.beta1) *
      quad::integrate_01(
          [&](double w, double wc) {
            return std::exp((x - 1.0) * std::log(w) + spec.beta1 * std::log(wc) +
                            spec.beta2 * std::log(gap + r1 * wc));
          },
          cfg);
  const double l2 =
      std::pow(gap, spec.beta1 + spec.beta2 + 1.0) *
      quad::integrate_01(
          [&](double w, double wc) {
            return std::exp((x - 1.0) * std::log(r1 + gap * w) + spec.beta1 * std::log(w) +
                            spec.beta2 * std::log(wc));
          },
          cfg);
  return {l1, l2};
}

FitCoeffs fit_solution(const HdeSpec& spec, double v0, double v1, const quad::Config& cfg) {
  const auto [a11, a12] = integral_solutions(spec, spec.beta3, cfg);
  const auto [a21, a22] = integral_solutions(spec, spec.beta3 + 1.0, cfg);
  const double det = a11 * a22 - a12 * a21;
  const double scale = std::max(std::abs(a11 * a22), std::abs(a12 * a21));
  if (!(std::abs(det) > 1e-12 * scale)) {
    throw std::runtime_error("fit_solution: fundamental system is numerically singular");
  }
  return {(v0 * a22 - v1 * a12) / det, (a11 * v1 - a21 * v0) / det};
}

std::vector<double> propagate(const HdeSpec& spec, double v0, double v1, int count) {
  check(count >= 2, "propagate: count must be >= 2");
  std::vector<double> values(static_cast<std::size_t>(count));
  values[0] = v0;
  values[1] = v1;
  for (int kk = 0; kk + 2 < count; ++kk) {
    const double x = spec.beta3 + kk;
    const double c2 = x + spec.beta1 + spec.beta2 + 2.0;
    const double c1 = (spec.rho1 + spec.rho2) * (x + 1.0) + spec.beta1 * spec.rho2 +
                      spec.beta2 * spec.rho1;
    const double c0 = spec.rho1 * spec.rho2 * x;
    if (c2 == 0.0) throw std::runtime_error("propagate: vanishing leading coefficient");
    values[kk + 2] = (c1 * values[kk + 1] - c0 * values[kk]) / c2;
  }
  return values;
}

double lu_alpha1(double lambda, double a, double b, int x) {
  check(std::isfinite(lambda) && a > 0.0 && b > 0.0 && std::abs(lambda) < std::min(a, b),
        "lu_alpha1: requires |lambda| < min(a, b)");
  check(x >= 0, "lu_alpha1: requires x >= 0");
  return std::exp(specfun::log_beta(b - lambda, a + lambda + x) -
                  specfun::log_beta(b - lambda, a + lambda));
}

double residual_theta_recurrence(double alpha, double lambda, double a, double b, int s,
                                 int theta, int sigma, const quad::Config& cfg) {
  check(s >= 0 && theta >= 0 && sigma >= 0,
        "residual_theta_recurrence: exponents must be nonnegative integers");
  const dist::Gb2 law_u{-lambda, a, b, alpha};
  const auto lu = [&](int shift) {
    // Third-slot increments: the transform point is (s, sigma, theta+shift).
    return tf::l_closed(law_u,
                        {static_cast<double>(s), static_cast<double>(sigma),
                         static_cast<double>(theta + shift)},
                        cfg);
  };
  const auto n1 = [&](double z) { return z + b + lambda; };
  const auto n2 = [&](double z) { return z + a - lambda; };
  const auto n3 = [&](double z) { return z + a + lambda; };
  const double st = static_cast<double>(s) + theta;
  const double lhs =
      (n1(st) + n2(sigma) - (1.0 - alpha) * (n1(st + 1.0) + n3(theta))) * lu(1);
  const double rhs = alpha * n3(theta) * lu(0) - (1.0 - alpha) * n1(st + 1.0) * lu(2);
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
}

}  // namespace gb2::hde
