#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gb2/hde.hpp"
#include "gb2/transforms.hpp"

using namespace gb2;
using hde::HdeSpec;

namespace {

constexpr double kLambda = 0.3;
constexpr double kA = 1.5;
constexpr double kB = 2.0;

// Lattice evaluation of the solved-for sequence through the closed transform.
hde::Ell make_ell(double alpha) {
  const dist::Gb2 law_u{-kLambda, kA, kB, alpha};
  const double beta3 = kA + kLambda;
  return [law_u, beta3](double x) {
    return tf::l_closed(law_u, {0.0, 0.0, x - beta3});
  };
}

double rel_residual(const HdeSpec& spec, const hde::Ell& ell, double x) {
  const double raw = hde::hde_residual(spec, ell, x);
  // Normalize by the largest of the three recurrence terms.
  const double t2 = std::abs((x + spec.beta1 + spec.beta2 + 2.0) * ell(x + 2.0));
  const double t1 = std::abs(((spec.rho1 + spec.rho2) * (x + 1.0) + spec.beta1 * spec.rho2 +
                              spec.beta2 * spec.rho1) *
                             ell(x + 1.0));
  const double t0 = std::abs(spec.rho1 * spec.rho2 * x * ell(x));
  return std::abs(raw) / std::max({t2, t1, t0, 1e-300});
}

}  // namespace

TEST_CASE("model parameters map to recurrence coefficients") {
  const HdeSpec spec = hde::hde_spec_from_model(2.0, kLambda, kA, kB);
  CHECK(spec.rho1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spec.rho2 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(spec.beta1 == doctest::Approx(0.7).epsilon(1e-13));
  CHECK(spec.beta2 == doctest::Approx(-1.2).epsilon(1e-13));
  CHECK(spec.beta3 == doctest::Approx(1.8).epsilon(1e-13));
  CHECK_THROWS_AS(hde::hde_spec_from_model(1.0, kLambda, kA, kB), std::domain_error);
}

TEST_CASE("transform sequence satisfies the recurrence on the shifted lattice") {
  for (double alpha : {2.0, 0.4, 0.6}) {
    const HdeSpec spec = hde::hde_spec_from_model(alpha, kLambda, kA, kB);
    const auto ell = make_ell(alpha);
    for (int k = 0; k <= 20; ++k) {
      const double x = spec.beta3 + k;
      CAPTURE(alpha);
      CAPTURE(k);
      REQUIRE(rel_residual(spec, ell, x) <= 1e-9);
    }
  }
}

TEST_CASE("perturbed coefficients break the recurrence") {
  const auto ell = make_ell(2.0);
  const HdeSpec base = hde::hde_spec_from_model(2.0, kLambda, kA, kB);
  for (int i = 0; i < 20; ++i) {
    HdeSpec bad = base;
    const double bump = 0.03 + 0.01 * i;
    switch (i % 4) {
      case 0: bad.rho2 += bump; break;
      case 1: bad.beta1 -= bump; break;
      case 2: bad.beta2 += bump; break;
      default: bad.rho1 += bump; break;
    }
    double worst = 0.0;
    for (int k = 0; k <= 5; ++k) {
      worst = std::max(worst, rel_residual(bad, ell, base.beta3 + k));
    }
    CHECK(worst > 1e-4);
  }
}

TEST_CASE("ladder depth raises the second shape just past the integrable edge") {
  CHECK(hde::ladder_depth(-1.2) == 2);
  CHECK(hde::ladder_depth(0.5) == 1);
  CHECK(hde::ladder_depth(-3.2) == 4);
}

TEST_CASE("ladder combination equals the shifted closed transform") {
  for (double alpha : {2.0, 0.4, 0.6}) {
    const dist::Gb2 law_u{-kLambda, kA, kB, alpha};
    const HdeSpec spec = hde::hde_spec_from_model(alpha, kLambda, kA, kB);
    const auto ell = make_ell(alpha);
    const int n = hde::ladder_depth(spec.beta2);
    REQUIRE(n == 2);
    const auto lifted = hde::ell_ladder(ell, spec.rho2, n);
    const double scale = std::pow(alpha / (1.0 - alpha), n - 1);
    for (int k = 0; k <= 10; ++k) {
      const double lhs = lifted(spec.beta3 + k);
      const double rhs =
          scale * tf::l_closed(law_u, {n - 1.0, 1.0 - n, static_cast<double>(k)});
      CAPTURE(alpha);
      CAPTURE(k);
      REQUIRE(std::abs(lhs - rhs) <= 1e-8 * std::max(std::abs(lhs), std::abs(rhs)));
    }
  }
}

TEST_CASE("basis fit freezes the expansion coefficients") {
  struct Case {
    double alpha;
    double delta1;
  };
  const Case cases[] = {{2.0, -6.101515906775120607654},
                        {0.4, 4.528663137709641430927},
                        {0.6, 8.931552833308871108441}};
  for (const auto& c : cases) {
    const HdeSpec base = hde::hde_spec_from_model(c.alpha, kLambda, kA, kB);
    const int n = hde::ladder_depth(base.beta2);
    HdeSpec lifted = base;
    lifted.beta2 += n - 1;
    const auto target = hde::ell_ladder(make_ell(c.alpha), base.rho2, n);
    const auto fit = hde::fit_solution(lifted, target(lifted.beta3), target(lifted.beta3 + 1));
    CAPTURE(c.alpha);
    CHECK(fit.delta1 == doctest::Approx(c.delta1).epsilon(1e-8));
    CHECK(std::abs(fit.delta2) <= 1e-6 * std::abs(fit.delta1));
  }
}

TEST_CASE("second basis solution alternates below zero in the oscillating regime") {
  for (double alpha : {0.4, 0.6}) {
    const HdeSpec base = hde::hde_spec_from_model(alpha, kLambda, kA, kB);
    HdeSpec lifted = base;
    lifted.beta2 += hde::ladder_depth(base.beta2) - 1;
    const auto [l1, l2] = hde::integral_solutions(lifted, lifted.beta3 + 1.0);
    CHECK(l1 > 0.0);
    CHECK(l2 < 0.0);
  }
}

TEST_CASE("basis solutions satisfy the recurrence themselves") {
  for (double alpha : {2.0, 0.4, 0.6}) {
    const HdeSpec base = hde::hde_spec_from_model(alpha, kLambda, kA, kB);
    HdeSpec lifted = base;
    lifted.beta2 += hde::ladder_depth(base.beta2) - 1;
    for (int which = 0; which < 2; ++which) {
      const auto basis = [&](double x) {
        const auto [l1, l2] = hde::integral_solutions(lifted, x);
        return which == 0 ? l1 : l2;
      };
      for (int k = 0; k <= 6; ++k) {
        CAPTURE(alpha);
        CAPTURE(which);
        CAPTURE(k);
        REQUIRE(rel_residual(lifted, basis, lifted.beta3 + k) <= 1e-9);
      }
    }
  }
}

TEST_CASE("off-lattice arguments are rejected") {
  const HdeSpec spec = hde::hde_spec_from_model(2.0, kLambda, kA, kB);
  HdeSpec lifted = spec;
  lifted.beta2 += 1;
  CHECK_THROWS_AS(hde::integral_solutions(lifted, lifted.beta3 + 0.5), std::invalid_argument);
  CHECK_THROWS_AS(hde::integral_solutions(lifted, lifted.beta3 - 1.0), std::invalid_argument);
}

TEST_CASE("forward propagation follows the closed values") {
  for (double alpha : {2.0, 0.4, 0.6}) {
    const HdeSpec base = hde::hde_spec_from_model(alpha, kLambda, kA, kB);
    const int n = hde::ladder_depth(base.beta2);
    HdeSpec lifted = base;
    lifted.beta2 += n - 1;
    const auto target = hde::ell_ladder(make_ell(alpha), base.rho2, n);
    const auto seq =
        hde::propagate(lifted, target(lifted.beta3), target(lifted.beta3 + 1), 12);
    REQUIRE(seq.size() == 12);
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const double expected = target(lifted.beta3 + static_cast<double>(k));
      CAPTURE(alpha);
      CAPTURE(k);
      REQUIRE(std::abs(seq[k] - expected) <=
              1e-8 * std::max({std::abs(expected), std::abs(seq[k]), 1e-10}));
    }
  }
}

TEST_CASE("moment recovery through the fitted basis") {
  struct Case {
    double alpha;
    double expected;  // E[(1 + alpha U)^(n-1) (1 + U)^(-(5+n-1))]
  };
  const Case cases[] = {{2.0, 0.1894042837058983173479},
                        {0.4, 0.08100343278786588405732},
                        {0.6, 0.0972800456318594693697}};
  for (const auto& c : cases) {
    const dist::Gb2 law_u{-kLambda, kA, kB, c.alpha};
    const HdeSpec base = hde::hde_spec_from_model(c.alpha, kLambda, kA, kB);
    const int n = hde::ladder_depth(base.beta2);
    HdeSpec lifted = base;
    lifted.beta2 += n - 1;
    const auto target = hde::ell_ladder(make_ell(c.alpha), base.rho2, n);
    const auto fit = hde::fit_solution(lifted, target(lifted.beta3), target(lifted.beta3 + 1));
    const double x = 5.0;
    // Closed-form side of the same expectation, through the transform.
    const double direct = std::pow(c.alpha, n - 1.0) *
                          tf::l_closed(law_u, {n - 1.0, 1.0 - n, x});
    const auto [l1, l2] = hde::integral_solutions(lifted, x + lifted.beta3);
    (void)l2;
    const double via_fit = std::pow(1.0 - c.alpha, n - 1.0) * fit.delta1 * l1;
    CAPTURE(c.alpha);
    CHECK(direct == doctest::Approx(c.expected).epsilon(1e-8));
    CHECK(via_fit == doctest::Approx(c.expected).epsilon(1e-7));
  }
}

TEST_CASE("unit weight closed form and its contiguous relation") {
  CHECK(hde::lu_alpha1(kLambda, kA, kB, 1) ==
        doctest::Approx(18.0 / 35.0).epsilon(1e-12));
  CHECK(hde::lu_alpha1(kLambda, kA, kB, 0) == doctest::Approx(1.0).epsilon(1e-13));
  for (int x = 0; x <= 10; ++x) {
    const double lhs = (x + kA + kB) * hde::lu_alpha1(kLambda, kA, kB, x + 1);
    const double rhs = (x + kA + kLambda) * hde::lu_alpha1(kLambda, kA, kB, x);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), std::abs(rhs)));
  }
}

TEST_CASE("three-term contiguous relation in the third exponent") {
  for (double alpha : {2.0, 0.4, 0.6}) {
    for (int s = 0; s <= 2; ++s) {
      for (int theta = 0; theta <= 2; ++theta) {
        for (int sigma = 0; sigma <= 2; ++sigma) {
          CAPTURE(alpha);
          CAPTURE(s);
          CAPTURE(theta);
          CAPTURE(sigma);
          REQUIRE(hde::residual_theta_recurrence(alpha, kLambda, kA, kB, s, theta, sigma) <=
                  1e-8);
        }
      }
    }
  }
}
