#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "gb2/maps.hpp"
#include "gb2/rng.hpp"

using namespace gb2;
using maps::Kind;
using maps::MapSpec;
using maps::Point;

namespace {

Point random_positive(rng::Engine& eng) {
  // Spread across several decades to exercise the algebra away from 1.
  return {std::exp(3.0 * (eng.uniform01() - 0.5)), std::exp(3.0 * (eng.uniform01() - 0.5))};
}

Point random_unit(rng::Engine& eng) {
  return {0.02 + 0.96 * eng.uniform01(), 0.02 + 0.96 * eng.uniform01()};
}

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Determinant of the forward differential by central differences.
double jacobian_fd(const MapSpec& spec, const Point& pt, double h = 1e-6) {
  const Point xp = maps::apply_map(spec, {pt.x + h, pt.y});
  const Point xm = maps::apply_map(spec, {pt.x - h, pt.y});
  const Point yp = maps::apply_map(spec, {pt.x, pt.y + h});
  const Point ym = maps::apply_map(spec, {pt.x, pt.y - h});
  const double dux = (xp.x - xm.x) / (2 * h), duy = (yp.x - ym.x) / (2 * h);
  const double dvx = (xp.y - xm.y) / (2 * h), dvy = (yp.y - ym.y) / (2 * h);
  return dux * dvy - duy * dvx;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_NOTHROW(maps::validate(MapSpec::fab(1.0, 2.0)));
  CHECK_THROWS_AS(maps::validate(MapSpec::fab(0.0, 2.0)), std::domain_error);
  CHECK_THROWS_AS(maps::validate(MapSpec::fab(1.0, -2.0)), std::domain_error);
  CHECK_THROWS_AS(maps::validate(MapSpec::fa_inf(0.0)), std::domain_error);
  CHECK_THROWS_AS(maps::validate(MapSpec::gdelta(0.0)), std::domain_error);
}

TEST_CASE("domain membership") {
  CHECK(maps::in_domain(MapSpec::fab(1.0, 2.0), {0.5, 3.0}));
  CHECK_FALSE(maps::in_domain(MapSpec::fab(1.0, 2.0), {-0.5, 3.0}));
  CHECK(maps::in_domain(MapSpec::gdelta(2.0), {0.5, 0.5}));
  CHECK_FALSE(maps::in_domain(MapSpec::gdelta(2.0), {0.5, 1.5}));
}

TEST_CASE("hand-checked images at (1,1)") {
  const Point fab = maps::apply_map(MapSpec::fab(1.0, 2.0), {1.0, 1.0});
  CHECK(fab.x == doctest::Approx(1.4).epsilon(1e-14));
  CHECK(fab.y == doctest::Approx(0.75).epsilon(1e-14));

  const Point fai = maps::apply_map(MapSpec::fa_inf(1.0), {1.0, 1.0});
  CHECK(fai.x == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(fai.y == doctest::Approx(0.5).epsilon(1e-14));

  const Point fib = maps::apply_map(MapSpec::finf_b(2.0), {1.0, 1.0});
  CHECK(fib.x == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(fib.y == doctest::Approx(2.0).epsilon(1e-14));

  const Point faz = maps::apply_map(MapSpec::fa_zero(1.0), {1.0, 1.0});
  CHECK(faz.x == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(faz.y == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("unit-square map images") {
  // delta = 1 collapses to ((1-xy), (1-x)/(1-xy)).
  const Point g1 = maps::apply_map(MapSpec::gdelta(1.0), {0.3, 0.6});
  CHECK(g1.x == doctest::Approx(0.82).epsilon(1e-14));
  CHECK(g1.y == doctest::Approx(0.7 / 0.82).epsilon(1e-14));

  const Point g2 = maps::apply_map(MapSpec::gdelta(2.0), {0.3, 0.6});
  CHECK(g2.x == doctest::Approx(0.6949152542372881355932).epsilon(1e-14));
  CHECK(g2.y == doctest::Approx(0.7748592870544090056285).epsilon(1e-14));
}

TEST_CASE("every map is an involution") {
  rng::Engine eng(17);
  const MapSpec specs[] = {MapSpec::fab(1.0, 2.0),  MapSpec::fab(0.4, 3.7),
                           MapSpec::fa_inf(1.6),    MapSpec::finf_b(0.8),
                           MapSpec::fa_zero(2.2),   MapSpec::gdelta(2.0),
                           MapSpec::gdelta(0.35)};
  for (const auto& spec : specs) {
    for (int i = 0; i < 10000; ++i) {
      const Point pt = spec.kind == Kind::Gdelta ? random_unit(eng) : random_positive(eng);
      const Point img = maps::apply_map(spec, pt);
      CHECK(maps::in_domain(spec, img));
      const Point back = maps::apply_map(spec, img);
      REQUIRE(rel_diff(back.x, pt.x) <= 1e-12);
      REQUIRE(rel_diff(back.y, pt.y) <= 1e-12);
    }
  }
}

TEST_CASE("conserved triples swap their last two entries") {
  rng::Engine eng(23);
  const MapSpec specs[] = {MapSpec::fab(1.0, 2.0), MapSpec::fab(2.0, 0.5),
                           MapSpec::fa_inf(1.6), MapSpec::fa_inf(0.7)};
  for (const auto& spec : specs) {
    for (int i = 0; i < 10000; ++i) {
      const Point pt = random_positive(eng);
      const auto pre = maps::invariant_triple(spec, pt);
      const auto post = maps::invariant_triple(spec, maps::apply_map(spec, pt));
      REQUIRE(rel_diff(pre[0], post[0]) <= 1e-12);
      REQUIRE(rel_diff(pre[1], post[2]) <= 1e-12);
      REQUIRE(rel_diff(pre[2], post[1]) <= 1e-12);
    }
  }
}

TEST_CASE("conserved triples exist only for the two-parameter families") {
  CHECK_THROWS_AS(maps::invariant_triple(MapSpec::gdelta(2.0), {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(maps::invariant_triple(MapSpec::fa_zero(1.0), {1.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("boundary parameters of the two-parameter family reach the one-parameter maps") {
  rng::Engine eng(29);
  for (int i = 0; i < 200; ++i) {
    const Point pt = random_positive(eng);
    const Point big_beta = maps::apply_map(MapSpec::fab(1.3, 1e8), pt);
    const Point lim_inf = maps::apply_map(MapSpec::fa_inf(1.3), pt);
    CHECK(rel_diff(big_beta.x, lim_inf.x) <= 1e-6);
    CHECK(rel_diff(big_beta.y, lim_inf.y) <= 1e-6);

    const Point big_alpha = maps::apply_map(MapSpec::fab(1e8, 0.6), pt);
    const Point lim_b = maps::apply_map(MapSpec::finf_b(0.6), pt);
    CHECK(rel_diff(big_alpha.x, lim_b.x) <= 1e-6);
    CHECK(rel_diff(big_alpha.y, lim_b.y) <= 1e-6);
  }
}

TEST_CASE("unit-square conjugation reproduces the half-line map") {
  rng::Engine eng(37);
  for (double delta : {0.5, 1.0, 2.0, 3.5}) {
    for (int i = 0; i < 1000; ++i) {
      const Point pt = random_positive(eng);
      const Point via_square = maps::conjugate_fg(delta, pt);
      const Point direct = maps::apply_map(MapSpec::fa_inf(1.0 / delta), pt);
      REQUIRE(rel_diff(via_square.x, direct.x) <= 1e-12);
      REQUIRE(rel_diff(via_square.y, direct.y) <= 1e-12);
    }
  }
}

TEST_CASE("coordinate flip conjugation links the two degenerate maps") {
  rng::Engine eng(41);
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (int i = 0; i < 1000; ++i) {
      const Point pt = random_positive(eng);
      const Point via_flip = maps::conjugate_zero_inf(alpha, pt);
      const Point direct = maps::apply_map(MapSpec::fa_zero(alpha), pt);
      REQUIRE(rel_diff(via_flip.x, direct.x) <= 1e-12);
      REQUIRE(rel_diff(via_flip.y, direct.y) <= 1e-12);
    }
  }
}

TEST_CASE("closed-form volume factors") {
  // Worked example: alpha = 1 at (3, 1/2) gives 2/3.
  CHECK(maps::jacobian_closed(MapSpec::fa_inf(1.0), {3.0, 0.5}) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  // Frozen at the alpha = 2 image of (0.7, 1.3).
  CHECK(maps::jacobian_closed(MapSpec::fa_inf(2.0),
                              {2.942857142857142857143, 0.453112033195020746888}) ==
        doctest::Approx(0.6824433656957928802589).epsilon(1e-13));
  CHECK(maps::jacobian_closed(MapSpec::fa_zero(2.0),
                              {1.648351648351648351648, 2.025210084033613445378}) ==
        doctest::Approx(0.2725972337482710926694).epsilon(1e-13));
  CHECK_THROWS_AS(maps::jacobian_closed(MapSpec::fab(1.0, 2.0), {1.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("closed-form volume factors match finite differences") {
  rng::Engine eng(43);
  for (const auto& spec : {MapSpec::fa_inf(2.0), MapSpec::fa_inf(0.6), MapSpec::fa_zero(2.0),
                           MapSpec::fa_zero(0.9)}) {
    for (int i = 0; i < 100; ++i) {
      // Stay in a moderate range so central differences are well conditioned.
      const Point pt{0.4 + 2.0 * eng.uniform01(), 0.4 + 2.0 * eng.uniform01()};
      const double closed = maps::jacobian_closed(spec, pt);
      const double fd = std::abs(jacobian_fd(spec, pt));
      REQUIRE(rel_diff(closed, fd) <= 1e-6);
    }
  }
}
