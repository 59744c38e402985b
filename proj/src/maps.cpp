#include "gb2/maps.hpp"

#include <cmath>
#include <stdexcept>

namespace gb2::maps {

namespace {

void check_param(double v, const char* name) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    throw std::domain_error(std::string("map parameter ") + name + " must be finite and > 0");
  }
}

void require_domain(const MapSpec& spec, const Point& pt) {
  if (!in_domain(spec, pt)) throw std::domain_error("map: point outside the domain");
}

}  // namespace

void validate(const MapSpec& spec) {
  switch (spec.kind) {
    case Kind::Fab:
      check_param(spec.alpha, "alpha");
      check_param(spec.beta, "beta");
      return;
    case Kind::FaInf:
    case Kind::FaZero:
      check_param(spec.alpha, "alpha");
      return;
    case Kind::FInfB:
      check_param(spec.beta, "beta");
      return;
    case Kind::Gdelta:
      check_param(spec.delta, "delta");
      return;
  }
  throw std::invalid_argument("map: unknown kind");
}

bool in_domain(const MapSpec& spec, const Point& pt) {
  if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) return false;
  if (!(pt.x > 0.0) || !(pt.y > 0.0)) return false;
  if (spec.kind == Kind::Gdelta) return pt.x < 1.0 && pt.y < 1.0;
  return true;
}

Point apply_map(const MapSpec& spec, const Point& pt) {
  validate(spec);
  require_domain(spec, pt);
  const double x = pt.x, y = pt.y;
  const double a = spec.alpha, b = spec.beta, d = spec.delta;
  switch (spec.kind) {
    case Kind::Fab:
      return {(y / a) * (b + a * x + b * y + a * b * x * y) / (1.0 + x + y + b * x * y),
              (x / b) * (a + a * x + b * y + a * b * x * y) / (1.0 + x + y + a * x * y)};
    case Kind::FaInf:
      return {(1.0 + y + a * x * y) / (a * x),
              x * y * (1.0 + a * x) / (1.0 + x + y + a * x * y)};
    case Kind::FInfB:
      return {x * y * (1.0 + b * y) / (1.0 + x + y + b * x * y),
              (1.0 + x + b * x * y) / (b * y)};
    case Kind::FaZero:
      return {(1.0 + x + y) / (a * x * y),
              (1.0 + x + y + a * x * y) / (a * x * (1.0 + x))};
    case Kind::Gdelta: {
      // 1 + (d-1)t = d*t + (1-t): positive sums on (0,1).
      const double exy = d * x * y + (1.0 - x * y);
      const double ex = d * x + (1.0 - x);
      return {(1.0 - x * y) / exy, (1.0 - x) * exy / (ex * (1.0 - x * y))};
    }
  }
  throw std::invalid_argument("map: unknown kind");
}

std::array<double, 3> invariant_triple(const MapSpec& spec, const Point& pt) {
  validate(spec);
  require_domain(spec, pt);
  const double x = pt.x, y = pt.y, a = spec.alpha, b = spec.beta;
  const double i1 = x * y / ((1.0 + x) * (1.0 + y));
  switch (spec.kind) {
    case Kind::Fab:
      return {i1, a * x / ((1.0 + a * x) * (1.0 + y)), b * y / ((1.0 + x) * (1.0 + b * y))};
    case Kind::FaInf:
      return {i1, a * x / ((1.0 + a * x) * (1.0 + y)), 1.0 / (1.0 + x)};
    default:
      throw std::invalid_argument("invariant_triple: supported for Fab and FaInf only");
  }
}

double jacobian_closed(const MapSpec& spec, const Point& pt) {
  validate(spec);
  require_domain(spec, pt);
  const double u = pt.x, v = pt.y, a = spec.alpha;
  switch (spec.kind) {
    case Kind::FaInf:
      return (1.0 + a * u) * (1.0 + v + a * u * v) / (a * u * (1.0 + u + v + a * u * v));
    case Kind::FaZero:
      return (1.0 + u + v) * (1.0 + u + v + a * u * v) /
             (a * a * u * u * u * (1.0 + u) * v * v);
    default:
      throw std::invalid_argument("jacobian_closed: supported for FaInf and FaZero only");
  }
}

Point conjugate_fg(double delta, const Point& pt) {
  check_param(delta, "delta");
  if (!(pt.x > 0.0) || !(pt.y > 0.0) || !std::isfinite(pt.x) || !std::isfinite(pt.y)) {
    throw std::domain_error("conjugate_fg: point must be in (0,inf)^2");
  }
  const auto g = [](double t) { return t / (1.0 + t); };
  const auto h = [](double t) { return t / (1.0 - t); };
  const Point img = apply_map(MapSpec::gdelta(delta), {g(pt.x / delta), g(1.0 / pt.y)});
  return {delta * h(img.x), 1.0 / h(img.y)};
}

Point conjugate_zero_inf(double alpha, const Point& pt) {
  check_param(alpha, "alpha");
  if (!(pt.x > 0.0) || !(pt.y > 0.0) || !std::isfinite(pt.x) || !std::isfinite(pt.y)) {
    throw std::domain_error("conjugate_zero_inf: point must be in (0,inf)^2");
  }
  const Point img =
      apply_map(MapSpec::fa_inf(1.0 / alpha), {alpha * pt.x, 1.0 / pt.y});
  return {img.x / alpha, 1.0 / img.y};
}

}  // namespace gb2::maps
