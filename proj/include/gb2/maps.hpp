#pragma once

// Planar involutions of the positive quadrant (and of the unit square for
// Gdelta), their conserved quantities, closed-form Jacobians, and the
// coordinate conjugations that connect the families. All formulas are kept
// in positive-factor form: every numerator and denominator is a sum of
// positive terms, so evaluation is cancellation-free on the domain.

#include <array>

namespace gb2::maps {

enum class Kind { Fab, FaInf, FInfB, FaZero, Gdelta };

struct MapSpec {
  Kind kind;
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;

  static MapSpec fab(double alpha, double beta) { return {Kind::Fab, alpha, beta, 0.0}; }
  static MapSpec fa_inf(double alpha) { return {Kind::FaInf, alpha, 0.0, 0.0}; }
  static MapSpec finf_b(double beta) { return {Kind::FInfB, 0.0, beta, 0.0}; }
  static MapSpec fa_zero(double alpha) { return {Kind::FaZero, alpha, 0.0, 0.0}; }
  static MapSpec gdelta(double delta) { return {Kind::Gdelta, 0.0, 0.0, delta}; }
};

struct Point {
  double x;
  double y;
};

// Parameter constraints only (all used parameters finite and > 0). Fab with
// alpha == beta is a valid pointwise map; product-law verification entry
// points reject it separately.
void validate(const MapSpec& spec);

// Strict interior of the map's domain: (0,inf)^2, or (0,1)^2 for Gdelta.
bool in_domain(const MapSpec& spec, const Point& pt);

// Applies the map; throws std::domain_error outside the domain.
Point apply_map(const MapSpec& spec, const Point& pt);

// The three conserved quantities exchanged between a point and its image
// (first slot equal, second and third swapped). Supported for Fab and FaInf;
// throws std::invalid_argument for other kinds.
std::array<double, 3> invariant_triple(const MapSpec& spec, const Point& pt);

// Closed-form Jacobian magnitude of the inverse transformation, evaluated at
// the image point (u, v). Supported for FaInf and FaZero; throws
// std::invalid_argument otherwise.
double jacobian_closed(const MapSpec& spec, const Point& pt);

// Evaluates FaInf with alpha = 1/delta through the unit-square map Gdelta
// conjugated by x -> x/(1+x) and its inverse; equals
// apply_map(fa_inf(1/delta), pt) identically.
Point conjugate_fg(double delta, const Point& pt);

// Evaluates FaZero with parameter alpha through FaInf with parameter 1/alpha
// via the reciprocal-coordinate change; equals apply_map(fa_zero(alpha), pt).
Point conjugate_zero_inf(double alpha, const Point& pt);

}  // namespace gb2::maps
