#pragma once

// The three-exponent moment transform of a positive random variable W with
// weight parameter gamma:
//
//   L(s, theta, sigma) = E[ (W/(1+W))^s (gamma*W/(1+gamma*W))^theta (1/(1+W))^sigma ]
//
// with the boundary convention gamma = +infinity, where the middle factor
// tends to 1 and the value depends on (s, sigma) only. Provides the closed
// form for second-kind generalized beta laws, a Monte Carlo estimator over a
// sample batch, the difference-operator calculus on the admissible exponent
// set, and residuals for every identity the calculus satisfies.

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gb2/distributions.hpp"
#include "gb2/quadrature.hpp"

namespace gb2::tf {

// Exponent triple. Admissible set: theta, sigma, s+theta, s+sigma >= 0.
struct Point {
  double s;
  double theta;
  double sigma;
};

bool in_xi(const Point& pt);
void require_xi(const Point& pt);  // throws std::domain_error

// Shared parameter set for the four-role factorization checks. Roles:
//   X ~ gb2(lambda, a, b; alpha)    U ~ gb2(-lambda, a, b; alpha)
//   Y ~ gb2(-lambda, a, b; beta)    V ~ gb2(lambda, a, b; beta)
struct ModelQuad {
  double lambda;
  double a;
  double b;
  double alpha;
  double beta;
};

void validate(const ModelQuad& m);  // |lambda| < min(a,b); alpha, beta > 0
dist::Gb2 law_x(const ModelQuad& m);
dist::Gb2 law_y(const ModelQuad& m);
dist::Gb2 law_u(const ModelQuad& m);
dist::Gb2 law_v(const ModelQuad& m);

// Closed form for W ~ gb2(nu, p, q; gamma):
//   gamma^theta * (q+nu)^(s+theta) (p-nu)^(sigma) / (p+q)^(s+theta+sigma)
//   * 2F1(theta+p+nu, s+theta+q+nu; s+theta+sigma+p+q; 1-gamma)
//   / 2F1(p+nu, q+nu; p+q; 1-gamma)
// where (c)^(d) is the ascending factorial. Requires s+theta >= 0 and
// sigma >= 0; theta itself may be negative (used by the recurrence ladder).
double l_closed(const dist::Gb2& spec, const Point& pt, const quad::Config& cfg = {});

struct McValue {
  double mean;
  double se;
};

// Sample-mean estimator with standard error. gamma may be +infinity, in
// which case the middle weight factor is identically 1.
McValue l_mc(const dist::SampleBatch& batch, double gamma, const Point& pt);

// Boundary closed form for W ~ b2(a, b): B(s+a, sigma+b) / B(a, b).
double l_inf_closed(const dist::B2& spec, double s, double sigma);

// Transform evaluator as a value: closed-form gb2, boundary closed-form b2
// (gamma = +infinity), or Monte Carlo over a shared sample batch (per-sample
// log weights precomputed once).
class Evaluator {
 public:
  static Evaluator closed(const dist::Gb2& spec, const quad::Config& cfg = {});
  static Evaluator boundary_inf(const dist::B2& spec);
  static Evaluator monte_carlo(std::shared_ptr<const dist::SampleBatch> batch, double gamma);

  double gamma() const;        // +infinity for the boundary form
  bool deterministic() const;  // true unless Monte Carlo
  double operator()(const Point& pt) const;
  McValue value_se(const Point& pt) const;  // se = 0 for deterministic forms

 private:
  struct ClosedGb2 {
    dist::Gb2 spec;
    quad::Config cfg;
  };
  struct BoundaryB2 {
    dist::B2 spec;
  };
  struct McCache;
  struct Mc {
    std::shared_ptr<const dist::SampleBatch> batch;
    double gamma;
    std::shared_ptr<const McCache> cache;
  };

  explicit Evaluator(std::variant<ClosedGb2, BoundaryB2, Mc> impl) : impl_(std::move(impl)) {}
  std::variant<ClosedGb2, BoundaryB2, Mc> impl_;

  friend McValue l_mc(const dist::SampleBatch& batch, double gamma, const Point& pt);
};

enum class Var { Theta, Sigma };

// First difference in the named exponent: f(pt + e_var) - f(pt).
double delta_op(const Evaluator& ev, Var var, const Point& pt);

// Cross-ratio of four transform values:
//   M = L(s,th,sg) L(s,th+1,sg+1) / ( L(s+1,th,sg) L(s-1,th+1,sg+1) ).
// For deterministic evaluators the equivalent difference form
// L * (DthDsg L) / ((Dth L)(Dsg L)) is computed as well and must agree.
double m_fn(const Evaluator& ev, const Point& pt);
std::pair<double, double> m_fn_forms(const Evaluator& ev, const Point& pt);

// The rational functional f(f + Dth f + Dsg f) / ((Dth f)(Dsg f)); equals
// (gamma - 1) * m_fn when f is a transform with weight gamma.
double phi_fn(const Evaluator& ev, const Point& pt);

struct ResidualRecord {
  std::string identity;
  Point point;
  double lhs;
  double rhs;
  double abs_residual;
  double rel_residual;
};

// Residuals of the pointwise identities at pt:
//   theta_split        L = L(s,th+1,sg) + gamma^-1 L(s-1,th+1,sg+1)
//   sigma_split        L = L(s+1,th,sg) + L(s,th,sg+1)
//   delta_theta_form   Dth L = -gamma^-1 L(s-1,th+1,sg+1)
//   delta_sigma_form   Dsg L = -L(s+1,th,sg)
//   cross_difference   DthDsg L = gamma^-1 L(s,th+1,sg+1)
//   diagonal_relation  L + Dth L + Dsg L = (1 - 1/gamma) L(s,th+1,sg+1)
std::vector<ResidualRecord> residual_identities(const Evaluator& ev, const Point& pt);

// Two sides of the four-role factorization
//   L_X(s,th,sg) L_Y(s,sg,th) = L_U(s,sg,th) L_V(s,th,sg)
// and its relative residual.
std::pair<double, double> lindep_sides(const ModelQuad& m, const Point& pt,
                                       const quad::Config& cfg = {});
double residual_lindep(const ModelQuad& m, const Point& pt, const quad::Config& cfg = {});

// Closed ratio L_X(s,th,sg) / L_U(s,sg,th), independent of the weight:
//   (a-lambda)^(sg) (b+lambda)^(s+th) / ( (a+lambda)^(th) (b-lambda)^(s+sg) ).
double ratio_pochhammer(const ModelQuad& m, const Point& pt);

struct MResiduals {
  double m_product;       // rel residual of M_X M_Y = M_U M_V
  double m_weighted_sum;  // rel residual of (alpha-1)M_X + (beta-1)M_Y = same in U,V
  double m_x_minus_m_u;   // rel residual of M_X = M_U
  double diagnostic;      // (alpha-1)M_X - (beta-1)M_V, expected away from 0
};

// M-function conservation checks under the role slots
//   M_X, M_V at (s,th,sg) and M_Y, M_U at (s,sg,th).
MResiduals residual_m_identities(const ModelQuad& m, const Point& pt,
                                 const quad::Config& cfg = {});

// All points of levels^3 whose exponent triple is admissible.
std::vector<Point> xi_grid(const std::vector<double>& levels);

}  // namespace gb2::tf
