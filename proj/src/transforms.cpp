#include "gb2/transforms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gb2/specfun.hpp"

namespace gb2::tf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Compensated (Neumaier) accumulator: keeps sums of 10^6 O(1) terms accurate
// to the last few ulps, which the shared-batch identity checks rely on.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

double rel_of(double lhs, double rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  if (scale == 0.0) return 0.0;
  return std::abs(lhs - rhs) / scale;
}

}  // namespace

bool in_xi(const Point& pt) {
  if (!std::isfinite(pt.s) || !std::isfinite(pt.theta) || !std::isfinite(pt.sigma)) return false;
  return pt.theta >= 0.0 && pt.sigma >= 0.0 && pt.s + pt.theta >= 0.0 && pt.s + pt.sigma >= 0.0;
}

void require_xi(const Point& pt) {
  if (!in_xi(pt)) {
    throw std::domain_error("transform point outside the admissible exponent set");
  }
}

void validate(const ModelQuad& m) {
  if (!std::isfinite(m.lambda) || !std::isfinite(m.a) || !std::isfinite(m.b) ||
      !std::isfinite(m.alpha) || !std::isfinite(m.beta)) {
    throw std::domain_error("model: parameters must be finite");
  }
  if (!(m.a > 0.0) || !(m.b > 0.0) || !(m.alpha > 0.0) || !(m.beta > 0.0)) {
    throw std::domain_error("model: a, b, alpha, beta must be > 0");
  }
  if (!(std::abs(m.lambda) < std::min(m.a, m.b))) {
    throw std::domain_error("model: requires |lambda| < min(a, b)");
  }
}

dist::Gb2 law_x(const ModelQuad& m) { return {m.lambda, m.a, m.b, m.alpha}; }
dist::Gb2 law_y(const ModelQuad& m) { return {-m.lambda, m.a, m.b, m.beta}; }
dist::Gb2 law_u(const ModelQuad& m) { return {-m.lambda, m.a, m.b, m.alpha}; }
dist::Gb2 law_v(const ModelQuad& m) { return {m.lambda, m.a, m.b, m.beta}; }

double l_closed(const dist::Gb2& spec, const Point& pt, const quad::Config& cfg) {
  dist::validate(dist::DistSpec{spec});
  // theta alone may be negative (the recurrence ladder evaluates there); the
  // ascending-factorial and 2F1 arguments below are what must stay valid.
  if (!std::isfinite(pt.s) || !std::isfinite(pt.theta) || !std::isfinite(pt.sigma) ||
      pt.s + pt.theta < 0.0 || pt.sigma < 0.0) {
    throw std::domain_error("l_closed: requires s+theta >= 0 and sigma >= 0");
  }
  const double nu = spec.nu, p = spec.p, q = spec.q, g = spec.gamma;
  const double z = 1.0 - g;
  const double log_poch = specfun::log_pochhammer(q + nu, pt.s + pt.theta) +
                          specfun::log_pochhammer(p - nu, pt.sigma) -
                          specfun::log_pochhammer(p + q, pt.s + pt.theta + pt.sigma);
  const double f_num = specfun::gauss_2f1(pt.theta + p + nu, pt.s + pt.theta + q + nu,
                                          pt.s + pt.theta + pt.sigma + p + q, z, cfg);
  const double f_den = specfun::gauss_2f1(p + nu, q + nu, p + q, z, cfg);
  return std::exp(pt.theta * std::log(g) + log_poch) * (f_num / f_den);
}

double l_inf_closed(const dist::B2& spec, double s, double sigma) {
  dist::validate(dist::DistSpec{spec});
  if (!std::isfinite(s) || !std::isfinite(sigma)) {
    throw std::domain_error("l_inf_closed: non-finite exponent");
  }
  return std::exp(specfun::log_beta(s + spec.a, sigma + spec.b) -
                  specfun::log_beta(spec.a, spec.b));
}

struct Evaluator::McCache {
  std::vector<double> log_t;  // log(w/(1+w))
  std::vector<double> log_g;  // log(gamma*w/(1+gamma*w)); empty when gamma = inf
  std::vector<double> log_c;  // -log(1+w)

  McCache(const std::vector<double>& w, double gamma) {
    const std::size_t n = w.size();
    log_t.resize(n);
    log_c.resize(n);
    if (std::isfinite(gamma)) log_g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double l1p = std::log1p(w[i]);
      log_t[i] = std::log(w[i]) - l1p;
      log_c[i] = -l1p;
      if (std::isfinite(gamma)) {
        log_g[i] = std::log(gamma * w[i]) - std::log1p(gamma * w[i]);
      }
    }
  }

  McValue eval(const Point& pt) const {
    const std::size_t n = log_t.size();
    CompensatedSum sum, sum_sq;
    for (std::size_t i = 0; i < n; ++i) {
      double e = pt.s * log_t[i] + pt.sigma * log_c[i];
      if (!log_g.empty()) e += pt.theta * log_g[i];
      const double v = std::exp(e);
      sum.add(v);
      sum_sq.add(v * v);
    }
    const double mean = sum.value() / static_cast<double>(n);
    double se = 0.0;
    if (n > 1) {
      const double var =
          std::max(0.0, sum_sq.value() - static_cast<double>(n) * mean * mean) /
          static_cast<double>(n - 1);
      se = std::sqrt(var / static_cast<double>(n));
    }
    return {mean, se};
  }
};

Evaluator Evaluator::closed(const dist::Gb2& spec, const quad::Config& cfg) {
  dist::validate(dist::DistSpec{spec});
  return Evaluator{ClosedGb2{spec, cfg}};
}

Evaluator Evaluator::boundary_inf(const dist::B2& spec) {
  dist::validate(dist::DistSpec{spec});
  return Evaluator{BoundaryB2{spec}};
}

Evaluator Evaluator::monte_carlo(std::shared_ptr<const dist::SampleBatch> batch,
                                 double gamma) {
  if (!batch || batch->values.empty()) {
    throw std::domain_error("monte_carlo evaluator: empty batch");
  }
  if (!(gamma > 0.0)) {  // +inf allowed
    throw std::domain_error("monte_carlo evaluator: gamma must be > 0 or +inf");
  }
  auto cache = std::make_shared<const McCache>(batch->values, gamma);
  return Evaluator{Mc{std::move(batch), gamma, std::move(cache)}};
}

double Evaluator::gamma() const {
  if (const auto* c = std::get_if<ClosedGb2>(&impl_)) return c->spec.gamma;
  if (std::holds_alternative<BoundaryB2>(impl_)) return kInf;
  return std::get<Mc>(impl_).gamma;
}

bool Evaluator::deterministic() const { return !std::holds_alternative<Mc>(impl_); }

double Evaluator::operator()(const Point& pt) const {
  return value_se(pt).mean;
}

McValue Evaluator::value_se(const Point& pt) const {
  if (const auto* c = std::get_if<ClosedGb2>(&impl_)) {
    return {l_closed(c->spec, pt, c->cfg), 0.0};
  }
  if (const auto* b = std::get_if<BoundaryB2>(&impl_)) {
    // At gamma = +inf the middle weight factor is 1: theta does not enter.
    return {l_inf_closed(b->spec, pt.s, pt.sigma), 0.0};
  }
  return std::get<Mc>(impl_).cache->eval(pt);
}

McValue l_mc(const dist::SampleBatch& batch, double gamma, const Point& pt) {
  if (batch.values.empty()) throw std::domain_error("l_mc: empty batch");
  if (!(gamma > 0.0)) throw std::domain_error("l_mc: gamma must be > 0 or +inf");
  require_xi(pt);
  return Evaluator::McCache(batch.values, gamma).eval(pt);
}

double delta_op(const Evaluator& ev, Var var, const Point& pt) {
  require_xi(pt);
  Point shifted = pt;
  (var == Var::Theta ? shifted.theta : shifted.sigma) += 1.0;
  require_xi(shifted);
  return ev(shifted) - ev(pt);
}

std::pair<double, double> m_fn_forms(const Evaluator& ev, const Point& pt) {
  require_xi(pt);
  const Point p11{pt.s, pt.theta + 1.0, pt.sigma + 1.0};
  const Point ps{pt.s + 1.0, pt.theta, pt.sigma};
  const Point pm{pt.s - 1.0, pt.theta + 1.0, pt.sigma + 1.0};
  const Point pt1{pt.s, pt.theta + 1.0, pt.sigma};
  const Point ps1{pt.s, pt.theta, pt.sigma + 1.0};
  require_xi(pm);  // holds whenever pt does; kept as a guard
  const double l00 = ev(pt), l11 = ev(p11), lsp = ev(ps), lm = ev(pm);
  const double den_def = lsp * lm;
  if (!(std::abs(den_def) > 0.0) || !std::isfinite(den_def)) {
    throw std::runtime_error("m_fn: degenerate denominator");
  }
  const double def_form = l00 * l11 / den_def;
  const double lt = ev(pt1), ls = ev(ps1);
  const double dth = lt - l00, dsg = ls - l00;
  const double dcross = (l11 - lt) - (ls - l00);
  const double den_new = dth * dsg;
  const double new_form = den_new == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                         : l00 * dcross / den_new;
  return {def_form, new_form};
}

double m_fn(const Evaluator& ev, const Point& pt) {
  const auto [def_form, new_form] = m_fn_forms(ev, pt);
  if (ev.deterministic()) {
    if (!(rel_of(def_form, new_form) < 1e-6)) {
      throw std::logic_error("m_fn: cross-ratio and difference forms disagree");
    }
  }
  return def_form;
}

double phi_fn(const Evaluator& ev, const Point& pt) {
  require_xi(pt);
  const double f = ev(pt);
  const double dth = delta_op(ev, Var::Theta, pt);
  const double dsg = delta_op(ev, Var::Sigma, pt);
  const double den = dth * dsg;
  if (den == 0.0 || !std::isfinite(den)) {
    throw std::runtime_error("phi_fn: degenerate denominator");
  }
  return f * (f + dth + dsg) / den;
}

std::vector<ResidualRecord> residual_identities(const Evaluator& ev, const Point& pt) {
  require_xi(pt);
  const double inv_g = 1.0 / ev.gamma();  // 0 at the gamma = +inf boundary
  const double l00 = ev(pt);
  const double ltp = ev({pt.s, pt.theta + 1.0, pt.sigma});
  const double lsp = ev({pt.s, pt.theta, pt.sigma + 1.0});
  const double lup = ev({pt.s + 1.0, pt.theta, pt.sigma});
  const double ldn = ev({pt.s - 1.0, pt.theta + 1.0, pt.sigma + 1.0});
  const double l11 = ev({pt.s, pt.theta + 1.0, pt.sigma + 1.0});

  auto record = [&](const char* name, double lhs, double rhs) {
    return ResidualRecord{name, pt, lhs, rhs, std::abs(lhs - rhs), rel_of(lhs, rhs)};
  };
  return {
      record("theta_split", l00, ltp + inv_g * ldn),
      record("sigma_split", l00, lup + lsp),
      record("delta_theta_form", ltp - l00, -inv_g * ldn),
      record("delta_sigma_form", lsp - l00, -lup),
      record("cross_difference", (l11 - ltp) - (lsp - l00), inv_g * l11),
      record("diagonal_relation", ltp + lsp - l00, (1.0 - inv_g) * l11),
  };
}

std::pair<double, double> lindep_sides(const ModelQuad& m, const Point& pt,
                                       const quad::Config& cfg) {
  validate(m);
  require_xi(pt);
  const Point swapped{pt.s, pt.sigma, pt.theta};
  const double lhs = l_closed(law_x(m), pt, cfg) * l_closed(law_y(m), swapped, cfg);
  const double rhs = l_closed(law_u(m), swapped, cfg) * l_closed(law_v(m), pt, cfg);
  return {lhs, rhs};
}

double residual_lindep(const ModelQuad& m, const Point& pt, const quad::Config& cfg) {
  const auto [lhs, rhs] = lindep_sides(m, pt, cfg);
  return rel_of(lhs, rhs);
}

double ratio_pochhammer(const ModelQuad& m, const Point& pt) {
  validate(m);
  require_xi(pt);
  return std::exp(specfun::log_pochhammer(m.a - m.lambda, pt.sigma) +
                  specfun::log_pochhammer(m.b + m.lambda, pt.s + pt.theta) -
                  specfun::log_pochhammer(m.a + m.lambda, pt.theta) -
                  specfun::log_pochhammer(m.b - m.lambda, pt.s + pt.sigma));
}

MResiduals residual_m_identities(const ModelQuad& m, const Point& pt,
                                 const quad::Config& cfg) {
  validate(m);
  require_xi(pt);
  const Point swapped{pt.s, pt.sigma, pt.theta};
  const double mx = m_fn(Evaluator::closed(law_x(m), cfg), pt);
  const double my = m_fn(Evaluator::closed(law_y(m), cfg), swapped);
  const double mu = m_fn(Evaluator::closed(law_u(m), cfg), swapped);
  const double mv = m_fn(Evaluator::closed(law_v(m), cfg), pt);
  const double ap = m.alpha - 1.0, bp = m.beta - 1.0;

  MResiduals out;
  out.m_product = rel_of(mx * my, mu * mv);
  const double sum_lhs = ap * mx + bp * my;
  const double sum_rhs = ap * mu + bp * mv;
  const double sum_scale =
      std::max({std::abs(ap * mx), std::abs(bp * my), std::abs(ap * mu),
                std::abs(bp * mv), 1e-300});
  out.m_weighted_sum = std::abs(sum_lhs - sum_rhs) / sum_scale;
  out.m_x_minus_m_u = rel_of(mx, mu);
  out.diagnostic = ap * mx - bp * mv;
  return out;
}

std::vector<Point> xi_grid(const std::vector<double>& levels) {
  std::vector<Point> pts;
  for (double s : levels) {
    for (double th : levels) {
      for (double sg : levels) {
        const Point pt{s, th, sg};
        if (in_xi(pt)) pts.push_back(pt);
      }
    }
  }
  return pts;
}

}  // namespace gb2::tf
