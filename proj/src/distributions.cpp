#include "gb2/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gb2/parallel.hpp"
#include "gb2/rng.hpp"
#include "gb2/specfun.hpp"

namespace gb2::dist {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

void check(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

bool finite(double v) { return std::isfinite(v); }

std::string fmt(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Log of the unnormalized density at an interior point of the support. For
// the (0,1) families the complement 1-x is taken explicitly so callers with
// an exact complement can pass it through.
double log_unnorm_half(const Gb2& d, double x) {
  return (d.q + d.nu - 1.0) * std::log(x) - (d.p + d.nu) * std::log1p(d.gamma * x) -
         (d.q - d.nu) * std::log1p(x);
}

double log_unnorm_half(const B2& d, double x) {
  return (d.a - 1.0) * std::log(x) - (d.a + d.b) * std::log1p(x);
}

// 1 + (delta-1)x = delta*x + (1-x): a positive sum for x in (0,1), delta > 0.
double log_unnorm_unit(const Gb1& d, double x, double xc) {
  return (d.p - 1.0) * std::log(x) + (d.q - 1.0) * std::log(xc) +
         d.r * std::log(d.delta * x + xc);
}

double log_unnorm_unit(const B1& d, double x, double xc) {
  return (d.a - 1.0) * std::log(x) + (d.b - 1.0) * std::log(xc);
}

double log_unnorm(const DistSpec& spec, double x, double xc) {
  return std::visit(Overload{
                        [&](const Gb2& d) { return log_unnorm_half(d, x); },
                        [&](const B2& d) { return log_unnorm_half(d, x); },
                        [&](const Gb1& d) { return log_unnorm_unit(d, x, xc); },
                        [&](const B1& d) { return log_unnorm_unit(d, x, xc); },
                    },
                    spec);
}

bool in_support(const DistSpec& spec, double x) {
  if (!(x > 0.0) || !finite(x)) return false;
  return !bounded_support(spec) || x < 1.0;
}

}  // namespace

void validate(const DistSpec& spec) {
  std::visit(Overload{
                 [](const Gb2& d) {
                   check(finite(d.nu) && finite(d.p) && finite(d.q) && finite(d.gamma),
                         "gb2: parameters must be finite");
                   check(d.p > 0.0 && d.q > 0.0 && d.gamma > 0.0,
                         "gb2: p, q, gamma must be > 0");
                   check(-d.q < d.nu && d.nu < d.p, "gb2: requires -q < nu < p");
                 },
                 [](const B2& d) {
                   check(finite(d.a) && finite(d.b) && d.a > 0.0 && d.b > 0.0,
                         "b2: a, b must be finite and > 0");
                 },
                 [](const Gb1& d) {
                   check(finite(d.p) && finite(d.q) && finite(d.r) && finite(d.delta),
                         "gb1: parameters must be finite");
                   check(d.p > 0.0 && d.q > 0.0 && d.delta > 0.0,
                         "gb1: p, q, delta must be > 0");
                 },
                 [](const B1& d) {
                   check(finite(d.a) && finite(d.b) && d.a > 0.0 && d.b > 0.0,
                         "b1: a, b must be finite and > 0");
                 },
             },
             spec);
}

bool bounded_support(const DistSpec& spec) {
  return std::holds_alternative<Gb1>(spec) || std::holds_alternative<B1>(spec);
}

std::string describe(const DistSpec& spec) {
  return std::visit(
      Overload{
          [](const Gb2& d) {
            return "gb2(nu=" + fmt(d.nu) + ",p=" + fmt(d.p) + ",q=" + fmt(d.q) +
                   ",gamma=" + fmt(d.gamma) + ")";
          },
          [](const B2& d) { return "b2(a=" + fmt(d.a) + ",b=" + fmt(d.b) + ")"; },
          [](const Gb1& d) {
            return "gb1(p=" + fmt(d.p) + ",q=" + fmt(d.q) + ",r=" + fmt(d.r) +
                   ",delta=" + fmt(d.delta) + ")";
          },
          [](const B1& d) { return "b1(a=" + fmt(d.a) + ",b=" + fmt(d.b) + ")"; },
      },
      spec);
}

double log_normalizer(const DistSpec& spec, const quad::Config& cfg) {
  validate(spec);
  return std::visit(
      Overload{
          [&](const Gb2& d) {
            return specfun::log_beta(d.q + d.nu, d.p - d.nu) +
                   std::log(specfun::gauss_2f1(d.p + d.nu, d.q + d.nu, d.p + d.q,
                                               1.0 - d.gamma, cfg));
          },
          [&](const B2& d) { return specfun::log_beta(d.a, d.b); },
          [&](const Gb1& d) {
            return std::log(quad::integrate_01(
                [&](double t, double tc) { return std::exp(log_unnorm_unit(d, t, tc)); },
                cfg));
          },
          [&](const B1& d) { return specfun::log_beta(d.a, d.b); },
      },
      spec);
}

double normalizer(const DistSpec& spec, const quad::Config& cfg) {
  return std::exp(log_normalizer(spec, cfg));
}

double log_density(const DistSpec& spec, double x) {
  validate(spec);
  if (!in_support(spec, x)) return -std::numeric_limits<double>::infinity();
  return log_unnorm(spec, x, 1.0 - x) - log_normalizer(spec);
}

Density::Density(const DistSpec& spec, const quad::Config& cfg)
    : spec_(spec), log_norm_(log_normalizer(spec, cfg)) {}

double Density::log_density(double x) const {
  if (!in_support(spec_, x)) return -std::numeric_limits<double>::infinity();
  return log_unnorm(spec_, x, 1.0 - x) - log_norm_;
}

double Density::operator()(double x) const {
  if (!in_support(spec_, x)) return 0.0;
  return std::exp(log_density(x));
}

double cdf_numeric(const DistSpec& spec, double x, const quad::Config& cfg) {
  validate(spec);
  const double log_norm = log_normalizer(spec, cfg);
  if (bounded_support(spec)) {
    if (!(x > 0.0)) return 0.0;
    if (x >= 1.0) return 1.0;
    const double xc = 1.0 - x;
    // Integral over (0, x) via u = x*t, with 1-u = xc + x*tc kept exact.
    const double integral = quad::integrate_01(
        [&](double t, double tc) {
          return std::exp(log_unnorm(spec, x * t, xc + x * tc) - log_norm);
        },
        cfg);
    return std::min(1.0, x * integral);
  }
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  // Map (0, x) to (0, 1) through w = u/(1+u): u = w/(1-w), du = dw/(1-w)^2,
  // with the complement of w = wx*t computed as wxc + wx*tc (no cancellation).
  const double wx = x / (1.0 + x);
  const double wxc = 1.0 / (1.0 + x);
  const double integral = quad::integrate_01(
      [&](double t, double tc) {
        const double w = wx * t;
        const double wc = wxc + wx * tc;
        const double u = w / wc;
        return std::exp(log_unnorm(spec, u, 1.0 - u) - log_norm) / (wc * wc);
      },
      cfg);
  return std::min(1.0, wx * integral);
}

namespace {

double draw_one(const DistSpec& spec, rng::Engine& eng) {
  return std::visit(
      Overload{
          [&](const Gb2& d) {
            // Rejection from b2(q+nu, p-nu): the kernel ratio is
            // ((1+x)/(1+gamma*x))^(p+nu), bounded by exp(max(0, -(p+nu)ln gamma)).
            const double log_bound = std::max(0.0, -(d.p + d.nu) * std::log(d.gamma));
            for (;;) {
              const double x = eng.gamma(d.q + d.nu) / eng.gamma(d.p - d.nu);
              const double log_ratio =
                  (d.p + d.nu) * (std::log1p(x) - std::log1p(d.gamma * x));
              if (std::log(eng.uniform01()) < log_ratio - log_bound) return x;
            }
          },
          [&](const B2& d) { return eng.gamma(d.a) / eng.gamma(d.b); },
          [&](const Gb1& d) {
            // Rejection from b1(p, q): kernel ratio (delta*x + (1-x))^r with
            // range between 1 and delta^r.
            const double log_bound = std::max(0.0, d.r * std::log(d.delta));
            for (;;) {
              const double ga = eng.gamma(d.p);
              const double gb = eng.gamma(d.q);
              const double x = ga / (ga + gb);
              const double xc = gb / (ga + gb);
              const double log_ratio = d.r * std::log(d.delta * x + xc);
              if (std::log(eng.uniform01()) < log_ratio - log_bound) return x;
            }
          },
          [&](const B1& d) {
            const double ga = eng.gamma(d.a);
            const double gb = eng.gamma(d.b);
            return ga / (ga + gb);
          },
      },
      spec);
}

}  // namespace

SampleBatch sample(const DistSpec& spec, std::size_t n, std::uint64_t seed, int threads,
                   std::uint64_t stream_tag) {
  validate(spec);
  if (n == 0) throw std::domain_error("sample: n must be >= 1");
  SampleBatch batch;
  batch.seed = seed;
  batch.spec = spec;
  batch.values.resize(n);
  double* out = batch.values.data();
  par::for_each_chunk(n, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    rng::Engine eng(seed, (stream_tag << 32) + chunk);
    for (std::size_t i = begin; i < end; ++i) out[i] = draw_one(spec, eng);
  });
  return batch;
}

std::string to_csv(const SampleBatch& batch) {
  std::ostringstream os;
  os << "# " << describe(batch.spec) << " seed=" << batch.seed
     << " n=" << batch.values.size() << "\n";
  os << "value\n";
  for (double v : batch.values) os << fmt(v) << "\n";
  return os.str();
}

}  // namespace gb2::dist
