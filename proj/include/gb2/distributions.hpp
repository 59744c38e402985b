#pragma once

// The four distribution families used throughout: generalized and standard
// beta laws of the second kind on (0,inf), and of the first kind on (0,1).
// Provides validated specs, normalizing constants, log densities, numeric
// CDFs, and exact seedable samplers that are deterministic for a fixed seed
// regardless of thread count.

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gb2/quadrature.hpp"

namespace gb2::dist {

// Second-kind generalized beta on (0,inf):
// density ~ x^(q+nu-1) (1+gamma*x)^-(p+nu) (1+x)^-(q-nu), -q < nu < p.
struct Gb2 {
  double nu;
  double p;
  double q;
  double gamma;
};

// Second-kind beta on (0,inf): density ~ x^(a-1) (1+x)^-(a+b).
struct B2 {
  double a;
  double b;
};

// First-kind generalized beta on (0,1):
// density ~ x^(p-1) (1-x)^(q-1) (1+(delta-1)x)^r.
struct Gb1 {
  double p;
  double q;
  double r;
  double delta;
};

// First-kind beta on (0,1): density ~ x^(a-1) (1-x)^(b-1).
struct B1 {
  double a;
  double b;
};

using DistSpec = std::variant<Gb2, B2, Gb1, B1>;

// Throws std::domain_error when parameter constraints are violated.
void validate(const DistSpec& spec);

// True for the (0,1)-supported families, false for (0,inf).
bool bounded_support(const DistSpec& spec);

// Short text form, e.g. "gb2(nu=0.3,p=1.5,q=2,gamma=2)".
std::string describe(const DistSpec& spec);

// Constant Z such that (unnormalized density)/Z integrates to 1.
double normalizer(const DistSpec& spec, const quad::Config& cfg = {});
double log_normalizer(const DistSpec& spec, const quad::Config& cfg = {});

// Log of the normalized density; -infinity outside the support.
double log_density(const DistSpec& spec, double x);

// Numeric CDF: integral of the density over the support up to x.
double cdf_numeric(const DistSpec& spec, double x, const quad::Config& cfg = {});

// Density evaluator with the log-normalizer computed once (for hot loops).
class Density {
 public:
  explicit Density(const DistSpec& spec, const quad::Config& cfg = {});
  double log_density(double x) const;
  double operator()(double x) const;
  const DistSpec& spec() const { return spec_; }

 private:
  DistSpec spec_;
  double log_norm_;
};

struct SampleBatch {
  std::vector<double> values;
  std::uint64_t seed = 0;
  DistSpec spec;
};

// n exact i.i.d. draws, bit-reproducible for fixed (spec, n, seed,
// stream_tag) and any thread count. Distinct stream_tags give independent
// batches under the same seed.
SampleBatch sample(const DistSpec& spec, std::size_t n, std::uint64_t seed,
                   int threads = 0, std::uint64_t stream_tag = 0);

// CSV serialization of a batch: comment header with spec/seed, one value per
// line after a "value" column header.
std::string to_csv(const SampleBatch& batch);

}  // namespace gb2::dist
