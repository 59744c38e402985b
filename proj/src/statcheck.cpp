#include "gb2/statcheck.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "gb2/parallel.hpp"
#include "gb2/rng.hpp"

namespace gb2::stat {

namespace {

// Substream tags: keep every consumer of a seed on a disjoint stream.
constexpr std::uint64_t kStreamX = 1;
constexpr std::uint64_t kStreamY = 2;
constexpr std::uint64_t kStreamSubsample = 3;
constexpr std::uint64_t kStreamPerm = 4;

struct RowStats {
  std::vector<double> row_mean;  // (1/n) sum_k |v_j - v_k|
  double grand_mean = 0.0;       // (1/n^2) sum_jk |v_j - v_k|
  double sq_mean = 0.0;          // (1/n^2) sum_jk |v_j - v_k|^2
};

// Distance-matrix row means in O(n log n) via sorting and prefix sums.
RowStats row_stats(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });

  RowStats st;
  st.row_mean.resize(n);
  double prefix = 0.0;  // sum of the k smallest values
  double total = 0.0;
  for (double value : v) total += value;
  double grand = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double val = v[order[k]];
    const double below = static_cast<double>(k) * val - prefix;
    prefix += val;
    const double above = (total - prefix) - static_cast<double>(n - 1 - k) * val;
    const double row = below + above;
    st.row_mean[order[k]] = row / static_cast<double>(n);
    grand += row;
  }
  st.grand_mean = grand / (static_cast<double>(n) * static_cast<double>(n));

  double sum = 0.0, sum_sq = 0.0;
  for (double value : v) {
    sum += value;
    sum_sq += value * value;
  }
  // sum_jk (v_j - v_k)^2 = 2n*sum(v^2) - 2*(sum v)^2.
  st.sq_mean = (2.0 * static_cast<double>(n) * sum_sq - 2.0 * sum * sum) /
               (static_cast<double>(n) * static_cast<double>(n));
  return st;
}

// Binary-indexed prefix aggregates (count, sum x, sum y, sum x*y) over
// y-ranks; the four sums are interleaved per node so one level touches one
// cache line. Used to accumulate pairwise |dx|*|dy| products in one sweep.
class RankAggregator {
 public:
  explicit RankAggregator(std::size_t n) : n_(n), tree_(4 * (n + 1), 0.0) {}

  void reset() { std::fill(tree_.begin(), tree_.end(), 0.0); }

  void add(std::size_t rank, double x, double y) {
    for (std::size_t i = rank; i <= n_; i += i & (~i + 1)) {
      double* node = tree_.data() + 4 * i;
      node[0] += 1.0;
      node[1] += x;
      node[2] += y;
      node[3] += x * y;
    }
  }

  std::array<double, 4> prefix(std::size_t rank) const {
    std::array<double, 4> acc{};
    for (std::size_t i = rank; i > 0; i -= i & (~i + 1)) {
      const double* node = tree_.data() + 4 * i;
      acc[0] += node[0];
      acc[1] += node[1];
      acc[2] += node[2];
      acc[3] += node[3];
    }
    return acc;
  }

 private:
  std::size_t n_;
  std::vector<double> tree_;
};

std::vector<std::size_t> sort_order(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return v[i] < v[j] || (v[i] == v[j] && i < j);
  });
  return order;
}

// rank[i] = 1-based position of element i in the sorted order.
std::vector<std::size_t> ranks_from_order(const std::vector<std::size_t>& order) {
  std::vector<std::size_t> rank(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
  return rank;
}

// Sum over unordered pairs of |x_j - x_k| * |y_j - y_k| in O(n log n):
// sweep points in ascending x (fixing the sign of the x-difference) and
// split the already-seen points by y-rank to resolve the y-difference sign.
double pairwise_product_sum(const std::vector<double>& xs, const std::vector<double>& ys,
                            const std::vector<std::size_t>& x_order,
                            const std::vector<std::size_t>& y_rank, RankAggregator& agg) {
  agg.reset();
  double tot_c = 0.0, tot_x = 0.0, tot_y = 0.0, tot_xy = 0.0;
  double sum = 0.0, comp = 0.0;
  for (const std::size_t i : x_order) {
    const double xv = xs[i], yv = ys[i];
    const auto lo = agg.prefix(y_rank[i] - 1);
    // sum_j |yv - y_j| and sum_j x_j |yv - y_j| over the seen points, split
    // into y_j below / above yv (ties contribute zero either way).
    const double abs_dy = (yv * lo[0] - lo[2]) + ((tot_y - lo[2]) - yv * (tot_c - lo[0]));
    const double x_abs_dy = (yv * lo[1] - lo[3]) + ((tot_xy - lo[3]) - yv * (tot_x - lo[1]));
    const double term = xv * abs_dy - x_abs_dy;
    const double t = sum + term;  // Neumaier accumulation
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    agg.add(y_rank[i], xv, yv);
    tot_c += 1.0;
    tot_x += xv;
    tot_y += yv;
    tot_xy += xv * yv;
  }
  return sum + comp;
}

// Doubly-centered distance covariance from the pairwise product sum and the
// raw sum of row-mean products.
double dcov_from_parts(double pair_sum, double row_product_sum, const RowStats& ax,
                       const RowStats& ay, std::size_t n) {
  const double nn = static_cast<double>(n);
  return 2.0 * pair_sum / (nn * nn) - 2.0 * row_product_sum / nn +
         ax.grand_mean * ay.grand_mean;
}

double dvar_sq(const RowStats& st) {
  double s2 = 0.0;
  for (double rm : st.row_mean) s2 += rm * rm;
  s2 /= static_cast<double>(st.row_mean.size());
  return st.sq_mean - 2.0 * s2 + st.grand_mean * st.grand_mean;
}

void check_pair(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("dcorr: length mismatch");
  if (xs.size() < 4) throw std::domain_error("dcorr: need at least 4 observations");
}

}  // namespace

double dcorr(const std::vector<double>& xs, const std::vector<double>& ys) {
  check_pair(xs, ys);
  const std::size_t n = xs.size();
  const RowStats ax = row_stats(xs);
  const RowStats ay = row_stats(ys);
  const double vx = dvar_sq(ax);
  const double vy = dvar_sq(ay);
  if (!(vx > 0.0) || !(vy > 0.0)) return 0.0;  // constant input convention
  const std::vector<std::size_t> x_order = sort_order(xs);
  const std::vector<std::size_t> y_rank = ranks_from_order(sort_order(ys));
  RankAggregator agg(n);
  const double pair_sum = pairwise_product_sum(xs, ys, x_order, y_rank, agg);
  double row_prod = 0.0;
  for (std::size_t j = 0; j < n; ++j) row_prod += ax.row_mean[j] * ay.row_mean[j];
  const double cov = dcov_from_parts(pair_sum, row_prod, ax, ay, n);
  const double corr_sq = cov / std::sqrt(vx * vy);
  return std::sqrt(std::clamp(corr_sq, 0.0, 1.0));
}

double perm_pvalue(const std::vector<double>& xs, const std::vector<double>& ys,
                   int n_perm, std::uint64_t seed, int threads) {
  check_pair(xs, ys);
  if (n_perm < 99) throw std::domain_error("perm_pvalue: need n_perm >= 99");
  const std::size_t n = xs.size();
  const RowStats ax = row_stats(xs);
  const RowStats ay = row_stats(ys);
  const std::vector<std::size_t> x_order = sort_order(xs);
  const std::vector<std::size_t> y_rank = ranks_from_order(sort_order(ys));

  double observed;
  {
    RankAggregator agg(n);
    double row_prod = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_prod += ax.row_mean[j] * ay.row_mean[j];
    observed =
        dcov_from_parts(pairwise_product_sum(xs, ys, x_order, y_rank, agg), row_prod, ax, ay, n);
  }

  const int workers = std::min(par::resolve_threads(threads), n_perm);
  std::atomic<int> next{0};
  std::atomic<int> exceed{0};
  auto run = [&] {
    std::vector<std::size_t> pm(n);
    std::vector<double> yp(n);
    std::vector<std::size_t> yp_rank(n);
    RankAggregator agg(n);
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= n_perm) return;
      rng::Engine eng(seed, (kStreamPerm << 32) + static_cast<std::uint64_t>(r));
      std::iota(pm.begin(), pm.end(), std::size_t{0});
      for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(pm[i], pm[eng.below(i + 1)]);
      }
      double row_prod = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        yp[j] = ys[pm[j]];
        yp_rank[j] = y_rank[pm[j]];
        row_prod += ax.row_mean[j] * ay.row_mean[pm[j]];
      }
      const double cov =
          dcov_from_parts(pairwise_product_sum(xs, yp, x_order, yp_rank, agg), row_prod, ax, ay, n);
      if (cov >= observed) exceed.fetch_add(1);
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  return (1.0 + exceed.load()) / (n_perm + 1.0);
}

double ks_stat(const std::vector<double>& sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::domain_error("ks_stat: empty sample");
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    sup = std::max(sup, std::max((i + 1.0) / n - f, f - i / n));
  }
  return std::clamp(sup, 0.0, 1.0);
}

double ks_stat_dist(const std::vector<double>& sample, const dist::DistSpec& predicted,
                    const quad::Config& cfg) {
  if (sample.empty()) throw std::domain_error("ks_stat: empty sample");
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  // One quadrature anchor at the smallest point, then accumulate the density
  // across consecutive order-statistic gaps with fixed Gauss-Legendre panels.
  static constexpr double kNodes[4] = {0.069431844202973712, 0.33000947820757187,
                                       0.66999052179242813, 0.93056815579702629};
  static constexpr double kWeights[4] = {0.17392742256872693, 0.32607257743127307,
                                         0.32607257743127307, 0.17392742256872693};
  const dist::Density density(predicted, cfg);
  std::vector<double> cdf_vals(n);
  cdf_vals[0] = dist::cdf_numeric(predicted, sorted[0], cfg);
  for (std::size_t i = 1; i < n; ++i) {
    const double lo = sorted[i - 1], hi = sorted[i];
    double panel = 0.0;
    if (hi > lo) {
      const double width = hi - lo;
      for (int k = 0; k < 4; ++k) panel += kWeights[k] * density(lo + width * kNodes[k]);
      panel *= width;
    }
    cdf_vals[i] = cdf_vals[i - 1] + panel;
  }
  double sup = 0.0;
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = std::clamp(cdf_vals[i], 0.0, 1.0);
    sup = std::max(sup, std::max((i + 1.0) / dn - f, f - i / dn));
  }
  return std::clamp(sup, 0.0, 1.0);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::domain_error("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    sup = std::max(sup, std::abs(i / na - j / nb));
  }
  return sup;
}

void validate(const IpExperimentConfig& cfg) {
  maps::validate(cfg.map);
  dist::validate(cfg.law_x);
  dist::validate(cfg.law_y);
  dist::validate(cfg.predicted_u);
  dist::validate(cfg.predicted_v);
  if (cfg.n < 1000) throw std::domain_error("ip config: n must be >= 1000");
  if (cfg.n_permutations < 99) {
    throw std::domain_error("ip config: n_permutations must be >= 99");
  }
  if (cfg.dcorr_subsample < 4 || cfg.dcorr_subsample > cfg.n) {
    throw std::domain_error("ip config: dcorr_subsample must be in [4, n]");
  }
  if (cfg.map.kind == maps::Kind::Fab && cfg.map.alpha == cfg.map.beta) {
    throw std::domain_error("ip config: Fab requires alpha != beta");
  }
  const bool unit = cfg.map.kind == maps::Kind::Gdelta;
  if (dist::bounded_support(cfg.law_x) != unit || dist::bounded_support(cfg.law_y) != unit) {
    throw std::domain_error("ip config: input laws must match the map domain");
  }
  if (!(cfg.p_threshold > 0.0 && cfg.p_threshold < 1.0) || !(cfg.ks_threshold > 0.0)) {
    throw std::domain_error("ip config: thresholds must be positive (p in (0,1))");
  }
}

VerificationReport run_ip_experiment(const IpExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t n = cfg.n;
  const std::vector<double> xs =
      dist::sample(cfg.law_x, n, cfg.seed, cfg.threads, kStreamX).values;
  const std::vector<double> ys =
      dist::sample(cfg.law_y, n, cfg.seed, cfg.threads, kStreamY).values;

  std::vector<double> us(n), vs(n), cu(n), cv(n);
  par::for_each_chunk(n, cfg.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const maps::Point img = maps::apply_map(cfg.map, {xs[i], ys[i]});
      us[i] = img.x;
      vs[i] = img.y;
      cu[i] = img.x / (1.0 + img.x);
      cv[i] = img.y / (1.0 + img.y);
    }
  });

  // Deterministic subsample without replacement for the distance statistic.
  const std::size_t m = cfg.dcorr_subsample;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng::Engine pick(cfg.seed, kStreamSubsample << 32);
  for (std::size_t i = 0; i < m; ++i) {
    std::swap(idx[i], idx[i + pick.below(n - i)]);
  }
  std::vector<double> sx(m), sy(m);
  for (std::size_t i = 0; i < m; ++i) {
    sx[i] = cu[idx[i]];
    sy[i] = cv[idx[i]];
  }

  VerificationReport report;
  report.seed_used = cfg.seed;
  report.dcorr_stat = dcorr(sx, sy);
  report.p_value = perm_pvalue(sx, sy, cfg.n_permutations, cfg.seed, cfg.threads);
  report.ks_u = ks_stat_dist(us, cfg.predicted_u);
  report.ks_v = ks_stat_dist(vs, cfg.predicted_v);
  report.independence_ok = report.p_value >= cfg.p_threshold;
  report.marginals_ok = report.ks_u < cfg.ks_threshold && report.ks_v < cfg.ks_threshold;
  report.pass = cfg.expect_dependence ? report.p_value < cfg.p_threshold
                                      : (report.independence_ok && report.marginals_ok);
  return report;
}

}  // namespace gb2::stat
