#include "uavstop/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "uavstop/errors.hpp"

namespace uavstop {
namespace {

// Sum of t^3 - t over tie groups.
double tie_sum(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    const double t = static_cast<double>(j - i);
    sum += t * t * t - t;
    i = j;
  }
  return sum;
}

double normal_p(double z, Alternative alt) {
  switch (alt) {
    case Alternative::less: return 0.5 * std::erfc(-z / std::numbers::sqrt2);
    case Alternative::greater: return 0.5 * std::erfc(z / std::numbers::sqrt2);
    case Alternative::two_sided: break;
  }
  return std::min(1.0, std::erfc(std::abs(z) / std::numbers::sqrt2));
}

// Permutation distribution of twice the rank sum of an n_a-subset, with
// midranks doubled so every rank is an integer.
double exact_mw_p(const std::vector<double>& ranks, std::size_t n_a, long long twice_u_obs, Alternative alt) {
  std::vector<long long> r2;
  r2.reserve(ranks.size());
  for (double r : ranks) r2.push_back(std::llround(2.0 * r));
  const long long max_sum = std::accumulate(r2.begin(), r2.end(), 0LL);
  const auto width = static_cast<std::size_t>(max_sum + 1);
  std::vector<long double> ways((n_a + 1) * width, 0.0L);
  auto at = [&](std::size_t m, long long s) -> long double& { return ways[m * width + static_cast<std::size_t>(s)]; };
  at(0, 0) = 1.0L;
  for (std::size_t item = 0; item < r2.size(); ++item) {
    const std::size_t top = std::min(n_a, item + 1);
    for (std::size_t m = top; m >= 1; --m)
      for (long long s = max_sum; s >= r2[item]; --s) at(m, s) += at(m - 1, s - r2[item]);
  }
  const auto na = static_cast<long long>(n_a);
  const auto nb = static_cast<long long>(r2.size()) - na;
  const long long offset = na * (na + 1);  // 2U = 2R - n_a (n_a + 1)
  const long long twice_mean = na * nb;
  long double total = 0.0L, hit = 0.0L;
  for (long long s = 0; s <= max_sum; ++s) {
    const long double w = at(n_a, s);
    if (w == 0.0L) continue;
    const long long twice_u = s - offset;
    total += w;
    bool extreme = false;
    switch (alt) {
      case Alternative::less: extreme = twice_u <= twice_u_obs; break;
      case Alternative::greater: extreme = twice_u >= twice_u_obs; break;
      case Alternative::two_sided:
        extreme = std::llabs(twice_u - twice_mean) >= std::llabs(twice_u_obs - twice_mean);
        break;
    }
    if (extreme) hit += w;
  }
  return std::clamp(static_cast<double>(hit / total), 0.0, 1.0);
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<double> midranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double binom_test_geq(long long k, long long n, double p0) {
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw DomainError("binomial null must lie in [0, 1]");
  if (n < 0 || k < 0 || k > n) throw DomainError("binomial test needs 0 <= k <= n");
  if (k == 0 || p0 == 1.0) return 1.0;
  if (p0 == 0.0) return 0.0;
  const double lp = std::log(p0), lq = std::log1p(-p0);
  const double lnf = std::lgamma(static_cast<double>(n) + 1.0);
  double sum = 0.0;
  for (long long j = k; j <= n; ++j) {
    const double dj = static_cast<double>(j);
    const double lc = lnf - std::lgamma(dj + 1.0) - std::lgamma(static_cast<double>(n - j) + 1.0);
    sum += std::exp(lc + dj * lp + static_cast<double>(n - j) * lq);
  }
  return std::min(1.0, sum);
}

double chi2_sf(double x, int df) {
  if (df < 1) throw DomainError("chi-square needs df >= 1");
  if (!(x > 0.0)) return 1.0;
  if (df == 1) return std::erfc(std::sqrt(x / 2.0));
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

TestResult chi2_2x2(long long a, long long b, long long c, long long d) {
  if (a < 0 || b < 0 || c < 0 || d < 0) throw DomainError("contingency counts must be >= 0");
  const double r1 = double(a + b), r2 = double(c + d), c1 = double(a + c), c2 = double(b + d);
  if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) throw DomainError("degenerate 2x2 table: a margin is zero");
  const double n = r1 + r2;
  const double det = double(a) * double(d) - double(b) * double(c);
  const double chi2 = n * det * det / (r1 * r2 * c1 * c2);
  return {chi2, chi2_sf(chi2, 1), 1, std::nullopt, "pearson-chi2"};
}

TestResult mann_whitney(std::span<const double> a, std::span<const double> b, MwMethod method, Alternative alt) {
  if (a.empty() || b.empty()) throw DomainError("Mann-Whitney needs two non-empty samples");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const double na = double(a.size()), nb = double(b.size()), n = na + nb;
  const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  const double u = rank_sum_a - na * (na + 1.0) / 2.0;

  const double var = na * nb / 12.0 * ((n + 1.0) - tie_sum(pooled) / (n * (n - 1.0)));
  const double z = var > 0.0 ? (u - na * nb / 2.0) / std::sqrt(var) : 0.0;

  const bool exact = method == MwMethod::exact || (method == MwMethod::automatic && pooled.size() <= kMwExactLimit);
  TestResult r;
  r.statistic = u;
  r.z = z;
  if (exact) {
    r.p_value = exact_mw_p(ranks, a.size(), std::llround(2.0 * u), alt);
    r.method = "mann-whitney-exact";
  } else {
    r.p_value = var > 0.0 ? normal_p(z, alt) : 1.0;
    r.method = "mann-whitney-normal";
  }
  return r;
}

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DomainError("Kruskal-Wallis needs at least two groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw DomainError("Kruskal-Wallis groups must be non-empty");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  const auto ranks = midranks(pooled);
  const double n = double(pooled.size());
  double sum = 0.0;
  std::size_t pos = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[pos++];
    sum += r * r / double(g.size());
  }
  const int df = static_cast<int>(groups.size()) - 1;
  const double correction = 1.0 - tie_sum(pooled) / (n * n * n - n);
  if (correction <= 0.0) return {0.0, 1.0, df, std::nullopt, "kruskal-wallis"};
  const double h = std::max(0.0, (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction);
  return {h, chi2_sf(h, df), df, std::nullopt, "kruskal-wallis"};
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // Small-lambda form, converges where the alternating series does not.
    double s = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double m = 2.0 * k - 1.0;
      s += std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("Kolmogorov-Smirnov needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = double(x.size()), ny = double(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(double(i) / nx - double(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  return {d, kolmogorov_sf(lambda), std::nullopt, std::nullopt, "ks-asymptotic"};
}

}  // namespace uavstop
