#pragma once
// Small battery of classical tests used by the behavioral analysis.
// Samples are plain doubles; ties get midranks throughout.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace uavstop {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<int> df;
  std::optional<double> z;  // normal score, where the test has one
  std::string method;
};

// P(X >= k) for X ~ Binomial(n, p0), summed term by term in log space.
// Throws DomainError unless 0 <= k <= n and p0 in [0, 1].
double binom_test_geq(long long k, long long n, double p0);

// Pearson chi-square on [[a, b], [c, d]] without continuity correction.
// Throws DomainError on negative counts or an empty row or column.
TestResult chi2_2x2(long long a, long long b, long long c, long long d);

// Upper tail of chi-square with `df` degrees of freedom.
double chi2_sf(double x, int df);

enum class MwMethod { automatic, exact, normal };
enum class Alternative { two_sided, less, greater };

// U = #{(x, y): x > y} + #{x == y} / 2 for x in a, y in b (so U = 0 when
// every a lies below every b). z uses the tie-corrected variance and is
// reported for every method. `automatic` uses the exact permutation
// distribution while the pooled sample has at most kMwExactLimit values.
// `less` means a tends to be smaller than b. Throws DomainError on an empty
// sample.
inline constexpr std::size_t kMwExactLimit = 60;
TestResult mann_whitney(std::span<const double> a, std::span<const double> b, MwMethod method = MwMethod::automatic,
                        Alternative alt = Alternative::two_sided);

// H with tie correction, p from chi-square(k - 1). H = 0 and p = 1 when all
// observations are equal. Throws DomainError for fewer than two groups or an
// empty group.
TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

// D = sup |F_a - F_b|, p from the asymptotic Kolmogorov distribution with
// the effective sample size. Throws DomainError on an empty sample.
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

// Midranks of the pooled sample, in input order.
std::vector<double> midranks(std::span<const double> xs);

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_sd(std::span<const double> xs);

}  // namespace uavstop
