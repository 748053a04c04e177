#include <cmath>
#include <vector>

#include "doctest.h"
#include "uavstop/errors.hpp"
#include "uavstop/rng.hpp"
#include "uavstop/stats.hpp"

using namespace uavstop;

namespace {

// Upper binomial tail by plain products, no logs.
double binom_tail_oracle(int k, int n, double p) {
  double sum = 0.0;
  for (int j = k; j <= n; ++j) {
    double c = 1.0;
    for (int i = 1; i <= j; ++i) c = c * (n - j + i) / i;
    sum += c * std::pow(p, j) * std::pow(1 - p, n - j);
  }
  return sum;
}

// U by pair counting.
double u_pairs(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

// Two-sided permutation p over every relabeling of the pooled sample.
double mw_permutation_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size(), na = a.size();
  const double mu = double(a.size() * b.size()) / 2.0;
  const double obs = std::abs(u_pairs(a, b) - mu);
  long long total = 0, hit = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != na) continue;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? x : y).push_back(pooled[i]);
    ++total;
    if (std::abs(u_pairs(x, y) - mu) >= obs - 1e-9) ++hit;
  }
  return double(hit) / double(total);
}

std::vector<double> draw(Rng& rng, int n, int levels) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(double(rng.uniform_int(0, levels - 1)));
  return out;
}

}  // namespace

TEST_CASE("binomial upper tail") {
  CHECK(binom_test_geq(0, 17, 0.3) == 1.0);
  CHECK(binom_test_geq(5, 10, 0.5) == doctest::Approx(0.623046875).epsilon(1e-14));
  CHECK(binom_test_geq(29, 56, 0.05) < 1e-6);
  for (double p : {0.05, 0.3, 0.5, 0.77})
    for (int n = 0; n <= 8; ++n)
      for (int k = 0; k <= n; ++k) CHECK(std::abs(binom_test_geq(k, n, p) - binom_tail_oracle(k, n, p)) < 1e-13);
  CHECK(binom_test_geq(3, 5, 0.0) == 0.0);
  CHECK(binom_test_geq(3, 5, 1.0) == 1.0);
  CHECK_THROWS_AS(binom_test_geq(1, 5, 1.5), DomainError);
  CHECK_THROWS_AS(binom_test_geq(1, 5, std::nan("")), DomainError);
  CHECK_THROWS_AS(binom_test_geq(6, 5, 0.5), DomainError);
}

TEST_CASE("chi-square 2x2") {
  const auto t = chi2_2x2(137, 123, 14, 70);
  CHECK(t.statistic == doctest::Approx(33.46).epsilon(0.05 / 33.46));
  CHECK(t.p_value < 0.001);
  CHECK(t.df == 1);
  const auto flat = chi2_2x2(10, 10, 10, 10);
  CHECK(flat.statistic == 0.0);
  CHECK(flat.p_value == 1.0);
  const auto diag = chi2_2x2(5, 0, 0, 5);
  CHECK(diag.statistic == doctest::Approx(10.0));
  CHECK(diag.p_value == doctest::Approx(0.0015654).epsilon(1e-4));
  CHECK_THROWS_AS(chi2_2x2(0, 0, 3, 4), DomainError);
  CHECK_THROWS_AS(chi2_2x2(1, 0, 3, 0), DomainError);
  CHECK_THROWS_AS(chi2_2x2(-1, 2, 3, 4), DomainError);
  // df > 1 goes through the incomplete gamma; df = 2 has a closed form
  CHECK(chi2_sf(4.0, 2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("Mann-Whitney small cases") {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const auto t = mann_whitney(a, b, MwMethod::exact, Alternative::less);
  CHECK(t.statistic == 0.0);
  CHECK(t.p_value == doctest::Approx(1.0 / 20.0).epsilon(1e-12));
  CHECK(mann_whitney(b, a).statistic == 9.0);
  CHECK(mann_whitney(a, b).p_value == doctest::Approx(0.1).epsilon(1e-12));

  const std::vector<double> same{2, 2, 3, 5};
  const auto s = mann_whitney(same, same);
  CHECK(*s.z == 0.0);
  CHECK(s.p_value == doctest::Approx(1.0));
  CHECK(mann_whitney(same, same, MwMethod::normal).p_value == doctest::Approx(1.0));
  const std::vector<double> flat{4, 4, 4};
  CHECK(mann_whitney(flat, flat, MwMethod::normal).p_value == 1.0);
  CHECK_THROWS_AS(mann_whitney(std::vector<double>{}, a), DomainError);
}

TEST_CASE("Mann-Whitney matches the permutation oracle up to 8 per group") {
  Rng rng(2024);
  double worst = 0.0, worst_normal = 0.0;
  for (int na = 1; na <= 8; ++na)
    for (int nb = 1; nb <= 8; ++nb)
      for (int rep = 0; rep < 3; ++rep) {
        const int levels = rep == 0 ? 1000 : 4;  // with and without ties
        const auto a = draw(rng, na, levels), b = draw(rng, nb, levels);
        const double oracle = mw_permutation_oracle(a, b);
        const auto t = mann_whitney(a, b);
        CHECK(t.statistic == u_pairs(a, b));
        worst = std::max(worst, std::abs(t.p_value - oracle));
        worst_normal = std::max(worst_normal, std::abs(mann_whitney(a, b, MwMethod::normal).p_value - oracle));
      }
  CHECK(worst < 1e-9);
  // the plain normal approximation is too coarse at these sizes
  MESSAGE("worst normal-approximation error: " << worst_normal);
}

TEST_CASE("Mann-Whitney normal approximation for large samples") {
  Rng rng(8);
  std::vector<double> a, b;
  for (int i = 0; i < 200; ++i) a.push_back(rng.uniform());
  for (int i = 0; i < 150; ++i) b.push_back(rng.uniform() + 0.1);
  const auto t = mann_whitney(a, b);
  CHECK(t.method == "mann-whitney-normal");
  CHECK(*t.z < 0.0);
  CHECK(t.p_value == doctest::Approx(std::erfc(std::abs(*t.z) / std::sqrt(2.0))));
}

TEST_CASE("Kruskal-Wallis") {
  const auto t = kruskal_wallis({{1, 2}, {3, 4}, {5, 6}});
  CHECK(t.statistic == doctest::Approx(4.571).epsilon(0.01 / 4.571));
  CHECK(t.df == 2);
  CHECK(t.p_value == doctest::Approx(std::exp(-t.statistic / 2.0)).epsilon(1e-12));
  const auto same = kruskal_wallis({{1, 2, 3}, {1, 2, 3}});
  CHECK(same.statistic == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));
  const auto flat = kruskal_wallis({{7, 7}, {7}});
  CHECK(flat.statistic == 0.0);
  CHECK(flat.p_value == 1.0);
  CHECK_THROWS_AS(kruskal_wallis({{1, 2}}), DomainError);
  CHECK_THROWS_AS(kruskal_wallis({{1, 2}, {}}), DomainError);
}

TEST_CASE("Kruskal-Wallis null calibration") {
  Rng rng(77);
  int rejections = 0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    std::vector<std::vector<double>> g(3);
    for (auto& x : g)
      for (int i = 0; i < 20; ++i) x.push_back(rng.uniform());
    rejections += kruskal_wallis(g).p_value < 0.05;
  }
  const double rate = double(rejections) / reps;
  CHECK(rate > 0.035);
  CHECK(rate < 0.065);
}

TEST_CASE("Kolmogorov-Smirnov") {
  const std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8};
  CHECK(ks_two_sample(a, b).statistic == 1.0);
  const auto same = ks_two_sample(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.2699996717).epsilon(1e-8));
  CHECK(kolmogorov_sf(0.5) == doctest::Approx(0.9639452436).epsilon(1e-8));
  CHECK(kolmogorov_sf(1.18 - 1e-9) == doctest::Approx(kolmogorov_sf(1.18 + 1e-9)).epsilon(1e-8));

  // categorical codes drawn from one distribution: small D, large p
  Rng rng(5);
  double p_sum = 0.0;
  for (int r = 0; r < 200; ++r) {
    auto code = [&] {
      const double u = rng.uniform();
      return u < 0.65 ? 0.0 : (u < 0.8 ? 1.0 : 2.0);
    };
    std::vector<double> x, y;
    for (int i = 0; i < 57; ++i) x.push_back(code());
    for (int i = 0; i < 48; ++i) y.push_back(code());
    p_sum += ks_two_sample(x, y).p_value;
  }
  CHECK(p_sum / 200 > 0.1);
}

TEST_CASE("midranks and moments") {
  const std::vector<double> xs{3, 1, 3, 2};
  CHECK(midranks(xs) == std::vector<double>{3.5, 1, 3.5, 2});
  CHECK(mean(xs) == 2.25);
  CHECK(sample_sd(std::vector<double>{2, 4}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sample_sd(std::vector<double>{2}) == 0.0);
}
