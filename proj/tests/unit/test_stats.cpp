#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "drsgk/core.hpp"
#include "drsgk/rng.hpp"
#include "drsgk/stats.hpp"

using namespace drsgk;
using namespace drsgk::stats;

namespace {

// Term-by-term CDF with binomial coefficients built by multiplication.
double naive_cdf(int k, int n, double q) {
  double total = 0.0;
  double choose = 1.0;
  for (int j = 0; j <= k; ++j) {
    if (j > 0) choose = choose * (n - j + 1) / j;
    total += choose * std::pow(q, j) * std::pow(1.0 - q, n - j);
  }
  return total;
}

// Log-gamma based CDF for large n.
double lgamma_cdf(std::int64_t k, std::int64_t n, double q) {
  long double total = 0.0L;
  for (std::int64_t j = 0; j <= k; ++j) {
    total += std::exp(std::lgamma(n + 1.0L) - std::lgamma(j + 1.0L) - std::lgamma(n - j + 1.0L) +
                      j * std::log((long double)q) + (n - j) * std::log1p(-(long double)q));
  }
  return static_cast<double>(total);
}

double bisect(double (*f)(double), double target, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) >= target ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_CASE("binomial_cdf examples") {
  for (int n : {1, 5, 37}) CHECK(binomial_cdf(n, n, 0.3) == 1.0);
  CHECK(binomial_cdf(0, 3, 0.5) == doctest::Approx(0.125).epsilon(1e-15));
  for (int k : {0, 2, 9}) CHECK(binomial_cdf(k, 10, 0.0) == 1.0);
  CHECK(binomial_cdf(3, 10, 1.0) == 0.0);
}

TEST_CASE("binomial_cdf domain errors") {
  CHECK_THROWS_AS(binomial_cdf(-1, 5, 0.5), DomainError);
  CHECK_THROWS_AS(binomial_cdf(6, 5, 0.5), DomainError);
  CHECK_THROWS_AS(binomial_cdf(0, 0, 0.5), DomainError);
  CHECK_THROWS_AS(binomial_cdf(1, 5, -0.1), DomainError);
  CHECK_THROWS_AS(binomial_cdf(1, 5, 1.1), DomainError);
  CHECK_THROWS_AS(binomial_cdf(1, 5, std::nan("")), DomainError);
}

TEST_CASE("binomial_cdf agrees with naive summation") {
  for (int n = 1; n <= 60; n += 7) {
    for (int k = 0; k <= n; ++k) {
      for (double q : {0.001, 0.05, 0.3, 0.5, 0.9}) {
        CHECK(binomial_cdf(k, n, q) == doctest::Approx(naive_cdf(k, n, q)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("binomial_cdf beyond the direct-sum limit") {
  const std::int64_t n = 2 * kDirectSumLimit;
  for (std::int64_t k : {0, 50, 100, 160}) {
    for (double q : {0.002, 0.005, 0.008}) {
      CHECK(std::abs(binomial_cdf(k, n, q) - lgamma_cdf(k, n, q)) < 1e-12);
    }
  }
}

TEST_CASE("upper_confidence_bound examples") {
  CHECK(upper_confidence_bound(17, 17, 0.3) == 1.0);
  CHECK(std::abs(upper_confidence_bound(0, 1000, 0.01) - (1.0 - std::pow(0.01, 1e-3))) < 1e-9);
  CHECK(upper_confidence_bound(0, 1000, 0.01) == doctest::Approx(0.0045952).epsilon(1e-4));

  // Oracle: closed-form CDF for k = 1, n = 10.
  const double oracle = bisect(
      [](double q) { return std::pow(1 - q, 10) + 10 * q * std::pow(1 - q, 9); }, 0.5, 0.0, 1.0);
  CHECK(std::abs(upper_confidence_bound(1, 10, 0.5) - oracle) < 1e-9);
  CHECK(oracle == doctest::Approx(0.162).epsilon(3e-3));
}

TEST_CASE("upper_confidence_bound domain errors") {
  CHECK_THROWS_AS(upper_confidence_bound(-1, 10, 0.1), DomainError);
  CHECK_THROWS_AS(upper_confidence_bound(11, 10, 0.1), DomainError);
  CHECK_THROWS_AS(upper_confidence_bound(1, 10, 0.0), DomainError);
  CHECK_THROWS_AS(upper_confidence_bound(1, 10, 1.0), DomainError);
}

TEST_CASE("upper_confidence_bound satisfies its defining inequality (property)") {
  RngStream gen(StreamKey{11, 0, 0, 0, Channel::kTest});
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::int64_t>(1 + gen.uniform_below(400));
    const auto k = static_cast<std::int64_t>(gen.uniform_below(static_cast<std::uint64_t>(n)));
    const double rho = 0.001 + 0.9 * gen.uniform();
    const double qbar = upper_confidence_bound(k, n, rho);
    CHECK(binomial_cdf(k, n, qbar) >= rho);
    const double above = std::min(1.0, qbar + 1e-9);
    CHECK(binomial_cdf(k, n, above) < rho);
  }
}

TEST_CASE("upper_confidence_bound monotonicity (property)") {
  RngStream gen(StreamKey{12, 0, 0, 0, Channel::kTest});
  for (int trial = 0; trial < 150; ++trial) {
    const auto n = static_cast<std::int64_t>(2 + gen.uniform_below(300));
    const auto k = static_cast<std::int64_t>(gen.uniform_below(static_cast<std::uint64_t>(n)));
    const double rho = 0.001 + 0.5 * gen.uniform();
    const double rho2 = rho + 0.4 * gen.uniform();
    const double q = upper_confidence_bound(k, n, rho);
    CHECK(upper_confidence_bound(k + 1, n, rho) >= q);
    CHECK(upper_confidence_bound(k, n, rho2) <= q);
    CHECK(upper_confidence_bound(k, n + 1, rho) <= q);
  }
}

TEST_CASE("per_candidate_error") {
  CHECK(per_candidate_error(0.037, 1) == 0.037);
  CHECK(std::abs(per_candidate_error(0.05, 10) - (1.0 - std::pow(0.95, 0.1))) < 1e-12);
  CHECK(per_candidate_error(0.05, 10) == doctest::Approx(0.0051162).epsilon(1e-4));

  // High-precision reference: -expm1(log1p(-d)/M) in long double.
  const double rho = per_candidate_error(0.01, 1000);
  const long double ref = -std::expm1(std::log1p(-0.01L) / 1000.0L);
  CHECK(rho > 0.0);
  // Concavity: delta/M <= rho, with a gap of order delta^2/M.
  CHECK(rho >= 0.01 / 1000);
  CHECK(rho < 0.01 / 1000 * (1 + 0.01));
  CHECK(std::abs(rho - static_cast<double>(ref)) < 1e-18);

  for (int M : {1, 2, 10, 100, 1000}) {
    for (double d : {1e-4, 0.01, 0.3}) {
      const double r = per_candidate_error(d, M);
      CHECK(std::pow(1.0 - r, M) == doctest::Approx(1.0 - d).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(per_candidate_error(0.0, 3), DomainError);
  CHECK_THROWS_AS(per_candidate_error(1.0, 3), DomainError);
  CHECK_THROWS_AS(per_candidate_error(0.1, 0), DomainError);
}

TEST_CASE("dr_threshold") {
  CHECK(dr_threshold(0.1, 0.0) == 0.1);
  CHECK(dr_threshold(0.05, 0.01) == doctest::Approx(0.040404).epsilon(1e-5));
  CHECK(dr_threshold(0.05, 0.01) == 0.04 / 0.99);
  CHECK(dr_threshold(0.2, 0.2 - 1e-12) < 1e-11);
  CHECK_THROWS_AS(dr_threshold(0.05, 0.05), DomainError);
  CHECK_THROWS_AS(dr_threshold(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(dr_threshold(0.1, -0.1), DomainError);
}

TEST_CASE("composed closed forms for N = 1000, delta = 0.01, M = 10") {
  const double rho = per_candidate_error(0.01, 10);
  CHECK(rho == doctest::Approx(0.0010045).epsilon(1e-4));
  const double qbar = upper_confidence_bound(0, 1000, rho);
  CHECK(std::abs(qbar - (1.0 - std::pow(rho, 1e-3))) < 1e-9);
  CHECK(qbar == doctest::Approx(0.006884).epsilon(1e-3));
}

TEST_CASE("max_certifiable_count") {
  const double rho = per_candidate_error(0.01, 5);
  const auto k = max_certifiable_count(1000, rho, 0.05);
  REQUIRE(k >= 0);
  CHECK(upper_confidence_bound(k, 1000, rho) <= 0.05);
  CHECK(upper_confidence_bound(k + 1, 1000, rho) > 0.05);
  CHECK(max_certifiable_count(1000, rho, 0.001) == -1);
}
