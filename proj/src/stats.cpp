#include "drsgk/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <string>

#include "drsgk/core.hpp"

namespace drsgk::stats {
namespace {

void check_count(std::int64_t k, std::int64_t n, const char* where) {
  if (n < 1) throw DomainError(std::string(where) + ": sample count must be >= 1");
  if (k < 0 || k > n) {
    throw DomainError(std::string(where) + ": count " + std::to_string(k) +
                      " outside [0, " + std::to_string(n) + "]");
  }
}

double direct_sum(std::int64_t k, std::int64_t n, long double q) {
  const long double log_q = std::log(q);
  const long double log_p = std::log1p(-q);
  long double log_choose = 0.0L;
  long double total = 0.0L;
  for (std::int64_t j = 0; j <= k; ++j) {
    if (j > 0) {
      log_choose += std::log(static_cast<long double>(n - j + 1)) -
                    std::log(static_cast<long double>(j));
    }
    total += std::exp(log_choose + j * log_q + (n - j) * log_p);
  }
  return static_cast<double>(std::min(total, 1.0L));
}

}  // namespace

double binomial_cdf(std::int64_t k, std::int64_t n, double q) {
  check_count(k, n, "binomial_cdf");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("binomial_cdf: q outside [0, 1]");
  if (k == n || q == 0.0) return 1.0;
  if (q == 1.0) return 0.0;
  if (n <= kDirectSumLimit) return direct_sum(k, n, q);
  return boost::math::ibetac(static_cast<double>(k + 1), static_cast<double>(n - k), q);
}

double upper_confidence_bound(std::int64_t k, std::int64_t n, double rho,
                              double tolerance) {
  check_count(k, n, "upper_confidence_bound");
  if (!(rho > 0.0 && rho < 1.0)) {
    throw DomainError("upper_confidence_bound: rho outside (0, 1)");
  }
  if (!(tolerance > 0.0)) throw DomainError("upper_confidence_bound: tolerance <= 0");
  if (k == n) return 1.0;

  // Bin(k; n, .) decreases strictly from 1 at q = 0 to 0 at q = 1. Bisecting
  // the fixed interval [0, 1] makes the result the largest dyadic grid point
  // that still satisfies the inequality, hence exactly monotone in k and rho.
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_cdf(k, n, mid) >= rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double per_candidate_error(double delta, std::int64_t candidates) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("per_candidate_error: delta outside (0, 1)");
  if (candidates < 1) throw DomainError("per_candidate_error: candidate count must be >= 1");
  if (candidates == 1) return delta;
  return -std::expm1(std::log1p(-delta) / static_cast<double>(candidates));
}

double dr_threshold(double epsilon, double alpha) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("dr_threshold: epsilon outside (0, 1)");
  if (!(alpha >= 0.0)) throw DomainError("dr_threshold: alpha must be >= 0");
  if (alpha >= epsilon) throw DomainError("dr_threshold: alpha must be < epsilon");
  return (epsilon - alpha) / (1.0 - alpha);
}

std::int64_t max_certifiable_count(std::int64_t n, double rho, double threshold) {
  // The bound is nondecreasing in k, so walk up until it exceeds the threshold.
  std::int64_t best = -1;
  for (std::int64_t k = 0; k <= n; ++k) {
    if (upper_confidence_bound(k, n, rho) > threshold) break;
    best = k;
  }
  return best;
}

}  // namespace drsgk::stats
