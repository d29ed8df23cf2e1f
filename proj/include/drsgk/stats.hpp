#pragma once

#include <cstdint>

namespace drsgk::stats {

/// Sample count above which binomial_cdf switches to the incomplete beta form.
inline constexpr std::int64_t kDirectSumLimit = 10000;

/// Default absolute tolerance on the upper confidence bound.
inline constexpr double kBoundTolerance = 1e-10;

/*!
 * Pr[X <= k] for X ~ Binomial(n, q).
 *
 * Direct summation of the probability mass (extended precision) for
 * n <= kDirectSumLimit, regularized incomplete beta otherwise.
 * Throws DomainError unless 0 <= k <= n, n >= 1, q in [0, 1].
 */
double binomial_cdf(std::int64_t k, std::int64_t n, double q);

/*!
 * Largest q in [0, 1] with binomial_cdf(k, n, q) >= rho.
 *
 * Bisection on [0, 1] keeping the feasible endpoint, so the returned value
 * always satisfies the defining inequality and lies within `tolerance` below
 * the exact maximum. Returns exactly 1.0 when k == n.
 */
double upper_confidence_bound(std::int64_t k, std::int64_t n, double rho,
                              double tolerance = kBoundTolerance);

/// rho = 1 - (1 - delta)^(1/M): per-candidate error for joint confidence 1 - delta.
double per_candidate_error(double delta, std::int64_t candidates);

/// (epsilon - alpha) / (1 - alpha), the certified failure-probability threshold.
double dr_threshold(double epsilon, double alpha);

/// Largest violation count k whose bound still certifies, or -1 if none does.
std::int64_t max_certifiable_count(std::int64_t n, double rho, double threshold);

}  // namespace drsgk::stats
