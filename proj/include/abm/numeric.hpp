#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace abm {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
inline double log_add(double a, double b) {
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> values);
double log_mean_exp(std::span<const double> values);

// Natural log of Bin(k; n, p). Returns -inf outside the support, handles p in {0,1}.
double log_binom_pmf(long k, long n, double p);

// Poisson log pmf with rate >= 0; rate 0 is the point mass at 0.
double log_poisson_pmf(long k, double rate);

// Exponentiates log weights after shifting by their maximum and normalizes in place.
// Returns the log normalizing constant (-inf when every entry is -inf).
double normalize_log_weights(std::span<const double> log_w, std::vector<double>& out);

}  // namespace abm
