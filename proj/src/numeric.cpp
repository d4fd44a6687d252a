#include "abm/numeric.hpp"

#include <algorithm>

namespace abm {

double log_sum_exp(std::span<const double> values) {
    double m = neg_inf;
    for (double v : values) m = std::max(m, v);
    if (m == neg_inf) return neg_inf;
    if (std::isinf(m)) return m;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - m);
    return m + std::log(acc);
}

double log_mean_exp(std::span<const double> values) {
    if (values.empty()) return neg_inf;
    return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

double log_binom_pmf(long k, long n, double p) {
    if (n < 0 || k < 0 || k > n) return neg_inf;
    if (p <= 0.0) return k == 0 ? 0.0 : neg_inf;
    if (p >= 1.0) return k == n ? 0.0 : neg_inf;
    const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                              std::lgamma(static_cast<double>(k) + 1.0) -
                              std::lgamma(static_cast<double>(n - k) + 1.0);
    return log_choose + static_cast<double>(k) * std::log(p) +
           static_cast<double>(n - k) * std::log1p(-p);
}

double log_poisson_pmf(long k, double rate) {
    if (k < 0) return neg_inf;
    if (rate <= 0.0) return k == 0 ? 0.0 : neg_inf;
    return static_cast<double>(k) * std::log(rate) - rate - std::lgamma(static_cast<double>(k) + 1.0);
}

double normalize_log_weights(std::span<const double> log_w, std::vector<double>& out) {
    out.resize(log_w.size());
    double m = neg_inf;
    for (double v : log_w) m = std::max(m, v);
    if (m == neg_inf) {
        std::fill(out.begin(), out.end(), 0.0);
        return neg_inf;
    }
    double total = 0.0;
    for (std::size_t k = 0; k < log_w.size(); ++k) {
        out[k] = std::exp(log_w[k] - m);
        total += out[k];
    }
    for (double& w : out) w /= total;
    return m + std::log(total);
}

}  // namespace abm
