#pragma once

// Enumeration helpers shared by the unit tests. They are deliberately naive so they can
// serve as independent references for the recursions in the library.

#include <cmath>
#include <cstdint>
#include <vector>

namespace brute {

inline double config_prob(std::uint64_t code, const std::vector<double>& alpha) {
    double p = 1.0;
    for (std::size_t n = 0; n < alpha.size(); ++n) p *= (code >> n) & 1 ? alpha[n] : 1.0 - alpha[n];
    return p;
}

inline int popcount(std::uint64_t code) {
    int c = 0;
    for (; code; code &= code - 1) ++c;
    return c;
}

inline std::vector<double> poibin(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size() + 1, 0.0);
    for (std::uint64_t code = 0; code < (1ULL << alpha.size()); ++code)
        out[popcount(code)] += config_prob(code, alpha);
    return out;
}

// Exact CondBer(alpha, i) as a vector over configuration codes.
inline std::vector<double> condber(const std::vector<double>& alpha, int i) {
    std::vector<double> out(1ULL << alpha.size(), 0.0);
    double total = 0.0;
    for (std::uint64_t code = 0; code < out.size(); ++code)
        if (popcount(code) == i) total += out[code] = config_prob(code, alpha);
    for (double& v : out) v /= total;
    return out;
}

inline double binom(int k, int n, double p) {
    if (k < 0 || k > n) return 0.0;
    return std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)) * std::pow(p, k) *
           std::pow(1.0 - p, n - k);
}

inline double tv(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d += std::fabs(a[k] - b[k]);
    return 0.5 * d;
}

}  // namespace brute
