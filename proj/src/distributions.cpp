#include "abm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "abm/numeric.hpp"

namespace abm {

namespace {

constexpr double kUnderflow = 1e-300;

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
}

}  // namespace

void validate_probabilities(std::span<const double> alpha) {
    for (double a : alpha) check_probability(a, "probability");
}

double DiscretePmf::total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

void PmfTable::assign(std::span<const double> alpha) {
    validate_probabilities(alpha);
    n_ = alpha.size();
    const std::size_t rows = n_ + 1;
    q_.assign(rows * rows, 0.0);
    q_[n_ * rows] = 1.0;
    for (std::size_t n = n_; n-- > 0;) {
        const double a = alpha[n];
        const double* next = &q_[(n + 1) * rows];
        double* col = &q_[n * rows];
        const std::size_t top = n_ - n;  // agents n..N-1 give at most this many successes
        col[0] = (1.0 - a) * next[0];
        for (std::size_t i = 1; i <= top; ++i) col[i] = a * next[i - 1] + (1.0 - a) * next[i];
        for (std::size_t i = 0; i <= top; ++i)
            if (col[i] < kUnderflow) col[i] = 0.0;
    }
}

std::vector<double> PmfTable::pmf() const {
    return {q_.begin(), q_.begin() + static_cast<std::ptrdiff_t>(n_ + 1)};
}

PmfTable poibin_table(std::span<const double> alpha) { return PmfTable(alpha); }

std::vector<double> poibin_pmf(std::span<const double> alpha) {
    validate_probabilities(alpha);
    const std::size_t n_agents = alpha.size();
    std::vector<double> col(n_agents + 1, 0.0), next(n_agents + 1, 0.0);
    next[0] = 1.0;
    for (std::size_t n = n_agents; n-- > 0;) {
        const double a = alpha[n];
        const std::size_t top = n_agents - n;
        col[0] = (1.0 - a) * next[0];
        for (std::size_t i = 1; i <= top; ++i) col[i] = a * next[i - 1] + (1.0 - a) * next[i];
        for (std::size_t i = 0; i <= top; ++i)
            if (col[i] < kUnderflow) col[i] = 0.0;
        std::swap(col, next);
    }
    return next;
}

void poibin_log_pmf(std::span<const double> alpha, std::vector<double>& out) {
    const std::vector<double> pmf = poibin_pmf(alpha);
    out.resize(pmf.size());
    for (std::size_t i = 0; i < pmf.size(); ++i) out[i] = pmf[i] > 0.0 ? std::log(pmf[i]) : neg_inf;
}

void transpoi_log_pmf(double shift, double var, std::size_t n_max, std::vector<double>& out) {
    out.assign(n_max + 1, neg_inf);
    if (var <= 0.0) {
        // Degenerate law: the mean equals the shift and is an integer.
        const auto at = static_cast<long>(std::llround(shift));
        if (at < 0 || at > static_cast<long>(n_max))
            throw std::domain_error("translated Poisson point mass outside [0:N]");
        out[static_cast<std::size_t>(at)] = 0.0;
        return;
    }
    const double floor_shift = std::floor(shift);
    const auto first = static_cast<long>(floor_shift);
    const double rate = var + (shift - floor_shift);
    for (long i = std::max(0L, first); i <= static_cast<long>(n_max); ++i)
        out[static_cast<std::size_t>(i)] = log_poisson_pmf(i - first, rate);
    const double norm = log_sum_exp(out);
    for (double& v : out) v -= norm;
}

DiscretePmf transpoi_pmf(std::span<const double> alpha) {
    validate_probabilities(alpha);
    double shift = 0.0, var = 0.0;
    for (double a : alpha) {
        shift += a * a;
        var += a * (1.0 - a);
    }
    std::vector<double> logs;
    transpoi_log_pmf(shift, var, alpha.size(), logs);
    DiscretePmf out;
    out.masses.resize(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) out.masses[i] = std::exp(logs[i]);
    return out;
}

double condber_logpmf(const PopulationState& x, std::span<const double> alpha, std::size_t i,
                      const PmfTable& table) {
    if (x.size() != alpha.size() || table.num_agents() != alpha.size())
        throw std::invalid_argument("condber_logpmf: dimension mismatch");
    if (x.count() != i) return neg_inf;
    const double norm = table.pmf(i);
    if (norm <= 0.0) throw std::domain_error("condber_logpmf: PoiBin(i; alpha) is zero");
    double lp = -std::log(norm);
    for (std::size_t n = 0; n < alpha.size(); ++n) {
        const double p = x[n] ? alpha[n] : 1.0 - alpha[n];
        if (p <= 0.0) return neg_inf;
        lp += std::log(p);
    }
    return lp;
}

void condber_sample_positions(Rng& rng, std::span<const double> alpha, std::size_t i,
                              const PmfTable& table, std::vector<std::size_t>& positions) {
    const std::size_t n_agents = alpha.size();
    if (table.num_agents() != n_agents) throw std::invalid_argument("condber_sample: table size mismatch");
    if (i > n_agents || table.pmf(i) <= 0.0)
        throw std::domain_error("condber_sample: PoiBin(i; alpha) is zero");
    positions.clear();
    std::size_t remaining = i;
    for (std::size_t n = 0; n < n_agents && remaining > 0; ++n) {
        if (n + 1 == n_agents) {
            positions.push_back(n);  // last agent takes whatever is left (exactly one)
            break;
        }
        const double take = alpha[n] * table.q(remaining - 1, n + 1);
        const double skip = (1.0 - alpha[n]) * table.q(remaining, n + 1);
        const double total = take + skip;
        if (total <= 0.0) throw std::domain_error("condber_sample: infeasible count");
        if (uniform01(rng) * total < take) {
            positions.push_back(n);
            --remaining;
        }
    }
}

PopulationState condber_sample(Rng& rng, std::span<const double> alpha, std::size_t i,
                               const PmfTable& table) {
    std::vector<std::size_t> positions;
    condber_sample_positions(rng, alpha, i, table, positions);
    PopulationState x(alpha.size());
    for (std::size_t n : positions) x.set(n, true);
    return x;
}

double condber_swap_acceptance(std::span<const double> alpha, std::size_t n1, std::size_t n0) {
    const double num = alpha[n0] * (1.0 - alpha[n1]);
    const double den = alpha[n1] * (1.0 - alpha[n0]);
    if (den <= 0.0) return 1.0;  // current state has zero mass; any move is fine
    return std::min(1.0, num / den);
}

PopulationState condber_swap_step(Rng& rng, const PopulationState& x, std::span<const double> alpha) {
    if (x.size() != alpha.size()) throw std::invalid_argument("condber_swap_step: dimension mismatch");
    const std::size_t ones = x.count();
    const std::size_t n_agents = x.size();
    if (ones == 0 || ones == n_agents) return x;
    std::uniform_int_distribution<std::size_t> pick_one(0, ones - 1), pick_zero(0, n_agents - ones - 1);
    const std::size_t n1 = x.nth_one(pick_one(rng));
    const std::size_t n0 = x.nth_zero(pick_zero(rng));
    if (uniform01(rng) >= condber_swap_acceptance(alpha, n1, n0)) return x;
    PopulationState out = x;
    out.set(n1, false);
    out.set(n0, true);
    return out;
}

void sumbin_log_pmf(long n1, double p1, long n2, double p2, std::vector<double>& out) {
    if (n1 < 0 || n2 < 0) throw std::invalid_argument("sumbin: negative trial count");
    check_probability(p1, "sumbin p1");
    check_probability(p2, "sumbin p2");
    std::vector<double> a(static_cast<std::size_t>(n1) + 1), b(static_cast<std::size_t>(n2) + 1);
    for (long k = 0; k <= n1; ++k) a[k] = log_binom_pmf(k, n1, p1);
    for (long k = 0; k <= n2; ++k) b[k] = log_binom_pmf(k, n2, p2);
    // Log-space convolution with a per-entry maximum shift, so far tails stay finite.
    out.assign(static_cast<std::size_t>(n1 + n2) + 1, neg_inf);
    for (long j = 0; j <= n1 + n2; ++j) {
        const long lo = std::max(0L, j - n2), hi = std::min(j, n1);
        double peak = neg_inf;
        for (long k = lo; k <= hi; ++k) peak = std::max(peak, a[k] + b[j - k]);
        if (peak == neg_inf) continue;
        double acc = 0.0;
        for (long k = lo; k <= hi; ++k) acc += std::exp(a[k] + b[j - k] - peak);
        out[static_cast<std::size_t>(j)] = peak + std::log(acc);
    }
}

DiscretePmf sumbin_pmf(long n1, double p1, long n2, double p2) {
    std::vector<double> logs;
    sumbin_log_pmf(n1, p1, n2, p2, logs);
    DiscretePmf out;
    out.masses.resize(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) out.masses[i] = std::exp(logs[i]);
    return out;
}

void transpoi_sumbin_log_pmf(long n1, double p1, long n2, double p2, std::vector<double>& out) {
    if (n1 < 0 || n2 < 0) throw std::invalid_argument("sumbin: negative trial count");
    check_probability(p1, "sumbin p1");
    check_probability(p2, "sumbin p2");
    const double shift = n1 * p1 * p1 + n2 * p2 * p2;
    const double var = n1 * p1 * (1.0 - p1) + n2 * p2 * (1.0 - p2);
    transpoi_log_pmf(shift, var, static_cast<std::size_t>(n1 + n2), out);
}

DiscretePmf transpoi_sumbin_pmf(long n1, double p1, long n2, double p2) {
    std::vector<double> logs;
    transpoi_sumbin_log_pmf(n1, p1, n2, p2, logs);
    DiscretePmf out;
    out.masses.resize(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) out.masses[i] = std::exp(logs[i]);
    return out;
}

}  // namespace abm
