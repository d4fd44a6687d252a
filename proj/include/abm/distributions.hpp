#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "abm/rng.hpp"
#include "abm/state.hpp"

namespace abm {

// Per-agent success probabilities; every entry must lie in [0,1].
using ProbVector = std::vector<double>;

void validate_probabilities(std::span<const double> alpha);

struct DiscretePmf {
    long offset = 0;
    std::vector<double> masses;

    double operator()(long i) const {
        const long k = i - offset;
        return k < 0 || k >= static_cast<long>(masses.size()) ? 0.0 : masses[static_cast<std::size_t>(k)];
    }
    long first() const { return offset; }
    long last() const { return offset + static_cast<long>(masses.size()) - 1; }
    double total() const;
};

// Suffix tables of the Poisson-Binomial recursion. With zero-based agents, q(i, n) is the
// probability that agents n..N-1 contribute exactly i successes; column N is the empty tail
// (point mass at 0), and column 0 is the PoiBin(alpha) pmf.
class PmfTable {
public:
    PmfTable() = default;
    explicit PmfTable(std::span<const double> alpha) { assign(alpha); }

    // Rebuilds in place, reusing storage.
    void assign(std::span<const double> alpha);

    std::size_t num_agents() const { return n_; }
    double q(std::size_t i, std::size_t n) const {
        return i + n > n_ ? 0.0 : q_[n * (n_ + 1) + i];
    }
    double pmf(std::size_t i) const { return q(i, 0); }
    std::vector<double> pmf() const;

private:
    std::size_t n_ = 0;
    std::vector<double> q_;
};

PmfTable poibin_table(std::span<const double> alpha);

// Column 0 of the table computed with O(N) memory; bitwise equal to poibin_table(alpha).pmf().
std::vector<double> poibin_pmf(std::span<const double> alpha);
void poibin_log_pmf(std::span<const double> alpha, std::vector<double>& out);

DiscretePmf transpoi_pmf(std::span<const double> alpha);

// Translated Poisson log masses on [0:n_max] for a law with mean mu and variance var,
// where shift = mu - var >= 0 is passed separately to avoid cancellation.
void transpoi_log_pmf(double shift, double var, std::size_t n_max, std::vector<double>& out);

double condber_logpmf(const PopulationState& x, std::span<const double> alpha, std::size_t i,
                      const PmfTable& table);

// Positions (in increasing order) of the agents set to 1 by an exact CondBer(alpha, i) draw.
void condber_sample_positions(Rng& rng, std::span<const double> alpha, std::size_t i,
                              const PmfTable& table, std::vector<std::size_t>& positions);

PopulationState condber_sample(Rng& rng, std::span<const double> alpha, std::size_t i,
                               const PmfTable& table);

// One Metropolis swap move targeting CondBer(alpha, I(x)).
PopulationState condber_swap_step(Rng& rng, const PopulationState& x, std::span<const double> alpha);

// Swap acceptance probability for moving agent n1 (currently 1) to 0 and n0 (currently 0) to 1.
double condber_swap_acceptance(std::span<const double> alpha, std::size_t n1, std::size_t n0);

DiscretePmf sumbin_pmf(long n1, double p1, long n2, double p2);
void sumbin_log_pmf(long n1, double p1, long n2, double p2, std::vector<double>& out);

DiscretePmf transpoi_sumbin_pmf(long n1, double p1, long n2, double p2);
void transpoi_sumbin_log_pmf(long n1, double p1, long n2, double p2, std::vector<double>& out);

}  // namespace abm
