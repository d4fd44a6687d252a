#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "abm/distributions.hpp"
#include "abm/rng.hpp"
#include "abm/state.hpp"

namespace abm {

// N x d covariate matrix, row-major (row n holds w^n).
struct Covariates {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Covariates() = default;
    Covariates(std::size_t n, std::size_t d, std::vector<double> row_major);

    double operator()(std::size_t n, std::size_t k) const { return values[n * cols + k]; }
    std::span<const double> row(std::size_t n) const { return {values.data() + n * cols, cols}; }
};

// Undirected contact network. The complete graph is implicit; anything else is stored as
// sorted neighbour lists in CSR form.
class Network {
public:
    static Network complete(std::size_t num_agents);
    static Network from_edges(std::size_t num_agents,
                              std::span<const std::pair<std::size_t, std::size_t>> edges);
    static Network from_adjacency(const std::vector<std::vector<std::size_t>>& lists);

    std::size_t size() const { return n_; }
    bool is_complete() const { return complete_; }
    std::size_t degree(std::size_t n) const;
    // Sorted neighbours of n. Materialized on demand for the complete graph.
    std::vector<std::size_t> neighbors(std::size_t n) const;

    // D(n)^{-1} * (number of infected neighbours of n).
    double infected_fraction(const PopulationState& infected, std::size_t n) const;

    template <class F>
    void for_each_neighbor(std::size_t n, F&& f) const {
        if (complete_) {
            for (std::size_t m = 0; m < n_; ++m)
                if (m != n) f(m);
        } else {
            for (std::size_t k = offsets_[n]; k < offsets_[n + 1]; ++k) f(targets_[k]);
        }
    }

private:
    std::size_t n_ = 0;
    bool complete_ = false;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> targets_;
};

struct SisParams {
    std::vector<double> beta0;
    std::vector<double> beta_lambda;
    std::vector<double> beta_gamma;
    double rho = 0.5;

    std::size_t dim() const { return beta0.size(); }
    void validate(std::size_t d) const;
};

// Partition of the agents into K groups with within-group average rates.
struct Clusters {
    std::vector<std::size_t> assignment;            // agent -> cluster
    std::vector<std::vector<std::size_t>> members;  // cluster -> sorted agents
    std::vector<double> lambda_bar;
    std::vector<double> gamma_bar;

    std::size_t count() const { return members.size(); }
    std::size_t size(std::size_t k) const { return members[k].size(); }
};

struct AgentRates {
    ProbVector alpha0;
    ProbVector lambda;
    ProbVector gamma;
    double lambda_bar = 0.0;
    double gamma_bar = 0.0;

    std::size_t size() const { return lambda.size(); }
};

struct Model {
    Covariates covariates;
    Network network;

    std::size_t num_agents() const { return covariates.rows; }
};

AgentRates agent_rates(const SisParams& theta, const Covariates& w);

Clusters make_clusters(const AgentRates& rates, std::span<const std::size_t> assignment);
// Sorts agents by (lambda, gamma) and cuts the order into k groups of near-equal size.
Clusters rate_sorted_clusters(const AgentRates& rates, std::size_t k);
Clusters single_cluster(const AgentRates& rates);

void infection_probs(const PopulationState& x, const AgentRates& rates, const Network& g,
                     std::vector<double>& out);
ProbVector infection_probs(const PopulationState& x, const AgentRates& rates, const Network& g);

ProbVector coarse_probs(const PopulationState& x, const AgentRates& rates,
                        const Clusters* clusters = nullptr);

struct SisTrajectory {
    std::vector<PopulationState> x;
    std::vector<int> y;
};

SisTrajectory simulate(Rng& rng, const SisParams& theta, const Covariates& w, const Network& g,
                       int horizon);

double obs_logpmf(int y, std::size_t infected, double rho);
inline double obs_logpmf(int y, const PopulationState& x, double rho) {
    return obs_logpmf(y, x.count(), rho);
}

std::pair<long, long> homogeneous_count_step(Rng& rng, long s, long i, double lambda_bar,
                                             double gamma_bar, double h);

// log f(x_t | x_{t-1}) = sum_n log Ber(x_t^n; alpha^n(x_{t-1})), and log mu(x_0).
double sis_log_transition(const PopulationState& prev, const PopulationState& next,
                          const AgentRates& rates, const Network& g);
double sis_log_initial(const PopulationState& x0, const AgentRates& rates);

}  // namespace abm
