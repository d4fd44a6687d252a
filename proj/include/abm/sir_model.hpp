#pragma once

#include <cstddef>
#include <vector>

#include "abm/rng.hpp"
#include "abm/sis_model.hpp"
#include "abm/state.hpp"

namespace abm {

// Per-agent categorical transition probabilities (alpha_S, alpha_I, alpha_R).
struct SirProbs {
    std::vector<double> s;
    std::vector<double> i;
    std::vector<double> r;

    std::size_t size() const { return s.size(); }
};

void sir_probs(const SirState& x, const AgentRates& rates, const Network& g, SirProbs& out);
SirProbs sir_probs(const SirState& x, const AgentRates& rates, const Network& g);
SirProbs sir_coarse_probs(const SirState& x, const AgentRates& rates);

struct SirTrajectory {
    std::vector<SirState> x;
    std::vector<int> y;
};

SirTrajectory sir_simulate(Rng& rng, const SisParams& theta, const Covariates& w, const Network& g,
                           int horizon);

// Joint law of the next (susceptible, infected) counts, stored densely on [0:N] x [0:N].
struct SummaryPmf {
    std::size_t num_agents = 0;
    std::vector<double> mass;  // index s * (N+1) + i

    double operator()(std::size_t s, std::size_t i) const {
        return s > num_agents || i > num_agents ? 0.0 : mass[s * (num_agents + 1) + i];
    }
    double total() const;
};

SummaryPmf sir_summary_transition_coarse(std::size_t s, std::size_t i, const AgentRates& rates);
SummaryPmf sir_summary_transition_exact(const SirState& x, const AgentRates& rates, const Network& g);

// Log pmfs of the number of susceptibles that stay susceptible and of the number of infected
// that recover; the exact summary transition is their product re-indexed to (s', i').
void sir_stay_and_recover_log_pmfs(const SirState& x, const AgentRates& rates, const Network& g,
                                   std::vector<double>& stay_log, std::vector<double>& recover_log);

double sir_log_transition(const SirState& prev, const SirState& next, const AgentRates& rates,
                          const Network& g);
double sir_log_initial(const SirState& x0, const AgentRates& rates);

}  // namespace abm
