#include "abm/sir_model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "abm/distributions.hpp"
#include "abm/numeric.hpp"

namespace abm {

void sir_probs(const SirState& x, const AgentRates& rates, const Network& g, SirProbs& out) {
    const std::size_t n_agents = x.size();
    if (rates.size() != n_agents || g.size() != n_agents)
        throw std::invalid_argument("sir_probs: dimension mismatch");
    out.s.resize(n_agents);
    out.i.resize(n_agents);
    out.r.resize(n_agents);
    for (std::size_t n = 0; n < n_agents; ++n) {
        switch (x[n]) {
            case 0: {
                const double p = rates.lambda[n] * g.infected_fraction(x.infected_plane(), n);
                out.s[n] = 1.0 - p;
                out.i[n] = p;
                out.r[n] = 0.0;
                break;
            }
            case 1:
                out.s[n] = 0.0;
                out.i[n] = 1.0 - rates.gamma[n];
                out.r[n] = rates.gamma[n];
                break;
            default:
                out.s[n] = 0.0;
                out.i[n] = 0.0;
                out.r[n] = 1.0;
        }
    }
}

SirProbs sir_probs(const SirState& x, const AgentRates& rates, const Network& g) {
    SirProbs out;
    sir_probs(x, rates, g, out);
    return out;
}

SirProbs sir_coarse_probs(const SirState& x, const AgentRates& rates) {
    const std::size_t n_agents = x.size();
    if (rates.size() != n_agents) throw std::invalid_argument("sir_coarse_probs: dimension mismatch");
    const double p = n_agents == 0 ? 0.0
                                   : rates.lambda_bar * static_cast<double>(x.infected()) / static_cast<double>(n_agents);
    SirProbs out;
    out.s.assign(n_agents, 0.0);
    out.i.assign(n_agents, 0.0);
    out.r.assign(n_agents, 0.0);
    for (std::size_t n = 0; n < n_agents; ++n) {
        switch (x[n]) {
            case 0:
                out.s[n] = 1.0 - p;
                out.i[n] = p;
                break;
            case 1:
                out.i[n] = 1.0 - rates.gamma_bar;
                out.r[n] = rates.gamma_bar;
                break;
            default:
                out.r[n] = 1.0;
        }
    }
    return out;
}

SirTrajectory sir_simulate(Rng& rng, const SisParams& theta, const Covariates& w, const Network& g,
                           int horizon) {
    if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
    const AgentRates rates = agent_rates(theta, w);
    const std::size_t n_agents = w.rows;
    SirTrajectory out;
    SirState x(n_agents);
    for (std::size_t n = 0; n < n_agents; ++n) x.set(n, bernoulli(rng, rates.alpha0[n]) ? 1 : 0);
    SirProbs probs;
    for (int t = 0; t <= horizon; ++t) {
        if (t > 0) {
            sir_probs(out.x.back(), rates, g, probs);
            for (std::size_t n = 0; n < n_agents; ++n) {
                const double u = uniform01(rng);
                x.set(n, u < probs.s[n] ? 0 : (u < probs.s[n] + probs.i[n] ? 1 : 2));
            }
        }
        out.x.push_back(x);
        std::binomial_distribution<int> obs(static_cast<int>(x.infected()), theta.rho);
        out.y.push_back(obs(rng));
    }
    return out;
}

double SummaryPmf::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

SummaryPmf sir_summary_transition_coarse(std::size_t s, std::size_t i, const AgentRates& rates) {
    const std::size_t n_agents = rates.size();
    if (s + i > n_agents) throw std::invalid_argument("summary counts exceed N");
    SummaryPmf out;
    out.num_agents = n_agents;
    out.mass.assign((n_agents + 1) * (n_agents + 1), 0.0);
    const double p_infect = rates.lambda_bar * static_cast<double>(i) / static_cast<double>(n_agents);
    for (std::size_t s2 = 0; s2 <= s; ++s2) {
        const double stay = log_binom_pmf(static_cast<long>(s2), static_cast<long>(s), 1.0 - p_infect);
        if (stay == neg_inf) continue;
        const std::size_t new_inf = s - s2;
        for (std::size_t rec = 0; rec <= i; ++rec) {
            const double lr = log_binom_pmf(static_cast<long>(rec), static_cast<long>(i), rates.gamma_bar);
            out.mass[s2 * (n_agents + 1) + (i - rec + new_inf)] += std::exp(stay + lr);
        }
    }
    return out;
}

void sir_stay_and_recover_log_pmfs(const SirState& x, const AgentRates& rates, const Network& g,
                                   std::vector<double>& stay_log, std::vector<double>& recover_log) {
    const std::size_t n_agents = x.size();
    if (rates.size() != n_agents || g.size() != n_agents)
        throw std::invalid_argument("sir summary transition: dimension mismatch");
    std::vector<double> stay, recover;
    stay.reserve(x.susceptible());
    recover.reserve(x.infected());
    for (std::size_t n = 0; n < n_agents; ++n) {
        const int v = x[n];
        if (v == 0) stay.push_back(1.0 - rates.lambda[n] * g.infected_fraction(x.infected_plane(), n));
        else if (v == 1) recover.push_back(rates.gamma[n]);
    }
    poibin_log_pmf(stay, stay_log);
    poibin_log_pmf(recover, recover_log);
}

SummaryPmf sir_summary_transition_exact(const SirState& x, const AgentRates& rates, const Network& g) {
    std::vector<double> stay_log, recover_log;
    sir_stay_and_recover_log_pmfs(x, rates, g, stay_log, recover_log);
    const std::size_t n_agents = x.size();
    const std::size_t s = x.susceptible(), i = x.infected();
    SummaryPmf out;
    out.num_agents = n_agents;
    out.mass.assign((n_agents + 1) * (n_agents + 1), 0.0);
    for (std::size_t s2 = 0; s2 <= s; ++s2)
        for (std::size_t rec = 0; rec <= i; ++rec)
            out.mass[s2 * (n_agents + 1) + (s - s2 + i - rec)] += std::exp(stay_log[s2] + recover_log[rec]);
    return out;
}

double sir_log_transition(const SirState& prev, const SirState& next, const AgentRates& rates,
                          const Network& g) {
    SirProbs probs;
    sir_probs(prev, rates, g, probs);
    double lp = 0.0;
    for (std::size_t n = 0; n < prev.size(); ++n) {
        const int v = next[n];
        const double p = v == 0 ? probs.s[n] : (v == 1 ? probs.i[n] : probs.r[n]);
        if (p <= 0.0) return neg_inf;
        lp += std::log(p);
    }
    return lp;
}

double sir_log_initial(const SirState& x0, const AgentRates& rates) {
    double lp = 0.0;
    for (std::size_t n = 0; n < x0.size(); ++n) {
        const int v = x0[n];
        if (v == 2) return neg_inf;
        const double p = v == 1 ? rates.alpha0[n] : 1.0 - rates.alpha0[n];
        if (p <= 0.0) return neg_inf;
        lp += std::log(p);
    }
    return lp;
}

}  // namespace abm
