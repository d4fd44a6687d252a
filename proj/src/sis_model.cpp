#include "abm/sis_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "abm/numeric.hpp"

namespace abm {

Covariates::Covariates(std::size_t n, std::size_t d, std::vector<double> row_major)
    : rows(n), cols(d), values(std::move(row_major)) {
    if (values.size() != n * d) throw std::invalid_argument("covariates: expected N*d entries");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("covariates must be finite");
}

Network Network::complete(std::size_t num_agents) {
    if (num_agents < 2) throw std::invalid_argument("complete network needs at least two agents");
    Network g;
    g.n_ = num_agents;
    g.complete_ = true;
    return g;
}

Network Network::from_edges(std::size_t num_agents,
                            std::span<const std::pair<std::size_t, std::size_t>> edges) {
    std::vector<std::vector<std::size_t>> lists(num_agents);
    for (auto [a, b] : edges) {
        if (a >= num_agents || b >= num_agents)
            throw std::invalid_argument("network edge refers to agent outside [0, N)");
        if (a == b) throw std::invalid_argument("network self-loops are not allowed");
        lists[a].push_back(b);
        lists[b].push_back(a);
    }
    for (auto& l : lists) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }
    return from_adjacency(lists);
}

Network Network::from_adjacency(const std::vector<std::vector<std::size_t>>& lists) {
    Network g;
    g.n_ = lists.size();
    g.offsets_.assign(g.n_ + 1, 0);
    for (std::size_t n = 0; n < g.n_; ++n) {
        const auto& l = lists[n];
        if (l.empty())
            throw std::invalid_argument("agent " + std::to_string(n) + " has no neighbours");
        if (!std::is_sorted(l.begin(), l.end()) || std::adjacent_find(l.begin(), l.end()) != l.end())
            throw std::invalid_argument("neighbour lists must be sorted without duplicates");
        for (std::size_t m : l) {
            if (m >= g.n_ || m == n) throw std::invalid_argument("invalid neighbour index");
            const auto& back = lists[m];
            if (!std::binary_search(back.begin(), back.end(), n))
                throw std::invalid_argument("network adjacency is not symmetric");
        }
        g.offsets_[n + 1] = g.offsets_[n] + l.size();
    }
    g.targets_.reserve(g.offsets_.back());
    for (const auto& l : lists) g.targets_.insert(g.targets_.end(), l.begin(), l.end());
    return g;
}

std::size_t Network::degree(std::size_t n) const {
    return complete_ ? n_ - 1 : offsets_[n + 1] - offsets_[n];
}

std::vector<std::size_t> Network::neighbors(std::size_t n) const {
    std::vector<std::size_t> out;
    out.reserve(degree(n));
    for_each_neighbor(n, [&](std::size_t m) { out.push_back(m); });
    return out;
}

double Network::infected_fraction(const PopulationState& infected, std::size_t n) const {
    if (complete_) {
        const std::size_t others = infected.count() - (infected[n] ? 1 : 0);
        return static_cast<double>(others) / static_cast<double>(n_ - 1);
    }
    std::size_t hits = 0;
    for (std::size_t k = offsets_[n]; k < offsets_[n + 1]; ++k) hits += infected[targets_[k]] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(offsets_[n + 1] - offsets_[n]);
}

void SisParams::validate(std::size_t d) const {
    if (beta0.size() != d || beta_lambda.size() != d || beta_gamma.size() != d)
        throw std::invalid_argument("parameter vectors must have length d = " + std::to_string(d));
    if (!(rho > 0.0 && rho <= 1.0))
        throw std::invalid_argument("rho must lie in (0,1]");
}

AgentRates agent_rates(const SisParams& theta, const Covariates& w) {
    theta.validate(w.cols);
    AgentRates r;
    const std::size_t n_agents = w.rows;
    r.alpha0.resize(n_agents);
    r.lambda.resize(n_agents);
    r.gamma.resize(n_agents);
    auto dot = [&](const std::vector<double>& beta, std::size_t n) {
        double s = 0.0;
        for (std::size_t k = 0; k < w.cols; ++k) s += beta[k] * w(n, k);
        return s;
    };
    for (std::size_t n = 0; n < n_agents; ++n) {
        r.alpha0[n] = logistic(dot(theta.beta0, n));
        r.lambda[n] = logistic(dot(theta.beta_lambda, n));
        r.gamma[n] = logistic(dot(theta.beta_gamma, n));
    }
    if (n_agents > 0) {
        r.lambda_bar = std::accumulate(r.lambda.begin(), r.lambda.end(), 0.0) / static_cast<double>(n_agents);
        r.gamma_bar = std::accumulate(r.gamma.begin(), r.gamma.end(), 0.0) / static_cast<double>(n_agents);
    }
    return r;
}

Clusters make_clusters(const AgentRates& rates, std::span<const std::size_t> assignment) {
    if (assignment.size() != rates.size()) throw std::invalid_argument("cluster assignment length != N");
    Clusters c;
    c.assignment.assign(assignment.begin(), assignment.end());
    const std::size_t k = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
    c.members.resize(k);
    for (std::size_t n = 0; n < assignment.size(); ++n) c.members[assignment[n]].push_back(n);
    c.lambda_bar.assign(k, 0.0);
    c.gamma_bar.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        if (c.members[j].empty()) throw std::invalid_argument("cluster labels must be contiguous and non-empty");
        for (std::size_t n : c.members[j]) {
            c.lambda_bar[j] += rates.lambda[n];
            c.gamma_bar[j] += rates.gamma[n];
        }
        c.lambda_bar[j] /= static_cast<double>(c.members[j].size());
        c.gamma_bar[j] /= static_cast<double>(c.members[j].size());
    }
    return c;
}

Clusters rate_sorted_clusters(const AgentRates& rates, std::size_t k) {
    const std::size_t n_agents = rates.size();
    if (k == 0 || k > n_agents) throw std::invalid_argument("cluster count must lie in [1, N]");
    std::vector<std::size_t> order(n_agents);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rates.lambda[a] != rates.lambda[b]) return rates.lambda[a] < rates.lambda[b];
        return rates.gamma[a] < rates.gamma[b];
    });
    std::vector<std::size_t> assignment(n_agents);
    for (std::size_t pos = 0; pos < n_agents; ++pos) assignment[order[pos]] = pos * k / n_agents;
    return make_clusters(rates, assignment);
}

Clusters single_cluster(const AgentRates& rates) {
    const std::vector<std::size_t> zeros(rates.size(), 0);
    return make_clusters(rates, zeros);
}

void infection_probs(const PopulationState& x, const AgentRates& rates, const Network& g,
                     std::vector<double>& out) {
    const std::size_t n_agents = x.size();
    if (rates.size() != n_agents || g.size() != n_agents)
        throw std::invalid_argument("infection_probs: dimension mismatch");
    out.resize(n_agents);
    for (std::size_t n = 0; n < n_agents; ++n)
        out[n] = x[n] ? 1.0 - rates.gamma[n] : rates.lambda[n] * g.infected_fraction(x, n);
}

ProbVector infection_probs(const PopulationState& x, const AgentRates& rates, const Network& g) {
    ProbVector out;
    infection_probs(x, rates, g, out);
    return out;
}

ProbVector coarse_probs(const PopulationState& x, const AgentRates& rates, const Clusters* clusters) {
    const std::size_t n_agents = x.size();
    if (rates.size() != n_agents) throw std::invalid_argument("coarse_probs: dimension mismatch");
    const double fraction = n_agents == 0 ? 0.0 : static_cast<double>(x.count()) / static_cast<double>(n_agents);
    ProbVector out(n_agents);
    for (std::size_t n = 0; n < n_agents; ++n) {
        const double lam = clusters ? clusters->lambda_bar[clusters->assignment[n]] : rates.lambda_bar;
        const double gam = clusters ? clusters->gamma_bar[clusters->assignment[n]] : rates.gamma_bar;
        out[n] = x[n] ? 1.0 - gam : lam * fraction;
    }
    return out;
}

double obs_logpmf(int y, std::size_t infected, double rho) {
    if (y < 0) throw std::invalid_argument("observation must be non-negative");
    return log_binom_pmf(y, static_cast<long>(infected), rho);
}

SisTrajectory simulate(Rng& rng, const SisParams& theta, const Covariates& w, const Network& g,
                       int horizon) {
    if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
    const AgentRates rates = agent_rates(theta, w);
    const std::size_t n_agents = w.rows;
    SisTrajectory out;
    out.x.reserve(static_cast<std::size_t>(horizon) + 1);
    PopulationState x(n_agents);
    for (std::size_t n = 0; n < n_agents; ++n) x.set(n, bernoulli(rng, rates.alpha0[n]));
    std::vector<double> alpha;
    for (int t = 0; t <= horizon; ++t) {
        if (t > 0) {
            infection_probs(out.x.back(), rates, g, alpha);
            for (std::size_t n = 0; n < n_agents; ++n) x.set(n, bernoulli(rng, alpha[n]));
        }
        out.x.push_back(x);
        std::binomial_distribution<int> obs(static_cast<int>(x.count()), theta.rho);
        out.y.push_back(obs(rng));
    }
    return out;
}

std::pair<long, long> homogeneous_count_step(Rng& rng, long s, long i, double lambda_bar,
                                             double gamma_bar, double h) {
    if (s < 0 || i < 0) throw std::invalid_argument("counts must be non-negative");
    const long n_agents = s + i;
    const double p_recover = h * gamma_bar;
    const double p_infect = n_agents == 0 ? 0.0 : h * lambda_bar * static_cast<double>(i) / static_cast<double>(n_agents);
    if (!(p_recover >= 0.0 && p_recover <= 1.0) || !(p_infect >= 0.0 && p_infect <= 1.0))
        throw std::invalid_argument("homogeneous_count_step: h*rate outside [0,1]");
    const long recovered = std::binomial_distribution<long>(i, p_recover)(rng);
    const long infected = std::binomial_distribution<long>(s, p_infect)(rng);
    return {s + recovered - infected, i - recovered + infected};
}

double sis_log_transition(const PopulationState& prev, const PopulationState& next,
                          const AgentRates& rates, const Network& g) {
    std::vector<double> alpha;
    infection_probs(prev, rates, g, alpha);
    double lp = 0.0;
    for (std::size_t n = 0; n < alpha.size(); ++n) {
        const double p = next[n] ? alpha[n] : 1.0 - alpha[n];
        if (p <= 0.0) return neg_inf;
        lp += std::log(p);
    }
    return lp;
}

double sis_log_initial(const PopulationState& x0, const AgentRates& rates) {
    double lp = 0.0;
    for (std::size_t n = 0; n < x0.size(); ++n) {
        const double p = x0[n] ? rates.alpha0[n] : 1.0 - rates.alpha0[n];
        if (p <= 0.0) return neg_inf;
        lp += std::log(p);
    }
    return lp;
}

}  // namespace abm
