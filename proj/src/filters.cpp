#include <stdexcept>

#include "abm/distributions.hpp"
#include "abm/sir_model.hpp"
#include "abm/sis_model.hpp"
#include "abm/smc.hpp"
#include "smc_engine.hpp"

namespace abm {

namespace {

void check_inputs(const Model& model, std::span<const int> y, const SisParams& theta, bool bounded) {
    if (y.empty()) throw std::invalid_argument("need at least one observation");
    if (model.network.size() != model.num_agents())
        throw std::invalid_argument("network size does not match covariates");
    theta.validate(model.covariates.cols);
    for (int v : y) {
        if (v < 0) throw std::invalid_argument("observations must be non-negative");
        if (bounded && static_cast<std::size_t>(v) > model.num_agents())
            throw std::invalid_argument("observation exceeds population size");
    }
}

void check_table(const BifTable& psi, BifTable::Kind kind, std::size_t n_agents, std::size_t horizon) {
    if (psi.kind != kind || psi.num_agents != n_agents || psi.log_psi.size() != horizon + 1)
        throw std::invalid_argument("psi table does not match the model and observations");
    if (kind == BifTable::Kind::sis) {
        std::size_t covered = 0;
        for (const auto& m : psi.cluster_members) covered += m.size();
        if (covered != n_agents || psi.dims.size() != psi.cluster_members.size())
            throw std::invalid_argument("psi table clusters do not cover the population");
    }
}

struct Empty {};

// ---- bootstrap ----

struct SisBootstrap {
    using State = PopulationState;
    using Aux = Empty;
    struct Scratch {
        std::vector<double> alpha;
    };

    const AgentRates& rates;
    const Network& g;
    std::span<const int> y;
    double rho;

    void prepare_initial(Scratch&) const {}
    void initial(Scratch&, Rng& rng, State& x, double& log_w, Aux&) const {
        x = State(rates.size());
        for (std::size_t n = 0; n < rates.size(); ++n) x.set(n, bernoulli(rng, rates.alpha0[n]));
        log_w = obs_logpmf(y[0], x, rho);
    }
    void prepare(std::size_t, const State& parent, const Aux&, Scratch& s) const {
        infection_probs(parent, rates, g, s.alpha);
    }
    void propagate(std::size_t t, const State&, const Aux&, Scratch& s, Rng& rng, State& x,
                   double& log_w, Aux&) const {
        x = State(rates.size());
        for (std::size_t n = 0; n < rates.size(); ++n) x.set(n, bernoulli(rng, s.alpha[n]));
        log_w = obs_logpmf(y[t], x, rho);
    }
};

struct SirBootstrap {
    using State = SirState;
    using Aux = Empty;
    struct Scratch {
        SirProbs probs;
    };

    const AgentRates& rates;
    const Network& g;
    std::span<const int> y;
    double rho;

    void prepare_initial(Scratch&) const {}
    void initial(Scratch&, Rng& rng, State& x, double& log_w, Aux&) const {
        x = State(rates.size());
        for (std::size_t n = 0; n < rates.size(); ++n) x.set(n, bernoulli(rng, rates.alpha0[n]) ? 1 : 0);
        log_w = obs_logpmf(y[0], x.infected(), rho);
    }
    void prepare(std::size_t, const State& parent, const Aux&, Scratch& s) const {
        sir_probs(parent, rates, g, s.probs);
    }
    void propagate(std::size_t t, const State&, const Aux&, Scratch& s, Rng& rng, State& x,
                   double& log_w, Aux&) const {
        x = State(rates.size());
        for (std::size_t n = 0; n < rates.size(); ++n) {
            const double u = uniform01(rng);
            x.set(n, u < s.probs.s[n] ? 0 : (u < s.probs.s[n] + s.probs.i[n] ? 1 : 2));
        }
        log_w = obs_logpmf(y[t], x.infected(), rho);
    }
};

// ---- fully adapted auxiliary ----

struct SisLookahead {
    using State = PopulationState;
    const AgentRates& rates;
    const Network& g;

    std::size_t num_agents() const { return rates.size(); }
    void initial_alpha(std::vector<double>& out) const { out = rates.alpha0; }
    void alpha(const State& parent, std::vector<double>& out) const { infection_probs(parent, rates, g, out); }
    State build(const State*, const std::vector<std::size_t>& positions) const {
        State x(rates.size());
        for (std::size_t n : positions) x.set(n, true);
        return x;
    }
};

// Agents drawn as infected become (or stay) infected; the rest keep their susceptible
// status or move to recovered.
SirState sir_from_infected(const SirState* parent, std::size_t n_agents,
                           const std::vector<std::size_t>& positions) {
    SirState x(n_agents);
    if (parent)
        for (std::size_t n = 0; n < n_agents; ++n)
            if ((*parent)[n] != 0) x.set(n, 2);
    for (std::size_t n : positions) x.set(n, 1);
    return x;
}

struct SirLookahead {
    using State = SirState;
    const AgentRates& rates;
    const Network& g;

    std::size_t num_agents() const { return rates.size(); }
    void initial_alpha(std::vector<double>& out) const { out = rates.alpha0; }
    void alpha(const State& parent, std::vector<double>& out) const {
        thread_local SirProbs probs;
        sir_probs(parent, rates, g, probs);
        out = probs.i;
    }
    State build(const State* parent, const std::vector<std::size_t>& positions) const {
        return sir_from_infected(parent, rates.size(), positions);
    }
};

// ---- controlled SMC, SIS with clustered twisting ----

struct SisControlled {
    using State = PopulationState;
    struct Aux {
        std::vector<double> log_v_next;  // count proposal of the children, over cells
        double log_norm = neg_inf;
    };
    struct Scratch {
        std::vector<double> alpha, child_alpha, sub, cumulative;
        std::vector<std::vector<double>> count_logs;
        std::vector<PmfTable> tables;
        std::vector<std::size_t> positions;
        double log_mu = 0.0;
    };

    const AgentRates& rates;
    const Network& g;
    const BifTable& psi;
    std::span<const int> y;
    double rho;
    CountApprox approx;

    std::size_t horizon() const { return y.size() - 1; }

    void cluster_counts(const std::vector<double>& alpha, Scratch& s) const {
        const std::size_t k_count = psi.cluster_members.size();
        s.count_logs.resize(k_count);
        for (std::size_t k = 0; k < k_count; ++k) {
            s.sub.clear();
            for (std::size_t n : psi.cluster_members[k]) s.sub.push_back(alpha[n]);
            count_log_pmf(s.sub, approx, s.count_logs[k]);
        }
    }

    void build_tables(Scratch& s) const {
        const std::size_t k_count = psi.cluster_members.size();
        s.tables.resize(k_count);
        for (std::size_t k = 0; k < k_count; ++k) {
            s.sub.clear();
            for (std::size_t n : psi.cluster_members[k]) s.sub.push_back(s.alpha[n]);
            s.tables[k].assign(s.sub);
        }
    }

    // v(cell) = sum_k log count_k(i^k) + log psi_t(cell); returns its log sum.
    double twisted_counts(std::size_t t, const Scratch& s, std::vector<double>& v) const {
        const std::vector<double>& slice = psi.log_psi[t];
        v.resize(slice.size());
        const std::size_t k_count = psi.dims.size();
        for (std::size_t c = 0; c < slice.size(); ++c) {
            if (slice[c] == neg_inf) {
                v[c] = neg_inf;
                continue;
            }
            double acc = slice[c];
            std::size_t rest = c;
            for (std::size_t k = 0; k < k_count && acc != neg_inf; ++k) {
                acc += s.count_logs[k][rest % psi.dims[k]];
                rest /= psi.dims[k];
            }
            v[c] = acc;
        }
        return log_sum_exp(v);
    }

    std::size_t cell_of(const State& x) const {
        std::size_t cell = 0, scale = 1;
        for (std::size_t k = 0; k < psi.dims.size(); ++k) {
            std::size_t ik = 0;
            for (std::size_t n : psi.cluster_members[k]) ik += x[n];
            cell += ik * scale;
            scale *= psi.dims[k];
        }
        return cell;
    }

    State draw(Scratch& s, Rng& rng) const {
        std::size_t cell = detail::sample_log_categorical(rng, s.cumulative);
        State x(rates.size());
        for (std::size_t k = 0; k < psi.dims.size(); ++k) {
            const std::size_t ik = cell % psi.dims[k];
            cell /= psi.dims[k];
            s.sub.clear();
            for (std::size_t n : psi.cluster_members[k]) s.sub.push_back(s.alpha[n]);
            condber_sample_positions(rng, s.sub, ik, s.tables[k], s.positions);
            for (std::size_t pos : s.positions) x.set(psi.cluster_members[k][pos], true);
        }
        return x;
    }

    // log g(y_t|x) + log f(psi_{t+1}|x) - log psi_t(cell), filling aux for the children.
    double weigh(std::size_t t, const State& x, Scratch& s, Aux& aux) const {
        if (t == horizon()) {
            aux.log_v_next.clear();
            aux.log_norm = neg_inf;
            return 0.0;
        }
        infection_probs(x, rates, g, s.child_alpha);
        cluster_counts(s.child_alpha, s);
        aux.log_norm = twisted_counts(t + 1, s, aux.log_v_next);
        return obs_logpmf(y[t], x, rho) + aux.log_norm - psi.log_psi[t][cell_of(x)];
    }

    void prepare_initial(Scratch& s) const {
        s.alpha = rates.alpha0;
        cluster_counts(s.alpha, s);
        build_tables(s);
        std::vector<double> v;
        s.log_mu = twisted_counts(0, s, v);
        if (s.log_mu == neg_inf) throw std::domain_error("psi_0 vanishes under the initial law");
        detail::build_cumulative(v, s.cumulative);
    }
    void initial(Scratch& s, Rng& rng, State& x, double& log_w, Aux& aux) const {
        x = draw(s, rng);
        const std::size_t cell = cell_of(x);
        if (horizon() == 0) {
            aux = {};
            log_w = s.log_mu + obs_logpmf(y[0], x, rho) - psi.log_psi[0][cell];
            return;
        }
        log_w = s.log_mu + weigh(0, x, s, aux);
    }
    void prepare(std::size_t, const State& parent, const Aux& parent_aux, Scratch& s) const {
        if (parent_aux.log_norm == neg_inf) return;
        infection_probs(parent, rates, g, s.alpha);
        build_tables(s);
        detail::build_cumulative(parent_aux.log_v_next, s.cumulative);
    }
    void propagate(std::size_t t, const State& parent, const Aux& parent_aux, Scratch& s, Rng& rng,
                   State& x, double& log_w, Aux& aux) const {
        if (parent_aux.log_norm == neg_inf) {
            // Only reachable without resampling, on a path whose weight is already zero.
            x = parent;
            log_w = neg_inf;
            aux = parent_aux;
            return;
        }
        x = draw(s, rng);
        log_w = weigh(t, x, s, aux);
    }
};

// ---- controlled SMC, SIR ----

struct SirControlled {
    using State = SirState;
    struct Aux {
        std::vector<double> log_v_next;   // over the next infected count
        std::vector<double> log_pb_next;  // log PoiBin(i; alpha_I(x))
        double log_norm = neg_inf;
    };
    struct Scratch {
        std::vector<double> alpha, cumulative, stay, recover, terms;
        SirProbs probs;
        PmfTable table;
        std::vector<std::size_t> positions;
        double log_mu = 0.0;
    };

    const AgentRates& rates;
    const Network& g;
    const BifTable& psi;
    std::span<const int> y;
    double rho;
    CountApprox approx;
    bool literal = false;

    std::size_t horizon() const { return y.size() - 1; }
    std::size_t n() const { return rates.size(); }

    double weigh(std::size_t t, const State& x, Scratch& s, Aux& aux) const {
        if (t == horizon()) {
            aux = {};
            return 0.0;
        }
        sir_probs(x, rates, g, s.probs);
        count_log_pmf(s.probs.i, approx, aux.log_pb_next);
        const std::size_t next = t + 1;
        aux.log_v_next.assign(n() + 1, neg_inf);
        if (next == horizon()) {
            for (std::size_t i = 0; i <= n(); ++i) aux.log_v_next[i] = aux.log_pb_next[i] + psi.log_psi[next][i];
        } else {
            sir_stay_and_recover_log_pmfs(x, rates, g, s.stay, s.recover);
            const std::size_t sus = x.susceptible(), inf = x.infected();
            for (std::size_t i = 0; i <= n(); ++i) {
                s.terms.clear();
                for (std::size_t s2 = 0; s2 <= sus; ++s2) {
                    // recoveries r = (sus - s2) + inf - i must lie in [0, inf]
                    const long r = static_cast<long>(sus - s2 + inf) - static_cast<long>(i);
                    if (r < 0 || r > static_cast<long>(inf)) continue;
                    const double v = s.stay[s2] + s.recover[static_cast<std::size_t>(r)] + psi.log_at(next, s2, i);
                    if (v != neg_inf) s.terms.push_back(v);
                }
                aux.log_v_next[i] = log_sum_exp(s.terms);
            }
        }
        aux.log_norm = log_sum_exp(aux.log_v_next);
        return obs_logpmf(y[t], x.infected(), rho) + aux.log_norm;
    }

    void prepare_initial(Scratch& s) const {
        s.alpha = rates.alpha0;
        s.table.assign(s.alpha);
        std::vector<double> v;
        count_log_pmf(s.alpha, approx, v);
        for (std::size_t i = 0; i <= n(); ++i) v[i] += psi.log_at(0, n() - i, i);
        s.log_mu = log_sum_exp(v);
        if (s.log_mu == neg_inf) throw std::domain_error("psi_0 vanishes under the initial law");
        detail::build_cumulative(v, s.cumulative);
    }
    void initial(Scratch& s, Rng& rng, State& x, double& log_w, Aux& aux) const {
        const std::size_t i = detail::sample_log_categorical(rng, s.cumulative);
        condber_sample_positions(rng, rates.alpha0, i, s.table, s.positions);
        x = sir_from_infected(nullptr, n(), s.positions);
        const double denom = psi.log_at(0, n() - i, i);
        if (horizon() == 0) {
            aux = {};
            log_w = s.log_mu + obs_logpmf(y[0], i, rho) - denom;
            return;
        }
        log_w = s.log_mu + weigh(0, x, s, aux) - denom;
    }
    void prepare(std::size_t, const State& parent, const Aux& parent_aux, Scratch& s) const {
        if (parent_aux.log_norm == neg_inf) return;
        sir_probs(parent, rates, g, s.probs);
        s.alpha = s.probs.i;
        s.table.assign(s.alpha);
        detail::build_cumulative(parent_aux.log_v_next, s.cumulative);
    }
    void propagate(std::size_t t, const State& parent, const Aux& parent_aux, Scratch& s, Rng& rng,
                   State& x, double& log_w, Aux& aux) const {
        if (parent_aux.log_norm == neg_inf) {
            x = parent;
            log_w = neg_inf;
            aux = parent_aux;
            return;
        }
        const std::size_t i = detail::sample_log_categorical(rng, s.cumulative);
        condber_sample_positions(rng, s.alpha, i, s.table, s.positions);
        x = sir_from_infected(&parent, n(), s.positions);
        // The proposal twists the infected count by the s-marginalized psi, so the weight
        // divides by that same quantity rather than by psi_t(s, i).
        const double denom = literal ? psi.log_at(t, x.susceptible(), x.infected())
                                     : parent_aux.log_v_next[i] - parent_aux.log_pb_next[i];
        if (t == horizon()) {
            aux = {};
            log_w = 0.0;
            return;
        }
        log_w = weigh(t, x, s, aux) - denom;
    }
};

}  // namespace

SisSystem run_bpf(const Model& model, std::span<const int> y, const SisParams& theta,
                  const SmcOptions& opt) {
    check_inputs(model, y, theta, false);
    const AgentRates rates = agent_rates(theta, model.covariates);
    const SisBootstrap strategy{rates, model.network, y, theta.rho};
    return detail::run_propagate_weight(strategy, y.size() - 1, opt);
}

SirSystem run_bpf_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                      const SmcOptions& opt) {
    check_inputs(model, y, theta, false);
    const AgentRates rates = agent_rates(theta, model.covariates);
    const SirBootstrap strategy{rates, model.network, y, theta.rho};
    return detail::run_propagate_weight(strategy, y.size() - 1, opt);
}

SisSystem run_apf_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                      const SmcOptions& opt) {
    check_inputs(model, y, theta, true);
    const AgentRates rates = agent_rates(theta, model.covariates);
    return detail::run_lookahead(SisLookahead{rates, model.network}, y, theta.rho, opt);
}

SirSystem run_apf_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                      const SmcOptions& opt) {
    check_inputs(model, y, theta, true);
    const AgentRates rates = agent_rates(theta, model.covariates);
    return detail::run_lookahead(SirLookahead{rates, model.network}, y, theta.rho, opt);
}

SisSystem run_csmc_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                       const BifTable& psi, const SmcOptions& opt) {
    check_inputs(model, y, theta, true);
    check_table(psi, BifTable::Kind::sis, model.num_agents(), y.size() - 1);
    const AgentRates rates = agent_rates(theta, model.covariates);
    const SisControlled strategy{rates, model.network, psi, y, theta.rho, opt.approx};
    return detail::run_propagate_weight(strategy, y.size() - 1, opt);
}

SirSystem run_csmc_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                       const BifTable& psi, const SmcOptions& opt) {
    check_inputs(model, y, theta, true);
    check_table(psi, BifTable::Kind::sir, model.num_agents(), y.size() - 1);
    const AgentRates rates = agent_rates(theta, model.covariates);
    const SirControlled strategy{rates, model.network, psi, y, theta.rho, opt.approx, opt.literal_sir_weights};
    return detail::run_propagate_weight(strategy, y.size() - 1, opt);
}

}  // namespace abm
