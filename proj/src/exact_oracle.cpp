#include "abm/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "abm/distributions.hpp"
#include "abm/numeric.hpp"

namespace abm {

namespace {

constexpr std::size_t materialize_limit = 1024;

std::size_t power(std::size_t base, std::size_t exp) {
    std::size_t out = 1;
    for (std::size_t k = 0; k < exp; ++k) out *= base;
    return out;
}

void check_size(std::size_t n_agents, std::size_t max_agents, const char* what) {
    if (n_agents > max_agents)
        throw OracleSizeError(std::string(what) + ": N = " + std::to_string(n_agents) + " exceeds the limit of " +
                              std::to_string(max_agents) + " agents");
}

}  // namespace

DenseHmm DenseHmm::sis(const Model& model, std::span<const int> y, const SisParams& theta,
                       const OracleOptions& opt, std::size_t max_agents) {
    DenseHmm h;
    h.n_ = model.num_agents();
    check_size(h.n_, max_agents, "exact SIS oracle");
    if (y.empty()) throw std::invalid_argument("need at least one observation");
    h.arity_ = 2;
    h.states_ = power(2, h.n_);
    h.y_.assign(y.begin(), y.end());
    h.rho_ = theta.rho;
    h.rates_ = agent_rates(theta, model.covariates);
    h.network_ = model.network;
    h.self_inclusive_ = opt.self_inclusive;
    h.initial_.resize(h.states_);
    for (std::uint64_t c = 0; c < h.states_; ++c) {
        double p = 1.0;
        for (std::size_t n = 0; n < h.n_; ++n) p *= (c >> n) & 1 ? h.rates_.alpha0[n] : 1.0 - h.rates_.alpha0[n];
        h.initial_[c] = p;
    }
    h.materialize();
    return h;
}

DenseHmm DenseHmm::sir(const Model& model, std::span<const int> y, const SisParams& theta,
                       const OracleOptions& opt, std::size_t max_agents) {
    DenseHmm h;
    h.n_ = model.num_agents();
    check_size(h.n_, max_agents, "exact SIR oracle");
    if (y.empty()) throw std::invalid_argument("need at least one observation");
    h.arity_ = 3;
    h.states_ = power(3, h.n_);
    h.y_.assign(y.begin(), y.end());
    h.rho_ = theta.rho;
    h.rates_ = agent_rates(theta, model.covariates);
    h.network_ = model.network;
    h.self_inclusive_ = opt.self_inclusive;
    h.initial_.resize(h.states_);
    for (std::uint64_t c = 0; c < h.states_; ++c) {
        double p = 1.0;
        for (std::size_t n = 0; n < h.n_; ++n) {
            const int v = h.digit(c, n);
            p *= v == 2 ? 0.0 : (v == 1 ? h.rates_.alpha0[n] : 1.0 - h.rates_.alpha0[n]);
        }
        h.initial_[c] = p;
    }
    h.materialize();
    return h;
}

void DenseHmm::materialize() {
    if (states_ > materialize_limit) return;
    std::vector<double> dense(states_ * states_), row;
    for (std::uint64_t c = 0; c < states_; ++c) {
        transition_row(c, row);
        std::copy(row.begin(), row.end(), dense.begin() + static_cast<long>(c * states_));
    }
    matrix_ = std::move(dense);
}

int DenseHmm::digit(std::uint64_t code, std::size_t n) const {
    if (arity_ == 2) return static_cast<int>((code >> n) & 1);
    for (std::size_t k = 0; k < n; ++k) code /= 3;
    return static_cast<int>(code % 3);
}

std::size_t DenseHmm::infected(std::uint64_t code) const {
    std::size_t count = 0;
    for (std::size_t n = 0; n < n_; ++n, code /= arity_) count += code % arity_ == 1;
    return count;
}

double DenseHmm::log_obs(std::size_t t, std::uint64_t code) const {
    return obs_logpmf(y_[t], infected(code), rho_);
}

void DenseHmm::agent_probs(std::uint64_t code, std::vector<double>& probs) const {
    PopulationState plane(n_);
    for (std::size_t n = 0; n < n_; ++n) plane.set(n, digit(code, n) == 1);
    probs.assign(n_ * arity_, 0.0);
    for (std::size_t n = 0; n < n_; ++n) {
        const int v = digit(code, n);
        double* p = probs.data() + n * arity_;
        const double frac = self_inclusive_ ? static_cast<double>(plane.count()) / static_cast<double>(n_)
                                            : network_.infected_fraction(plane, n);
        if (arity_ == 2) {
            const double a = v == 1 ? 1.0 - rates_.gamma[n] : rates_.lambda[n] * frac;
            p[0] = 1.0 - a;
            p[1] = a;
        } else if (v == 0) {
            p[1] = rates_.lambda[n] * frac;
            p[0] = 1.0 - p[1];
        } else if (v == 1) {
            p[1] = 1.0 - rates_.gamma[n];
            p[2] = rates_.gamma[n];
        } else {
            p[2] = 1.0;
        }
    }
}

void DenseHmm::transition_row(std::uint64_t from, std::vector<double>& row) const {
    row.resize(states_);
    if (!matrix_.empty()) {
        std::copy(matrix_.begin() + static_cast<long>(from * states_),
                  matrix_.begin() + static_cast<long>((from + 1) * states_), row.begin());
        return;
    }
    std::vector<double> probs;
    agent_probs(from, probs);
    // Expand the product over agents; after agent n the first arity^(n+1) entries hold the
    // joint law of agents 0..n.
    row[0] = 1.0;
    std::size_t filled = 1;
    for (std::size_t n = 0; n < n_; ++n) {
        for (std::size_t v = arity_; v-- > 0;) {
            const double p = probs[n * arity_ + v];
            for (std::size_t j = 0; j < filled; ++j) row[v * filled + j] = row[j] * p;
        }
        filled *= arity_;
    }
}

double DenseHmm::forward(std::vector<std::vector<double>>* filtered) const {
    std::vector<double> current(states_), next(states_), row;
    double loglik = 0.0;
    auto absorb = [&](std::size_t t, std::vector<double>& dist) {
        double total = 0.0;
        for (std::uint64_t c = 0; c < states_; ++c) {
            if (dist[c] == 0.0) continue;
            dist[c] *= std::exp(log_obs(t, c));
            total += dist[c];
        }
        if (!(total > 0.0)) return false;
        for (double& v : dist) v /= total;
        loglik += std::log(total);
        if (filtered) filtered->push_back(dist);
        return true;
    };
    if (filtered) filtered->clear();
    current = initial_;
    if (!absorb(0, current)) return neg_inf;
    for (std::size_t t = 1; t < y_.size(); ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::uint64_t c = 0; c < states_; ++c) {
            if (current[c] == 0.0) continue;
            transition_row(c, row);
            for (std::uint64_t d = 0; d < states_; ++d) next[d] += current[c] * row[d];
        }
        std::swap(current, next);
        if (!absorb(t, current)) return neg_inf;
    }
    return loglik;
}

std::vector<std::vector<double>> DenseHmm::backward_log() const {
    const std::size_t horizon = y_.size() - 1;
    std::vector<std::vector<double>> out(horizon + 1, std::vector<double>(states_, neg_inf));
    for (std::uint64_t c = 0; c < states_; ++c) out[horizon][c] = log_obs(horizon, c);
    std::vector<double> scaled(states_), row;
    for (std::size_t t = horizon; t-- > 0;) {
        const auto& later = out[t + 1];
        const double peak = *std::max_element(later.begin(), later.end());
        if (peak == neg_inf) return out;  // every later slice stays -inf
        for (std::uint64_t d = 0; d < states_; ++d) scaled[d] = std::exp(later[d] - peak);
        for (std::uint64_t c = 0; c < states_; ++c) {
            const double g = log_obs(t, c);
            if (g == neg_inf) continue;
            transition_row(c, row);
            double acc = 0.0;
            for (std::uint64_t d = 0; d < states_; ++d) acc += row[d] * scaled[d];
            out[t][c] = acc > 0.0 ? g + peak + std::log(acc) : neg_inf;
        }
    }
    return out;
}

double forward_algorithm_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                             const OracleOptions& opt) {
    return DenseHmm::sis(model, y, theta, opt, sis_forward_max_agents).forward();
}

double forward_algorithm_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                             const OracleOptions& opt) {
    return DenseHmm::sir(model, y, theta, opt, sir_forward_max_agents).forward();
}

namespace {

ExactBif bif_from(const DenseHmm& h) {
    ExactBif out;
    out.num_agents = h.num_agents();
    out.arity = h.arity();
    out.log_psi = h.backward_log();
    std::vector<double> terms;
    for (std::uint64_t c = 0; c < h.num_states(); ++c)
        if (h.initial(c) > 0.0) terms.push_back(std::log(h.initial(c)) + out.log_psi[0][c]);
    out.log_mu_psi0 = log_sum_exp(terms);
    return out;
}

std::vector<std::vector<double>> smoothing_from(const DenseHmm& h) {
    std::vector<std::vector<double>> filtered;
    if (h.forward(&filtered) == neg_inf) throw std::domain_error("observations have zero likelihood");
    const auto back = h.backward_log();
    std::vector<std::vector<double>> out(filtered.size());
    for (std::size_t t = 0; t < filtered.size(); ++t) {
        std::vector<double> logs(h.num_states(), neg_inf);
        for (std::uint64_t c = 0; c < h.num_states(); ++c) {
            if (filtered[t][c] <= 0.0) continue;
            // psi*_t already includes g(y_t | x_t), which the filtered law also contains.
            logs[c] = std::log(filtered[t][c]) + back[t][c] - h.log_obs(t, c);
        }
        normalize_log_weights(logs, out[t]);
    }
    return out;
}

}  // namespace

ExactBif exact_bif_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                       const OracleOptions& opt) {
    return bif_from(DenseHmm::sis(model, y, theta, opt, sis_bif_max_agents));
}

ExactBif exact_bif_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                       const OracleOptions& opt) {
    return bif_from(DenseHmm::sir(model, y, theta, opt, sir_bif_max_agents));
}

std::vector<std::vector<double>> exact_smoothing_marginals_sis(const Model& model, std::span<const int> y,
                                                               const SisParams& theta,
                                                               const OracleOptions& opt) {
    return smoothing_from(DenseHmm::sis(model, y, theta, opt, smoothing_max_agents));
}

std::vector<std::vector<double>> exact_smoothing_marginals_sir(const Model& model, std::span<const int> y,
                                                               const SisParams& theta,
                                                               const OracleOptions& opt) {
    return smoothing_from(DenseHmm::sir(model, y, theta, opt, std::min(smoothing_max_agents, sir_bif_max_agents)));
}

std::vector<std::vector<double>> agent_infection_marginals(const std::vector<std::vector<double>>& marginals,
                                                           std::size_t num_agents, std::size_t arity) {
    std::vector<std::vector<double>> out(marginals.size(), std::vector<double>(num_agents, 0.0));
    for (std::size_t t = 0; t < marginals.size(); ++t)
        for (std::uint64_t c = 0; c < marginals[t].size(); ++c) {
            std::uint64_t rest = c;
            for (std::size_t n = 0; n < num_agents; ++n, rest /= arity)
                if (rest % arity == 1) out[t][n] += marginals[t][c];
        }
    return out;
}

LemmaReport lemma_bounds_check(std::span<const double> alpha, std::span<const double> alpha_bar) {
    if (alpha.size() != alpha_bar.size()) throw std::invalid_argument("lemma check: length mismatch");
    const auto p = poibin_pmf(alpha);
    const auto q = poibin_pmf(alpha_bar);
    double l1 = 0.0;
    for (std::size_t n = 0; n < alpha.size(); ++n) l1 += std::fabs(alpha_bar[n] - alpha[n]);
    LemmaReport r;
    double ratio_sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = q[i] - p[i];
        r.l2_lhs += d * d;
        if (q[i] > 0.0) {
            if (p[i] <= 0.0) {
                r.kl_defined = false;
                continue;
            }
            r.kl_lhs += q[i] * std::log(q[i] / p[i]);
            ratio_sq += (q[i] / p[i]) * (q[i] / p[i]);
        }
    }
    r.l2_rhs = l1 * l1;
    r.l2_rhs_corrected = 2.0 * r.l2_rhs;
    r.kl_rhs = std::sqrt(ratio_sq) * l1;
    if (!r.kl_defined) {
        r.kl_lhs = std::numeric_limits<double>::infinity();
        r.kl_rhs = std::numeric_limits<double>::infinity();
    }
    return r;
}

double bif_log_at_state(const BifTable& psi, std::size_t t, const PopulationState& x) {
    if (psi.kind != BifTable::Kind::sis) throw std::invalid_argument("expected an SIS table");
    std::size_t cell = 0, stride = 1;
    for (std::size_t k = 0; k < psi.cluster_members.size(); ++k) {
        std::size_t count = 0;
        for (std::size_t n : psi.cluster_members[k]) count += x[n] ? 1 : 0;
        cell += count * stride;
        stride *= psi.dims[k];
    }
    return psi.log_psi.at(t).at(cell);
}

double bif_log_at_state(const BifTable& psi, std::size_t t, const SirState& x) {
    if (psi.kind != BifTable::Kind::sir) throw std::invalid_argument("expected an SIR table");
    return psi.log_at(t, x.susceptible(), x.infected());
}

namespace {

// Shared by both models. The proposal draws a summary sigma(x_t) from its h-twisted law and then
// x_t from f given the summary, so q = f * twisted(sigma) / (mass(sigma) * norm). SIS proposals
// twist by the full state (their psi only sees cluster counts), SIR proposals by the infected count.
template <class LogTwist, class Summary>
double path_log_ratio(const DenseHmm& hmm, std::span<const std::uint64_t> codes, std::size_t summaries,
                      Summary summary, LogTwist log_twist) {
    const std::size_t states = hmm.num_states();
    std::vector<double> row(states);
    std::vector<double> mass(summaries), twisted(summaries);
    double total = 0.0;
    for (std::size_t t = 0; t < codes.size(); ++t) {
        if (t == 0) {
            for (std::uint64_t c = 0; c < states; ++c) row[c] = hmm.initial(c);
        } else {
            hmm.transition_row(codes[t - 1], row);
        }
        std::fill(mass.begin(), mass.end(), 0.0);
        std::fill(twisted.begin(), twisted.end(), 0.0);
        for (std::uint64_t c = 0; c < states; ++c) {
            if (row[c] == 0.0) continue;
            const std::size_t k = summary(c);
            mass[k] += row[c];
            twisted[k] += row[c] * std::exp(log_twist(t, c));
        }
        double norm = 0.0;
        for (double v : twisted) norm += v;
        const std::size_t k = summary(codes[t]);
        total += hmm.log_obs(t, codes[t]) - std::log(twisted[k]) + std::log(mass[k]) + std::log(norm);
    }
    return total;
}

template <class State>
void check_path(std::span<const State> path, std::span<const int> y, ProposalKind kind, const BifTable* psi) {
    if (path.size() != y.size()) throw std::invalid_argument("path length must match the observations");
    if (kind == ProposalKind::twisted && psi == nullptr) throw std::invalid_argument("twisted proposals need a table");
}

}  // namespace

double exact_path_log_ratio_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                                std::span<const PopulationState> path, ProposalKind kind, const BifTable* psi) {
    check_path(path, y, kind, psi);
    const DenseHmm hmm = DenseHmm::sis(model, y, theta, {}, sis_bif_max_agents);
    std::vector<std::uint64_t> codes;
    for (const auto& x : path) codes.push_back(x.code());
    const std::size_t n = model.num_agents();
    const auto identity = [](std::uint64_t c) { return static_cast<std::size_t>(c); };
    return path_log_ratio(hmm, codes, hmm.num_states(), identity, [&](std::size_t t, std::uint64_t c) {
        switch (kind) {
            case ProposalKind::bootstrap: return 0.0;
            case ProposalKind::lookahead: return hmm.log_obs(t, c);
            case ProposalKind::twisted: return bif_log_at_state(*psi, t, PopulationState::from_code(c, n));
        }
        return 0.0;
    });
}

double exact_path_log_ratio_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                                std::span<const SirState> path, ProposalKind kind, const BifTable* psi) {
    check_path(path, y, kind, psi);
    const DenseHmm hmm = DenseHmm::sir(model, y, theta, {}, sir_bif_max_agents);
    std::vector<std::uint64_t> codes;
    for (const auto& x : path) codes.push_back(x.code());
    const std::size_t n = model.num_agents();
    const auto infected = [&](std::uint64_t c) { return hmm.infected(c); };
    return path_log_ratio(hmm, codes, n + 1, infected, [&](std::size_t t, std::uint64_t c) {
        switch (kind) {
            case ProposalKind::bootstrap: return 0.0;
            case ProposalKind::lookahead: return hmm.log_obs(t, c);
            case ProposalKind::twisted: return bif_log_at_state(*psi, t, SirState::from_code(c, n));
        }
        return 0.0;
    });
}

}  // namespace abm
