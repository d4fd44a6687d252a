#pragma once

// Dense enumeration over {0,1}^N or {0,1,2}^N. Only meant for small populations; every entry
// point enforces a hard size guard.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "abm/sis_model.hpp"
#include "abm/smc.hpp"
#include "abm/state.hpp"

namespace abm {

class OracleSizeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct OracleOptions {
    // Susceptible agents see lambda^n * I(x) / N, counting themselves, instead of the network
    // neighbour fraction. On homogeneous instances this is exactly the coarse model.
    bool self_inclusive = false;
};

// States are integer codes, base 2 (SIS) or base 3 (SIR), agent n is digit n.
class DenseHmm {
public:
    static DenseHmm sis(const Model& model, std::span<const int> y, const SisParams& theta,
                        const OracleOptions& opt, std::size_t max_agents);
    static DenseHmm sir(const Model& model, std::span<const int> y, const SisParams& theta,
                        const OracleOptions& opt, std::size_t max_agents);

    std::size_t num_agents() const { return n_; }
    std::size_t arity() const { return arity_; }
    std::size_t num_states() const { return states_; }
    std::size_t horizon() const { return y_.size() - 1; }

    int digit(std::uint64_t code, std::size_t n) const;
    std::size_t infected(std::uint64_t code) const;

    double initial(std::uint64_t code) const { return initial_[code]; }
    // f(x' | x) for every x', written into row (size num_states()).
    void transition_row(std::uint64_t from, std::vector<double>& row) const;
    double log_obs(std::size_t t, std::uint64_t code) const;

    // Per-step normalized forward filter p(x_t | y_{0:t}) and the log-likelihood.
    double forward(std::vector<std::vector<double>>* filtered = nullptr) const;
    // log psi*_t(x) = log p(y_{t:T} | x_t = x).
    std::vector<std::vector<double>> backward_log() const;

private:
    void materialize();
    void agent_probs(std::uint64_t code, std::vector<double>& probs) const;  // [n * arity + v]

    std::size_t n_ = 0;
    std::size_t arity_ = 2;
    std::size_t states_ = 0;
    std::vector<int> y_;
    double rho_ = 1.0;
    AgentRates rates_;
    Network network_;
    bool self_inclusive_ = false;
    std::vector<double> initial_;
    std::vector<double> matrix_;  // row-major, only when small enough
};

inline constexpr std::size_t sis_forward_max_agents = 14;
inline constexpr std::size_t sir_forward_max_agents = 9;
inline constexpr std::size_t sis_bif_max_agents = 10;
inline constexpr std::size_t sir_bif_max_agents = 6;
inline constexpr std::size_t smoothing_max_agents = 10;

double forward_algorithm_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                             const OracleOptions& opt = {});
double forward_algorithm_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                             const OracleOptions& opt = {});

struct ExactBif {
    std::size_t num_agents = 0;
    std::size_t arity = 2;
    std::vector<std::vector<double>> log_psi;  // [t][code]
    double log_mu_psi0 = 0.0;                  // log of the initial law applied to psi*_0
};

ExactBif exact_bif_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                       const OracleOptions& opt = {});
ExactBif exact_bif_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                       const OracleOptions& opt = {});

// p(x_t | y_{0:T}) for each t, indexed by state code.
std::vector<std::vector<double>> exact_smoothing_marginals_sis(const Model& model, std::span<const int> y,
                                                               const SisParams& theta,
                                                               const OracleOptions& opt = {});
std::vector<std::vector<double>> exact_smoothing_marginals_sir(const Model& model, std::span<const int> y,
                                                               const SisParams& theta,
                                                               const OracleOptions& opt = {});

// Per-agent probabilities of being infected, from state marginals over codes.
std::vector<std::vector<double>> agent_infection_marginals(const std::vector<std::vector<double>>& marginals,
                                                           std::size_t num_agents, std::size_t arity);

// Proposal families of the filters: x_t is drawn from f(x_t | x_{t-1}) h_t(x_t) with h_t equal to
// 1 (bootstrap), g(y_t | x_t) (lookahead) or psi_t (twisted). SIR proposals only twist the
// infected count: it is drawn from the h-twisted count law, then x_t from f given the count.
enum class ProposalKind { bootstrap, lookahead, twisted };

// log gamma(x_{0:T}) - log q(x_{0:T}) for a single path, with q evaluated by enumerating the
// transition rows. A filter run with one particle must report this as its log-likelihood.
double exact_path_log_ratio_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                                std::span<const PopulationState> path, ProposalKind kind,
                                const BifTable* psi = nullptr);
double exact_path_log_ratio_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                                std::span<const SirState> path, ProposalKind kind, const BifTable* psi = nullptr);

// psi_t evaluated at a full state through the table's summary (cluster counts, or (s, i)).
double bif_log_at_state(const BifTable& psi, std::size_t t, const PopulationState& x);
double bif_log_at_state(const BifTable& psi, std::size_t t, const SirState& x);

struct LemmaReport {
    double l2_lhs = 0.0;
    double l2_rhs = 0.0;            // (sum |abar - a|)^2 as stated
    double l2_rhs_corrected = 0.0;  // twice the stated bound; see README
    double kl_lhs = 0.0;
    double kl_rhs = 0.0;
    bool kl_defined = true;  // false when PoiBin(abar) charges a point where PoiBin(a) is zero
};

LemmaReport lemma_bounds_check(std::span<const double> alpha, std::span<const double> alpha_bar);

}  // namespace abm
