#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "abm/rng.hpp"
#include "abm/sis_model.hpp"
#include "abm/smc.hpp"
#include "abm/state.hpp"

namespace abm {

// ---- static model: X^n ~ Ber(alpha^n) independently, Y ~ Bin(I(X), rho) ----

enum class StaticMethod { exact, transpoi, thinning };

class InfeasibleObservation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// log p(y). Returns -inf when y > N or y is unattainable.
double static_marginal_likelihood(int y, std::span<const double> alpha, double rho, StaticMethod method);

// Plain average of g(y | X) over P prior draws; can be exactly zero.
double static_naive_mc(Rng& rng, int y, std::span<const double> alpha, double rho, std::size_t particles);

struct AliveEstimate {
    double estimate = 0.0;
    std::size_t draws = 0;  // R: total prior draws until P of them satisfied I(X) >= y
};

AliveEstimate static_alive_estimator(Rng& rng, int y, std::span<const double> alpha, double rho,
                                     std::size_t particles);

// Exact draw from p(x | y) through the count posterior p(i | y) and CondBer(alpha, i).
// The transpoi method swaps the count prior for its translated Poisson surrogate.
PopulationState static_posterior_sample(Rng& rng, int y, std::span<const double> alpha, double rho,
                                        StaticMethod method);

// ---- parameters on the unconstrained scale ----
// SIS parameters are packed as (beta0, beta_lambda, beta_gamma, logit rho). The static model
// uses (beta, logit rho) with alpha^n = logistic(beta . w^n).

std::vector<double> pack_unconstrained(const SisParams& theta);
SisParams unpack_unconstrained(std::span<const double> u, std::size_t d);
std::vector<std::string> sis_parameter_names(std::size_t d);
std::vector<double> to_natural(std::span<const double> u);  // replaces the last coordinate by rho

// Independent Normal(mean, sd) priors on every coordinate but the last, Uniform(0,1) on rho.
struct Prior {
    std::vector<double> mean;
    std::vector<double> sd;

    static Prior isotropic(std::size_t coordinates, double mean, double sd);
    // Log density of u, including the logistic Jacobian for logit rho.
    double log_density(std::span<const double> u) const;
};

std::vector<double> rw_propose(Rng& rng, std::span<const double> u, double step_sd);

struct LikelihoodEstimate {
    double log_lik = neg_inf;
    // A draw of the final latent state, when the estimator provides one.
    std::optional<PopulationState> terminal;
};

// Called with the proposed point and the index of the iteration that proposed it, so filters
// can key their random streams on it.
using LikelihoodFn = std::function<LikelihoodEstimate(std::span<const double> u, std::uint64_t iteration)>;

struct ChainStep {
    std::vector<double> u;
    double log_lik = neg_inf;
    bool accepted = false;
};

struct Chain {
    std::vector<double> initial_u;
    double initial_log_lik = neg_inf;
    std::vector<ChainStep> steps;
    std::vector<PopulationState> terminal;  // per step, when available
    std::size_t accepted = 0;

    double acceptance_rate() const { return steps.empty() ? 0.0 : double(accepted) / double(steps.size()); }
    std::span<const double> current_u() const { return steps.empty() ? initial_u : steps.back().u; }
};

// Pseudo-marginal random-walk Metropolis. The stored estimate changes only on acceptance.
Chain run_pmmh(Rng& rng, const Prior& prior, std::vector<double> u0, const LikelihoodFn& likelihood,
               std::size_t iterations, double step_sd);

enum class FilterKind { bpf, apf, csmc, exact };

struct FilterConfig {
    FilterKind kind = FilterKind::csmc;
    SmcOptions smc;
    std::size_t clusters = 1;  // cSMC only
};

// Likelihood of the SIS model; cSMC rebuilds its backward information filter at every call.
// Holds a reference to model.
LikelihoodFn sis_likelihood(const Model& model, std::vector<int> y, const FilterConfig& config);
LikelihoodFn static_likelihood(const Covariates& w, int y, StaticMethod method);
LikelihoodFn static_naive_likelihood(const Covariates& w, int y, std::size_t particles, std::uint64_t seed);

// CSV: iteration, one column per parameter on the natural scale, loglik, accept.
void write_chain_csv(std::ostream& os, const Chain& chain, std::span<const std::string> names,
                     std::size_t burn_in = 0, std::size_t thin = 1);

// ---- Gibbs samplers over SIS agent trajectories ----

struct GibbsContext {
    const Model* model = nullptr;
    std::vector<int> y;
    AgentRates rates;
    double rho = 1.0;

    GibbsContext(const Model& m, std::span<const int> obs, const SisParams& theta);
    std::size_t horizon() const { return y.size() - 1; }
};

using Trajectory = std::vector<PopulationState>;

// log p(x_{0:T}, y_{0:T}).
double complete_data_log_density(const Trajectory& x, const GibbsContext& ctx);

// Draws x_t^n from its full conditional, including agent n's own next-step factor.
void gibbs_single_site(Rng& rng, Trajectory& x, const GibbsContext& ctx, std::size_t t, std::size_t n);
// Swaps a random infected and susceptible agent at time t with an MH correction. Returns
// whether the swap was accepted; a no-op when x_t is all zeros or all ones.
bool gibbs_swap(Rng& rng, Trajectory& x, const GibbsContext& ctx, std::size_t t);

inline constexpr std::size_t max_block_size = 10;
// Forward filtering, backward sampling of the block's trajectories given everything else.
void gibbs_block(Rng& rng, Trajectory& x, const GibbsContext& ctx, std::span<const std::size_t> block);

enum class ScanKind { single_site, block };

struct GibbsOptions {
    std::size_t iterations = 1000;
    ScanKind scan = ScanKind::single_site;
    std::size_t block_size = 5;
    double swap_weight = 0.5;  // probability of the N-swaps-per-time kernel instead of a scan
    double step_sd = 0.08;
};

struct GibbsResult {
    Chain chain;  // log_lik holds the complete-data log density
    Trajectory trajectory;
};

GibbsResult run_gibbs(Rng& rng, const Model& model, std::span<const int> y, const Prior& prior,
                      std::vector<double> u0, Trajectory x0, const GibbsOptions& options);

// Trajectory with every agent infected at every time; always has positive density.
Trajectory saturated_trajectory(std::size_t num_agents, std::size_t steps);

// ---- prediction ----

// One simulated observation path y_{t_obs+1:horizon} per (theta, x_{t_obs}) pair.
std::vector<std::vector<int>> posterior_predictive(Rng& rng, const Model& model, std::span<const SisParams> thetas,
                                                   std::span<const PopulationState> states, std::size_t t_obs,
                                                   std::size_t horizon);

struct PredictiveBands {
    std::vector<double> lower, median, upper;  // 2.5%, 50%, 97.5% per predicted time
};

PredictiveBands predictive_quantiles(const std::vector<std::vector<int>>& paths);

// Linear interpolation between order statistics; sorts a copy.
double quantile(std::vector<double> values, double level);

}  // namespace abm
