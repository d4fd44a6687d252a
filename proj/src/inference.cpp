#include "abm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "abm/distributions.hpp"
#include "abm/exact_oracle.hpp"
#include "abm/format.hpp"
#include "abm/numeric.hpp"

namespace abm {

namespace {

void check_static(int y, std::span<const double> alpha, double rho) {
    if (y < 0) throw std::invalid_argument("observation must be non-negative");
    validate_probabilities(alpha);
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0,1]");
}

// log p(y | i) summed against a count law given in log space.
double mix_observation(int y, const std::vector<double>& log_count, double rho) {
    double total = neg_inf;
    for (std::size_t i = static_cast<std::size_t>(y); i < log_count.size(); ++i)
        if (log_count[i] != neg_inf) total = log_add(total, log_count[i] + log_binom_pmf(y, long(i), rho));
    return total;
}

std::vector<double> transpoi_log_counts(std::span<const double> alpha) {
    const DiscretePmf pmf = transpoi_pmf(alpha);
    std::vector<double> out(alpha.size() + 1, neg_inf);
    for (long i = std::max(0L, pmf.first()); i <= pmf.last() && i <= long(alpha.size()); ++i)
        out[std::size_t(i)] = pmf(i) > 0.0 ? std::log(pmf(i)) : neg_inf;
    return out;
}

PopulationState draw_prior(Rng& rng, std::span<const double> alpha) {
    PopulationState x(alpha.size());
    for (std::size_t n = 0; n < alpha.size(); ++n) x.set(n, bernoulli(rng, alpha[n]));
    return x;
}

double log_logistic(double u) { return u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u)); }

std::size_t sample_index(Rng& rng, std::span<const double> log_w) {
    std::vector<double> w;
    normalize_log_weights(log_w, w);
    return std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
}

}  // namespace

double static_marginal_likelihood(int y, std::span<const double> alpha, double rho, StaticMethod method) {
    check_static(y, alpha, rho);
    if (static_cast<std::size_t>(y) > alpha.size()) return neg_inf;
    std::vector<double> logs;
    switch (method) {
        case StaticMethod::exact:
            poibin_log_pmf(alpha, logs);
            return mix_observation(y, logs, rho);
        case StaticMethod::transpoi:
            return mix_observation(y, transpoi_log_counts(alpha), rho);
        case StaticMethod::thinning: {
            std::vector<double> thinned(alpha.begin(), alpha.end());
            for (double& a : thinned) a *= rho;
            poibin_log_pmf(thinned, logs);
            return logs[static_cast<std::size_t>(y)];
        }
    }
    return neg_inf;
}

double static_naive_mc(Rng& rng, int y, std::span<const double> alpha, double rho, std::size_t particles) {
    check_static(y, alpha, rho);
    if (particles == 0) throw std::invalid_argument("need at least one particle");
    if (static_cast<std::size_t>(y) > alpha.size()) return 0.0;
    double sum = 0.0;
    for (std::size_t p = 0; p < particles; ++p)
        sum += std::exp(log_binom_pmf(y, long(draw_prior(rng, alpha).count()), rho));
    return sum / static_cast<double>(particles);
}

AliveEstimate static_alive_estimator(Rng& rng, int y, std::span<const double> alpha, double rho,
                                     std::size_t particles) {
    check_static(y, alpha, rho);
    if (particles < 2) throw std::invalid_argument("the alive estimator needs P >= 2");
    const auto attainable = std::count_if(alpha.begin(), alpha.end(), [](double a) { return a > 0.0; });
    if (y > attainable) throw InfeasibleObservation("no configuration with positive probability reaches y");
    AliveEstimate out;
    std::size_t hits = 0;
    double sum = 0.0;
    double last = 0.0;
    while (hits < particles) {
        const std::size_t count = draw_prior(rng, alpha).count();
        ++out.draws;
        last = count >= static_cast<std::size_t>(y) ? std::exp(log_binom_pmf(y, long(count), rho)) : 0.0;
        sum += last;
        hits += count >= static_cast<std::size_t>(y);
    }
    out.estimate = (sum - last) / static_cast<double>(out.draws - 1);
    return out;
}

PopulationState static_posterior_sample(Rng& rng, int y, std::span<const double> alpha, double rho,
                                        StaticMethod method) {
    check_static(y, alpha, rho);
    std::vector<double> log_count;
    if (method == StaticMethod::transpoi) log_count = transpoi_log_counts(alpha);
    else poibin_log_pmf(alpha, log_count);
    std::vector<double> log_post(log_count.size(), neg_inf);
    for (std::size_t i = 0; i < log_count.size(); ++i)
        if (static_cast<int>(i) >= y && log_count[i] != neg_inf) log_post[i] = log_count[i] + log_binom_pmf(y, long(i), rho);
    if (*std::max_element(log_post.begin(), log_post.end()) == neg_inf)
        throw InfeasibleObservation("observation has zero probability");
    const std::size_t i = sample_index(rng, log_post);
    return condber_sample(rng, alpha, i, poibin_table(alpha));
}

std::vector<double> pack_unconstrained(const SisParams& theta) {
    std::vector<double> u;
    u.insert(u.end(), theta.beta0.begin(), theta.beta0.end());
    u.insert(u.end(), theta.beta_lambda.begin(), theta.beta_lambda.end());
    u.insert(u.end(), theta.beta_gamma.begin(), theta.beta_gamma.end());
    u.push_back(logit(theta.rho));
    return u;
}

SisParams unpack_unconstrained(std::span<const double> u, std::size_t d) {
    if (u.size() != 3 * d + 1) throw std::invalid_argument("expected 3d+1 unconstrained coordinates");
    SisParams theta;
    theta.beta0.assign(u.begin(), u.begin() + long(d));
    theta.beta_lambda.assign(u.begin() + long(d), u.begin() + long(2 * d));
    theta.beta_gamma.assign(u.begin() + long(2 * d), u.begin() + long(3 * d));
    theta.rho = logistic(u.back());
    return theta;
}

std::vector<std::string> sis_parameter_names(std::size_t d) {
    std::vector<std::string> names;
    for (const char* block : {"beta0", "beta_lambda", "beta_gamma"})
        for (std::size_t k = 0; k < d; ++k) names.push_back(std::string(block) + "_" + std::to_string(k));
    names.push_back("rho");
    return names;
}

std::vector<double> to_natural(std::span<const double> u) {
    std::vector<double> out(u.begin(), u.end());
    if (!out.empty()) out.back() = logistic(out.back());
    return out;
}

Prior Prior::isotropic(std::size_t coordinates, double mean, double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("prior sd must be positive");
    return Prior{std::vector<double>(coordinates, mean), std::vector<double>(coordinates, sd)};
}

double Prior::log_density(std::span<const double> u) const {
    if (u.size() != mean.size() + 1 || sd.size() != mean.size())
        throw std::invalid_argument("prior dimension does not match the parameter vector");
    static const double half_log_2pi = 0.5 * std::log(2.0 * std::acos(-1.0));
    double lp = 0.0;
    for (std::size_t k = 0; k < mean.size(); ++k) {
        const double z = (u[k] - mean[k]) / sd[k];
        lp += -0.5 * z * z - std::log(sd[k]) - half_log_2pi;
    }
    // Uniform(0,1) on rho = logistic(u) has density rho (1 - rho) on the logit scale.
    return lp + log_logistic(u.back()) + log_logistic(-u.back());
}

std::vector<double> rw_propose(Rng& rng, std::span<const double> u, double step_sd) {
    if (step_sd < 0.0) throw std::invalid_argument("step_sd must be non-negative");
    std::vector<double> out(u.begin(), u.end());
    if (step_sd == 0.0) return out;
    std::normal_distribution<double> noise(0.0, step_sd);
    for (double& v : out) v += noise(rng);
    return out;
}

Chain run_pmmh(Rng& rng, const Prior& prior, std::vector<double> u0, const LikelihoodFn& likelihood,
               std::size_t iterations, double step_sd) {
    Chain chain;
    chain.initial_u = std::move(u0);
    LikelihoodEstimate current = likelihood(chain.initial_u, 0);
    chain.initial_log_lik = current.log_lik;
    std::vector<double> u = chain.initial_u;
    double log_target = current.log_lik + prior.log_density(u);
    chain.steps.reserve(iterations);
    for (std::size_t it = 1; it <= iterations; ++it) {
        std::vector<double> proposal = rw_propose(rng, u, step_sd);
        const double log_u = std::log(uniform01(rng));
        LikelihoodEstimate estimate = likelihood(proposal, it);
        bool accept = false;
        if (estimate.log_lik != neg_inf) {
            const double proposed = estimate.log_lik + prior.log_density(proposal);
            accept = log_target == neg_inf || log_u < proposed - log_target;
            if (accept) {
                u = std::move(proposal);
                current = std::move(estimate);
                log_target = proposed;
                ++chain.accepted;
            }
        }
        chain.steps.push_back({u, current.log_lik, accept});
        if (current.terminal) chain.terminal.push_back(*current.terminal);
    }
    return chain;
}

LikelihoodFn sis_likelihood(const Model& model, std::vector<int> y, const FilterConfig& config) {
    const std::size_t d = model.covariates.cols;
    return [&model, y = std::move(y), config, d](std::span<const double> u, std::uint64_t iteration) {
        const SisParams theta = unpack_unconstrained(u, d);
        Rng pick = make_stream(config.smc.seed, "pmmh-terminal", iteration);
        LikelihoodEstimate out;
        if (config.kind == FilterKind::exact) {
            const DenseHmm hmm = DenseHmm::sis(model, y, theta, {}, sis_forward_max_agents);
            std::vector<std::vector<double>> filtered;
            out.log_lik = hmm.forward(&filtered);
            if (out.log_lik != neg_inf) {
                const auto& last = filtered.back();
                const std::size_t code = std::discrete_distribution<std::size_t>(last.begin(), last.end())(pick);
                out.terminal = PopulationState::from_code(code, model.num_agents());
            }
            return out;
        }
        SmcOptions opt = config.smc;
        opt.seed = derive_seed(config.smc.seed, "pmmh", iteration);
        SisSystem sys;
        if (config.kind == FilterKind::bpf) {
            sys = run_bpf(model, y, theta, opt);
        } else if (config.kind == FilterKind::apf) {
            sys = run_apf_sis(model, y, theta, opt);
        } else {
            const AgentRates rates = agent_rates(theta, model.covariates);
            const BifTable psi = config.clusters <= 1
                                     ? bif_sis(y, rates, theta.rho, opt.approx)
                                     : bif_sis_clustered(y, rates, theta.rho,
                                                         rate_sorted_clusters(rates, config.clusters), opt.approx);
            sys = run_csmc_sis(model, y, theta, psi, opt);
        }
        out.log_lik = sys.log_likelihood;
        if (!sys.collapsed && out.log_lik != neg_inf)
            out.terminal = sys.states.back()[sample_index(pick, sys.final_log_weights)];
        return out;
    };
}

namespace {

std::vector<double> static_alpha(const Covariates& w, std::span<const double> beta) {
    std::vector<double> alpha(w.rows);
    for (std::size_t n = 0; n < w.rows; ++n) {
        double s = 0.0;
        for (std::size_t k = 0; k < w.cols; ++k) s += beta[k] * w(n, k);
        alpha[n] = logistic(s);
    }
    return alpha;
}

}  // namespace

LikelihoodFn static_likelihood(const Covariates& w, int y, StaticMethod method) {
    return [w, y, method](std::span<const double> u, std::uint64_t) {
        if (u.size() != w.cols + 1) throw std::invalid_argument("expected d+1 unconstrained coordinates");
        LikelihoodEstimate out;
        out.log_lik = static_marginal_likelihood(y, static_alpha(w, u.first(w.cols)), logistic(u.back()), method);
        return out;
    };
}

LikelihoodFn static_naive_likelihood(const Covariates& w, int y, std::size_t particles, std::uint64_t seed) {
    return [w, y, particles, seed](std::span<const double> u, std::uint64_t iteration) {
        if (u.size() != w.cols + 1) throw std::invalid_argument("expected d+1 unconstrained coordinates");
        Rng rng = make_stream(seed, "static-naive", iteration);
        LikelihoodEstimate out;
        out.log_lik = std::log(static_naive_mc(rng, y, static_alpha(w, u.first(w.cols)), logistic(u.back()), particles));
        return out;
    };
}

void write_chain_csv(std::ostream& os, const Chain& chain, std::span<const std::string> names,
                     std::size_t burn_in, std::size_t thin) {
    if (thin == 0) throw std::invalid_argument("thin must be positive");
    os << "iteration";
    for (const auto& name : names) os << ',' << name;
    os << ",loglik,accept\n";
    for (std::size_t k = burn_in; k < chain.steps.size(); k += thin) {
        const ChainStep& s = chain.steps[k];
        os << k + 1;
        for (double v : to_natural(s.u)) os << ',' << format_double(v);
        os << ',' << format_double(s.log_lik) << ',' << (s.accepted ? 1 : 0) << '\n';
    }
}

// ---- Gibbs ----

GibbsContext::GibbsContext(const Model& m, std::span<const int> obs, const SisParams& theta)
    : model(&m), y(obs.begin(), obs.end()), rates(agent_rates(theta, m.covariates)), rho(theta.rho) {
    if (y.empty()) throw std::invalid_argument("need at least one observation");
}

namespace {

double log_ber(bool value, double p) {
    const double q = value ? p : 1.0 - p;
    return q > 0.0 ? std::log(q) : neg_inf;
}

double agent_alpha(const PopulationState& x, std::size_t m, const GibbsContext& ctx) {
    return x[m] ? 1.0 - ctx.rates.gamma[m] : ctx.rates.lambda[m] * ctx.model->network.infected_fraction(x, m);
}

double prior_alpha(const Trajectory& x, std::size_t t, std::size_t n, const GibbsContext& ctx) {
    return t == 0 ? ctx.rates.alpha0[n] : agent_alpha(x[t - 1], n, ctx);
}

// Agents whose next-step probability depends on agent n's current state.
template <class F>
void for_each_dependent(const Network& g, std::size_t n, F&& f) {
    f(n);
    g.for_each_neighbor(n, f);
}

void check_trajectory(const Trajectory& x, const GibbsContext& ctx) {
    if (x.size() != ctx.y.size()) throw std::invalid_argument("trajectory length must match the observations");
    for (const auto& s : x)
        if (s.size() != ctx.model->num_agents()) throw std::invalid_argument("trajectory state has the wrong size");
}

}  // namespace

double complete_data_log_density(const Trajectory& x, const GibbsContext& ctx) {
    check_trajectory(x, ctx);
    double lp = sis_log_initial(x[0], ctx.rates);
    for (std::size_t t = 0; t < x.size() && lp != neg_inf; ++t) {
        if (t > 0) lp += sis_log_transition(x[t - 1], x[t], ctx.rates, ctx.model->network);
        lp += obs_logpmf(ctx.y[t], x[t], ctx.rho);
    }
    return lp;
}

void gibbs_single_site(Rng& rng, Trajectory& x, const GibbsContext& ctx, std::size_t t, std::size_t n) {
    check_trajectory(x, ctx);
    if (t >= x.size() || n >= x[t].size()) throw std::out_of_range("gibbs_single_site: (t, n) out of range");
    const double a = prior_alpha(x, t, n, ctx);
    double lp[2];
    for (int v = 0; v < 2; ++v) {
        x[t].set(n, v == 1);
        lp[v] = log_ber(v == 1, a) + obs_logpmf(ctx.y[t], x[t], ctx.rho);
        if (t + 1 < x.size() && lp[v] != neg_inf)
            for_each_dependent(ctx.model->network, n,
                               [&](std::size_t m) { lp[v] += log_ber(x[t + 1][m], agent_alpha(x[t], m, ctx)); });
    }
    const double norm = log_add(lp[0], lp[1]);
    if (norm == neg_inf) throw std::logic_error("gibbs_single_site: current trajectory has zero density");
    x[t].set(n, bernoulli(rng, std::exp(lp[1] - norm)));
}

bool gibbs_swap(Rng& rng, Trajectory& x, const GibbsContext& ctx, std::size_t t) {
    check_trajectory(x, ctx);
    PopulationState& cur = x.at(t);
    const std::size_t ones = cur.count();
    const std::size_t n_agents = cur.size();
    if (ones == 0 || ones == n_agents) return false;
    const std::size_t n1 = cur.nth_one(std::uniform_int_distribution<std::size_t>(0, ones - 1)(rng));
    const std::size_t n0 = cur.nth_zero(std::uniform_int_distribution<std::size_t>(0, n_agents - ones - 1)(rng));

    double log_ratio = log_ber(true, prior_alpha(x, t, n0, ctx)) + log_ber(false, prior_alpha(x, t, n1, ctx)) -
                       log_ber(true, prior_alpha(x, t, n1, ctx)) - log_ber(false, prior_alpha(x, t, n0, ctx));
    if (t + 1 < x.size()) {
        const Network& g = ctx.model->network;
        std::vector<std::size_t> affected{n0, n1};
        // The infected count is unchanged, so on the complete graph only the two agents move.
        if (!g.is_complete()) {
            g.for_each_neighbor(n0, [&](std::size_t m) { affected.push_back(m); });
            g.for_each_neighbor(n1, [&](std::size_t m) { affected.push_back(m); });
            std::sort(affected.begin(), affected.end());
            affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
        }
        for (std::size_t m : affected) log_ratio -= log_ber(x[t + 1][m], agent_alpha(cur, m, ctx));
        cur.set(n0, true);
        cur.set(n1, false);
        for (std::size_t m : affected) log_ratio += log_ber(x[t + 1][m], agent_alpha(cur, m, ctx));
        cur.set(n0, false);
        cur.set(n1, true);
    }
    if (std::log(uniform01(rng)) < log_ratio) {
        cur.set(n0, true);
        cur.set(n1, false);
        return true;
    }
    return false;
}

void gibbs_block(Rng& rng, Trajectory& x, const GibbsContext& ctx, std::span<const std::size_t> block) {
    check_trajectory(x, ctx);
    const std::size_t b = block.size();
    if (b == 0) return;
    if (b > max_block_size) throw std::invalid_argument("block larger than " + std::to_string(max_block_size) + " agents");
    const std::size_t n_agents = x[0].size();
    std::vector<char> in_block(n_agents, 0);
    for (std::size_t n : block) {
        if (n >= n_agents || in_block[n]) throw std::invalid_argument("block must hold distinct valid agents");
        in_block[n] = 1;
    }
    const std::size_t configs = std::size_t{1} << b;
    const std::size_t steps = x.size();
    auto assign = [&](PopulationState& s, std::size_t z) {
        for (std::size_t k = 0; k < b; ++k) s.set(block[k], (z >> k) & 1);
    };
    std::vector<double> alpha(n_agents);

    // log phi_t(z', z) for a fixed previous block state z', over all z.
    auto potentials = [&](std::size_t t, std::size_t z_prev, std::vector<double>& out) {
        PopulationState prev = x[t - 1];
        assign(prev, z_prev);
        infection_probs(prev, ctx.rates, ctx.model->network, alpha);
        double rest = 0.0;
        for (std::size_t n = 0; n < n_agents; ++n)
            if (!in_block[n]) rest += log_ber(x[t][n], alpha[n]);
        PopulationState cur = x[t];
        out.assign(configs, rest);
        for (std::size_t z = 0; z < configs; ++z) {
            assign(cur, z);
            for (std::size_t k = 0; k < b; ++k) out[z] += log_ber((z >> k) & 1, alpha[block[k]]);
            out[z] += obs_logpmf(ctx.y[t], cur, ctx.rho);
        }
    };

    std::vector<std::vector<double>> forward(steps, std::vector<double>(configs));
    {
        PopulationState cur = x[0];
        for (std::size_t z = 0; z < configs; ++z) {
            assign(cur, z);
            double lp = obs_logpmf(ctx.y[0], cur, ctx.rho);
            for (std::size_t k = 0; k < b; ++k) lp += log_ber((z >> k) & 1, ctx.rates.alpha0[block[k]]);
            forward[0][z] = lp;
        }
    }
    std::vector<double> phi;
    for (std::size_t t = 1; t < steps; ++t) {
        std::fill(forward[t].begin(), forward[t].end(), neg_inf);
        for (std::size_t zp = 0; zp < configs; ++zp) {
            if (forward[t - 1][zp] == neg_inf) continue;
            potentials(t, zp, phi);
            for (std::size_t z = 0; z < configs; ++z)
                forward[t][z] = log_add(forward[t][z], forward[t - 1][zp] + phi[z]);
        }
    }
    if (*std::max_element(forward.back().begin(), forward.back().end()) == neg_inf)
        throw std::logic_error("gibbs_block: conditional law has zero mass");

    std::size_t z = sample_index(rng, forward.back());
    assign(x[steps - 1], z);
    std::vector<double> back(configs);
    for (std::size_t t = steps - 1; t > 0; --t) {
        for (std::size_t zp = 0; zp < configs; ++zp) {
            back[zp] = neg_inf;
            if (forward[t - 1][zp] == neg_inf) continue;
            potentials(t, zp, phi);
            back[zp] = forward[t - 1][zp] + phi[z];
        }
        z = sample_index(rng, back);
        assign(x[t - 1], z);
    }
}

Trajectory saturated_trajectory(std::size_t num_agents, std::size_t steps) {
    PopulationState all(num_agents);
    for (std::size_t n = 0; n < num_agents; ++n) all.set(n, true);
    return Trajectory(steps, all);
}

GibbsResult run_gibbs(Rng& rng, const Model& model, std::span<const int> y, const Prior& prior,
                      std::vector<double> u0, Trajectory x0, const GibbsOptions& options) {
    const std::size_t d = model.covariates.cols;
    const std::size_t n_agents = model.num_agents();
    if (options.scan == ScanKind::block && (options.block_size == 0 || options.block_size > max_block_size))
        throw std::invalid_argument("block size must lie in [1, " + std::to_string(max_block_size) + "]");
    GibbsResult out;
    out.trajectory = std::move(x0);
    Chain& chain = out.chain;
    chain.initial_u = std::move(u0);
    std::vector<double> u = chain.initial_u;
    GibbsContext ctx(model, y, unpack_unconstrained(u, d));
    double log_complete = complete_data_log_density(out.trajectory, ctx);
    if (log_complete == neg_inf) throw std::invalid_argument("initial trajectory has zero density");
    chain.initial_log_lik = log_complete;
    double log_target = log_complete + prior.log_density(u);
    const std::size_t steps = y.size();

    for (std::size_t it = 1; it <= options.iterations; ++it) {
        std::vector<double> proposal = rw_propose(rng, u, options.step_sd);
        const double log_u = std::log(uniform01(rng));
        GibbsContext proposed_ctx(model, y, unpack_unconstrained(proposal, d));
        const double proposed_complete = complete_data_log_density(out.trajectory, proposed_ctx);
        const double proposed = proposed_complete + prior.log_density(proposal);
        const bool accept = proposed_complete != neg_inf && log_u < proposed - log_target;
        if (accept) {
            u = std::move(proposal);
            ctx = std::move(proposed_ctx);
            ++chain.accepted;
        }

        if (uniform01(rng) < options.swap_weight) {
            for (std::size_t t = 0; t < steps; ++t)
                for (std::size_t k = 0; k < n_agents; ++k) gibbs_swap(rng, out.trajectory, ctx, t);
        } else if (options.scan == ScanKind::single_site) {
            for (std::size_t t = 0; t < steps; ++t)
                for (std::size_t n = 0; n < n_agents; ++n) gibbs_single_site(rng, out.trajectory, ctx, t, n);
        } else {
            std::vector<std::size_t> block;
            for (std::size_t start = 0; start < n_agents; start += options.block_size) {
                block.clear();
                for (std::size_t n = start; n < std::min(n_agents, start + options.block_size); ++n) block.push_back(n);
                gibbs_block(rng, out.trajectory, ctx, block);
            }
        }
        log_complete = complete_data_log_density(out.trajectory, ctx);
        log_target = log_complete + prior.log_density(u);
        chain.steps.push_back({u, log_complete, accept});
        chain.terminal.push_back(out.trajectory.back());
    }
    return out;
}

// ---- prediction ----

std::vector<std::vector<int>> posterior_predictive(Rng& rng, const Model& model, std::span<const SisParams> thetas,
                                                   std::span<const PopulationState> states, std::size_t t_obs,
                                                   std::size_t horizon) {
    if (thetas.size() != states.size()) throw std::invalid_argument("need one state per parameter draw");
    if (t_obs > horizon) throw std::invalid_argument("t_obs must not exceed the horizon");
    std::vector<std::vector<int>> out;
    out.reserve(thetas.size());
    std::vector<double> alpha;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        const AgentRates rates = agent_rates(thetas[k], model.covariates);
        PopulationState x = states[k];
        std::vector<int> path;
        for (std::size_t t = t_obs + 1; t <= horizon; ++t) {
            infection_probs(x, rates, model.network, alpha);
            for (std::size_t n = 0; n < x.size(); ++n) x.set(n, bernoulli(rng, alpha[n]));
            path.push_back(std::binomial_distribution<int>(int(x.count()), thetas[k].rho)(rng));
        }
        out.push_back(std::move(path));
    }
    return out;
}

double quantile(std::vector<double> values, double level) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("quantile level must lie in [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = level * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

PredictiveBands predictive_quantiles(const std::vector<std::vector<int>>& paths) {
    PredictiveBands bands;
    if (paths.empty()) return bands;
    const std::size_t len = paths.front().size();
    std::vector<double> column(paths.size());
    for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t k = 0; k < paths.size(); ++k) column[k] = paths[k].at(t);
        bands.lower.push_back(quantile(column, 0.025));
        bands.median.push_back(quantile(column, 0.5));
        bands.upper.push_back(quantile(column, 0.975));
    }
    return bands;
}

}  // namespace abm
