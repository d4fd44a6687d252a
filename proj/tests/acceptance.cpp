// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "abm/cli.hpp"
#include "abm/distributions.hpp"
#include "abm/exact_oracle.hpp"
#include "abm/inference.hpp"
#include "abm/model_io.hpp"
#include "abm/smc.hpp"
#include "brute_force.hpp"

using namespace abm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << id << ' ' << name << ": " << detail << std::endl;
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

std::vector<double> random_alpha(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> a(n);
    for (double& v : a) v = u(gen);
    return a;
}

Model covariate_model(std::size_t n, std::uint64_t seed) {
    return Model{generate_covariates(n, 1, 0.0, 1.0, true, seed), Network::complete(n)};
}

const SisParams small_theta{{-0.8, 0.3}, {-0.3, 1.0}, {-1.0, -0.5}, 0.7};

struct Moments {
    double mean = 0.0;
    double se = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= double(v.size());
    double var = 0.0;
    for (double x : v) var += (x - m.mean) * (x - m.mean);
    var /= double(v.size() - 1);
    m.se = std::sqrt(var / double(v.size()));
    return m;
}

double variance(const std::vector<double>& v) {
    const Moments m = moments(v);
    return m.se * m.se * double(v.size());
}

// ---- 1 ----
void poisson_binomial_exactness() {
    const auto start = Clock::now();
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<std::size_t> size(1, 12);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const auto alpha = random_alpha(gen, size(gen));
        const PmfTable table = poibin_table(alpha);
        const std::size_t n = alpha.size();
        for (std::size_t from = 0; from <= n; ++from) {
            const std::vector<double> tail(alpha.begin() + static_cast<std::ptrdiff_t>(from), alpha.end());
            const auto brute_pmf = brute::poibin(tail);
            for (std::size_t i = 0; i < brute_pmf.size(); ++i)
                worst = std::max(worst, std::fabs(table.q(i, from) - brute_pmf[i]));
        }
    }
    const double secs = seconds_since(start);
    report(1, "poisson-binomial exactness", worst <= 1e-12 && secs < 5.0,
           fmt("max abs error %.3g over 200 tables (every suffix column), %.2f s", worst, secs));
}

// ---- 2 ----
void thinning_identity() {
    std::mt19937_64 gen(2);
    std::uniform_int_distribution<std::size_t> size(1, 30);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const auto alpha = random_alpha(gen, size(gen));
        const double rho = unit(gen);
        const int y = std::uniform_int_distribution<int>(0, static_cast<int>(alpha.size()))(gen);
        const double a = std::exp(static_marginal_likelihood(y, alpha, rho, StaticMethod::exact));
        const double b = std::exp(static_marginal_likelihood(y, alpha, rho, StaticMethod::thinning));
        worst = std::max(worst, std::fabs(a - b));
    }
    report(2, "thinning identity", worst <= 1e-12, fmt("max |sum PoiBin*Bin - PoiBin(rho alpha)| = %.3g", worst));
}

// ---- 3 ----
void condber_correctness() {
    std::mt19937_64 gen(3);
    const std::size_t n = 6;
    const auto alpha = random_alpha(gen, n);
    const PmfTable table(alpha);
    const int draws = 100000;
    double worst_sampler = 0.0, worst_chain = 0.0;
    Rng rng(31);
    for (int i = 1; i < static_cast<int>(n); ++i) {
        const auto target = brute::condber(alpha, i);
        std::vector<double> hist(target.size(), 0.0);
        for (int k = 0; k < draws; ++k) hist[condber_sample(rng, alpha, static_cast<std::size_t>(i), table).code()] += 1.0 / draws;
        worst_sampler = std::max(worst_sampler, brute::tv(hist, target));

        PopulationState x(n);
        for (int k = 0; k < i; ++k) x.set(static_cast<std::size_t>(k), true);
        std::vector<double> freq(target.size(), 0.0);
        for (int k = 0; k < draws; ++k) {
            x = condber_swap_step(rng, x, alpha);
            freq[x.code()] += 1.0 / draws;
        }
        worst_chain = std::max(worst_chain, brute::tv(freq, target));
    }
    report(3, "conditional bernoulli", worst_sampler < 0.01 && worst_chain < 0.01,
           fmt("N = 6, i = 1..5, 1e5 draws each: sampler TV %.4f, swap chain TV %.4f", worst_sampler, worst_chain));
}

// ---- 4 ----
void smc_unbiasedness() {
    const auto start = Clock::now();
    const Model sis_model = covariate_model(6, 41);
    const Model sir_model = covariate_model(5, 42);
    Rng data_rng(43);
    const auto sis_y = simulate(data_rng, small_theta, sis_model.covariates, sis_model.network, 5).y;
    const auto sir_y = sir_simulate(data_rng, small_theta, sir_model.covariates, sir_model.network, 4).y;
    const double exact_sis = forward_algorithm_sis(sis_model, sis_y, small_theta);
    const double exact_sir = forward_algorithm_sir(sir_model, sir_y, small_theta);
    const auto sis_rates = agent_rates(small_theta, sis_model.covariates);
    const auto sir_rates = agent_rates(small_theta, sir_model.covariates);
    const BifTable psi_sis = bif_sis(sis_y, sis_rates, small_theta.rho, CountApprox::exact);
    const BifTable psi_sir = bif_sir(sir_y, sir_rates, small_theta.rho);

    const char* names[] = {"bpf", "apf-sis", "csmc-sis", "apf-sir", "csmc-sir"};
    const int reps = 10000;
    bool ok = true;
    std::ostringstream detail;
    for (int f = 0; f < 5; ++f) {
        std::vector<double> ratio(reps);
        for (int r = 0; r < reps; ++r) {
            SmcOptions opt;
            opt.particles = 16;
            opt.seed = derive_seed(4, "acceptance-unbiased", static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(r));
            double ll = neg_inf;
            switch (f) {
                case 0: ll = run_bpf(sis_model, sis_y, small_theta, opt).log_likelihood; break;
                case 1: ll = run_apf_sis(sis_model, sis_y, small_theta, opt).log_likelihood; break;
                case 2: ll = run_csmc_sis(sis_model, sis_y, small_theta, psi_sis, opt).log_likelihood; break;
                case 3: ll = run_apf_sir(sir_model, sir_y, small_theta, opt).log_likelihood; break;
                default: ll = run_csmc_sir(sir_model, sir_y, small_theta, psi_sir, opt).log_likelihood; break;
            }
            ratio[r] = std::exp(ll - (f < 3 ? exact_sis : exact_sir));
        }
        const Moments m = moments(ratio);
        const double z = (m.mean - 1.0) / m.se;
        ok = ok && std::fabs(z) <= 3.0;
        detail << names[f] << " z=" << fmt("%+.2f", z) << ' ';
    }
    const double secs = seconds_since(start);
    ok = ok && secs < 600.0;
    detail << fmt("(1e4 runs each, P = 16, %.1f s)", secs);
    report(4, "smc unbiasedness", ok, detail.str());
}

// ---- 5 ----
void weight_telescoping() {
    const Model sis_model = covariate_model(6, 51);
    const Model sir_model = covariate_model(5, 52);
    Rng data_rng(53);
    const auto sis_y = simulate(data_rng, small_theta, sis_model.covariates, sis_model.network, 5).y;
    const auto sir_y = sir_simulate(data_rng, small_theta, sir_model.covariates, sir_model.network, 4).y;
    const BifTable psi_sis = bif_sis(sis_y, agent_rates(small_theta, sis_model.covariates), small_theta.rho, CountApprox::exact);
    const BifTable psi_sir = bif_sir(sir_y, agent_rates(small_theta, sir_model.covariates), small_theta.rho);

    double worst = 0.0;
    std::size_t compared[5] = {0, 0, 0, 0, 0};
    for (std::uint64_t s = 0; s < 50; ++s) {
        SmcOptions opt;
        opt.particles = 1;
        opt.seed = derive_seed(5, "acceptance-telescoping", s);
        auto sis_check = [&](const SisSystem& sys, ProposalKind kind, std::size_t slot) {
            if (sys.collapsed) return;
            std::vector<PopulationState> path;
            for (const auto& row : sys.states) path.push_back(row.front());
            const double ratio = exact_path_log_ratio_sis(sis_model, sis_y, small_theta, path, kind, &psi_sis);
            worst = std::max(worst, std::fabs(sys.log_likelihood - ratio));
            ++compared[slot];
        };
        auto sir_check = [&](const SirSystem& sys, ProposalKind kind, std::size_t slot) {
            if (sys.collapsed) return;
            std::vector<SirState> path;
            for (const auto& row : sys.states) path.push_back(row.front());
            const double ratio = exact_path_log_ratio_sir(sir_model, sir_y, small_theta, path, kind, &psi_sir);
            worst = std::max(worst, std::fabs(sys.log_likelihood - ratio));
            ++compared[slot];
        };
        sis_check(run_bpf(sis_model, sis_y, small_theta, opt), ProposalKind::bootstrap, 0);
        sis_check(run_apf_sis(sis_model, sis_y, small_theta, opt), ProposalKind::lookahead, 1);
        sis_check(run_csmc_sis(sis_model, sis_y, small_theta, psi_sis, opt), ProposalKind::twisted, 2);
        sir_check(run_apf_sir(sir_model, sir_y, small_theta, opt), ProposalKind::lookahead, 3);
        sir_check(run_csmc_sir(sir_model, sir_y, small_theta, psi_sir, opt), ProposalKind::twisted, 4);
    }
    const bool all_compared = std::all_of(std::begin(compared), std::end(compared), [](std::size_t c) { return c > 0; });
    report(5, "weight telescoping", all_compared && worst <= 1e-8,
           fmt("max |log w - log gamma/q| = %.3g; paths compared bpf %zu, apf-sis %zu, csmc-sis %zu, apf-sir %zu, "
               "csmc-sir %zu",
               worst, compared[0], compared[1], compared[2], compared[3], compared[4]));
}

// ---- 6, 7, 8 ----
struct OutbreakData {
    ModelDoc doc;
    std::vector<int> y;
};

OutbreakData outbreak() {
    OutbreakData d;
    d.doc = load_model(std::filesystem::path(ABM_SOURCE_DIR) / "tools" / "configs" / "sis_dgp.json");
    Rng rng(1);
    d.y = simulate(rng, d.doc.theta, d.doc.model.covariates, d.doc.model.network, 90).y;
    return d;
}

template <class System>
bool respects_observations(const System& sys, const std::vector<int>& y) {
    for (std::size_t t = 0; t < sys.states.size(); ++t)
        for (const auto& x : sys.states[t])
            if (x.count() < static_cast<std::size_t>(y[t])) return false;
    return true;
}

// Returns whether every APF and cSMC particle respected the observations.
bool variance_pattern(const OutbreakData& d) {
    const auto start = Clock::now();
    const Model& m = d.doc.model;
    const SisParams& theta = d.doc.theta;
    const BifTable psi = bif_sis(d.y, agent_rates(theta, m.covariates), theta.rho, CountApprox::exact);
    const int reps = 100;
    std::vector<double> bpf, apf, csmc;
    bool constraint = true;
    std::size_t collapsed = 0;
    for (int r = 0; r < reps; ++r) {
        SmcOptions opt;
        opt.particles = 512;
        opt.seed = derive_seed(6, "acceptance-variance", static_cast<std::uint64_t>(r));
        const auto b = run_bpf(m, d.y, theta, opt);
        const auto a = run_apf_sis(m, d.y, theta, opt);
        const auto c = run_csmc_sis(m, d.y, theta, psi, opt);
        collapsed += b.collapsed + a.collapsed + c.collapsed;
        bpf.push_back(b.log_likelihood);
        apf.push_back(a.log_likelihood);
        csmc.push_back(c.log_likelihood);
        constraint = constraint && respects_observations(a, d.y) && respects_observations(c, d.y);
    }
    const double secs = seconds_since(start);
    const double vb = variance(bpf), va = variance(apf), vc = variance(csmc);
    const bool finite = collapsed == 0;
    report(6, "variance ordering", finite && vc < va && va < vb && vc <= vb / 10.0 && secs <= 1800.0,
           fmt("P = 512, 100 reps: Var bpf %.4g, apf %.4g, csmc %.4g, csmc/bpf %.4g, collapsed runs %zu, %.0f s", vb, va,
               vc, vc / vb, collapsed, secs));
    return constraint;
}

void perturbed_ess(const OutbreakData& d) {
    const Model& m = d.doc.model;
    const SisParams& theta = d.doc.theta;
    std::vector<int> y = d.y;
    const std::size_t times[] = {25, 50, 75};
    for (std::size_t t : times) y[t] /= 2;
    const BifTable psi = bif_sis(y, agent_rates(theta, m.covariates), theta.rho, CountApprox::exact);
    const double particles = 512;
    bool ok = true;
    double bpf_worst = particles, csmc_worst = particles;
    double bpf_best_of_min = 0.0;
    for (std::uint64_t r = 0; r < 5; ++r) {
        SmcOptions opt;
        opt.particles = 512;
        opt.seed = derive_seed(7, "acceptance-perturbed", r);
        const auto b = run_bpf(m, y, theta, opt);
        const auto c = run_csmc_sis(m, y, theta, psi, opt);
        if (b.collapsed || c.collapsed) {
            ok = false;
            continue;
        }
        double at_perturbed = particles;
        for (std::size_t t : times) at_perturbed = std::min(at_perturbed, b.ess[t]);
        const double c_min = *std::min_element(c.ess.begin(), c.ess.end());
        ok = ok && at_perturbed < 0.05 * particles && c_min > 0.2 * particles;
        bpf_worst = std::min(bpf_worst, at_perturbed);
        bpf_best_of_min = std::max(bpf_best_of_min, at_perturbed);
        csmc_worst = std::min(csmc_worst, c_min);
    }
    report(7, "ess under halved observations", ok,
           fmt("5 runs, P = 512: bpf min ESS at t in {25,50,75} between %.1f and %.1f (threshold 25.6), csmc min ESS "
               "over all t %.1f (threshold 102.4)",
               bpf_worst, bpf_best_of_min, csmc_worst));
}

// ---- 9 ----
void bif_fidelity() {
    double worst = 0.0;
    int instances = 0;
    const SisParams thetas[] = {{{-1.0}, {0.3}, {-0.8}, 0.6}, {{0.5}, {-1.0}, {0.2}, 0.9}, {{-2.0}, {1.5}, {-1.5}, 0.3}};
    for (std::size_t n = 2; n <= 8; ++n) {
        const Model m{generate_covariates(n, 0, 0.0, 1.0, true, 1), Network::complete(n)};
        for (const SisParams& theta : thetas) {
            Rng rng(derive_seed(9, "acceptance-bif", n, static_cast<std::uint64_t>(instances)));
            const auto y = simulate(rng, theta, m.covariates, m.network, 6).y;
            OracleOptions opt;
            opt.self_inclusive = true;
            const ExactBif exact = exact_bif_sis(m, y, theta, opt);
            const BifTable table = bif_sis(y, agent_rates(theta, m.covariates), theta.rho, CountApprox::exact);
            for (std::size_t t = 0; t < exact.log_psi.size(); ++t)
                for (std::uint64_t code = 0; code < exact.log_psi[t].size(); ++code) {
                    const double e = exact.log_psi[t][code];
                    const double b = table.log_at(t, PopulationState::from_code(code, n).count());
                    if (std::isinf(e) || std::isinf(b)) {
                        if (e != b) worst = INFINITY;
                        continue;
                    }
                    worst = std::max(worst, std::fabs(std::expm1(b - e)));
                }
            ++instances;
        }
    }
    report(9, "bif fidelity", worst <= 1e-10,
           fmt("%d homogeneous instances, N = 2..8, T = 6: max relative error %.3g", instances, worst));
}

// ---- 10 ----
void lemma_bounds() {
    std::mt19937_64 gen(10);
    std::uniform_int_distribution<std::size_t> size(2, 8);
    int violations = 0, undefined = 0, stated_l2 = 0;
    double worst_ratio = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = size(gen);
        const auto a = random_alpha(gen, n);
        const auto b = random_alpha(gen, n);
        const LemmaReport r = lemma_bounds_check(a, b);
        if (!r.kl_defined) {
            ++undefined;
        } else {
            if (r.kl_lhs > r.kl_rhs * (1 + 1e-12) + 1e-15) ++violations;
            if (r.kl_rhs > 0) worst_ratio = std::max(worst_ratio, r.kl_lhs / r.kl_rhs);
        }
        if (r.l2_lhs > r.l2_rhs * (1 + 1e-12) + 1e-15) ++stated_l2;
    }
    report(10, "kl bound", violations == 0,
           fmt("%d violations in %d pairs with N in [2,8] (max lhs/rhs %.3f)", violations, 1000 - undefined, worst_ratio));
    const LemmaReport edge = lemma_bounds_check(std::vector<double>{0.5}, std::vector<double>{0.6});
    std::cout << "NOTE 10 l2 edge case (recorded, not asserted): N = 1, a = 0.5, abar = 0.6 gives ||diff||^2 = "
              << edge.l2_lhs << " against the stated bound " << edge.l2_rhs << "; the stated l2 form fails on "
              << stated_l2 << " of the 1000 random pairs" << std::endl;
}

// ---- 11 ----
void pmmh_correctness() {
    const auto start = Clock::now();
    const std::size_t n = 4;
    const Model m{generate_covariates(n, 0, 0.0, 1.0, true, 1), Network::complete(n)};
    const SisParams truth{{-0.5}, {0.5}, {-0.5}, 0.7};
    Rng data_rng(111);
    const std::vector<int> y = simulate(data_rng, truth, m.covariates, m.network, 3).y;
    const Prior prior = Prior::isotropic(3, 0.0, 1.5);

    // Posterior means by midpoint quadrature over (beta0, beta_lambda, beta_gamma, logit rho).
    const int points = 36;
    const double beta_half = 7.5, logit_half = 12.0;
    std::vector<double> beta_nodes(points), logit_nodes(points);
    for (int k = 0; k < points; ++k) {
        beta_nodes[k] = -beta_half + 2 * beta_half * (k + 0.5) / points;
        logit_nodes[k] = -logit_half + 2 * logit_half * (k + 0.5) / points;
    }
    double z = 0.0, shift = neg_inf;
    std::vector<double> means(4, 0.0);
    std::vector<double> logs;
    logs.reserve(std::size_t(points) * points * points * points);
    for (int a = 0; a < points; ++a)
        for (int b = 0; b < points; ++b)
            for (int c = 0; c < points; ++c)
                for (int e = 0; e < points; ++e) {
                    const std::vector<double> u{beta_nodes[a], beta_nodes[b], beta_nodes[c], logit_nodes[e]};
                    const double lp = forward_algorithm_sis(m, y, unpack_unconstrained(u, 1)) + prior.log_density(u);
                    logs.push_back(lp);
                    shift = std::max(shift, lp);
                }
    std::size_t idx = 0;
    for (int a = 0; a < points; ++a)
        for (int b = 0; b < points; ++b)
            for (int c = 0; c < points; ++c)
                for (int e = 0; e < points; ++e) {
                    const double w = std::exp(logs[idx++] - shift);
                    z += w;
                    means[0] += w * beta_nodes[a];
                    means[1] += w * beta_nodes[b];
                    means[2] += w * beta_nodes[c];
                    means[3] += w * logistic(logit_nodes[e]);
                }
    for (double& v : means) v /= z;

    FilterConfig fc;
    fc.kind = FilterKind::exact;
    fc.smc.seed = 112;
    const auto lik = sis_likelihood(m, y, fc);
    Rng rng(113);
    const std::size_t iters = 100000;
    const Chain chain = run_pmmh(rng, prior, {0.0, 0.0, 0.0, 0.0}, lik, iters, 0.8);

    bool ok = true;
    std::ostringstream detail;
    const char* names[] = {"beta0", "beta_lambda", "beta_gamma", "rho"};
    const std::size_t batches = 50, len = iters / batches;
    for (std::size_t k = 0; k < 4; ++k) {
        std::vector<double> batch(batches, 0.0);
        for (std::size_t i = 0; i < iters; ++i) {
            const double v = k == 3 ? logistic(chain.steps[i].u[3]) : chain.steps[i].u[k];
            batch[i / len] += v / double(len);
        }
        const Moments mb = moments(batch);
        const double z_score = (mb.mean - means[k]) / mb.se;
        ok = ok && std::fabs(z_score) <= 3.0;
        detail << names[k] << fmt(" %.4f vs %.4f (z %+.2f) ", mb.mean, means[k], z_score);
    }
    detail << fmt("acceptance %.2f, %.0f s", chain.acceptance_rate(), seconds_since(start));
    report(11, "pmmh posterior means", ok, detail.str());
}

// ---- 12 ----
Trajectory decode(std::uint64_t code, std::size_t n, std::size_t steps) {
    Trajectory x;
    for (std::size_t t = 0; t < steps; ++t)
        x.push_back(PopulationState::from_code((code >> (t * n)) & ((1ULL << n) - 1), n));
    return x;
}

std::uint64_t encode(const Trajectory& x) {
    std::uint64_t code = 0;
    for (std::size_t t = 0; t < x.size(); ++t) code |= x[t].code() << (t * x[t].size());
    return code;
}

void gibbs_invariance() {
    const std::size_t n = 3, steps = 3;
    const Model m = covariate_model(n, 121);
    const std::vector<int> y{1, 2, 1};
    const GibbsContext ctx(m, y, small_theta);

    std::vector<double> logs(std::size_t{1} << (n * steps));
    for (std::uint64_t c = 0; c < logs.size(); ++c) logs[c] = complete_data_log_density(decode(c, n, steps), ctx);
    std::vector<double> law;
    normalize_log_weights(logs, law);
    std::discrete_distribution<std::uint64_t> exact(law.begin(), law.end());

    const int sweeps = 100000;
    auto invariance_tv = [&](std::uint64_t seed, const std::function<void(Rng&, Trajectory&)>& kernel) {
        Rng rng(seed);
        std::vector<double> hist(law.size(), 0.0);
        for (int k = 0; k < sweeps; ++k) {
            Trajectory x = decode(exact(rng), n, steps);
            kernel(rng, x);
            hist[encode(x)] += 1.0 / sweeps;
        }
        return brute::tv(hist, law);
    };
    const double single = invariance_tv(1, [&](Rng& r, Trajectory& x) {
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t a = 0; a < n; ++a) gibbs_single_site(r, x, ctx, t, a);
    });
    const double swap = invariance_tv(2, [&](Rng& r, Trajectory& x) {
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t k = 0; k < n; ++k) gibbs_swap(r, x, ctx, t);
    });
    const std::vector<std::size_t> pair{0, 2}, all{0, 1, 2};
    const double block = invariance_tv(3, [&](Rng& r, Trajectory& x) { gibbs_block(r, x, ctx, pair); });
    const double block_all = invariance_tv(4, [&](Rng& r, Trajectory& x) { gibbs_block(r, x, ctx, all); });
    const double worst = std::max({single, swap, block, block_all});
    report(12, "gibbs invariance", worst < 0.05,
           fmt("N = 3, T = 2, 1e5 sweeps from exact draws: TV single-site %.4f, swap %.4f, block{0,2} %.4f, block{all} "
               "%.4f",
               single, swap, block, block_all));
}

// ---- 13 ----
std::string run_filter_cli(const std::string& model, const std::string& data) {
    const std::vector<std::string> args{"abm",         "filter", "--model", model,  "--data",    data,
                                        "--method",    "csmc",   "--reps",  "4",    "--particles", "128",
                                        "--seed",      "13",     "--threads", "1"};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return code == 0 ? out.str() : std::string();
}

void determinism(const OutbreakData& d) {
    const auto dir = std::filesystem::temp_directory_path() / "abm_acceptance";
    std::filesystem::create_directories(dir);
    const std::string model = (dir / "model.json").string();
    const std::string data = (dir / "data.json").string();
    write_text(model, model_to_json(d.doc).dump());
    write_text(data, data_to_json(DataDoc{d.y, {}}).dump());
    const std::string a = run_filter_cli(model, data);
    const std::string b = run_filter_cli(model, data);
    report(13, "filter determinism", !a.empty() && a == b,
           fmt("two runs of `filter --method csmc --reps 4 --threads 1` on the outbreak data: %zu bytes, %s", a.size(),
               a == b ? "identical" : "different"));
}

}  // namespace

int main() {
    poisson_binomial_exactness();
    thinning_identity();
    condber_correctness();
    smc_unbiasedness();
    weight_telescoping();
    const OutbreakData d = outbreak();
    const bool constraint = variance_pattern(d);
    perturbed_ess(d);
    report(8, "observational constraint", constraint,
           constraint ? "every APF and cSMC particle satisfied I(x_t) >= y_t in the 200 variance runs"
                      : "some APF or cSMC particle had I(x_t) < y_t in the variance runs");
    bif_fidelity();
    lemma_bounds();
    pmmh_correctness();
    gibbs_invariance();
    determinism(d);
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
