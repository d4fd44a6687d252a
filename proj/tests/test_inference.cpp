#include <cmath>
#include <map>
#include <random>

#include "abm/exact_oracle.hpp"
#include "abm/inference.hpp"
#include "brute_force.hpp"
#include "doctest.h"

using namespace abm;

namespace {

std::vector<double> random_alpha(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> a(n);
    for (double& v : a) v = u(gen);
    return a;
}

Model small_model(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> w;
    for (std::size_t k = 0; k < n; ++k) {
        w.push_back(1.0);
        w.push_back(normal(gen));
    }
    return Model{Covariates(n, 2, w), Network::complete(n)};
}

const SisParams theta2{{-0.5, 0.4}, {0.2, 0.8}, {-0.6, -0.3}, 0.7};

// Every trajectory of an N-agent SIS chain over T+1 steps, encoded as N(T+1) bits with time t
// in bits [tN, (t+1)N).
Trajectory decode(std::uint64_t code, std::size_t n, std::size_t steps) {
    Trajectory x;
    for (std::size_t t = 0; t < steps; ++t) x.push_back(PopulationState::from_code((code >> (t * n)) & ((1ULL << n) - 1), n));
    return x;
}

std::uint64_t encode(const Trajectory& x) {
    std::uint64_t code = 0;
    for (std::size_t t = 0; t < x.size(); ++t) code |= x[t].code() << (t * x[t].size());
    return code;
}

std::vector<double> smoothing_law(const GibbsContext& ctx, std::size_t n) {
    const std::size_t steps = ctx.y.size();
    std::vector<double> logs(std::size_t{1} << (n * steps));
    for (std::uint64_t c = 0; c < logs.size(); ++c) logs[c] = complete_data_log_density(decode(c, n, steps), ctx);
    std::vector<double> p;
    normalize_log_weights(logs, p);
    return p;
}

Trajectory draw(Rng& rng, const std::vector<double>& law, std::size_t n, std::size_t steps) {
    return decode(std::discrete_distribution<std::uint64_t>(law.begin(), law.end())(rng), n, steps);
}

// TV between the law and the histogram of one kernel application to exact draws.
template <class Kernel>
double invariance_tv(const std::vector<double>& law, std::size_t n, std::size_t steps, int draws, Kernel kernel) {
    Rng rng(99);
    std::vector<double> hist(law.size(), 0.0);
    for (int k = 0; k < draws; ++k) {
        Trajectory x = draw(rng, law, n, steps);
        kernel(rng, x);
        hist[encode(x)] += 1.0 / draws;
    }
    return brute::tv(hist, law);
}

}  // namespace

TEST_CASE("static marginal likelihood") {
    const std::vector<double> alpha{0.1, 0.2, 0.3};
    std::vector<double> pmf;
    poibin_log_pmf(alpha, pmf);
    CHECK(static_marginal_likelihood(2, alpha, 1.0, StaticMethod::exact) == doctest::Approx(pmf[2]));

    // Brute force over x and the binomial observation.
    double brute = 0.0;
    for (std::uint64_t c = 0; c < 8; ++c) {
        const auto x = PopulationState::from_code(c, 3);
        brute += brute::config_prob(c, alpha) * brute::binom(1, int(x.count()), 0.5);
    }
    CHECK(std::exp(static_marginal_likelihood(1, alpha, 0.5, StaticMethod::exact)) == doctest::Approx(brute).epsilon(1e-13));
    CHECK(brute == doctest::Approx(0.24725).epsilon(1e-12));

    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + gen() % 12;
        const auto a = random_alpha(gen, n);
        const double rho = std::uniform_real_distribution<double>(0.01, 1.0)(gen);
        const int y = static_cast<int>(gen() % (n + 1));
        const double e = static_marginal_likelihood(y, a, rho, StaticMethod::exact);
        const double t = static_marginal_likelihood(y, a, rho, StaticMethod::thinning);
        CHECK(std::fabs(std::exp(e) - std::exp(t)) <= 1e-12);
    }
    CHECK(static_marginal_likelihood(4, alpha, 0.5, StaticMethod::exact) == neg_inf);
    CHECK(static_marginal_likelihood(4, alpha, 0.5, StaticMethod::transpoi) == neg_inf);

    std::vector<double> big(500, 0.0);
    for (std::size_t n = 0; n < big.size(); ++n) big[n] = 0.3 + 0.4 * double(n) / 500.0;
    const double exact = static_marginal_likelihood(200, big, 0.8, StaticMethod::exact);
    const double approx = static_marginal_likelihood(200, big, 0.8, StaticMethod::transpoi);
    CHECK(std::fabs(exact - approx) < 0.05);
}

TEST_CASE("naive and alive estimators") {
    const std::vector<double> alpha{0.2, 0.5, 0.7, 0.4};
    {
        Rng a(3), b(3);
        const double est = static_naive_mc(a, 0, alpha, 1.0, 50);
        int zeros = 0;
        for (int p = 0; p < 50; ++p) {
            PopulationState x(4);
            for (std::size_t n = 0; n < 4; ++n) x.set(n, bernoulli(b, alpha[n]));
            zeros += x.count() == 0;
        }
        CHECK(est == doctest::Approx(zeros / 50.0));
    }
    Rng rng(5);
    CHECK(static_naive_mc(rng, 5, alpha, 0.5, 10) == 0.0);

    const int y = 3;
    const double rho = 0.6;
    const double exact = std::exp(static_marginal_likelihood(y, alpha, rho, StaticMethod::exact));
    const int reps = 100000;
    double s = 0, s2 = 0, a = 0, a2 = 0;
    for (int r = 0; r < reps; ++r) {
        const double v = static_naive_mc(rng, y, alpha, rho, 5);
        s += v;
        s2 += v * v;
        const double w = static_alive_estimator(rng, y, alpha, rho, 3).estimate;
        CHECK(w > 0.0);
        a += w;
        a2 += w * w;
    }
    const double m = s / reps, se = std::sqrt((s2 / reps - m * m) / reps);
    const double am = a / reps, ase = std::sqrt((a2 / reps - am * am) / reps);
    CHECK(std::fabs(m - exact) < 3 * se);
    CHECK(std::fabs(am - exact) < 3 * ase);

    const auto plain = static_alive_estimator(rng, 0, alpha, rho, 6);
    CHECK(plain.draws == 6);
    CHECK_THROWS_AS(static_alive_estimator(rng, 4, std::vector<double>{0.5, 0.0, 0.5, 0.5}, rho, 3), InfeasibleObservation);
}

TEST_CASE("static posterior sampling") {
    Rng rng(8);
    const std::vector<double> alpha{0.3, 0.6, 0.45, 0.8};
    for (int k = 0; k < 50; ++k) CHECK(static_posterior_sample(rng, 2, alpha, 1.0, StaticMethod::exact).count() == 2);
    CHECK(static_posterior_sample(rng, 4, alpha, 0.5, StaticMethod::exact).count() == 4);

    const int y = 1;
    const double rho = 0.55;
    std::vector<double> exact(16);
    for (std::uint64_t c = 0; c < 16; ++c)
        exact[c] = brute::config_prob(c, alpha) * brute::binom(y, brute::popcount(c), rho);
    double z = 0;
    for (double v : exact) z += v;
    for (double& v : exact) v /= z;
    std::vector<double> hist(16, 0.0);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) hist[static_posterior_sample(rng, y, alpha, rho, StaticMethod::exact).code()] += 1.0 / draws;
    CHECK(brute::tv(hist, exact) < 0.02);
    CHECK_THROWS_AS(static_posterior_sample(rng, 2, std::vector<double>{0.0, 0.0, 0.5}, rho, StaticMethod::exact),
                    InfeasibleObservation);
}

TEST_CASE("parameter packing and prior") {
    const auto u = pack_unconstrained(theta2);
    CHECK(u.size() == 7);
    const auto back = unpack_unconstrained(u, 2);
    CHECK(back.beta_lambda == theta2.beta_lambda);
    CHECK(back.rho == doctest::Approx(0.7));
    CHECK(sis_parameter_names(2).back() == "rho");

    // Normal(0,1) at 0 plus the logistic density at 0, which is 1/4.
    const Prior prior = Prior::isotropic(1, 0.0, 1.0);
    CHECK(prior.log_density(std::vector<double>{0.0, 0.0}) == doctest::Approx(-0.5 * std::log(2 * M_PI) + std::log(0.25)));
    CHECK_THROWS(Prior::isotropic(2, 0.0, 0.0));
}

TEST_CASE("random walk proposal") {
    Rng rng(2);
    const std::vector<double> u{0.3, -1.0, 2.0};
    CHECK(rw_propose(rng, u, 0.0) == u);
    const int reps = 100000;
    const double sd = 0.2;
    std::vector<double> s(3, 0.0), s2(3, 0.0);
    for (int r = 0; r < reps; ++r) {
        const auto v = rw_propose(rng, u, sd);
        for (int k = 0; k < 3; ++k) {
            s[k] += v[k] - u[k];
            s2[k] += (v[k] - u[k]) * (v[k] - u[k]);
        }
    }
    for (int k = 0; k < 3; ++k) {
        const double var = s2[k] / reps - (s[k] / reps) * (s[k] / reps);
        // The sample variance of a Normal has standard error sd^2 sqrt(2 / n).
        CHECK(std::fabs(var - sd * sd) < 3 * sd * sd * std::sqrt(2.0 / reps));
    }
}

TEST_CASE("pmmh rejects impossible proposals") {
    Rng rng(4);
    const LikelihoodFn half_plane = [](std::span<const double> u, std::uint64_t) {
        LikelihoodEstimate e;
        e.log_lik = u[0] > 0.0 ? neg_inf : 0.0;
        return e;
    };
    const auto chain = run_pmmh(rng, Prior::isotropic(1, 0.0, 1.0), {-0.1, 0.0}, half_plane, 5000, 0.5);
    for (const auto& s : chain.steps) CHECK(s.u[0] <= 0.0);
    CHECK(chain.accepted > 0);
    const auto empty = run_pmmh(rng, Prior::isotropic(1, 0.0, 1.0), {-0.1, 0.0}, half_plane, 0, 0.5);
    CHECK(empty.steps.empty());
    CHECK(empty.current_u()[0] == -0.1);
}

TEST_CASE("pmmh targets the grid posterior of the static model") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> normal(1.0, 1.0);
    std::vector<double> w(12);
    for (double& v : w) v = normal(gen);
    const Covariates cov(12, 1, w);
    const int y = 5;
    const Prior prior = Prior::isotropic(1, 0.0, 1.0);
    const auto exact = static_likelihood(cov, y, StaticMethod::exact);

    // Posterior means of beta and rho on a fine grid over (beta, logit rho).
    double z = 0, mb = 0, mr = 0;
    for (int i = 0; i < 400; ++i)
        for (int j = 0; j < 400; ++j) {
            const std::vector<double> u{-6.0 + 12.0 * (i + 0.5) / 400, -10.0 + 20.0 * (j + 0.5) / 400};
            const double p = std::exp(exact(u, 0).log_lik + prior.log_density(u));
            z += p;
            mb += p * u[0];
            mr += p * logistic(u[1]);
        }
    mb /= z;
    mr /= z;

    Rng rng(11);
    const std::size_t iters = 200000;
    const auto chain = run_pmmh(rng, prior, {0.0, 0.0}, exact, iters, 0.8);
    // Batch means for the Monte Carlo standard error.
    auto check_mean = [&](auto f, double target) {
        const std::size_t batches = 50, len = iters / batches;
        std::vector<double> means(batches, 0.0);
        for (std::size_t k = 0; k < iters; ++k) means[k / len] += f(chain.steps[k].u) / double(len);
        double m = 0, v = 0;
        for (double b : means) m += b / batches;
        for (double b : means) v += (b - m) * (b - m) / (batches - 1);
        CHECK(std::fabs(m - target) < 3 * std::sqrt(v / batches));
    };
    check_mean([](const std::vector<double>& u) { return u[0]; }, mb);
    check_mean([](const std::vector<double>& u) { return logistic(u[1]); }, mr);

    // The naive estimator is unbiased, so the pseudo-marginal chain has the same target.
    const auto noisy = static_naive_likelihood(cov, y, 20, 7);
    Rng rng2(12);
    const auto pm = run_pmmh(rng2, prior, {0.0, 0.0}, noisy, iters, 0.8);
    double m = 0;
    for (const auto& s : pm.steps) m += logistic(s.u[1]) / double(iters);
    CHECK(std::fabs(m - mr) < 0.03);
}

TEST_CASE("naive estimator variance on the static experiment's design") {
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> normal(4.0, 1.0);
    std::vector<double> alpha(1000);
    for (double& a : alpha) a = logistic(0.3 * normal(gen));
    Rng rng(5);
    PopulationState x(alpha.size());
    for (std::size_t n = 0; n < alpha.size(); ++n) x.set(n, bernoulli(rng, alpha[n]));
    const int y = std::binomial_distribution<int>(int(x.count()), 0.8)(rng);

    // Delta method: Var[log p_hat] ~ (E[g^2] / p^2 - 1) / P, with E[g^2] from the PoiBin pmf.
    std::vector<double> counts;
    poibin_log_pmf(alpha, counts);
    const double log_p = static_marginal_likelihood(y, alpha, 0.8, StaticMethod::exact);
    double second = 0.0;
    for (std::size_t i = std::size_t(y); i < counts.size(); ++i)
        second += std::exp(counts[i] + 2.0 * log_binom_pmf(y, long(i), 0.8) - 2.0 * log_p);
    const std::size_t particles = 20;
    const double predicted = (second - 1.0) / double(particles);

    const int reps = 4000;
    double s = 0, s2 = 0;
    for (int r = 0; r < reps; ++r) {
        const double v = std::log(static_naive_mc(rng, y, alpha, 0.8, particles));
        s += v;
        s2 += v * v;
    }
    const double var = s2 / reps - (s / reps) * (s / reps);
    MESSAGE("y = " << y << ", variance of the P=20 log estimate " << var << ", delta method " << predicted);
    CHECK(var == doctest::Approx(predicted).epsilon(0.25));
}

TEST_CASE("single-site and swap conditionals") {
    const Model m = small_model(3, 4);
    const std::vector<int> y{1, 3, 1};
    const GibbsContext ctx(m, y, theta2);
    Rng rng(1);
    Trajectory x = saturated_trajectory(3, 3);
    x[1].set(2, false);
    for (int k = 0; k < 100; ++k) {
        x[1].set(2, false);
        gibbs_single_site(rng, x, ctx, 1, 2);
        CHECK(x[1][2]);
    }
    CHECK_FALSE(gibbs_swap(rng, x, ctx, 1));  // all ones

    // Full conditional against the ratio of complete-data densities.
    Trajectory z = saturated_trajectory(3, 3);
    z[0].set(0, false);
    z[2].set(1, false);
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t n = 0; n < 3; ++n) {
            Trajectory one = z, zero = z;
            one[t].set(n, true);
            zero[t].set(n, false);
            const double l1 = complete_data_log_density(one, ctx), l0 = complete_data_log_density(zero, ctx);
            const double p1 = 1.0 / (1.0 + std::exp(l0 - l1));
            int hits = 0;
            const int draws = 40000;
            for (int k = 0; k < draws; ++k) {
                Trajectory w = z;
                gibbs_single_site(rng, w, ctx, t, n);
                hits += w[t][n];
            }
            CHECK(std::fabs(hits / double(draws) - p1) < 4 * std::sqrt(p1 * (1 - p1) / draws) + 1e-12);
        }

    // Exchangeable agents at a single time: every swap is accepted.
    const Model flat{Covariates(4, 1, std::vector<double>(4, 1.0)), Network::complete(4)};
    const SisParams flat_theta{{0.1}, {0.2}, {0.3}, 0.5};
    const std::vector<int> single{2};
    const GibbsContext flat_ctx(flat, single, flat_theta);
    Trajectory s{PopulationState::from_code(0b0011, 4)};
    for (int k = 0; k < 50; ++k) CHECK(gibbs_swap(rng, s, flat_ctx, 0));
}

TEST_CASE("gibbs kernels leave the smoothing law invariant") {
    const std::size_t n = 3, steps = 3;
    const Model m = small_model(n, 6);
    const std::vector<int> y{1, 2, 1};
    const GibbsContext ctx(m, y, theta2);
    const auto law = smoothing_law(ctx, n);
    const int draws = 100000;

    CHECK(invariance_tv(law, n, steps, draws, [&](Rng& r, Trajectory& x) {
              for (std::size_t t = 0; t < steps; ++t)
                  for (std::size_t a = 0; a < n; ++a) gibbs_single_site(r, x, ctx, t, a);
          }) < 0.05);
    CHECK(invariance_tv(law, n, steps, draws, [&](Rng& r, Trajectory& x) {
              for (std::size_t t = 0; t < steps; ++t) gibbs_swap(r, x, ctx, t);
          }) < 0.05);
    const std::vector<std::size_t> pair{0, 2};
    CHECK(invariance_tv(law, n, steps, draws, [&](Rng& r, Trajectory& x) { gibbs_block(r, x, ctx, pair); }) < 0.05);

    // A block of every agent is an exact draw whatever the starting trajectory.
    Rng rng(21);
    const std::vector<std::size_t> all{0, 1, 2};
    std::vector<double> hist(law.size(), 0.0);
    for (int k = 0; k < draws; ++k) {
        Trajectory x = saturated_trajectory(n, steps);
        gibbs_block(rng, x, ctx, all);
        hist[encode(x)] += 1.0 / draws;
    }
    CHECK(brute::tv(hist, law) < 0.05);
    // Smoothing marginals agree with the oracle.
    const auto oracle = exact_smoothing_marginals_sis(m, y, theta2);
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<double> marg(8, 0.0);
        for (std::uint64_t c = 0; c < law.size(); ++c) marg[(c >> (t * n)) & 7] += law[c];
        for (std::size_t s = 0; s < 8; ++s) CHECK(marg[s] == doctest::Approx(oracle[t][s]).epsilon(1e-10));
    }

    Trajectory x = saturated_trajectory(n, steps);
    gibbs_block(rng, x, ctx, std::vector<std::size_t>{});
    CHECK(x == saturated_trajectory(n, steps));
    CHECK_THROWS(gibbs_block(rng, x, ctx, std::vector<std::size_t>(11, 0)));
}

TEST_CASE("gibbs chain with fixed parameters reaches the smoothing law") {
    const std::size_t n = 3;
    const Model m = small_model(n, 6);
    const std::vector<int> y{1, 2, 1};
    const auto oracle = exact_smoothing_marginals_sis(m, y, theta2);
    const Prior prior = Prior::isotropic(6, 0.0, 3.0);
    for (ScanKind scan : {ScanKind::single_site, ScanKind::block}) {
        GibbsOptions opt;
        opt.iterations = 60000;
        opt.step_sd = 0.0;
        opt.scan = scan;
        opt.block_size = 2;
        Rng rng(31);
        const auto res = run_gibbs(rng, m, y, prior, pack_unconstrained(theta2), saturated_trajectory(n, 3), opt);
        CHECK(res.chain.accepted == opt.iterations);
        std::vector<double> hist(8, 0.0);
        for (const auto& s : res.chain.terminal) hist[s.code()] += 1.0 / double(opt.iterations);
        CHECK(brute::tv(hist, oracle[2]) < 0.05);
    }

    GibbsOptions none;
    none.iterations = 0;
    Rng rng(1);
    const auto res = run_gibbs(rng, m, y, prior, pack_unconstrained(theta2), saturated_trajectory(n, 3), none);
    CHECK(res.chain.steps.empty());
    CHECK(res.trajectory == saturated_trajectory(n, 3));
}

TEST_CASE("posterior predictive") {
    const Model m = small_model(10, 8);
    Rng rng(3);
    SisParams frozen{{0.0, 0.0}, {-40.0, 0.0}, {-40.0, 0.0}, 1.0};  // infected agents never recover
    PopulationState all(10);
    for (std::size_t n = 0; n < 10; ++n) all.set(n, true);
    const std::vector<SisParams> thetas(5, frozen);
    const std::vector<PopulationState> states(5, all);
    for (const auto& path : posterior_predictive(rng, m, thetas, states, 3, 8)) {
        CHECK(path.size() == 5);
        for (int v : path) CHECK(v == 10);
    }
    for (const auto& path : posterior_predictive(rng, m, thetas, states, 8, 8)) CHECK(path.empty());

    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({7.0}, 0.975) == 7.0);
}

TEST_CASE("predictive bands cover held-out observations") {
    const std::size_t n = 20;
    const SisParams theta{{-1.0, 0.0}, {0.4, 0.3}, {-1.2, 0.2}, 0.8};
    int covered = 0, total = 0;
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
        const Model m = small_model(n, 100 + rep);
        Rng sim(rep);
        const auto data = simulate(sim, theta, m.covariates, m.network, 30);
        const std::vector<int> head(data.y.begin(), data.y.begin() + 21);
        const auto rates = agent_rates(theta, m.covariates);
        SmcOptions opt;
        opt.particles = 256;
        opt.seed = rep;
        const auto sys = run_csmc_sis(m, head, theta, bif_sis(head, rates, theta.rho, CountApprox::exact), opt);
        REQUIRE_FALSE(sys.collapsed);
        std::vector<double> w;
        normalize_log_weights(sys.final_log_weights, w);
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        Rng rng(1000 + rep);
        std::vector<PopulationState> states;
        for (int k = 0; k < 500; ++k) states.push_back(sys.states.back()[pick(rng)]);
        const std::vector<SisParams> thetas(states.size(), theta);
        const auto bands = predictive_quantiles(posterior_predictive(rng, m, thetas, states, 20, 30));
        for (std::size_t k = 0; k < bands.median.size(); ++k) {
            CHECK(bands.lower[k] <= bands.median[k]);
            CHECK(bands.median[k] <= bands.upper[k]);
            const int held = data.y[21 + k];
            covered += bands.lower[k] <= held && held <= bands.upper[k];
            ++total;
        }
    }
    MESSAGE("coverage " << covered << " / " << total);
    CHECK(covered >= 0.8 * total);
}
