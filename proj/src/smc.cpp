#include "abm/smc.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "abm/distributions.hpp"

namespace abm {

double ess(std::span<const double> weights) {
    double total = 0.0, squares = 0.0;
    for (double w : weights) {
        total += w;
        squares += w * w;
    }
    if (!(total > 0.0)) return 0.0;
    return total * total / squares;
}

double ess_from_log_weights(std::span<const double> log_weights) {
    std::vector<double> w;
    if (normalize_log_weights(log_weights, w) == neg_inf) return 0.0;
    return ess(w);
}

std::vector<std::size_t> multinomial_resample(Rng& rng, std::span<const double> weights,
                                              std::size_t count) {
    if (weights.empty()) throw std::invalid_argument("resampling needs at least one weight");
    std::vector<double> cumulative(weights.size());
    double running = 0.0;
    for (std::size_t p = 0; p < weights.size(); ++p) {
        if (!(weights[p] >= 0.0)) throw std::invalid_argument("resampling weights must be non-negative");
        running += weights[p];
        cumulative[p] = running;
    }
    if (!(running > 0.0)) throw std::invalid_argument("resampling weights are all zero");
    std::vector<std::size_t> out(count);
    for (std::size_t p = 0; p < count; ++p) {
        const double u = uniform01(rng) * running;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), weights.size() - 1);
        while (weights[k] == 0.0 && k > 0) --k;  // rounding can land on a zero-weight tail
        out[p] = k;
    }
    return out;
}

void count_log_pmf(std::span<const double> alpha, CountApprox approx, std::vector<double>& out) {
    if (approx == CountApprox::exact) {
        poibin_log_pmf(alpha, out);
        return;
    }
    double shift = 0.0, var = 0.0;
    std::size_t ones = 0, positive = 0;
    for (double a : alpha) {
        shift += a * a;
        var += a * (1.0 - a);
        ones += a >= 1.0;
        positive += a > 0.0;
    }
    transpoi_log_pmf(shift, var, alpha.size(), out);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (i < ones || i > positive) out[i] = neg_inf;
    const double norm = log_sum_exp(out);
    for (double& v : out) v -= norm;
}

std::size_t BifTable::cells() const {
    if (kind == Kind::sir) return (num_agents + 1) * (num_agents + 1);
    std::size_t c = 1;
    for (std::size_t d : dims) c *= d;
    return c;
}

double BifTable::log_at(std::size_t t, std::size_t s, std::size_t i) const {
    if (t == horizon()) return log_psi[t][i];
    if (s + i > num_agents) return neg_inf;
    return log_psi[t][s * (num_agents + 1) + i];
}

namespace {

void check_observations(std::span<const int> y) {
    if (y.empty()) throw std::invalid_argument("need at least one observation");
    for (int v : y)
        if (v < 0) throw std::invalid_argument("observations must be non-negative");
}

// In-place log-space contraction of the trailing dimension:
// out[j] = log sum_k exp(kernel[k] + in[k * stride + j]), j < stride.
void contract_last(std::span<const double> in, std::size_t stride, std::span<const double> kernel,
                   std::vector<double>& out) {
    out.assign(stride, neg_inf);
    for (std::size_t j = 0; j < stride; ++j) {
        double peak = neg_inf;
        for (std::size_t k = 0; k < kernel.size(); ++k) peak = std::max(peak, kernel[k] + in[k * stride + j]);
        if (peak == neg_inf) continue;
        double acc = 0.0;
        for (std::size_t k = 0; k < kernel.size(); ++k) {
            const double v = kernel[k] + in[k * stride + j];
            if (v != neg_inf) acc += std::exp(v - peak);
        }
        out[j] = peak + std::log(acc);
    }
}

}  // namespace

BifTable bif_sis_clustered(std::span<const int> y, const AgentRates& rates, double rho,
                           const Clusters& clusters, CountApprox approx) {
    check_observations(y);
    const std::size_t n_agents = rates.size();
    std::size_t covered = 0;
    for (const auto& m : clusters.members) covered += m.size();
    if (clusters.count() == 0 || covered != n_agents || clusters.lambda_bar.size() != clusters.count() ||
        clusters.gamma_bar.size() != clusters.count())
        throw std::invalid_argument("cluster sizes inconsistent with N");

    BifTable out;
    out.kind = BifTable::Kind::sis;
    out.num_agents = n_agents;
    out.cluster_members = clusters.members;
    const std::size_t k_count = clusters.count();
    out.dims.resize(k_count);
    for (std::size_t k = 0; k < k_count; ++k) out.dims[k] = clusters.size(k) + 1;
    const std::size_t cells = out.cells();
    const std::size_t horizon = y.size() - 1;

    std::vector<std::size_t> stride(k_count, 1);
    for (std::size_t k = 1; k < k_count; ++k) stride[k] = stride[k - 1] * out.dims[k - 1];
    std::vector<std::size_t> digits(k_count);
    auto decode = [&](std::size_t cell) {
        std::size_t total = 0;
        for (std::size_t k = 0; k < k_count; ++k) {
            digits[k] = cell % out.dims[k];
            cell /= out.dims[k];
            total += digits[k];
        }
        return total;
    };

    out.log_psi.assign(horizon + 1, std::vector<double>(cells, neg_inf));
    for (std::size_t c = 0; c < cells; ++c) out.log_psi[horizon][c] = obs_logpmf(y[horizon], decode(c), rho);

    std::vector<std::vector<double>> kernels(k_count);
    std::vector<double> buf_a, buf_b;
    for (std::size_t t = horizon; t-- > 0;) {
        const std::vector<double>& next = out.log_psi[t + 1];
        for (std::size_t c = 0; c < cells; ++c) {
            const std::size_t infected = decode(c);
            const double g = obs_logpmf(y[t], infected, rho);
            if (g == neg_inf) continue;
            const double frac = static_cast<double>(infected) / static_cast<double>(n_agents);
            for (std::size_t k = 0; k < k_count; ++k) {
                const long ik = static_cast<long>(digits[k]);
                const long nk = static_cast<long>(clusters.size(k));
                const double p_inf = std::min(1.0, clusters.lambda_bar[k] * frac);
                if (approx == CountApprox::exact)
                    sumbin_log_pmf(nk - ik, p_inf, ik, 1.0 - clusters.gamma_bar[k], kernels[k]);
                else
                    transpoi_sumbin_log_pmf(nk - ik, p_inf, ik, 1.0 - clusters.gamma_bar[k], kernels[k]);
            }
            // Contract the most significant cluster first so every stride stays contiguous.
            std::span<const double> current = next;
            for (std::size_t k = k_count; k-- > 0;) {
                contract_last(current, stride[k], kernels[k], buf_a);
                std::swap(buf_a, buf_b);
                current = buf_b;
            }
            out.log_psi[t][c] = g + current[0];
        }
    }
    return out;
}

BifTable bif_sis(std::span<const int> y, const AgentRates& rates, double rho, CountApprox approx) {
    Clusters one;
    one.assignment.assign(rates.size(), 0);
    one.members.resize(1);
    one.members[0].resize(rates.size());
    std::iota(one.members[0].begin(), one.members[0].end(), std::size_t{0});
    one.lambda_bar = {rates.lambda_bar};
    one.gamma_bar = {rates.gamma_bar};
    return bif_sis_clustered(y, rates, rho, one, approx);
}

BifTable bif_sir(std::span<const int> y, const AgentRates& rates, double rho) {
    check_observations(y);
    const std::size_t n_agents = rates.size();
    const std::size_t side = n_agents + 1;
    const std::size_t horizon = y.size() - 1;
    BifTable out;
    out.kind = BifTable::Kind::sir;
    out.num_agents = n_agents;
    out.dims = {side, side};
    out.log_psi.assign(horizon + 1, std::vector<double>(side * side, neg_inf));
    out.log_psi[horizon].assign(side, neg_inf);
    for (std::size_t i = 0; i <= n_agents; ++i) out.log_psi[horizon][i] = obs_logpmf(y[horizon], i, rho);
    if (horizon == 0) return out;

    // recover[i][r] = log Bin(r; i, gamma_bar)
    std::vector<std::vector<double>> recover(side);
    for (std::size_t i = 0; i <= n_agents; ++i) {
        recover[i].resize(i + 1);
        for (std::size_t r = 0; r <= i; ++r)
            recover[i][r] = log_binom_pmf(static_cast<long>(r), static_cast<long>(i), rates.gamma_bar);
    }
    std::vector<double> kernel, stay, terms;
    for (std::size_t t = horizon; t-- > 0;) {
        for (std::size_t s = 0; s <= n_agents; ++s) {
            for (std::size_t i = 0; s + i <= n_agents; ++i) {
                const double g = obs_logpmf(y[t], i, rho);
                if (g == neg_inf) continue;
                const double p_inf = std::min(1.0, rates.lambda_bar * static_cast<double>(i) / static_cast<double>(n_agents));
                double expect;
                if (t + 1 == horizon) {
                    sumbin_log_pmf(static_cast<long>(s), p_inf, static_cast<long>(i), 1.0 - rates.gamma_bar, kernel);
                    terms.resize(kernel.size());
                    for (std::size_t j = 0; j < kernel.size(); ++j) terms[j] = kernel[j] + out.log_psi[horizon][j];
                    expect = log_sum_exp(terms);
                } else {
                    stay.resize(s + 1);
                    for (std::size_t s2 = 0; s2 <= s; ++s2)
                        stay[s2] = log_binom_pmf(static_cast<long>(s2), static_cast<long>(s), 1.0 - p_inf);
                    terms.clear();
                    for (std::size_t s2 = 0; s2 <= s; ++s2) {
                        if (stay[s2] == neg_inf) continue;
                        for (std::size_t r = 0; r <= i; ++r) {
                            const double v = stay[s2] + recover[i][r] +
                                             out.log_psi[t + 1][s2 * side + (s - s2 + i - r)];
                            if (v != neg_inf) terms.push_back(v);
                        }
                    }
                    expect = log_sum_exp(terms);
                }
                out.log_psi[t][s * side + i] = g + expect;
            }
        }
    }
    return out;
}

}  // namespace abm
