#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "abm/format.hpp"
#include "abm/numeric.hpp"
#include "abm/rng.hpp"
#include "abm/sir_model.hpp"
#include "abm/sis_model.hpp"
#include "abm/state.hpp"

namespace abm {

enum class CountApprox { exact, transpoi };

// 1 / sum W^2 for normalized weights. Returns 0 when every weight is zero (collapse).
double ess(std::span<const double> weights);
double ess_from_log_weights(std::span<const double> log_weights);

std::vector<std::size_t> multinomial_resample(Rng& rng, std::span<const double> weights,
                                              std::size_t count);

struct SmcOptions {
    std::size_t particles = 128;
    std::uint64_t seed = 0;
    int threads = 1;
    // Count factors inside APF/cSMC proposals: exact PoiBin or the translated Poisson surrogate.
    // The surrogate makes the estimator approximate.
    CountApprox approx = CountApprox::exact;
    // Without resampling every particle keeps its own lineage and the estimator becomes the
    // plain importance-sampling average of the path weights.
    bool resample = true;
    // cSMC-SIR only: divide by psi_t(s, i) as in the algorithm box instead of the count twist the
    // proposal actually applies. Biased; kept so the discrepancy can be demonstrated.
    bool literal_sir_weights = false;
};

template <class State>
struct ParticleSystem {
    std::vector<std::vector<State>> states;           // [t][p]
    std::vector<std::vector<double>> log_weights;     // [t][p], the weights normalized into W_t
    std::vector<std::vector<std::size_t>> ancestors;  // [t][p]: index at time t of the parent of particle p at t+1
    std::vector<double> final_log_weights;            // weights attached to the time-T particles
    std::vector<double> ess;
    std::vector<double> log_increments;
    double log_likelihood = neg_inf;
    bool collapsed = false;
    int collapse_time = -1;

    std::size_t num_particles() const { return states.empty() ? 0 : states.front().size(); }
    std::size_t steps() const { return states.size(); }
};

using SisSystem = ParticleSystem<PopulationState>;
using SirSystem = ParticleSystem<SirState>;

template <class State>
struct WeightedPaths {
    std::vector<std::vector<State>> paths;  // [p][t]
    std::vector<double> weights;            // normalized
};

template <class State>
WeightedPaths<State> trace_ancestry(const ParticleSystem<State>& sys) {
    WeightedPaths<State> out;
    const std::size_t steps = sys.steps();
    const std::size_t count = sys.num_particles();
    if (steps == 0) return out;
    out.paths.assign(count, std::vector<State>(steps));
    for (std::size_t p = 0; p < count; ++p) {
        std::size_t b = p;
        for (std::size_t t = steps; t-- > 0;) {
            out.paths[p][t] = sys.states[t][b];
            if (t > 0) b = sys.ancestors[t - 1][b];
        }
    }
    normalize_log_weights(sys.final_log_weights, out.weights);
    return out;
}

// Rows: t, ess, log_incremental_likelihood, collapse_flag.
template <class State>
void write_diagnostics_csv(std::ostream& os, const ParticleSystem<State>& sys, bool header = true) {
    if (header) os << "t,ess,log_incremental_likelihood,collapse_flag\n";
    for (std::size_t t = 0; t < sys.ess.size(); ++t) {
        const bool flag = sys.collapsed && static_cast<int>(t) >= sys.collapse_time;
        os << t << ',' << format_double(sys.ess[t]) << ',' << format_double(sys.log_increments[t]) << ','
           << (flag ? 1 : 0) << '\n';
    }
}

// Approximate backward information filter, log space. SIS tables index cluster count
// tuples (mixed radix, cluster 0 least significant; one cluster for the plain filter).
// SIR tables index (s, i) as s * (N+1) + i, except the terminal slice which indexes i.
struct BifTable {
    enum class Kind { sis, sir };

    Kind kind = Kind::sis;
    std::size_t num_agents = 0;
    std::vector<std::size_t> dims;
    std::vector<std::vector<std::size_t>> cluster_members;
    std::vector<std::vector<double>> log_psi;

    std::size_t horizon() const { return log_psi.size() - 1; }
    std::size_t cells() const;
    // SIS with a single cluster.
    double log_at(std::size_t t, std::size_t i) const { return log_psi[t][i]; }
    // SIR; the terminal slice ignores s.
    double log_at(std::size_t t, std::size_t s, std::size_t i) const;
};

BifTable bif_sis(std::span<const int> y, const AgentRates& rates, double rho, CountApprox approx);
BifTable bif_sis_clustered(std::span<const int> y, const AgentRates& rates, double rho,
                           const Clusters& clusters, CountApprox approx);
BifTable bif_sir(std::span<const int> y, const AgentRates& rates, double rho);

SisSystem run_bpf(const Model& model, std::span<const int> y, const SisParams& theta,
                  const SmcOptions& opt);
SirSystem run_bpf_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                      const SmcOptions& opt);
SisSystem run_apf_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                      const SmcOptions& opt);
SirSystem run_apf_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                      const SmcOptions& opt);
SisSystem run_csmc_sis(const Model& model, std::span<const int> y, const SisParams& theta,
                       const BifTable& psi, const SmcOptions& opt);
SirSystem run_csmc_sir(const Model& model, std::span<const int> y, const SisParams& theta,
                       const BifTable& psi, const SmcOptions& opt);

// Count log pmf used by the proposals: exact PoiBin, or translated Poisson restricted to the
// attainable range [#{alpha = 1}, #{alpha > 0}] and renormalized.
void count_log_pmf(std::span<const double> alpha, CountApprox approx, std::vector<double>& out);

}  // namespace abm
