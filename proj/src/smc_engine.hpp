#pragma once

// Shared particle loops. The propagate-then-weight loop serves the bootstrap and controlled
// filters; the look-ahead loop serves the fully adapted auxiliary filters.

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "abm/distributions.hpp"
#include "abm/numeric.hpp"
#include "abm/parallel.hpp"
#include "abm/rng.hpp"
#include "abm/smc.hpp"

namespace abm::detail {

// Children of each distinct ancestor, so per-ancestor work (rate vectors, q-tables) is done
// once. Both lists are in increasing index order, which keeps runs reproducible.
struct Offspring {
    std::vector<std::size_t> parents;
    std::vector<std::size_t> start;  // children of parents[k] are order[start[k] .. start[k+1])
    std::vector<std::size_t> order;

    void build(const std::vector<std::size_t>& ancestors, std::size_t num_parents) {
        std::vector<std::size_t> counts(num_parents + 1, 0);
        for (std::size_t a : ancestors) ++counts[a + 1];
        std::partial_sum(counts.begin(), counts.end(), counts.begin());
        order.assign(ancestors.size(), 0);
        std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
        for (std::size_t p = 0; p < ancestors.size(); ++p) order[fill[ancestors[p]]++] = p;
        parents.clear();
        start.clear();
        for (std::size_t a = 0; a < num_parents; ++a) {
            if (counts[a + 1] == counts[a]) continue;
            parents.push_back(a);
            start.push_back(counts[a]);
        }
        start.push_back(ancestors.size());
    }
};

template <class State>
void init_system(ParticleSystem<State>& sys, std::size_t steps, std::size_t count) {
    sys.states.assign(steps, {});
    sys.log_weights.assign(steps, {});
    sys.ancestors.assign(steps > 0 ? steps - 1 : 0, {});
    sys.ess.clear();
    sys.log_increments.clear();
    sys.final_log_weights.assign(count, 0.0);
    sys.log_likelihood = 0.0;
    sys.collapsed = false;
    sys.collapse_time = -1;
}

template <class State>
void truncate_after_collapse(ParticleSystem<State>& sys, std::size_t t) {
    sys.collapsed = true;
    sys.collapse_time = static_cast<int>(t);
    sys.log_likelihood = neg_inf;
    sys.states.resize(t + 1);
    sys.log_weights.resize(t + 1);
    sys.ancestors.resize(t);
}

// Tracks the estimator. With resampling the estimate is the product of per-step weight
// averages; without it, the average of the accumulated path weights.
class EstimatorTrack {
public:
    EstimatorTrack(std::size_t count, bool resample) : resample_(resample), path_(count, 0.0) {}

    // Returns false on collapse (every weight zero).
    bool add(std::span<const double> log_w, double& ess_out, double& increment_out) {
        if (resample_) {
            increment_out = log_mean_exp(log_w);
            ess_out = ess_from_log_weights(log_w);
            if (increment_out == neg_inf) return false;
            total_ += increment_out;
            return true;
        }
        for (std::size_t p = 0; p < path_.size(); ++p) path_[p] += log_w[p];
        const double now = log_mean_exp(path_);
        increment_out = now - previous_;
        previous_ = now;
        ess_out = ess_from_log_weights(path_);
        return now != neg_inf;
    }
    double estimate() const { return resample_ ? total_ : previous_; }
    const std::vector<double>& path_weights() const { return path_; }

private:
    bool resample_;
    double total_ = 0.0;
    double previous_ = 0.0;
    std::vector<double> path_;
};

inline std::vector<std::size_t> draw_ancestors(const SmcOptions& opt, std::size_t t,
                                               std::span<const double> log_w) {
    std::vector<std::size_t> out(log_w.size());
    if (!opt.resample) {
        std::iota(out.begin(), out.end(), std::size_t{0});
        return out;
    }
    std::vector<double> w;
    normalize_log_weights(log_w, w);
    Rng rng = make_stream(opt.seed, "resample", t);
    return multinomial_resample(rng, w, log_w.size());
}

// Strategy contract (propagate-then-weight):
//   State, Aux (per-particle data handed to children), Scratch (per-worker buffers)
//   void prepare_initial(Scratch&) const;
//   void initial(Scratch&, Rng&, State&, double& log_w, Aux&) const;
//   void prepare(size_t t, const State& parent, const Aux&, Scratch&) const;
//   void propagate(size_t t, const State& parent, const Aux&, Scratch&, Rng&, State&, double& log_w, Aux&) const;
template <class Strategy>
ParticleSystem<typename Strategy::State> run_propagate_weight(const Strategy& strategy,
                                                              std::size_t horizon,
                                                              const SmcOptions& opt) {
    using State = typename Strategy::State;
    using Aux = typename Strategy::Aux;
    using Scratch = typename Strategy::Scratch;
    const std::size_t count = opt.particles;
    if (count == 0) throw std::invalid_argument("particle count must be positive");

    ParticleSystem<State> sys;
    init_system(sys, horizon + 1, count);
    std::vector<Aux> aux(count), next_aux(count);
    std::vector<Scratch> scratch(worker_count(count, opt.threads));
    EstimatorTrack track(count, opt.resample);

    for (Scratch& local : scratch) strategy.prepare_initial(local);
    sys.states[0].resize(count);
    sys.log_weights[0].resize(count);
    parallel_for(count, opt.threads, [&](std::size_t w, std::size_t p) {
        Rng rng = make_stream(opt.seed, "particle", 0, p);
        strategy.initial(scratch[w], rng, sys.states[0][p], sys.log_weights[0][p], aux[p]);
    });

    for (std::size_t t = 0;; ++t) {
        double e = 0.0, inc = 0.0;
        const bool alive = track.add(sys.log_weights[t], e, inc);
        sys.ess.push_back(e);
        sys.log_increments.push_back(inc);
        if (!alive) {
            truncate_after_collapse(sys, t);
            return sys;
        }
        if (t == horizon) break;

        const std::size_t next = t + 1;
        sys.ancestors[t] = draw_ancestors(opt, next, sys.log_weights[t]);
        Offspring family;
        family.build(sys.ancestors[t], count);
        sys.states[next].resize(count);
        sys.log_weights[next].resize(count);
        parallel_for(family.parents.size(), opt.threads, [&](std::size_t w, std::size_t k) {
            const std::size_t a = family.parents[k];
            Scratch& local = scratch[w];
            strategy.prepare(next, sys.states[t][a], aux[a], local);
            for (std::size_t c = family.start[k]; c < family.start[k + 1]; ++c) {
                const std::size_t p = family.order[c];
                Rng rng = make_stream(opt.seed, "particle", next, p);
                strategy.propagate(next, sys.states[t][a], aux[a], local, rng, sys.states[next][p],
                                   sys.log_weights[next][p], next_aux[p]);
            }
        });
        std::swap(aux, next_aux);
    }
    sys.log_likelihood = track.estimate();
    sys.final_log_weights = opt.resample ? sys.log_weights[horizon] : track.path_weights();
    return sys;
}

// Draws an index from the categorical law proportional to exp(log_v).
inline std::size_t sample_log_categorical(Rng& rng, std::span<const double> cumulative) {
    const double u = uniform01(rng) * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cumulative.begin());
    if (k >= cumulative.size()) k = cumulative.size() - 1;
    // Skip zero-probability cells that upper_bound can land on only through rounding.
    while (k > 0 && cumulative[k] == cumulative[k - 1]) --k;
    return k;
}

inline void build_cumulative(std::span<const double> log_v, std::vector<double>& cumulative) {
    std::vector<double> probs;
    normalize_log_weights(log_v, probs);
    cumulative.resize(probs.size());
    std::partial_sum(probs.begin(), probs.end(), cumulative.begin());
}

// Contract for the look-ahead loop:
//   State; num_agents();
//   void initial_alpha(std::vector<double>&) const;
//   void alpha(const State& parent, std::vector<double>&) const;
//   State build(const State* parent, const std::vector<std::size_t>& positions) const;
//   y, rho
template <class Model>
ParticleSystem<typename Model::State> run_lookahead(const Model& m, std::span<const int> y,
                                                    double rho, const SmcOptions& opt) {
    using State = typename Model::State;
    const std::size_t count = opt.particles;
    if (count == 0) throw std::invalid_argument("particle count must be positive");
    const std::size_t n_agents = m.num_agents();
    const std::size_t horizon = y.size() - 1;

    struct Scratch {
        std::vector<double> alpha, cumulative;
        std::vector<std::size_t> positions;
        PmfTable table;
    };
    std::vector<Scratch> scratch(worker_count(count, opt.threads));
    auto predictive = [&](std::span<const double> alpha, int yt, std::vector<double>& log_v) {
        count_log_pmf(alpha, opt.approx, log_v);
        for (std::size_t i = 0; i < log_v.size(); ++i) log_v[i] += obs_logpmf(yt, i, rho);
        return log_sum_exp(log_v);
    };

    ParticleSystem<State> sys;
    init_system(sys, horizon + 1, count);
    EstimatorTrack track(count, opt.resample);

    {
        Scratch& s = scratch[0];
        m.initial_alpha(s.alpha);
        std::vector<double> log_v;
        const double log_w0 = predictive(s.alpha, y[0], log_v);
        sys.log_weights[0].assign(count, log_w0);
        sys.states[0].resize(count);
        if (log_w0 != neg_inf) {
            s.table.assign(s.alpha);
            build_cumulative(log_v, s.cumulative);
            const Scratch& shared = s;
            parallel_for(count, 1, [&](std::size_t, std::size_t p) {
                Rng rng = make_stream(opt.seed, "particle", 0, p);
                std::vector<std::size_t> positions;
                const std::size_t i = sample_log_categorical(rng, shared.cumulative);
                condber_sample_positions(rng, shared.alpha, i, shared.table, positions);
                sys.states[0][p] = m.build(nullptr, positions);
            });
        }
    }

    std::vector<std::vector<double>> log_v(count);
    for (std::size_t t = 0;; ++t) {
        double e = 0.0, inc = 0.0;
        const bool alive = track.add(sys.log_weights[t], e, inc);
        sys.ess.push_back(e);
        sys.log_increments.push_back(inc);
        if (!alive) {
            truncate_after_collapse(sys, t);
            return sys;
        }
        if (t == horizon) break;

        // Weights for step t+1 depend only on the time-t particles.
        const std::size_t next = t + 1;
        sys.log_weights[next].resize(count);
        parallel_for(count, opt.threads, [&](std::size_t w, std::size_t p) {
            Scratch& s = scratch[w];
            m.alpha(sys.states[t][p], s.alpha);
            sys.log_weights[next][p] = predictive(s.alpha, y[next], log_v[p]);
        });
        const auto& next_w = sys.log_weights[next];
        if (std::all_of(next_w.begin(), next_w.end(), [](double v) { return v == neg_inf; })) {
            // No particle can explain y_{t+1}; record the step and stop before resampling.
            track.add(next_w, e, inc);
            sys.ess.push_back(e);
            sys.log_increments.push_back(inc);
            sys.states[next] = sys.states[t];
            sys.ancestors[t].resize(count);
            std::iota(sys.ancestors[t].begin(), sys.ancestors[t].end(), std::size_t{0});
            truncate_after_collapse(sys, next);
            return sys;
        }
        sys.ancestors[t] = draw_ancestors(opt, next, sys.log_weights[next]);
        Offspring family;
        family.build(sys.ancestors[t], count);
        sys.states[next].resize(count);
        parallel_for(family.parents.size(), opt.threads, [&](std::size_t w, std::size_t k) {
            const std::size_t a = family.parents[k];
            if (sys.log_weights[next][a] == neg_inf) return;  // only reachable without resampling
            Scratch& s = scratch[w];
            m.alpha(sys.states[t][a], s.alpha);
            s.table.assign(s.alpha);
            build_cumulative(log_v[a], s.cumulative);
            for (std::size_t c = family.start[k]; c < family.start[k + 1]; ++c) {
                const std::size_t p = family.order[c];
                Rng rng = make_stream(opt.seed, "particle", next, p);
                const std::size_t i = sample_log_categorical(rng, s.cumulative);
                condber_sample_positions(rng, s.alpha, i, s.table, s.positions);
                sys.states[next][p] = m.build(&sys.states[t][a], s.positions);
            }
        });
        // Particles whose parent had zero predictive weight keep the parent's state so the
        // system stays well formed; their accumulated weight is already -inf.
        for (std::size_t p = 0; p < count; ++p)
            if (sys.states[next][p].size() != n_agents) sys.states[next][p] = sys.states[t][sys.ancestors[t][p]];
    }
    sys.log_likelihood = track.estimate();
    if (opt.resample) sys.final_log_weights.assign(count, 0.0);
    else sys.final_log_weights = track.path_weights();
    return sys;
}

}  // namespace abm::detail
