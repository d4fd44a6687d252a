#include "abm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "abm/exact_oracle.hpp"
#include "abm/format.hpp"
#include "abm/inference.hpp"
#include "abm/model_io.hpp"
#include "abm/parallel.hpp"
#include "abm/sir_model.hpp"
#include "abm/smc.hpp"
#include "json.hpp"

namespace abm {
namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// JSON config files. Top-level keys are global flags (without dashes); a nested object whose key
// is a subcommand name supplies that subcommand's flags.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        throw CLI::ConversionError("writing JSON config files is not supported");
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        try {
            j = json::parse(input);
        } catch (const json::parse_error& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config: top level must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const json& v) {
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
        if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
        if (v.is_number_float()) return format_double(v.get<double>());
        if (v.is_string()) return v.get<std::string>();
        throw CLI::ConversionError("config: unsupported value " + v.dump());
    }

    static void collect(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it->is_object()) {
                auto nested = parents;
                nested.push_back(it.key());
                collect(*it, nested, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = it.key();
            if (it->is_array()) {
                for (const auto& v : *it) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(*it));
            }
            items.push_back(std::move(item));
        }
    }
};

struct Global {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "-";
};

void emit(const Global& g, std::ostream& out, const std::string& text) {
    if (g.out.empty() || g.out == "-")
        out << text;
    else
        write_text(g.out, text);
}

template <class T>
T load_or_config(const std::string& path, const char* what, T (*loader)(const std::filesystem::path&)) {
    if (path.empty()) throw ConfigError(std::string("missing --") + what);
    try {
        return loader(path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

ModelDoc require_model(const std::string& path) { return load_or_config(path, "model", &load_model); }
DataDoc require_data(const std::string& path) { return load_or_config(path, "data", &load_data); }

// Parameter names on the natural scale, as used by --set and the surface axes.
std::vector<std::string> parameter_names(const ModelDoc& doc) {
    const std::size_t d = doc.model.covariates.cols;
    if (doc.kind != ModelKind::static_model) return sis_parameter_names(d);
    std::vector<std::string> names;
    for (std::size_t k = 0; k < d; ++k) names.push_back("beta_" + std::to_string(k));
    names.push_back("rho");
    return names;
}

double& parameter_ref(ModelDoc& doc, const std::string& name) {
    const auto names = parameter_names(doc);
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown parameter '" + name + "'");
    const std::size_t idx = static_cast<std::size_t>(it - names.begin());
    const std::size_t d = doc.model.covariates.cols;
    if (idx + 1 == names.size()) return doc.theta.rho;
    if (doc.kind == ModelKind::static_model) return doc.theta.beta0[idx];
    if (idx < d) return doc.theta.beta0[idx];
    if (idx < 2 * d) return doc.theta.beta_lambda[idx - d];
    return doc.theta.beta_gamma[idx - 2 * d];
}

void apply_overrides(ModelDoc& doc, const std::vector<std::string>& overrides) {
    for (const auto& s : overrides) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects name=value, got '" + s + "'");
        double value = 0.0;
        try {
            value = std::stod(s.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("--set: cannot parse value in '" + s + "'");
        }
        parameter_ref(doc, s.substr(0, eq)) = value;
    }
    if (doc.kind != ModelKind::static_model) {
        try {
            doc.theta.validate(doc.model.covariates.cols);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    } else if (!(doc.theta.rho > 0.0 && doc.theta.rho <= 1.0)) {
        throw ConfigError("rho must lie in (0,1]");
    }
}

void check_observations(const ModelDoc& doc, const DataDoc& data) {
    const int n = static_cast<int>(doc.model.num_agents());
    for (int v : data.y)
        if (v > n) throw ConfigError("observation " + std::to_string(v) + " exceeds the number of agents");
}

CountApprox parse_approx(const std::string& s) { return s == "transpoi" ? CountApprox::transpoi : CountApprox::exact; }

// ---- simulate ----

struct SimulateArgs {
    std::string model;
    int horizon = 90;
    bool no_states = false;
};

int cmd_simulate(const Global& g, const SimulateArgs& a, std::ostream& out) {
    const ModelDoc doc = require_model(a.model);
    if (a.horizon < 0) throw ConfigError("--horizon must be non-negative");
    Rng rng(g.seed);
    DataDoc data;
    switch (doc.kind) {
        case ModelKind::sis: {
            const auto traj = simulate(rng, doc.theta, doc.model.covariates, doc.model.network, a.horizon);
            data.y = traj.y;
            if (!a.no_states)
                for (const auto& x : traj.x) data.x_true.push_back(x.to_values());
            break;
        }
        case ModelKind::sir: {
            const auto traj = sir_simulate(rng, doc.theta, doc.model.covariates, doc.model.network, a.horizon);
            data.y = traj.y;
            if (!a.no_states)
                for (const auto& x : traj.x) data.x_true.push_back(x.to_values());
            break;
        }
        case ModelKind::static_model: {
            const std::size_t n = doc.model.num_agents();
            PopulationState x(n);
            for (std::size_t i = 0; i < n; ++i) {
                double eta = 0.0;
                for (std::size_t k = 0; k < doc.model.covariates.cols; ++k)
                    eta += doc.theta.beta0[k] * doc.model.covariates(i, k);
                x.set(i, bernoulli(rng, logistic(eta)));
            }
            data.y = {static_cast<int>(std::binomial_distribution<int>(static_cast<int>(x.count()), doc.theta.rho)(rng))};
            if (!a.no_states) data.x_true.push_back(x.to_values());
            break;
        }
    }
    emit(g, out, data_to_json(data).dump() + "\n");
    return 0;
}

// ---- filter ----

struct FilterArgs {
    std::string model;
    std::string data;
    std::string method = "csmc";
    std::size_t particles = 512;
    std::size_t reps = 1;
    std::size_t clusters = 1;
    std::string bif_approx = "exact";
    std::string approx = "exact";
    std::string perturb = "none";
    std::vector<std::size_t> perturb_times{25, 50, 75};
    std::vector<std::string> overrides;
    std::string ess_out;
};

struct FilterOutcome {
    double loglik = neg_inf;
    bool collapsed = false;
    int collapse_time = -1;
    std::vector<double> ess;
    double seconds = 0.0;
};

template <class State>
FilterOutcome outcome_of(const ParticleSystem<State>& sys) {
    return {sys.log_likelihood, sys.collapsed, sys.collapse_time, sys.ess, 0.0};
}

std::vector<int> perturbed(std::vector<int> y, const std::string& mode, const std::vector<std::size_t>& times,
                           std::size_t num_agents) {
    if (mode == "none") return y;
    for (std::size_t t : times) {
        if (t >= y.size()) throw ConfigError("--perturb-times entry " + std::to_string(t) + " is past the horizon");
        if (mode == "halve")
            y[t] = y[t] / 2;
        else
            y[t] = std::min(2 * y[t], static_cast<int>(num_agents));
    }
    return y;
}

BifTable make_sis_bif(const std::vector<int>& y, const AgentRates& rates, double rho, std::size_t clusters,
                      CountApprox approx) {
    if (clusters <= 1) return bif_sis(y, rates, rho, approx);
    return bif_sis_clustered(y, rates, rho, rate_sorted_clusters(rates, clusters), approx);
}

int cmd_filter(const Global& g, const FilterArgs& a, std::ostream& out, std::ostream& err) {
    ModelDoc doc = require_model(a.model);
    if (doc.kind == ModelKind::static_model) throw ConfigError("filter needs an sis or sir model");
    apply_overrides(doc, a.overrides);
    const DataDoc data = require_data(a.data);
    check_observations(doc, data);
    if (a.particles == 0) throw ConfigError("--particles must be positive");
    if (a.clusters == 0 || a.clusters > doc.model.num_agents()) throw ConfigError("--clusters must lie in [1, N]");
    if (doc.kind == ModelKind::sir && a.clusters > 1) throw ConfigError("clustered cSMC is only available for sis");
    const std::vector<int> y = perturbed(data.y, a.perturb, a.perturb_times, doc.model.num_agents());

    const AgentRates rates = agent_rates(doc.theta, doc.model.covariates);
    std::optional<BifTable> psi;
    if (a.method == "csmc") {
        psi = doc.kind == ModelKind::sis
                  ? make_sis_bif(y, rates, doc.theta.rho, a.clusters, parse_approx(a.bif_approx))
                  : bif_sir(y, rates, doc.theta.rho);
    }

    std::vector<FilterOutcome> results(a.reps);
    parallel_for(a.reps, g.threads, [&](std::size_t, std::size_t rep) {
        SmcOptions opt;
        opt.particles = a.particles;
        opt.seed = derive_seed(g.seed, "filter-rep", rep);
        opt.approx = parse_approx(a.approx);
        const auto start = std::chrono::steady_clock::now();
        FilterOutcome res;
        if (doc.kind == ModelKind::sis) {
            if (a.method == "bpf")
                res = outcome_of(run_bpf(doc.model, y, doc.theta, opt));
            else if (a.method == "apf")
                res = outcome_of(run_apf_sis(doc.model, y, doc.theta, opt));
            else
                res = outcome_of(run_csmc_sis(doc.model, y, doc.theta, *psi, opt));
        } else {
            if (a.method == "bpf")
                res = outcome_of(run_bpf_sir(doc.model, y, doc.theta, opt));
            else if (a.method == "apf")
                res = outcome_of(run_apf_sir(doc.model, y, doc.theta, opt));
            else
                res = outcome_of(run_csmc_sir(doc.model, y, doc.theta, *psi, opt));
        }
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        results[rep] = std::move(res);
    });

    // Wall times go to stderr only so the CSV stays a pure function of (config, seed).
    std::ostringstream csv;
    csv << "rep,loglik,collapsed,collapse_time,min_ess\n";
    for (std::size_t r = 0; r < results.size(); ++r) {
        const auto& res = results[r];
        const double min_ess = res.ess.empty() ? 0.0 : *std::min_element(res.ess.begin(), res.ess.end());
        csv << r << ',' << format_double(res.loglik) << ',' << (res.collapsed ? 1 : 0) << ',' << res.collapse_time
            << ',' << format_double(min_ess) << '\n';
    }
    emit(g, out, csv.str());

    if (!a.ess_out.empty()) {
        std::ostringstream ess;
        ess << "rep,t,ess\n";
        for (std::size_t r = 0; r < results.size(); ++r)
            for (std::size_t t = 0; t < results[r].ess.size(); ++t)
                ess << r << ',' << t << ',' << format_double(results[r].ess[t]) << '\n';
        write_text(a.ess_out, ess.str());
    }

    std::vector<double> finite;
    double seconds = 0.0;
    for (const auto& res : results) {
        if (std::isfinite(res.loglik)) finite.push_back(res.loglik);
        seconds += res.seconds;
    }
    double mean = 0.0, var = 0.0;
    for (double v : finite) mean += v;
    mean = finite.empty() ? neg_inf : mean / double(finite.size());
    for (double v : finite) var += (v - mean) * (v - mean);
    if (finite.size() > 1) var /= double(finite.size() - 1);
    err << "method=" << a.method << " particles=" << a.particles << " reps=" << a.reps
        << " collapsed=" << (results.size() - finite.size()) << " mean_loglik=" << format_double(mean)
        << " var_loglik=" << format_double(var)
        << " mean_seconds=" << format_double(results.empty() ? 0.0 : seconds / double(results.size())) << '\n';
    return 0;
}

// ---- surface ----

struct SurfaceArgs {
    std::string model;
    std::string data;
    std::string method = "csmc";
    std::size_t particles = 64;
    std::size_t clusters = 1;
    std::string x_param = "beta_lambda_1";
    double x_min = 0.0, x_max = 4.0;
    std::size_t x_points = 21;
    std::string y_param;
    double y_min = 0.0, y_max = 1.0;
    std::size_t y_points = 1;
    std::vector<std::string> overrides;
};

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = n == 1 ? lo : lo + (hi - lo) * double(k) / double(n - 1);
    return v;
}

int cmd_surface(const Global& g, const SurfaceArgs& a, std::ostream& out) {
    ModelDoc base = require_model(a.model);
    if (base.kind != ModelKind::sis) throw ConfigError("surface needs an sis model");
    apply_overrides(base, a.overrides);
    const DataDoc data = require_data(a.data);
    check_observations(base, data);
    if (a.x_points == 0 || (!a.y_param.empty() && a.y_points == 0)) throw ConfigError("grid needs at least one point");
    parameter_ref(base, a.x_param);
    if (!a.y_param.empty()) parameter_ref(base, a.y_param);

    const auto xs = linspace(a.x_min, a.x_max, a.x_points);
    const auto ys = a.y_param.empty() ? std::vector<double>{0.0} : linspace(a.y_min, a.y_max, a.y_points);
    const std::size_t cells = xs.size() * ys.size();
    std::vector<double> values(cells, neg_inf);

    FilterConfig fc;
    fc.kind = a.method == "bpf" ? FilterKind::bpf : a.method == "apf" ? FilterKind::apf : FilterKind::csmc;
    fc.smc.particles = a.particles;
    fc.clusters = a.clusters;

    parallel_for(cells, g.threads, [&](std::size_t, std::size_t k) {
        ModelDoc doc = base;
        parameter_ref(doc, a.x_param) = xs[k % xs.size()];
        if (!a.y_param.empty()) parameter_ref(doc, a.y_param) = ys[k / xs.size()];
        if (!(doc.theta.rho > 0.0 && doc.theta.rho <= 1.0)) return;
        FilterConfig cfg = fc;
        cfg.smc.seed = derive_seed(g.seed, "surface", k);
        const auto lik = sis_likelihood(doc.model, data.y, cfg);
        values[k] = lik(pack_unconstrained(doc.theta), 0).log_lik;
    });

    const double top = *std::max_element(values.begin(), values.end());
    std::ostringstream csv;
    csv << (a.y_param.empty() ? "x,loglik,shifted\n" : "x,y,loglik,shifted\n");
    for (std::size_t k = 0; k < cells; ++k) {
        csv << format_double(xs[k % xs.size()]) << ',';
        if (!a.y_param.empty()) csv << format_double(ys[k / xs.size()]) << ',';
        const double shifted = std::isfinite(top) ? values[k] - top : neg_inf;
        csv << format_double(values[k]) << ',' << format_double(shifted) << '\n';
    }
    emit(g, out, csv.str());
    return 0;
}

// ---- pmmh / gibbs ----

struct ChainArgs {
    std::string model;
    std::string data;
    std::string method = "csmc";
    std::size_t particles = 128;
    std::size_t clusters = 1;
    std::string approx = "exact";
    std::size_t iterations = 1000;
    std::size_t burn_in = 0;
    std::size_t thin = 1;
    std::optional<double> step_sd;
    double prior_mean = 0.0;
    std::optional<double> prior_sd;
    std::size_t chains = 1;
    std::string init = "model";
    std::string summary;
    // gibbs
    std::string scan = "single-site";
    std::size_t block_size = 5;
    double swap_weight = 0.5;
    std::size_t init_particles = 128;
    std::string trajectory_out;
};

std::vector<double> prior_draw(Rng& rng, const Prior& prior) {
    std::vector<double> u(prior.mean.size() + 1);
    for (std::size_t k = 0; k < prior.mean.size(); ++k)
        u[k] = std::normal_distribution<double>(prior.mean[k], prior.sd[k])(rng);
    const double rho = std::clamp(uniform01(rng), 1e-6, 1.0 - 1e-6);
    u.back() = std::log(rho / (1.0 - rho));
    return u;
}

std::vector<double> static_unconstrained(const ModelDoc& doc) {
    std::vector<double> u = doc.theta.beta0;
    const double rho = std::min(doc.theta.rho, 1.0 - 1e-9);
    u.push_back(std::log(rho / (1.0 - rho)));
    return u;
}

std::string chains_csv(const std::vector<Chain>& chains, const std::vector<std::string>& names, std::size_t burn_in,
                       std::size_t thin) {
    if (chains.size() == 1) {
        std::ostringstream os;
        write_chain_csv(os, chains.front(), names, burn_in, thin);
        return os.str();
    }
    std::ostringstream all;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        std::ostringstream os;
        write_chain_csv(os, chains[c], names, burn_in, thin);
        std::istringstream lines(os.str());
        std::string line;
        bool header = true;
        while (std::getline(lines, line)) {
            if (header) {
                if (c == 0) all << "chain," << line << '\n';
                header = false;
                continue;
            }
            all << c << ',' << line << '\n';
        }
    }
    return all.str();
}

void report_chains(const std::vector<Chain>& chains, const std::vector<std::string>& names, std::size_t burn_in,
                   const std::string& summary_path, std::ostream& err) {
    json summary = json::array();
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const Chain& ch = chains[c];
        std::vector<double> mean(names.size(), 0.0);
        std::size_t kept = 0;
        for (std::size_t i = burn_in; i < ch.steps.size(); ++i, ++kept) {
            const auto nat = to_natural(ch.steps[i].u);
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += nat[k];
        }
        json means;
        for (std::size_t k = 0; k < names.size(); ++k) means[names[k]] = kept ? mean[k] / double(kept) : 0.0;
        summary.push_back({{"chain", c},
                           {"iterations", ch.steps.size()},
                           {"acceptance_rate", ch.acceptance_rate()},
                           {"posterior_mean", means}});
        err << "chain " << c << ": iterations=" << ch.steps.size()
            << " acceptance_rate=" << format_double(ch.acceptance_rate()) << '\n';
    }
    if (!summary_path.empty()) write_text(summary_path, summary.dump(2) + "\n");
}

Prior make_prior(const ModelDoc& doc, const ChainArgs& a) {
    const std::size_t coords = parameter_names(doc).size() - 1;
    const double default_sd = doc.kind == ModelKind::static_model ? 1.0 : 3.0;
    const double sd = a.prior_sd.value_or(default_sd);
    if (!(sd > 0.0)) throw ConfigError("--prior-sd must be positive");
    return Prior::isotropic(coords, a.prior_mean, sd);
}

LikelihoodFn chain_likelihood(const ModelDoc& doc, const std::vector<int>& y, const ChainArgs& a, std::uint64_t seed,
                              int threads) {
    if (doc.kind == ModelKind::static_model) {
        if (y.size() != 1) throw ConfigError("static data must hold a single observation");
        if (a.method == "exact") return static_likelihood(doc.model.covariates, y[0], StaticMethod::exact);
        if (a.method == "transpoi") return static_likelihood(doc.model.covariates, y[0], StaticMethod::transpoi);
        if (a.method == "naive") return static_naive_likelihood(doc.model.covariates, y[0], a.particles, seed);
        throw ConfigError("static pmmh methods are exact, transpoi and naive");
    }
    FilterConfig fc;
    if (a.method == "bpf")
        fc.kind = FilterKind::bpf;
    else if (a.method == "apf")
        fc.kind = FilterKind::apf;
    else if (a.method == "csmc")
        fc.kind = FilterKind::csmc;
    else if (a.method == "exact")
        fc.kind = FilterKind::exact;
    else
        throw ConfigError("sis pmmh methods are bpf, apf, csmc and exact");
    if (fc.kind == FilterKind::exact && doc.model.num_agents() > sis_forward_max_agents)
        throw ConfigError("exact likelihood is limited to " + std::to_string(sis_forward_max_agents) + " agents");
    fc.smc.particles = a.particles;
    fc.smc.seed = seed;
    fc.smc.threads = threads;
    fc.smc.approx = parse_approx(a.approx);
    fc.clusters = a.clusters;
    return sis_likelihood(doc.model, y, fc);
}

std::vector<Chain> run_pmmh_chains(const Global& g, const ModelDoc& doc, const std::vector<int>& y,
                                   const ChainArgs& a) {
    if (doc.kind == ModelKind::sir) throw ConfigError("pmmh supports sis and static models");
    if (a.chains == 0) throw ConfigError("--chains must be positive");
    const Prior prior = make_prior(doc, a);
    const double step = a.step_sd.value_or(0.2);
    std::vector<Chain> chains(a.chains);
    // Chains run in parallel; a single chain gets the threads for its particle work instead.
    const int inner = a.chains == 1 ? g.threads : 1;
    parallel_for(a.chains, g.threads, [&](std::size_t, std::size_t c) {
        Rng rng(derive_seed(g.seed, "chain", c));
        std::vector<double> u0;
        if (a.init == "prior")
            u0 = prior_draw(rng, prior);
        else
            u0 = doc.kind == ModelKind::static_model ? static_unconstrained(doc) : pack_unconstrained(doc.theta);
        const auto lik = chain_likelihood(doc, y, a, derive_seed(g.seed, "chain-filter", c), inner);
        chains[c] = run_pmmh(rng, prior, std::move(u0), lik, a.iterations, step);
    });
    return chains;
}

int cmd_pmmh(const Global& g, const ChainArgs& a, std::ostream& out, std::ostream& err) {
    const ModelDoc doc = require_model(a.model);
    const DataDoc data = require_data(a.data);
    check_observations(doc, data);
    if (a.thin == 0) throw ConfigError("--thin must be positive");
    const auto chains = run_pmmh_chains(g, doc, data.y, a);
    const auto names = parameter_names(doc);
    emit(g, out, chains_csv(chains, names, a.burn_in, a.thin));
    report_chains(chains, names, a.burn_in, a.summary, err);
    return 0;
}

// One path from an APF run at the starting parameters, or the all-infected trajectory if the
// filter collapses.
Trajectory initial_trajectory(Rng& rng, const ModelDoc& doc, const SisParams& theta, const std::vector<int>& y,
                              std::size_t particles, std::uint64_t seed) {
    SmcOptions opt;
    opt.particles = particles;
    opt.seed = seed;
    const SisSystem sys = run_apf_sis(doc.model, y, theta, opt);
    if (sys.collapsed || sys.steps() != y.size()) return saturated_trajectory(doc.model.num_agents(), y.size());
    const auto paths = trace_ancestry(sys);
    std::discrete_distribution<std::size_t> pick(paths.weights.begin(), paths.weights.end());
    return paths.paths[pick(rng)];
}

int cmd_gibbs(const Global& g, const ChainArgs& a, std::ostream& out, std::ostream& err) {
    const ModelDoc doc = require_model(a.model);
    if (doc.kind != ModelKind::sis) throw ConfigError("gibbs needs an sis model");
    const DataDoc data = require_data(a.data);
    check_observations(doc, data);
    if (a.thin == 0) throw ConfigError("--thin must be positive");
    if (a.chains == 0) throw ConfigError("--chains must be positive");
    if (a.scan == "block" && (a.block_size == 0 || a.block_size > max_block_size))
        throw ConfigError("--block-size must lie in [1, " + std::to_string(max_block_size) + "]");
    if (a.swap_weight < 0.0 || a.swap_weight > 1.0) throw ConfigError("--swap-weight must lie in [0, 1]");

    const Prior prior = make_prior(doc, a);
    GibbsOptions opts;
    opts.iterations = a.iterations;
    opts.scan = a.scan == "block" ? ScanKind::block : ScanKind::single_site;
    opts.block_size = a.block_size;
    opts.swap_weight = a.swap_weight;
    opts.step_sd = a.step_sd.value_or(0.08);

    std::vector<GibbsResult> results(a.chains);
    parallel_for(a.chains, g.threads, [&](std::size_t, std::size_t c) {
        Rng rng(derive_seed(g.seed, "chain", c));
        std::vector<double> u0 = a.init == "prior" ? prior_draw(rng, prior) : pack_unconstrained(doc.theta);
        const SisParams theta0 = unpack_unconstrained(u0, doc.model.covariates.cols);
        Trajectory x0 = initial_trajectory(rng, doc, theta0, data.y, a.init_particles, derive_seed(g.seed, "gibbs-init", c));
        results[c] = run_gibbs(rng, doc.model, data.y, prior, std::move(u0), std::move(x0), opts);
    });

    std::vector<Chain> chains;
    for (auto& r : results) chains.push_back(r.chain);
    const auto names = parameter_names(doc);
    emit(g, out, chains_csv(chains, names, a.burn_in, a.thin));
    report_chains(chains, names, a.burn_in, a.summary, err);
    if (!a.trajectory_out.empty()) {
        json j = json::array();
        for (const auto& r : results) {
            json rows = json::array();
            for (const auto& x : r.trajectory) rows.push_back(x.to_values());
            j.push_back(rows);
        }
        write_text(a.trajectory_out, j.dump() + "\n");
    }
    return 0;
}

// ---- predict ----

struct PredictArgs {
    ChainArgs chain;
    std::size_t t_obs = 30;
    std::size_t draws = 500;
};

int cmd_predict(const Global& g, const PredictArgs& p, std::ostream& out, std::ostream& err) {
    ChainArgs a = p.chain;
    a.chains = 1;
    const ModelDoc doc = require_model(a.model);
    if (doc.kind != ModelKind::sis) throw ConfigError("predict needs an sis model");
    const DataDoc data = require_data(a.data);
    check_observations(doc, data);
    const std::size_t horizon = data.y.size() - 1;
    if (p.t_obs >= horizon) throw ConfigError("--t-obs must be smaller than the data horizon " + std::to_string(horizon));
    if (a.burn_in >= a.iterations) throw ConfigError("--burn-in must be smaller than --iterations");
    if (p.draws == 0) throw ConfigError("--draws must be positive");

    const std::vector<int> head(data.y.begin(), data.y.begin() + static_cast<std::ptrdiff_t>(p.t_obs) + 1);
    const auto chains = run_pmmh_chains(g, doc, head, a);
    const Chain& chain = chains.front();
    if (chain.terminal.size() != chain.steps.size()) throw ConfigError("the chosen method does not report terminal states");

    const std::size_t kept = chain.steps.size() - a.burn_in;
    const std::size_t count = std::min(p.draws, kept);
    std::vector<SisParams> thetas;
    std::vector<PopulationState> states;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = a.burn_in + (k * kept) / count;
        thetas.push_back(unpack_unconstrained(chain.steps[i].u, doc.model.covariates.cols));
        states.push_back(chain.terminal[i]);
    }
    Rng rng(derive_seed(g.seed, "predict"));
    const auto paths = posterior_predictive(rng, doc.model, thetas, states, p.t_obs, horizon);
    const PredictiveBands bands = predictive_quantiles(paths);

    std::ostringstream csv;
    csv << "t,lower,median,upper,observed\n";
    for (std::size_t k = 0; k < bands.median.size(); ++k) {
        const std::size_t t = p.t_obs + 1 + k;
        csv << t << ',' << format_double(bands.lower[k]) << ',' << format_double(bands.median[k]) << ','
            << format_double(bands.upper[k]) << ',' << data.y[t] << '\n';
    }
    emit(g, out, csv.str());
    err << "pmmh acceptance_rate=" << format_double(chain.acceptance_rate()) << " draws=" << count << '\n';
    return 0;
}

// ---- oracle-check ----

struct OracleArgs {
    std::size_t sis_agents = 5;
    std::size_t sir_agents = 4;
    std::size_t horizon = 4;
    std::size_t reps = 2000;
    std::size_t pairs = 1000;
    std::size_t telescoping_seeds = 20;
    double z = 4.0;
    bool inject_fault = false;
    std::vector<std::string> suites{"unbiasedness", "bif", "lemma", "telescoping"};
};

struct OracleInstance {
    Model model;
    SisParams theta;
    std::vector<int> y;
};

OracleInstance oracle_instance(std::size_t n, std::size_t horizon, bool sir, std::uint64_t seed) {
    OracleInstance inst;
    inst.model = Model{generate_covariates(n, 1, 0.0, 1.0, true, derive_seed(seed, "oracle-covariates", n)),
                       Network::complete(n)};
    inst.theta.beta0 = {-0.5, 0.5};
    inst.theta.beta_lambda = {0.0, 1.0};
    inst.theta.beta_gamma = {-1.0, 0.5};
    inst.theta.rho = 0.7;
    Rng rng(derive_seed(seed, "oracle-data", sir ? 1 : 0));
    inst.y = sir ? sir_simulate(rng, inst.theta, inst.model.covariates, inst.model.network, static_cast<int>(horizon)).y
                 : simulate(rng, inst.theta, inst.model.covariates, inst.model.network, static_cast<int>(horizon)).y;
    return inst;
}

struct Report {
    std::ostream& os;
    int failures = 0;
    void line(bool ok, const std::string& name, const std::string& detail) {
        if (!ok) ++failures;
        os << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    }
};

void check_unbiasedness(const Global& g, const OracleArgs& a, Report& rep) {
    const auto sis = oracle_instance(a.sis_agents, a.horizon, false, g.seed);
    const auto sir = oracle_instance(a.sir_agents, a.horizon, true, g.seed);
    const double exact_sis = forward_algorithm_sis(sis.model, sis.y, sis.theta);
    const double exact_sir = forward_algorithm_sir(sir.model, sir.y, sir.theta);
    const BifTable psi_sis = bif_sis(sis.y, agent_rates(sis.theta, sis.model.covariates), sis.theta.rho, CountApprox::exact);
    const BifTable psi_sir = bif_sir(sir.y, agent_rates(sir.theta, sir.model.covariates), sir.theta.rho);

    const std::vector<std::string> names{"bpf", "apf-sis", "csmc-sis", "apf-sir", "csmc-sir"};
    for (std::size_t f = 0; f < names.size(); ++f) {
        std::vector<double> ratio(a.reps);
        parallel_for(a.reps, g.threads, [&](std::size_t, std::size_t r) {
            SmcOptions opt;
            opt.particles = 8;
            opt.seed = derive_seed(g.seed, "oracle-unbiased", f, r);
            opt.literal_sir_weights = a.inject_fault;
            double ll = neg_inf;
            switch (f) {
                case 0: ll = run_bpf(sis.model, sis.y, sis.theta, opt).log_likelihood; break;
                case 1: ll = run_apf_sis(sis.model, sis.y, sis.theta, opt).log_likelihood; break;
                case 2: ll = run_csmc_sis(sis.model, sis.y, sis.theta, psi_sis, opt).log_likelihood; break;
                case 3: ll = run_apf_sir(sir.model, sir.y, sir.theta, opt).log_likelihood; break;
                default: ll = run_csmc_sir(sir.model, sir.y, sir.theta, psi_sir, opt).log_likelihood; break;
            }
            ratio[r] = std::exp(ll - (f < 3 ? exact_sis : exact_sir));
        });
        double mean = 0.0, var = 0.0;
        for (double v : ratio) mean += v;
        mean /= double(ratio.size());
        for (double v : ratio) var += (v - mean) * (v - mean);
        var /= double(ratio.size() - 1);
        const double se = std::sqrt(var / double(ratio.size()));
        std::ostringstream detail;
        detail << "mean Z/p(y) = " << mean << ", SE " << se;
        rep.line(std::abs(mean - 1.0) <= a.z * se, "unbiasedness/" + names[f], detail.str());
    }
}

void check_bif(const Global& g, const OracleArgs& a, Report& rep) {
    const std::size_t n = a.sis_agents;
    if (n > sis_bif_max_agents)
        throw OracleSizeError("bif check is limited to " + std::to_string(sis_bif_max_agents) + " agents");
    OracleInstance inst;
    inst.model = Model{generate_covariates(n, 0, 0.0, 1.0, true, 1), Network::complete(n)};
    inst.theta.beta0 = {-1.0};
    inst.theta.beta_lambda = {0.3};
    inst.theta.beta_gamma = {-0.8};
    inst.theta.rho = 0.6;
    Rng rng(derive_seed(g.seed, "oracle-bif"));
    inst.y = simulate(rng, inst.theta, inst.model.covariates, inst.model.network, static_cast<int>(a.horizon)).y;
    OracleOptions opt;
    opt.self_inclusive = true;
    const ExactBif exact = exact_bif_sis(inst.model, inst.y, inst.theta, opt);
    const BifTable table =
        bif_sis(inst.y, agent_rates(inst.theta, inst.model.covariates), inst.theta.rho, CountApprox::exact);
    double worst = 0.0;
    for (std::size_t t = 0; t < exact.log_psi.size(); ++t) {
        for (std::uint64_t code = 0; code < exact.log_psi[t].size(); ++code) {
            const double e = exact.log_psi[t][code];
            const double b = table.log_at(t, PopulationState::from_code(code, n).count());
            if (std::isinf(e) || std::isinf(b)) {
                if (e != b) worst = std::numeric_limits<double>::infinity();
                continue;
            }
            worst = std::max(worst, std::abs(std::expm1(b - e)));
        }
    }
    std::ostringstream detail;
    detail << "max relative error " << worst << " at N = " << n;
    rep.line(worst <= 1e-10, "bif/sis-homogeneous", detail.str());
}

void check_lemma(const Global& g, const OracleArgs& a, Report& rep) {
    Rng rng(derive_seed(g.seed, "oracle-lemma"));
    std::uniform_int_distribution<std::size_t> size(2, 8);
    std::size_t kl_violations = 0, l2_violations = 0, stated_violations = 0, undefined = 0;
    for (std::size_t k = 0; k < a.pairs; ++k) {
        const std::size_t n = size(rng);
        std::vector<double> alpha(n), alpha_bar(n);
        for (auto& v : alpha) v = uniform01(rng);
        for (auto& v : alpha_bar) v = uniform01(rng);
        const LemmaReport r = lemma_bounds_check(alpha, alpha_bar);
        if (!r.kl_defined)
            ++undefined;
        else if (r.kl_lhs > r.kl_rhs * (1 + 1e-12) + 1e-15)
            ++kl_violations;
        if (r.l2_lhs > r.l2_rhs_corrected * (1 + 1e-12) + 1e-15) ++l2_violations;
        if (r.l2_lhs > r.l2_rhs * (1 + 1e-12) + 1e-15) ++stated_violations;
    }
    rep.line(kl_violations == 0, "lemma/kl",
             std::to_string(kl_violations) + " violations in " + std::to_string(a.pairs - undefined) + " pairs");
    rep.line(l2_violations == 0, "lemma/l2-factor-2", std::to_string(l2_violations) + " violations");
    rep.os << "NOTE lemma/l2-as-stated: " << stated_violations << " of " << a.pairs
           << " pairs exceed the bound without the factor 2 (recorded, not asserted)\n";
}

void check_telescoping(const Global& g, const OracleArgs& a, Report& rep) {
    const auto sis = oracle_instance(a.sis_agents, a.horizon, false, g.seed);
    const auto sir = oracle_instance(a.sir_agents, a.horizon, true, g.seed);
    if (a.sir_agents > sir_bif_max_agents)
        throw OracleSizeError("telescoping check is limited to " + std::to_string(sir_bif_max_agents) + " SIR agents");
    const BifTable psi_sis = bif_sis(sis.y, agent_rates(sis.theta, sis.model.covariates), sis.theta.rho, CountApprox::exact);
    const BifTable psi_sir = bif_sir(sir.y, agent_rates(sir.theta, sir.model.covariates), sir.theta.rho);
    const std::vector<std::string> names{"bpf", "apf-sis", "csmc-sis", "apf-sir", "csmc-sir"};
    for (std::size_t f = 0; f < names.size(); ++f) {
        double worst = 0.0;
        std::size_t compared = 0;
        for (std::size_t s = 0; s < a.telescoping_seeds; ++s) {
            SmcOptions opt;
            opt.particles = 1;
            opt.seed = derive_seed(g.seed, "oracle-telescoping", f, s);
            opt.literal_sir_weights = a.inject_fault;
            double ll = neg_inf, ratio = neg_inf;
            if (f < 3) {
                const SisSystem sys = f == 0   ? run_bpf(sis.model, sis.y, sis.theta, opt)
                                      : f == 1 ? run_apf_sis(sis.model, sis.y, sis.theta, opt)
                                               : run_csmc_sis(sis.model, sis.y, sis.theta, psi_sis, opt);
                if (sys.collapsed) continue;
                std::vector<PopulationState> path;
                for (const auto& row : sys.states) path.push_back(row.front());
                const ProposalKind kind =
                    f == 0 ? ProposalKind::bootstrap : f == 1 ? ProposalKind::lookahead : ProposalKind::twisted;
                ratio = exact_path_log_ratio_sis(sis.model, sis.y, sis.theta, path, kind, &psi_sis);
                ll = sys.log_likelihood;
            } else {
                const SirSystem sys = f == 3 ? run_apf_sir(sir.model, sir.y, sir.theta, opt)
                                             : run_csmc_sir(sir.model, sir.y, sir.theta, psi_sir, opt);
                if (sys.collapsed) continue;
                std::vector<SirState> path;
                for (const auto& row : sys.states) path.push_back(row.front());
                const ProposalKind kind = f == 3 ? ProposalKind::lookahead : ProposalKind::twisted;
                ratio = exact_path_log_ratio_sir(sir.model, sir.y, sir.theta, path, kind, &psi_sir);
                ll = sys.log_likelihood;
            }
            ++compared;
            worst = std::max(worst, std::abs(ll - ratio));
        }
        std::ostringstream detail;
        detail << "max |log w - log ratio| = " << worst << " over " << compared << " paths";
        rep.line(compared > 0 && worst <= 1e-8, "telescoping/" + names[f], detail.str());
    }
}

int cmd_oracle_check(const Global& g, const OracleArgs& a, std::ostream& out) {
    if (a.sis_agents == 0 || a.sir_agents == 0) throw ConfigError("agent counts must be positive");
    if (a.reps < 2) throw ConfigError("--reps must be at least 2");
    std::ostringstream text;
    Report rep{text};
    try {
        for (const auto& suite : a.suites) {
            if (suite == "unbiasedness")
                check_unbiasedness(g, a, rep);
            else if (suite == "bif")
                check_bif(g, a, rep);
            else if (suite == "lemma")
                check_lemma(g, a, rep);
            else if (suite == "telescoping")
                check_telescoping(g, a, rep);
            else
                throw ConfigError("unknown suite '" + suite + "'");
        }
    } catch (const OracleSizeError& e) {
        throw ConfigError(e.what());
    }
    text << (rep.failures == 0 ? "all checks passed\n" : std::to_string(rep.failures) + " check(s) failed\n");
    emit(g, out, text.str());
    return rep.failures == 0 ? 0 : 1;
}

// ---- option wiring ----

void add_model_data(CLI::App* sub, std::string& model, std::string& data) {
    sub->add_option("--model", model, "Model JSON document");
    sub->add_option("--data", data, "Data JSON document with \"y\"");
}

void add_chain_options(CLI::App* sub, ChainArgs& a) {
    add_model_data(sub, a.model, a.data);
    sub->add_option("--iterations", a.iterations, "MCMC iterations")->capture_default_str();
    sub->add_option("--burn-in", a.burn_in, "Iterations dropped from the CSV")->capture_default_str();
    sub->add_option("--thin", a.thin, "Keep every k-th iteration after burn-in")->capture_default_str();
    sub->add_option("--step-sd", a.step_sd, "Random-walk standard deviation (pmmh 0.2, gibbs 0.08)");
    sub->add_option("--prior-mean", a.prior_mean, "Normal prior mean of the coefficients")->capture_default_str();
    sub->add_option("--prior-sd", a.prior_sd, "Normal prior sd of the coefficients (sis 3, static 1)");
    sub->add_option("--chains", a.chains, "Independent chains, run in parallel")->capture_default_str();
    sub->add_option("--init", a.init, "Starting point")->check(CLI::IsMember({"model", "prior"}))->capture_default_str();
    sub->add_option("--summary", a.summary, "Write a JSON acceptance and posterior-mean summary here");
}

void add_filter_choice(CLI::App* sub, ChainArgs& a, bool include_static) {
    std::vector<std::string> methods{"bpf", "apf", "csmc", "exact"};
    if (include_static) methods.insert(methods.end(), {"transpoi", "naive"});
    sub->add_option("--method", a.method, "Likelihood estimator")->check(CLI::IsMember(methods))->capture_default_str();
    sub->add_option("--particles", a.particles, "Particles per filter run")->capture_default_str();
    sub->add_option("--clusters", a.clusters, "Rate clusters for the cSMC backward filter")->capture_default_str();
    sub->add_option("--approx", a.approx, "Count factors inside the proposals")
        ->check(CLI::IsMember({"exact", "transpoi"}))
        ->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inference for agent-based SIS and SIR epidemic models", "abm"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file");

    Global g;
    app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads; 1 is the deterministic sequential mode")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--out", g.out, "Output path, '-' for stdout")->capture_default_str();

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate observations from a model document");
    simulate_cmd->add_option("--model", sim.model, "Model JSON document");
    simulate_cmd->add_option("--horizon", sim.horizon, "Final time T")->capture_default_str();
    simulate_cmd->add_flag("--no-states", sim.no_states, "Omit the latent states from the output");

    FilterArgs fa;
    auto* filter_cmd = app.add_subcommand("filter", "Replicated particle filter runs");
    add_model_data(filter_cmd, fa.model, fa.data);
    filter_cmd->add_option("--method", fa.method)->check(CLI::IsMember({"bpf", "apf", "csmc"}))->capture_default_str();
    filter_cmd->add_option("--particles", fa.particles)->capture_default_str();
    filter_cmd->add_option("--reps", fa.reps)->capture_default_str();
    filter_cmd->add_option("--clusters", fa.clusters, "Rate clusters for the cSMC backward filter")->capture_default_str();
    filter_cmd->add_option("--bif-approx", fa.bif_approx, "Count law inside the backward filter")
        ->check(CLI::IsMember({"exact", "transpoi"}))
        ->capture_default_str();
    filter_cmd->add_option("--approx", fa.approx, "Count factors inside the proposals")
        ->check(CLI::IsMember({"exact", "transpoi"}))
        ->capture_default_str();
    filter_cmd->add_option("--perturb", fa.perturb, "Replace y_t by floor(y_t/2) or min(2 y_t, N)")
        ->check(CLI::IsMember({"none", "halve", "double"}))
        ->capture_default_str();
    filter_cmd->add_option("--perturb-times", fa.perturb_times)->delimiter(',')->capture_default_str();
    filter_cmd->add_option("--set", fa.overrides, "Override a parameter, name=value");
    filter_cmd->add_option("--ess-out", fa.ess_out, "Write per-step ESS (rep,t,ess) here");

    SurfaceArgs sa;
    auto* surface_cmd = app.add_subcommand("surface", "Log-likelihood over a grid of one or two parameters");
    add_model_data(surface_cmd, sa.model, sa.data);
    surface_cmd->add_option("--method", sa.method)->check(CLI::IsMember({"bpf", "apf", "csmc"}))->capture_default_str();
    surface_cmd->add_option("--particles", sa.particles)->capture_default_str();
    surface_cmd->add_option("--clusters", sa.clusters)->capture_default_str();
    surface_cmd->add_option("--x-param", sa.x_param)->capture_default_str();
    surface_cmd->add_option("--x-min", sa.x_min)->capture_default_str();
    surface_cmd->add_option("--x-max", sa.x_max)->capture_default_str();
    surface_cmd->add_option("--x-points", sa.x_points)->capture_default_str();
    surface_cmd->add_option("--y-param", sa.y_param, "Second axis; omit for a one-dimensional profile");
    surface_cmd->add_option("--y-min", sa.y_min)->capture_default_str();
    surface_cmd->add_option("--y-max", sa.y_max)->capture_default_str();
    surface_cmd->add_option("--y-points", sa.y_points)->capture_default_str();
    surface_cmd->add_option("--set", sa.overrides, "Override a parameter, name=value");

    ChainArgs pa;
    auto* pmmh_cmd = app.add_subcommand("pmmh", "Particle marginal Metropolis-Hastings");
    add_chain_options(pmmh_cmd, pa);
    add_filter_choice(pmmh_cmd, pa, true);

    ChainArgs ga;
    auto* gibbs_cmd = app.add_subcommand("gibbs", "Data-augmentation Gibbs sampler");
    add_chain_options(gibbs_cmd, ga);
    gibbs_cmd->add_option("--scan", ga.scan)->check(CLI::IsMember({"single-site", "block"}))->capture_default_str();
    gibbs_cmd->add_option("--block-size", ga.block_size)->capture_default_str();
    gibbs_cmd->add_option("--swap-weight", ga.swap_weight, "Probability of the swap kernel")->capture_default_str();
    gibbs_cmd->add_option("--init-particles", ga.init_particles, "APF particles for the starting trajectory")
        ->capture_default_str();
    gibbs_cmd->add_option("--trajectory-out", ga.trajectory_out, "Write the final trajectories as JSON");

    PredictArgs pr;
    pr.chain.iterations = 2000;
    pr.chain.burn_in = 500;
    auto* predict_cmd = app.add_subcommand("predict", "Posterior predictive bands after t_obs");
    add_chain_options(predict_cmd, pr.chain);
    add_filter_choice(predict_cmd, pr.chain, false);
    predict_cmd->add_option("--t-obs", pr.t_obs, "Last observed time")->capture_default_str();
    predict_cmd->add_option("--draws", pr.draws, "Posterior draws used for prediction")->capture_default_str();

    OracleArgs oa;
    auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare the filters with exact small-instance oracles");
    oracle_cmd->add_option("--num-agents", oa.sis_agents, "SIS agents")->capture_default_str();
    oracle_cmd->add_option("--sir-agents", oa.sir_agents)->capture_default_str();
    oracle_cmd->add_option("--horizon", oa.horizon)->capture_default_str();
    oracle_cmd->add_option("--reps", oa.reps, "Filter runs per unbiasedness check")->capture_default_str();
    oracle_cmd->add_option("--pairs", oa.pairs, "Random pairs for the lemma check")->capture_default_str();
    oracle_cmd->add_option("--z", oa.z, "Standard errors allowed in the unbiasedness check")->capture_default_str();
    oracle_cmd->add_option("--suites", oa.suites)->delimiter(',')->capture_default_str();
    oracle_cmd->add_flag("--inject-fault", oa.inject_fault,
                         "Use the unrepaired cSMC-SIR weight formula (the telescoping check should fail)");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate_cmd) return cmd_simulate(g, sim, out);
        if (*filter_cmd) return cmd_filter(g, fa, out, err);
        if (*surface_cmd) return cmd_surface(g, sa, out);
        if (*pmmh_cmd) return cmd_pmmh(g, pa, out, err);
        if (*gibbs_cmd) return cmd_gibbs(g, ga, out, err);
        if (*predict_cmd) return cmd_predict(g, pr, out, err);
        if (*oracle_cmd) return cmd_oracle_check(g, oa, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace abm
