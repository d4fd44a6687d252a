#include "abm/model_io.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

namespace abm {

using nlohmann::json;

Covariates generate_covariates(std::size_t num_agents, std::size_t columns, double mean, double sd, bool intercept,
                               std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(mean, sd);
    const std::size_t d = columns + (intercept ? 1 : 0);
    std::vector<double> values;
    values.reserve(num_agents * d);
    for (std::size_t n = 0; n < num_agents; ++n) {
        if (intercept) values.push_back(1.0);
        for (std::size_t k = 0; k < columns; ++k) values.push_back(normal(gen));
    }
    return Covariates(num_agents, d, std::move(values));
}

namespace {

ModelKind parse_kind(const std::string& s) {
    if (s == "sis") return ModelKind::sis;
    if (s == "sir") return ModelKind::sir;
    if (s == "static") return ModelKind::static_model;
    throw std::invalid_argument("unknown model kind '" + s + "' (expected sis, sir or static)");
}

Covariates parse_covariates(const json& j) {
    if (j.is_object()) {
        const json& g = j.at("generate");
        return generate_covariates(g.at("num_agents").get<std::size_t>(), g.value("columns", std::size_t{1}),
                                   g.value("mean", 0.0), g.value("sd", 1.0), g.value("intercept", true),
                                   g.value("seed", std::uint64_t{1}));
    }
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw std::invalid_argument("covariates must have at least one row");
    std::vector<double> values;
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw std::invalid_argument("covariate rows differ in length");
        values.insert(values.end(), r.begin(), r.end());
    }
    return Covariates(rows.size(), rows.front().size(), std::move(values));
}

Network parse_network(const json& j, std::size_t num_agents) {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "complete")) return Network::complete(num_agents);
    if (j.is_object() && j.contains("edges")) {
        const auto pairs = j.at("edges").get<std::vector<std::pair<std::size_t, std::size_t>>>();
        return Network::from_edges(num_agents, pairs);
    }
    if (j.is_object() && j.contains("adjacency")) {
        const auto lists = j.at("adjacency").get<std::vector<std::vector<std::size_t>>>();
        if (lists.size() != num_agents) throw std::invalid_argument("adjacency must list every agent");
        return Network::from_adjacency(lists);
    }
    throw std::invalid_argument("network must be \"complete\", {\"edges\": ...} or {\"adjacency\": ...}");
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::sis: return "sis";
        case ModelKind::sir: return "sir";
        case ModelKind::static_model: return "static";
    }
    return "sis";
}

ModelDoc parse_model(const json& j) {
    ModelDoc doc;
    doc.kind = parse_kind(j.value("kind", std::string("sis")));
    Covariates cov = parse_covariates(j.at("covariates"));
    Network net = parse_network(j.value("network", json()), cov.rows);
    doc.model = Model{std::move(cov), std::move(net)};
    const json& t = j.at("theta");
    doc.theta.rho = t.at("rho").get<double>();
    if (doc.kind == ModelKind::static_model) {
        doc.theta.beta0 = t.at("beta").get<std::vector<double>>();
        if (doc.theta.beta0.size() != doc.model.covariates.cols)
            throw std::invalid_argument("beta must have one entry per covariate column");
        if (!(doc.theta.rho > 0.0 && doc.theta.rho <= 1.0)) throw std::invalid_argument("rho must lie in (0,1]");
    } else {
        doc.theta.beta0 = t.at("beta0").get<std::vector<double>>();
        doc.theta.beta_lambda = t.at("beta_lambda").get<std::vector<double>>();
        doc.theta.beta_gamma = t.at("beta_gamma").get<std::vector<double>>();
        doc.theta.validate(doc.model.covariates.cols);
    }
    return doc;
}

json model_to_json(const ModelDoc& doc) {
    json j;
    j["kind"] = to_string(doc.kind);
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < doc.model.covariates.rows; ++n) {
        const auto r = doc.model.covariates.row(n);
        rows.emplace_back(r.begin(), r.end());
    }
    j["covariates"] = rows;
    const Network& g = doc.model.network;
    if (g.is_complete()) {
        j["network"] = "complete";
    } else {
        std::vector<std::vector<std::size_t>> lists;
        for (std::size_t n = 0; n < g.size(); ++n) lists.push_back(g.neighbors(n));
        j["network"] = {{"adjacency", lists}};
    }
    if (doc.kind == ModelKind::static_model) {
        j["theta"] = {{"beta", doc.theta.beta0}, {"rho", doc.theta.rho}};
    } else {
        j["theta"] = {{"beta0", doc.theta.beta0},
                      {"beta_lambda", doc.theta.beta_lambda},
                      {"beta_gamma", doc.theta.beta_gamma},
                      {"rho", doc.theta.rho}};
    }
    return j;
}

DataDoc parse_data(const json& j) {
    DataDoc d;
    d.y = j.at("y").get<std::vector<int>>();
    if (d.y.empty()) throw std::invalid_argument("data must contain at least one observation");
    for (int v : d.y)
        if (v < 0) throw std::invalid_argument("observations must be non-negative");
    if (j.contains("x_true")) d.x_true = j.at("x_true").get<std::vector<std::vector<int>>>();
    return d;
}

json data_to_json(const DataDoc& doc) {
    json j;
    j["y"] = doc.y;
    if (!doc.x_true.empty()) j["x_true"] = doc.x_true;
    return j;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

ModelDoc load_model(const std::filesystem::path& path) { return parse_model(read_json(path)); }
DataDoc load_data(const std::filesystem::path& path) { return parse_data(read_json(path)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("error while writing " + path.string());
}

}  // namespace abm
