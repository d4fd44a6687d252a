#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "abm/sis_model.hpp"
#include "json.hpp"

namespace abm {

enum class ModelKind { sis, sir, static_model };

// A model document: covariates, network and a parameter point (the DGP or a chain's start).
// For the static model only theta.beta0 (the coefficients beta) and theta.rho are used.
struct ModelDoc {
    ModelKind kind = ModelKind::sis;
    Model model;
    SisParams theta;
};

// Covariates are either explicit rows or {"generate": {...}}: one intercept column (unless
// "intercept": false) followed by "columns" independent Normal(mean, sd) draws per agent from
// mt19937_64(seed).
Covariates generate_covariates(std::size_t num_agents, std::size_t columns, double mean, double sd, bool intercept,
                               std::uint64_t seed);

ModelDoc parse_model(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelDoc& doc);
ModelDoc load_model(const std::filesystem::path& path);

struct DataDoc {
    std::vector<int> y;
    std::vector<std::vector<int>> x_true;  // optional, one row of agent states per time
};

DataDoc parse_data(const nlohmann::json& j);
nlohmann::json data_to_json(const DataDoc& doc);
DataDoc load_data(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

std::string to_string(ModelKind kind);

}  // namespace abm
