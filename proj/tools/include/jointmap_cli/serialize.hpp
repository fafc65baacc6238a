#pragma once

#include <json.hpp>

#include "jointmap/model.hpp"

namespace jointmap::cli {

// Block-structured JSON for a state: matrices as arrays of rows.
nlohmann::json state_to_json(const ParameterState& state);
ParameterState state_from_json(const nlohmann::json& doc, const ModelSpec& spec);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& doc);

}  // namespace jointmap::cli
