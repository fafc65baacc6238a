#include "jointmap_cli/serialize.hpp"

#include "jointmap/error.hpp"

namespace jointmap::cli {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::format, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(doc.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(doc.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = doc.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::format, "ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json state_to_json(const ParameterState& s) {
  json doc;
  doc["alpha"] = std::vector<double>(s.alpha.data(), s.alpha.data() + s.alpha.size());
  doc["lambda"] = matrix_to_json(s.lambda);
  doc["phi"] = matrix_to_json(s.phi);
  doc["log_delta"] = matrix_to_json(s.log_delta);
  doc["log_psi"] = matrix_to_json(s.log_psi);
  if (s.eta) doc["eta"] = matrix_to_json(*s.eta);
  if (s.epsilon) doc["epsilon"] = matrix_to_json(*s.epsilon);
  doc["tau_lambda"] = std::vector<double>(s.tau_lambda.data(), s.tau_lambda.data() + s.tau_lambda.size());
  doc["tau_phi"] = std::vector<double>(s.tau_phi.data(), s.tau_phi.data() + s.tau_phi.size());
  if (s.tau_eta) doc["tau_eta"] = *s.tau_eta;
  if (s.prec_epsilon) doc["prec_epsilon"] = matrix_to_json(s.prec_epsilon->matrix());
  return doc;
}

ParameterState state_from_json(const json& doc, const ModelSpec& spec) {
  auto s = ParameterState::zeros(spec);
  const auto vec = [&](const char* key) {
    const auto v = doc.at(key).get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  try {
    s.alpha = vec("alpha");
    s.lambda = matrix_from_json(doc.at("lambda"));
    s.phi = matrix_from_json(doc.at("phi"));
    s.log_delta = matrix_from_json(doc.at("log_delta"));
    s.log_psi = matrix_from_json(doc.at("log_psi"));
    s.tau_lambda = vec("tau_lambda");
    s.tau_phi = vec("tau_phi");
    if (spec.has_interaction()) {
      s.eta = matrix_from_json(doc.at("eta"));
      s.tau_eta = doc.at("tau_eta").get<double>();
    }
    if (spec.has_heterogeneity()) {
      s.epsilon = matrix_from_json(doc.at("epsilon"));
      s.prec_epsilon = SpdMatrix(matrix_from_json(doc.at("prec_epsilon")));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, std::string("state document: ") + e.what());
  }
  if (auto bad = invariant_violations(s, spec, false); !bad.empty()) {
    throw Error(ErrorCode::value, "state document: " + bad.front());
  }
  return s;
}

}  // namespace jointmap::cli
