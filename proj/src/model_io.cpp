#include "spx/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "spx/dataset.hpp"  // ParseError

namespace spx {

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
    throw ParseError(ParseError::Kind::bad_field, "expected a 2-D array");
  }
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(m.cols())) {
      throw ParseError(ParseError::Kind::dim_mismatch, "ragged matrix rows");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

void save_model(const SimplexModel& model, const std::string& image_id,
                const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["image_id"] = image_id;
  doc["k"] = model.k;
  doc["vertices"] = matrix_to_json(model.vertices);
  doc["weights"] = matrix_to_json(model.weights);
  doc["final_objective"] = model.final_objective;
  doc["recon_error"] = model.recon_error;
  doc["objective_trace"] = model.objective_trace;
  doc["converged"] = model.converged;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << "\n";
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseError::Kind::bad_path, "cannot open '" + path.string() + "'");
  try {
    nlohmann::json doc;
    in >> doc;
    LoadedModel loaded;
    loaded.image_id = doc.at("image_id").get<std::string>();
    loaded.model.k = doc.at("k").get<int>();
    loaded.model.vertices = matrix_from_json(doc.at("vertices"));
    loaded.model.weights = matrix_from_json(doc.at("weights"));
    loaded.model.final_objective = doc.at("final_objective").get<double>();
    loaded.model.recon_error = doc.at("recon_error").get<double>();
    loaded.model.objective_trace = doc.at("objective_trace").get<std::vector<double>>();
    loaded.model.converged = doc.at("converged").get<bool>();
    return loaded;
  } catch (const ParseError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Kind::bad_field, "invalid model JSON: " + std::string(e.what()));
  }
}

}  // namespace spx
