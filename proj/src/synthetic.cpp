#include "spx/synthetic.hpp"

#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "spx/dataset.hpp"  // ParseError

namespace spx {

namespace {

Matrix sample_weights(int n, int k, double concentration, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  Matrix weights(n, k);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      weights(i, j) = gamma(rng);
      sum += weights(i, j);
    }
    if (sum > 0.0) {
      weights.row(i) /= sum;
    } else {
      // all-zero gamma draws underflow only at tiny concentrations
      weights.row(i).setConstant(1.0 / k);
    }
  }
  // corner witnesses: without them the hull is unidentifiable
  for (int j = 0; j < k && j < n; ++j) {
    weights.row(j).setZero();
    weights(j, j) = 1.0;
  }
  return weights;
}

std::pair<Matrix, SyntheticTruth> assemble(const Matrix& vertices, int n, double noise_sigma,
                                           double concentration, std::mt19937_64& rng) {
  const int k = static_cast<int>(vertices.rows());
  const int dim = static_cast<int>(vertices.cols());
  SyntheticTruth truth;
  truth.true_vertices = vertices;
  truth.true_weights = sample_weights(n, k, concentration, rng);
  truth.noise_sigma = noise_sigma;

  Matrix features = truth.true_weights * vertices;
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) features(i, d) += gauss(rng);
    }
  }
  return {std::move(features), std::move(truth)};
}

}  // namespace

std::pair<Matrix, SyntheticTruth> generate_synthetic(int k, int n, int dim, double noise_sigma,
                                                     double separation, double concentration,
                                                     std::uint64_t seed) {
  if (k < 1) throw InvalidInputError("k must be >= 1");
  if (n < k) throw InvalidInputError("n must be >= k");
  if (dim < 1 || dim < k - 1) throw InvalidInputError("dim must be >= max(1, k-1)");
  if (noise_sigma < 0.0) throw InvalidInputError("noise_sigma must be >= 0");
  if (separation <= 0.0) throw InvalidInputError("separation must be > 0");
  if (concentration <= 0.0) throw InvalidInputError("concentration must be > 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix vertices(k, dim);
  for (int i = 0; i < k; ++i) {
    for (int d = 0; d < dim; ++d) vertices(i, d) = gauss(rng);
  }
  if (k >= 2) {
    double min_dist = std::numeric_limits<double>::infinity();
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        min_dist = std::min(min_dist, (vertices.row(a) - vertices.row(b)).norm());
      }
    }
    if (!(min_dist > 1e-12)) throw SolverError("degenerate vertex sample");
    vertices *= separation / min_dist;
  }
  return assemble(vertices, n, noise_sigma, concentration, rng);
}

std::pair<Matrix, SyntheticTruth> generate_with_vertices(const Matrix& vertices, int n,
                                                         double noise_sigma,
                                                         double concentration,
                                                         std::uint64_t seed) {
  if (vertices.rows() < 1 || vertices.cols() < 1) {
    throw InvalidInputError("vertices must be a non-empty matrix");
  }
  if (n < vertices.rows()) throw InvalidInputError("n must be >= k");
  if (noise_sigma < 0.0) throw InvalidInputError("noise_sigma must be >= 0");
  if (concentration <= 0.0) throw InvalidInputError("concentration must be > 0");
  std::mt19937_64 rng(seed);
  return assemble(vertices, n, noise_sigma, concentration, rng);
}

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

Matrix matrix_from_json(const nlohmann::json& rows, const char* what) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
    throw ParseError(ParseError::Kind::bad_field, std::string(what) + " must be a 2-D array");
  }
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(m.cols())) {
      throw ParseError(ParseError::Kind::dim_mismatch,
                       std::string(what) + " has ragged rows");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

void save_truth(const SyntheticTruth& truth, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["true_vertices"] = matrix_to_json(truth.true_vertices);
  doc["true_weights"] = matrix_to_json(truth.true_weights);
  doc["noise_sigma"] = truth.noise_sigma;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << "\n";
}

SyntheticTruth load_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseError::Kind::bad_path, "cannot open '" + path.string() + "'");
  try {
    nlohmann::json doc;
    in >> doc;
    SyntheticTruth truth;
    truth.true_vertices = matrix_from_json(doc.at("true_vertices"), "true_vertices");
    truth.true_weights = matrix_from_json(doc.at("true_weights"), "true_weights");
    truth.noise_sigma = doc.at("noise_sigma").get<double>();
    return truth;
  } catch (const ParseError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Kind::bad_field, "invalid truth JSON: " + std::string(e.what()));
  }
}

}  // namespace spx
