#include "spx/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace spx {

namespace {

void check_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(name) + " contains non-finite entries");
  }
}

void check_shapes(const Matrix& vertices, const Matrix& weights, const Matrix& features) {
  if (weights.cols() != vertices.rows() || weights.rows() != features.rows() ||
      vertices.cols() != features.cols()) {
    std::ostringstream msg;
    msg << "shape mismatch: W " << weights.rows() << "x" << weights.cols() << ", D "
        << vertices.rows() << "x" << vertices.cols() << ", X " << features.rows() << "x"
        << features.cols();
    throw DimensionError(msg.str());
  }
}

void check_config(const SolverConfig& c) {
  if (c.lambda < 0.0 || c.lambda > 1.0) throw InvalidInputError("lambda must be in [0, 1]");
  if (c.outer_iters < 1) throw InvalidInputError("outer_iters must be >= 1");
  if (c.w_steps_per_outer < 1) throw InvalidInputError("w_steps_per_outer must be >= 1");
  if (c.learning_rate <= 0.0) throw InvalidInputError("learning_rate must be > 0");
  if (c.ridge_eps < 0.0) throw InvalidInputError("ridge_eps must be >= 0");
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
  check_finite(logits, "logits");
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double row_max = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - row_max).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

double pairwise_vertex_penalty(const Matrix& vertices) {
  check_finite(vertices, "vertices");
  double total = 0.0;
  for (Eigen::Index a = 0; a < vertices.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < vertices.rows(); ++b) {
      total += (vertices.row(a) - vertices.row(b)).squaredNorm();
    }
  }
  return total;
}

double reconstruction_error(const Matrix& vertices, const Matrix& weights,
                            const Matrix& features) {
  check_shapes(vertices, weights, features);
  return (weights * vertices - features).squaredNorm();
}

double objective(const Matrix& vertices, const Matrix& weights, const Matrix& features,
                 double lambda) {
  check_shapes(vertices, weights, features);
  return lambda * pairwise_vertex_penalty(vertices) +
         (1.0 - lambda) * (weights * vertices - features).squaredNorm();
}

Matrix d_step(const Matrix& weights, const Matrix& features, double lambda, double ridge_eps) {
  if (weights.rows() != features.rows()) {
    throw DimensionError("weights and features must have the same number of rows");
  }
  if (lambda < 0.0 || lambda > 1.0) throw InvalidInputError("lambda must be in [0, 1]");
  const Eigen::Index k = weights.cols();

  // L = K I - 11^T reproduces the pairwise penalty as tr(D^T L D).
  const Matrix graph_laplacian =
      static_cast<double>(k) * Matrix::Identity(k, k) - Matrix::Ones(k, k);
  const Matrix lhs = (1.0 - lambda) * (weights.transpose() * weights) + lambda * graph_laplacian;
  const Matrix rhs = (1.0 - lambda) * (weights.transpose() * features);

  Eigen::FullPivLU<Matrix> lu(lhs);
  if (lu.isInvertible()) return lu.solve(rhs);

  // ridge retry
  Eigen::FullPivLU<Matrix> ridged(lhs + ridge_eps * Matrix::Identity(k, k));
  if (ridged.isInvertible()) return ridged.solve(rhs);

  std::ostringstream msg;
  msg << "vertex system singular even with ridge " << ridge_eps << " (k=" << k
      << ", rank=" << ridged.rank() << ", max pivot=" << ridged.maxPivot() << ")";
  throw SolverError(msg.str());
}

Matrix w_gradient(const Matrix& logits, const Matrix& vertices, const Matrix& features,
                  double lambda) {
  const Matrix weights = softmax_rows(logits);
  check_shapes(vertices, weights, features);
  const Matrix residual = weights * vertices - features;
  const Matrix weight_grad = 2.0 * (1.0 - lambda) * (residual * vertices.transpose());
  // chain rule through the row softmax: g_ij = w_ij * (G_ij - <G_i, w_i>)
  const Vector row_dots = weight_grad.cwiseProduct(weights).rowwise().sum();
  Matrix centered = weight_grad;
  centered.colwise() -= row_dots;
  return weights.cwiseProduct(centered);
}

Matrix w_step(const Matrix& logits, const Matrix& vertices, const Matrix& features,
              double lambda, double learning_rate, int steps) {
  if (learning_rate <= 0.0) throw InvalidInputError("learning_rate must be > 0");
  if (steps < 1) throw InvalidInputError("steps must be >= 1");

  Matrix current = logits;
  double current_obj = objective(vertices, softmax_rows(current), features, lambda);
  for (int s = 0; s < steps; ++s) {
    const Matrix grad = w_gradient(current, vertices, features, lambda);
    if (!grad.allFinite()) throw SolverError("non-finite gradient in w_step");

    double rate = learning_rate;
    for (int halving = 0; halving <= 20; ++halving) {
      const Matrix candidate = current - rate * grad;
      const double candidate_obj = objective(vertices, softmax_rows(candidate), features, lambda);
      if (candidate_obj <= current_obj) {
        current = candidate;
        current_obj = candidate_obj;
        break;
      }
      rate *= 0.5;
    }
    // if every halving overshot, the step is skipped and `current` stands
  }
  return current;
}

std::pair<Matrix, Matrix> init_model(const Matrix& features, int k, std::uint64_t seed) {
  check_finite(features, "features");
  const Eigen::Index n = features.rows();
  if (k < 1) throw InvalidInputError("k must be >= 1");
  if (n < k) {
    std::ostringstream msg;
    msg << "need at least k=" << k << " points, got " << n;
    throw InvalidInputError(msg.str());
  }

  std::mt19937_64 rng(seed);

  // partial Fisher-Yates: k distinct row indices
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  Matrix vertices(k, features.cols());
  for (int i = 0; i < k; ++i) vertices.row(i) = features.row(idx[i]);

  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix logits(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) logits(i, j) = gauss(rng);
  }
  return {std::move(vertices), std::move(logits)};
}

SimplexModel solve_with_init(const Matrix& features, const Matrix& vertices0,
                             const Matrix& logits0, const SolverConfig& config) {
  check_config(config);
  check_finite(features, "features");
  Matrix vertices = vertices0;
  Matrix logits = logits0;
  Matrix weights = softmax_rows(logits);
  check_shapes(vertices, weights, features);

  SimplexModel model;
  model.k = static_cast<int>(vertices.rows());
  model.objective_trace.push_back(objective(vertices, weights, features, config.lambda));

  for (int outer = 0; outer < config.outer_iters; ++outer) {
    const Matrix updated = d_step(weights, features, config.lambda, config.ridge_eps);
    // the closed form is the exact minimizer; the guard only matters on the
    // ridge fallback, where the solution optimizes a perturbed system
    if (objective(updated, weights, features, config.lambda) <= model.objective_trace.back()) {
      vertices = updated;
    }
    logits = w_step(logits, vertices, features, config.lambda, config.learning_rate,
                    config.w_steps_per_outer);
    weights = softmax_rows(logits);

    const double prev = model.objective_trace.back();
    const double curr = objective(vertices, weights, features, config.lambda);
    model.objective_trace.push_back(curr);
    const double rel_decrease = (prev - curr) / std::max(prev, std::numeric_limits<double>::min());
    if (rel_decrease < config.objective_rel_tol) {
      model.converged = true;
      break;
    }
  }

  model.vertices = std::move(vertices);
  model.weights = std::move(weights);
  model.final_objective = model.objective_trace.back();
  model.recon_error = (model.weights * model.vertices - features).squaredNorm();
  return model;
}

SimplexModel solve(const Matrix& features, int k, const SolverConfig& config) {
  check_config(config);
  auto [vertices0, logits0] = init_model(features, k, config.seed);
  return solve_with_init(features, vertices0, logits0, config);
}

}  // namespace spx
