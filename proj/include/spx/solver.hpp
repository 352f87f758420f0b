#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spx/common.hpp"

namespace spx {

// Fits a K-vertex simplex to a cloud of feature vectors X (rows) by
// minimizing
//
//   lambda * sum_{k<k'} ||D_k - D_k'||^2  +  (1 - lambda) * ||W D - X||_F^2
//
// over vertices D (K x dim, rows are vertices) and row-stochastic weights
// W (N x K). The vertex update is closed form; the weight update is gradient
// descent on row-softmax logits V, which keeps W strictly positive with unit
// row sums by construction.

struct SolverConfig {
  double lambda = 0.05;          // regularizer weight in [0, 1]
  int outer_iters = 50;          // alternating rounds
  int w_steps_per_outer = 20;    // gradient steps on V per round
  double learning_rate = 0.1;
  double objective_rel_tol = 1e-6;  // early-stop threshold per outer round
  double ridge_eps = 1e-8;          // fallback ridge for singular vertex systems
  std::uint64_t seed = 0;
};

struct SimplexModel {
  Matrix vertices;  // k x dim
  Matrix weights;   // n x k, rows sum to 1, entries > 0
  int k = 0;
  double final_objective = 0.0;
  double recon_error = 0.0;  // ||W D - X||_F^2 of the returned factors
  std::vector<double> objective_trace;  // entry 0 is the initialization, then one per outer round
  bool converged = false;
};

/// Row-wise softmax with max subtraction. Throws InvalidInputError on
/// non-finite input.
Matrix softmax_rows(const Matrix& logits);

/// Sum of squared Euclidean distances over all vertex pairs (rows of
/// `vertices`). Zero for a single vertex.
double pairwise_vertex_penalty(const Matrix& vertices);

/// lambda * pairwise_vertex_penalty + (1 - lambda) * ||W D - X||_F^2.
double objective(const Matrix& vertices, const Matrix& weights, const Matrix& features,
                 double lambda);

/// ||W D - X||_F^2.
double reconstruction_error(const Matrix& vertices, const Matrix& weights,
                            const Matrix& features);

/// Closed-form vertex update for fixed weights: solves
///   ((1-lambda) W^T W + lambda L) D = (1-lambda) W^T X,  L = K I - 11^T.
/// The ridge term ridge_eps * I is added only if the plain system is
/// numerically singular; if it still is, throws SolverError with condition
/// diagnostics.
Matrix d_step(const Matrix& weights, const Matrix& features, double lambda, double ridge_eps);

/// Gradient of objective(D, softmax_rows(V), X, lambda) with respect to V.
Matrix w_gradient(const Matrix& logits, const Matrix& vertices, const Matrix& features,
                  double lambda);

/// `steps` full-batch gradient-descent updates on the logits. Each step
/// backtracks (halving the rate up to 20 times) until the objective does not
/// increase, and is skipped entirely if no rate works, so the objective is
/// non-increasing across the call.
Matrix w_step(const Matrix& logits, const Matrix& vertices, const Matrix& features,
              double lambda, double learning_rate, int steps);

/// Initialization: vertices are k distinct rows of X sampled without
/// replacement, logits are i.i.d. standard normal. Deterministic per
/// (X, k, seed); both draws come from one mt19937_64 stream.
std::pair<Matrix, Matrix> init_model(const Matrix& features, int k, std::uint64_t seed);

/// Alternating minimization from an explicit starting point.
SimplexModel solve_with_init(const Matrix& features, const Matrix& vertices0,
                             const Matrix& logits0, const SolverConfig& config);

/// init_model + solve_with_init.
SimplexModel solve(const Matrix& features, int k, const SolverConfig& config);

}  // namespace spx
