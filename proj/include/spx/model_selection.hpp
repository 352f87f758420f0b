#pragma once

#include <span>
#include <vector>

#include "spx/solver.hpp"

namespace spx {

// Elbow selection of the vertex count: fit k = 1..k_max, keep increasing k
// while the reconstruction error shrinks by at least ratio_threshold.

struct SelectionConfig {
  int k_max = 3;
  double ratio_threshold = 1.5;
  int restarts_per_k = 3;  // best-of-restarts guards against poor stationary points
  SolverConfig solver;
};

struct SelectionResult {
  int chosen_k = 1;
  std::vector<double> errors;        // reconstruction error, index k-1
  std::vector<SimplexModel> models;  // best-of-restarts model per k, index k-1

  const SimplexModel& chosen() const { return models[chosen_k - 1]; }
};

/// The elbow walk on a recorded error sequence (errors[i] belongs to k = i+1):
/// accept k+1 iff errors[k-1] / errors[k] >= ratio_threshold, stop at the
/// first rejection. A perfect fit (error 0) is accepted unless the previous
/// error is already 0.
int choose_k_from_errors(std::span<const double> errors, double ratio_threshold);

/// Runs `restarts` solves with seeds derived from config.seed by (k, restart)
/// and returns the model with the lowest reconstruction error. The derived
/// seeds depend only on (config.seed, k, restart index), so enlarging the
/// restart budget never worsens the best error.
SimplexModel best_of_restarts(const Matrix& features, int k, int restarts,
                              const SolverConfig& config);

SelectionResult select_k(const Matrix& features, const SelectionConfig& config);

}  // namespace spx
