#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "spx/common.hpp"

namespace spx {

/// Ground truth behind a synthetic feature matrix.
struct SyntheticTruth {
  Matrix true_vertices;  // k x dim
  Matrix true_weights;   // n x k, row-stochastic
  double noise_sigma = 0.0;
};

/// Samples a k-vertex simplex cloud with known ground truth:
///   - vertices i.i.d. standard normal, rescaled so the minimum pairwise
///     distance equals `separation`;
///   - n weight rows from a symmetric Dirichlet(concentration), with the
///     first k rows overwritten by the one-hot corners so every true vertex
///     is witnessed by a data point;
///   - X = W D plus Gaussian noise of standard deviation noise_sigma.
/// Deterministic per seed.
std::pair<Matrix, SyntheticTruth> generate_synthetic(int k, int n, int dim, double noise_sigma,
                                                     double separation, double concentration,
                                                     std::uint64_t seed);

/// Same weight/noise sampling against a fixed vertex matrix. Used to build
/// multi-image datasets whose images share one simplex.
std::pair<Matrix, SyntheticTruth> generate_with_vertices(const Matrix& vertices, int n,
                                                         double noise_sigma,
                                                         double concentration,
                                                         std::uint64_t seed);

void save_truth(const SyntheticTruth& truth, const std::filesystem::path& path);
SyntheticTruth load_truth(const std::filesystem::path& path);

}  // namespace spx
