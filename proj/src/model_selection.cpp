#include "spx/model_selection.hpp"

#include <sstream>

namespace spx {

int choose_k_from_errors(std::span<const double> errors, double ratio_threshold) {
  if (errors.empty()) throw InvalidInputError("empty error sequence");
  if (ratio_threshold <= 1.0) throw InvalidInputError("ratio_threshold must be > 1");
  int chosen = 1;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double prev = errors[i - 1];
    const double next = errors[i];
    const bool accept = (next == 0.0) ? (prev > 0.0) : (prev / next >= ratio_threshold);
    if (!accept) break;
    chosen = static_cast<int>(i) + 1;
  }
  return chosen;
}

SimplexModel best_of_restarts(const Matrix& features, int k, int restarts,
                              const SolverConfig& config) {
  if (restarts < 1) throw InvalidInputError("restarts must be >= 1");
  SimplexModel best;
  for (int r = 0; r < restarts; ++r) {
    SolverConfig run = config;
    run.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k),
                           static_cast<std::uint64_t>(r));
    SimplexModel model = solve(features, k, run);
    if (r == 0 || model.recon_error < best.recon_error) best = std::move(model);
  }
  return best;
}

SelectionResult select_k(const Matrix& features, const SelectionConfig& config) {
  if (config.k_max < 1) throw InvalidInputError("k_max must be >= 1");
  if (config.ratio_threshold <= 1.0) throw InvalidInputError("ratio_threshold must be > 1");
  if (features.rows() < config.k_max) {
    std::ostringstream msg;
    msg << "need at least k_max=" << config.k_max << " points, got " << features.rows();
    throw InvalidInputError(msg.str());
  }

  SelectionResult result;
  for (int k = 1; k <= config.k_max; ++k) {
    result.models.push_back(best_of_restarts(features, k, config.restarts_per_k, config.solver));
    result.errors.push_back(result.models.back().recon_error);
  }
  result.chosen_k = choose_k_from_errors(result.errors, config.ratio_threshold);
  return result;
}

}  // namespace spx
