#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "spx/classifier.hpp"
#include "spx/dataset.hpp"
#include "spx/episodes.hpp"
#include "spx/model_selection.hpp"
#include "spx/synthetic.hpp"

namespace spx {

struct EvalConfig {
  long n_episodes = 100000;
  int way = 5;
  int queries_per_class = 15;
  double alpha = 0.75;      // vertex-side shrinkage coefficient
  bool k1_filter = false;   // restrict the episode pool to chosen_k == 1 images
  std::vector<double> lambda_sweep;  // one report per lambda when non-empty
  std::uint64_t seed = 0;
  bool cache_representations = true;
  int threads = 0;  // 0 = hardware concurrency; representation phase only
  SelectionConfig selection;
};

struct EvalReport {
  double accuracy_mean = 0.0;
  double ci95_halfwidth = 0.0;  // 1.96 * sample std / sqrt(episodes_used)
  std::vector<double> episode_accuracies;
  long episodes_used = 0;
  EvalConfig config;
};

/// Runs n_episodes 1-shot tasks end to end: per-image select_k + shrinkage
/// (computed once per image, reused across episodes), nearest-vertex
/// classification, accuracy aggregation. Deterministic for a fixed seed:
/// per-image and per-episode sub-seeds are derived by index, so threading
/// and caching cannot change any number.
EvalReport run_episodes(const FeatureDataset& dataset, const EvalConfig& config);

/// One run_episodes per lambda in config.lambda_sweep (same root seed).
std::vector<std::pair<double, EvalReport>> run_lambda_sweep(const FeatureDataset& dataset,
                                                            const EvalConfig& config);

/// Minimum-total-cost one-to-one matching of estimated vertex rows onto
/// truth rows under Euclidean distances. Returns (assignment, mean matched
/// distance) with assignment[i] = truth row matched to estimated row i.
std::pair<std::vector<int>, double> match_vertices(const Matrix& estimated, const Matrix& truth);

struct RecoveryReport {
  int chosen_k = 0;
  int true_k = 0;
  // set only when chosen_k == true_k
  std::optional<double> vertex_error;  // mean matched vertex distance
  std::optional<double> weight_error;  // mean row-wise total-variation distance
};

/// Scores select_k output against synthetic ground truth.
RecoveryReport recovery_score(const Matrix& features, const SyntheticTruth& truth,
                              const SelectionConfig& config);

void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

}  // namespace spx
