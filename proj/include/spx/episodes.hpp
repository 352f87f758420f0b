#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spx/dataset.hpp"

namespace spx {

/// One sampled few-shot task: `way` classes, one support image per class,
/// `queries_per_class` query images per class. Support and query ids are
/// disjoint by construction.
struct EpisodeSpec {
  int way = 5;
  int shots = 1;  // this pipeline is 1-shot only
  int queries_per_class = 15;
  std::vector<std::string> class_labels;  // sampled classes, length `way`
  std::vector<std::string> support_ids;   // one per class, aligned with class_labels
  std::vector<std::string> query_ids;     // way * queries_per_class
  std::vector<int> query_class;           // ground truth slot in [0, way) per query
  std::uint64_t seed = 0;
};

/// Uniformly samples `way` distinct classes, then per class one support and
/// `queries_per_class` queries without replacement. Deterministic per seed.
/// Throws InvalidInputError when the dataset has fewer than `way` classes or
/// a sampled class has fewer than 1 + queries_per_class images.
EpisodeSpec sample_episode(const FeatureDataset& dataset, int way, int queries_per_class,
                           std::uint64_t seed);

}  // namespace spx
