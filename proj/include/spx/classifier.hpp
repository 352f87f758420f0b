#pragma once

#include <span>
#include <string>
#include <vector>

#include "spx/common.hpp"
#include "spx/solver.hpp"

namespace spx {

// One-shot classification by nearest vertex: every image is summarized by
// its simplex vertices shrunk toward the mean crop feature, and a query
// takes the label of the support image owning the globally closest vertex.

struct ImageRepresentation {
  std::string image_id;
  Matrix shrunk_vertices;  // chosen_k x dim
  Vector crop_mean;        // dim
  int chosen_k = 0;
};

struct SupportImage {
  ImageRepresentation rep;
  std::string label;
};

struct ClassificationResult {
  std::string predicted_label;
  double best_distance = 0.0;  // Euclidean distance of the argmin pair
  int query_vertex = -1;
  int support_index = -1;  // position in the supports list
  std::string support_image_id;
  int support_vertex = -1;
};

/// alpha * vertex + (1 - alpha) * crop_mean, per row. alpha = 1 keeps the
/// vertices untouched, alpha = 0 collapses them all onto the mean.
Matrix shrink_vertices(const Matrix& vertices, const Vector& crop_mean, double alpha);

/// Builds the representation of one image from its crop features and a
/// fitted model: exact arithmetic mean of the rows, vertices shrunk by alpha.
ImageRepresentation make_representation(const std::string& image_id, const Matrix& features,
                                        const SimplexModel& model, double alpha);

/// Minimum Euclidean distance over all (query vertex, support vertex) pairs.
/// Ties break deterministically: lowest support index, then lowest support
/// vertex index, then lowest query vertex index.
ClassificationResult classify(const ImageRepresentation& query,
                              std::span<const SupportImage> supports);

}  // namespace spx
