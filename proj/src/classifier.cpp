#include "spx/classifier.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace spx {

Matrix shrink_vertices(const Matrix& vertices, const Vector& crop_mean, double alpha) {
  if (vertices.cols() != crop_mean.size()) {
    std::ostringstream msg;
    msg << "vertices have dim " << vertices.cols() << " but crop_mean has dim "
        << crop_mean.size();
    throw DimensionError(msg.str());
  }
  if (alpha < 0.0 || alpha > 1.0) throw InvalidInputError("alpha must be in [0, 1]");
  Matrix out = alpha * vertices;
  out.rowwise() += (1.0 - alpha) * crop_mean.transpose();
  return out;
}

ImageRepresentation make_representation(const std::string& image_id, const Matrix& features,
                                        const SimplexModel& model, double alpha) {
  ImageRepresentation rep;
  rep.image_id = image_id;
  rep.crop_mean = features.colwise().mean();
  rep.shrunk_vertices = shrink_vertices(model.vertices, rep.crop_mean, alpha);
  rep.chosen_k = model.k;
  return rep;
}

ClassificationResult classify(const ImageRepresentation& query,
                              std::span<const SupportImage> supports) {
  if (supports.empty()) throw InvalidInputError("supports must be non-empty");
  const Eigen::Index dim = query.shrunk_vertices.cols();
  for (const SupportImage& s : supports) {
    if (s.rep.shrunk_vertices.cols() != dim) {
      throw DimensionError("support vertices do not match the query dimension");
    }
  }

  ClassificationResult best;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t si = 0; si < supports.size(); ++si) {
    const Matrix& sv = supports[si].rep.shrunk_vertices;
    for (Eigen::Index v = 0; v < sv.rows(); ++v) {
      for (Eigen::Index q = 0; q < query.shrunk_vertices.rows(); ++q) {
        const double d2 = (query.shrunk_vertices.row(q) - sv.row(v)).squaredNorm();
        if (d2 < best_sq) {
          best_sq = d2;
          best.predicted_label = supports[si].label;
          best.query_vertex = static_cast<int>(q);
          best.support_index = static_cast<int>(si);
          best.support_image_id = supports[si].rep.image_id;
          best.support_vertex = static_cast<int>(v);
        }
      }
    }
  }
  best.best_distance = std::sqrt(best_sq);
  return best;
}

}  // namespace spx
