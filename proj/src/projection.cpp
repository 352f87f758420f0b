#include "spx/projection.hpp"

namespace spx {

PlaneBasis plane_through(const Vector& a0, const Vector& a1, const Vector& a2) {
  if (a0.size() != a1.size() || a0.size() != a2.size()) {
    throw DimensionError("anchor points must share one dimension");
  }
  const Vector e1 = a1 - a0;
  const Vector e2 = a2 - a0;
  const double scale = std::max({e1.norm(), e2.norm(), 1.0});
  if (e1.norm() <= 1e-12 * scale) {
    throw InvalidInputError("anchors are collinear (first two coincide)");
  }
  PlaneBasis basis;
  basis.origin = a0;
  basis.u = e1 / e1.norm();
  Vector residual = e2 - e2.dot(basis.u) * basis.u;
  if (residual.norm() <= 1e-9 * scale) {
    throw InvalidInputError("anchors are collinear");
  }
  basis.v = residual / residual.norm();
  return basis;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> project_points(const PlaneBasis& basis,
                                                        const Matrix& points) {
  if (points.cols() != basis.origin.size()) {
    throw DimensionError("points do not match the anchor dimension");
  }
  Eigen::Matrix<double, Eigen::Dynamic, 2> coords(points.rows(), 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vector centered = points.row(i).transpose() - basis.origin;
    coords(i, 0) = centered.dot(basis.u);
    coords(i, 1) = centered.dot(basis.v);
  }
  return coords;
}

Vector unproject(const PlaneBasis& basis, double x, double y) {
  return basis.origin + x * basis.u + y * basis.v;
}

}  // namespace spx
