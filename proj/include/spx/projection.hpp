#pragma once

#include "spx/common.hpp"

namespace spx {

/// Orthonormal basis of the 2-D plane through three affinely independent
/// anchor points.
struct PlaneBasis {
  Vector origin;  // first anchor
  Vector u;       // unit vector along anchor1 - anchor0
  Vector v;       // unit vector completing the plane, orthogonal to u
};

/// Throws InvalidInputError when the anchors are (numerically) collinear.
PlaneBasis plane_through(const Vector& a0, const Vector& a1, const Vector& a2);

/// In-plane coordinates of the orthogonal projection of each row.
Eigen::Matrix<double, Eigen::Dynamic, 2> project_points(const PlaneBasis& basis,
                                                        const Matrix& points);

/// Maps plane coordinates back to the ambient space.
Vector unproject(const PlaneBasis& basis, double x, double y);

}  // namespace spx
