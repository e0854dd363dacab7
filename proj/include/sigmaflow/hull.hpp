#pragma once

// Convex hulls of small point sets in dimension 1, 2 and 3.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace sigmaflow {

using Point = Eigen::VectorXd;

struct HullFacet {
  Eigen::VectorXd normal;  // outward, unit length
  double offset = 0.0;     // normal . x <= offset on the hull
  // Indices into HullResult::vertices. Counterclockwise seen from outside in
  // 3D, (tail, head) of a counterclockwise boundary in 2D, one index in 1D.
  std::vector<std::size_t> vertices;
};

struct HullResult {
  std::vector<Point> vertices;
  std::vector<HullFacet> facets;
  double volume = 0.0;
};

// Geometric tolerance used for coplanarity and deduplication.
double hull_tolerance(const std::vector<Point>& points);

// Throws DomainError when the points do not span the ambient dimension.
HullResult convex_hull(const std::vector<Point>& points);

// Counterclockwise extreme points of a planar set; collinear points dropped.
std::vector<std::size_t> planar_hull(const std::vector<Eigen::Vector2d>& pts, double tol);
double shoelace_area(const std::vector<Eigen::Vector2d>& ccw);

}  // namespace sigmaflow
