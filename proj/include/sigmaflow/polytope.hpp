#pragma once

// Convex polytopes in R^n, n <= 3, held in both vertex and facet form.

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sigmaflow/hull.hpp"

namespace sigmaflow {

// normal . x <= offset, normal pointing out of the polytope.
struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
  std::string label;
};

struct Facet {
  Eigen::VectorXd normal;  // outward, unit length
  double offset = 0.0;
  std::string label;
  std::vector<std::size_t> vertices;
};

class Polytope {
 public:
  static Polytope from_vertices(const std::vector<Point>& points);
  // Redundant halfspaces are allowed; labels attach to the facets they carve.
  static Polytope from_halfspaces(const std::vector<Halfspace>& halfspaces);
  // Both descriptions must give the same set; throws DomainError otherwise.
  static Polytope from_both(const std::vector<Point>& points,
                            const std::vector<Halfspace>& halfspaces);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<Facet>& facets() const noexcept { return facets_; }
  double volume() const noexcept { return volume_; }

  Polytope translated(const Eigen::VectorXd& v) const;
  Polytope scaled(double t) const;
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
  double support(const Eigen::VectorXd& u) const;

 private:
  static Polytope from_hull(HullResult hull);
  void attach_labels(const std::vector<Halfspace>& halfspaces);

  std::size_t dim_ = 0;
  std::vector<Point> vertices_;
  std::vector<Facet> facets_;
  double volume_ = 0.0;
};

Polytope minkowski_sum(const Polytope& p, const Polytope& q);
// Vol(sP + tQ) for s, t >= 0, not both zero; either may vanish.
double combination_volume(const Polytope& p, const Polytope& q, double s, double t);
// V(P[k], Q[n-k]) by interpolating Vol(sP + tQ) at n+1 ratios.
// Throws NumericError carrying the sample log if the fit is ill conditioned.
double mixed_volume(const Polytope& p, const Polytope& q, int k);

// {"vertices": [[...]], "halfspaces": [{"normal": [...], "offset": x, "label": s}]}
Polytope polytope_from_json(const nlohmann::json& j, const std::string& context);
nlohmann::json polytope_to_json(const Polytope& p);

}  // namespace sigmaflow
