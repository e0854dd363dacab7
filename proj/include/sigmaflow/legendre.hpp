#pragma once

// Discrete Legendre transform h(y) = sup_x (x.y - g(x)) by dense search over
// the source nodes, refined by a local quadratic model at the maximizer.

#include <cstddef>

#include <json.hpp>

#include "sigmaflow/dirichlet_grid.hpp"

namespace sigmaflow {

struct LegendreOptions {
  double shrink = 0.9;     // output box = bounding box of the gradient image scaled about its center
  std::size_t points = 0;  // per axis on the output grid; 0 keeps the source count
  bool refine = true;
  Exec exec = Exec::Parallel;
};

struct GradientImage {
  std::vector<double> lo, hi;  // bounding box of central-difference gradients at interior nodes
};
GradientImage gradient_image(const ConvexGridFunction& g);

// Output lives on a square box; a node is valid when its maximizer is an
// interior source node. Throws DomainError when the gradient image has empty
// interior or no output node is valid.
ConvexGridFunction legendre_transform(const ConvexGridFunction& g, const LegendreOptions& options = {});

// Config: {"source": {"n", "domain", "points", "function"}, "points", "shrink", "refine"}.
struct LegendreConfig {
  ConvexGridFunction source;
  LegendreOptions options;
};
LegendreConfig legendre_config_from_json(const nlohmann::json& j);

}  // namespace sigmaflow
