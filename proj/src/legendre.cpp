#include "sigmaflow/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigmaflow/error.hpp"
#include "sigmaflow/io.hpp"
#include "sigmaflow/pde.hpp"

namespace sigmaflow {

namespace {

struct Best {
  double value;
  std::size_t node;
};

Best dense_sup(const ConvexGridFunction& g, const std::vector<std::size_t>& nodes, double y0, double y1) {
  const DirichletGrid& src = g.grid;
  Best best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k : nodes) {
    double v = src.coord(k, 0) * y0 - g.values[k];
    if (src.dim() == 2) v += src.coord(k, 1) * y1;
    if (v > best.value) best = {v, k};
  }
  return best;
}

// phi(x) = x.y - g(x) near an interior maximizer: quadratic model from
// central differences, step clamped to one cell per axis.
double refine_at(const ConvexGridFunction& g, std::size_t k, double y0, double y1, double base) {
  const DirichletGrid& src = g.grid;
  const double h = src.h();
  const std::array<double, 2> dg = grid_gradient(src, g.values, k);
  const Sym2 hg = grid_hessian(src, g.values, k);
  const double gx = y0 - dg[0];
  if (src.dim() == 1) {
    const double hxx = -hg.xx;
    if (!(hxx < 0.0)) return base;
    const double dx = std::clamp(-gx / hxx, -h, h);
    return std::max(base, base + gx * dx + 0.5 * hxx * dx * dx);
  }
  const double gy = y1 - dg[1];
  const double a = -hg.xx, b = -hg.xy, c = -hg.yy;
  const double det = a * c - b * b;
  if (!(a < 0.0 && det > 0.0)) return base;
  double dx = -(c * gx - b * gy) / det;
  double dy = -(a * gy - b * gx) / det;
  const double s = std::max(std::abs(dx), std::abs(dy)) / h;
  if (s > 1.0) {
    dx /= s;
    dy /= s;
  }
  return std::max(base, base + gx * dx + gy * dy + 0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy));
}

}  // namespace

GradientImage gradient_image(const ConvexGridFunction& g) {
  const std::size_t n = g.grid.dim();
  GradientImage im{std::vector<double>(n, std::numeric_limits<double>::infinity()),
                   std::vector<double>(n, -std::numeric_limits<double>::infinity())};
  for (std::size_t k : g.grid.interior()) {
    if (!g.valid[k]) continue;
    const auto d = grid_gradient(g.grid, g.values, k);
    for (std::size_t a = 0; a < n; ++a) {
      im.lo[a] = std::min(im.lo[a], d[a]);
      im.hi[a] = std::max(im.hi[a], d[a]);
    }
  }
  return im;
}

ConvexGridFunction legendre_transform(const ConvexGridFunction& g, const LegendreOptions& options) {
  const DirichletGrid& src = g.grid;
  const std::size_t n = src.dim();
  if (!(options.shrink > 0.0 && options.shrink <= 1.0)) throw DomainError("legendre shrink must lie in (0, 1]");
  if (convexity_certificate(src, g.values) <= 0.0)
    throw DomainError("legendre_transform needs a strictly convex source");
  const GradientImage im = gradient_image(g);
  double half = 0.0;
  std::vector<double> mid(n);
  for (std::size_t a = 0; a < n; ++a) {
    if (!(im.hi[a] > im.lo[a])) throw DomainError("gradient image has empty interior");
    mid[a] = 0.5 * (im.lo[a] + im.hi[a]);
    half = std::max(half, 0.5 * (im.hi[a] - im.lo[a]));
  }
  half *= options.shrink;
  domain::Box box{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t a = 0; a < n; ++a) {
    box.lo[a] = mid[a] - half;
    box.hi[a] = mid[a] + half;
  }
  const std::size_t points = options.points == 0 ? src.points() : options.points;
  DirichletGrid out(n, box, points);

  std::vector<std::size_t> sources;
  for (std::size_t k = 0; k < src.size(); ++k)
    if (src.active(k) && g.valid[k]) sources.push_back(k);

  ConvexGridFunction h;
  h.grid = out;
  h.values.assign(out.size(), 0.0);
  h.valid.assign(out.size(), 0);
  const auto m = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (options.exec == Exec::Parallel)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double y0 = out.coord(k, 0);
    const double y1 = n == 2 ? out.coord(k, 1) : 0.0;
    const Best best = dense_sup(g, sources, y0, y1);
    const bool inner = src.kind(best.node) == NodeKind::Interior;
    h.values[k] = inner && options.refine ? refine_at(g, best.node, y0, y1, best.value) : best.value;
    h.valid[k] = inner ? 1 : 0;
  }
  if (std::none_of(h.valid.begin(), h.valid.end(), [](char c) { return c != 0; }))
    throw DomainError("legendre_transform: no output node has an interior maximizer");
  return h;
}

LegendreConfig legendre_config_from_json(const nlohmann::json& j) {
  const std::string ctx = "legendre";
  io::require_object(j, ctx);
  io::require_keys(j, {"source", "points", "shrink", "refine"}, ctx);
  if (!j.contains("source")) throw ConfigError("missing key 'legendre.source'");
  const auto& s = j.at("source");
  io::require_object(s, ctx + ".source");
  io::require_keys(s, {"n", "domain", "points", "function"}, ctx + ".source");
  const DirichletGrid grid = dirichlet_grid_from_json(s, ctx + ".source");
  if (!s.contains("function")) throw ConfigError("missing key 'legendre.source.function'");
  const ScalarField f = scalar_field_from_json(s.at("function"), grid.dim(), ctx + ".source.function");
  LegendreConfig cfg;
  cfg.source = make_grid_function(grid, grid.sample(f));
  const long points = io::get_integer_or(j, "points", 0, ctx);
  if (points != 0 && points < 3) throw ConfigError("key 'legendre.points' must be 0 or >= 3");
  cfg.options.points = static_cast<std::size_t>(points);
  cfg.options.shrink = io::get_number_or(j, "shrink", cfg.options.shrink, ctx);
  cfg.options.refine = io::get_bool_or(j, "refine", cfg.options.refine, ctx);
  return cfg;
}

}  // namespace sigmaflow
