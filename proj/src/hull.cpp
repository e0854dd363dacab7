#include "sigmaflow/hull.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sigmaflow/error.hpp"

namespace sigmaflow {

namespace {

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

std::vector<Point> dedupe(const std::vector<Point>& points, double tol) {
  std::vector<Point> out;
  for (const Point& p : points) {
    const bool seen = std::any_of(out.begin(), out.end(),
                                  [&](const Point& q) { return (p - q).lpNorm<Eigen::Infinity>() <= tol; });
    if (!seen) out.push_back(p);
  }
  return out;
}

// Orthonormal e1, e2 with (e1, e2, n) right handed.
std::pair<Eigen::Vector3d, Eigen::Vector3d> plane_basis(const Eigen::Vector3d& n) {
  Eigen::Vector3d helper = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  Eigen::Vector3d e1 = (helper - helper.dot(n) * n).normalized();
  Eigen::Vector3d e2 = n.cross(e1);
  return {e1, e2};
}

HullResult hull_1d(const std::vector<Point>& pts, double tol) {
  auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                      [](const Point& a, const Point& b) { return a(0) < b(0); });
  if ((*hi)(0) - (*lo)(0) <= tol) throw DomainError("degenerate hull: points do not span R^1");
  HullResult r;
  r.vertices = {*lo, *hi};
  r.facets.push_back({Eigen::VectorXd::Constant(1, -1.0), -(*lo)(0), {0}});
  r.facets.push_back({Eigen::VectorXd::Constant(1, 1.0), (*hi)(0), {1}});
  r.volume = (*hi)(0) - (*lo)(0);
  return r;
}

HullResult hull_2d(const std::vector<Point>& pts, double tol) {
  std::vector<Eigen::Vector2d> p2;
  p2.reserve(pts.size());
  for (const Point& p : pts) p2.emplace_back(p(0), p(1));
  const std::vector<std::size_t> idx = planar_hull(p2, tol);
  if (idx.size() < 3) throw DomainError("degenerate hull: points do not span R^2");
  HullResult r;
  std::vector<Eigen::Vector2d> ccw;
  for (std::size_t i : idx) {
    r.vertices.push_back(pts[i]);
    ccw.push_back(p2[i]);
  }
  r.volume = shoelace_area(ccw);
  if (r.volume <= tol * tol) throw DomainError("degenerate hull: zero area");
  const std::size_t m = idx.size();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = (i + 1) % m;
    const Eigen::Vector2d d = ccw[j] - ccw[i];
    Eigen::VectorXd nrm(2);
    nrm << d.y(), -d.x();
    nrm.normalize();
    r.facets.push_back({nrm, nrm.dot(r.vertices[i]), {i, j}});
  }
  return r;
}

HullResult hull_3d(const std::vector<Point>& pts, double tol) {
  const std::size_t m = pts.size();
  std::vector<Eigen::Vector3d> p3;
  p3.reserve(m);
  for (const Point& p : pts) p3.emplace_back(p(0), p(1), p(2));

  struct Plane {
    Eigen::Vector3d n;
    double off;
  };
  std::vector<Plane> planes;
  double extent = 0.0;
  for (std::size_t i = 1; i < m; ++i) extent = std::max(extent, (p3[i] - p3[0]).norm());

  // Triple-plane search: a plane through three points is a facet plane when
  // every point lies on one side of it.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      for (std::size_t k = j + 1; k < m; ++k) {
        Eigen::Vector3d nrm = (p3[j] - p3[i]).cross(p3[k] - p3[i]);
        const double len = nrm.norm();
        if (len <= tol * std::max(1.0, extent)) continue;
        nrm /= len;
        const double off = nrm.dot(p3[i]);
        bool pos = false, neg = false;
        for (std::size_t q = 0; q < m && !(pos && neg); ++q) {
          const double s = nrm.dot(p3[q]) - off;
          if (s > tol) pos = true;
          else if (s < -tol) neg = true;
        }
        if (pos && neg) continue;
        if (!pos && !neg) throw DomainError("degenerate hull: points do not span R^3");
        Plane pl = pos ? Plane{-nrm, -off} : Plane{nrm, off};
        const bool dup = std::any_of(planes.begin(), planes.end(), [&](const Plane& o) {
          return (o.n - pl.n).norm() <= 1e-9 && std::abs(o.off - pl.off) <= tol;
        });
        if (!dup) planes.push_back(pl);
      }
    }
  }
  if (planes.size() < 4) throw DomainError("degenerate hull: points do not span R^3");

  HullResult r;
  auto vertex_index = [&r, tol](const Eigen::Vector3d& x) {
    for (std::size_t v = 0; v < r.vertices.size(); ++v)
      if ((r.vertices[v] - Point(x)).lpNorm<Eigen::Infinity>() <= tol) return v;
    r.vertices.push_back(Point(x));
    return r.vertices.size() - 1;
  };
  double volume = 0.0;
  for (const Plane& pl : planes) {
    auto [e1, e2] = plane_basis(pl.n);
    std::vector<Eigen::Vector3d> on;
    std::vector<Eigen::Vector2d> proj;
    for (const auto& x : p3) {
      if (std::abs(pl.n.dot(x) - pl.off) <= tol) {
        on.push_back(x);
        proj.emplace_back(e1.dot(x), e2.dot(x));
      }
    }
    const std::vector<std::size_t> ring = planar_hull(proj, tol);
    if (ring.size() < 3) continue;
    std::vector<Eigen::Vector2d> poly;
    HullFacet f;
    f.normal = pl.n;
    f.offset = pl.off;
    for (std::size_t i : ring) {
      poly.push_back(proj[i]);
      f.vertices.push_back(vertex_index(on[i]));
    }
    volume += pl.off * shoelace_area(poly) / 3.0;
    r.facets.push_back(std::move(f));
  }
  r.volume = volume;
  if (r.volume <= tol * tol * tol) throw DomainError("degenerate hull: zero volume");
  return r;
}

}  // namespace

double hull_tolerance(const std::vector<Point>& points) {
  double scale = 1.0;
  for (const Point& p : points) scale = std::max(scale, p.lpNorm<Eigen::Infinity>());
  return 1e-9 * scale;
}

std::vector<std::size_t> planar_hull(const std::vector<Eigen::Vector2d>& pts, double tol) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&pts](std::size_t a, std::size_t b) {
    return pts[a].x() < pts[b].x() || (pts[a].x() == pts[b].x() && pts[a].y() < pts[b].y());
  });
  // Andrew's monotone chain.
  std::vector<std::size_t> hull(2 * pts.size() + 1);
  std::size_t k = 0;
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, p.lpNorm<Eigen::Infinity>());
  const double area_tol = tol * scale;
  for (std::size_t i : order) {
    while (k >= 2 && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= area_tol) --k;
    hull[k++] = i;
  }
  const std::size_t lower = k + 1;
  for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
    while (k >= lower && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[*it]) <= area_tol) --k;
    hull[k++] = *it;
  }
  hull.resize(k > 0 ? k - 1 : 0);
  // Near-duplicates can survive as adjacent entries.
  std::vector<std::size_t> out;
  for (std::size_t i : hull)
    if (out.empty() || (pts[out.back()] - pts[i]).lpNorm<Eigen::Infinity>() > tol) out.push_back(i);
  if (out.size() > 1 && (pts[out.front()] - pts[out.back()]).lpNorm<Eigen::Infinity>() <= tol)
    out.pop_back();
  return out;
}

double shoelace_area(const std::vector<Eigen::Vector2d>& ccw) {
  double a = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const auto& p = ccw[i];
    const auto& q = ccw[(i + 1) % ccw.size()];
    a += p.x() * q.y() - p.y() * q.x();
  }
  return 0.5 * a;
}

HullResult convex_hull(const std::vector<Point>& points) {
  if (points.empty()) throw DomainError("convex hull of an empty point set");
  const auto dim = static_cast<std::size_t>(points.front().size());
  for (const Point& p : points)
    if (static_cast<std::size_t>(p.size()) != dim) throw DomainError("mixed point dimensions");
  const double tol = hull_tolerance(points);
  const std::vector<Point> pts = dedupe(points, tol);
  switch (dim) {
    case 1: return hull_1d(pts, tol);
    case 2: return hull_2d(pts, tol);
    case 3: return hull_3d(pts, tol);
    default: throw DomainError("convex hulls are supported for dimension 1 to 3");
  }
}

}  // namespace sigmaflow
