#include "sigmaflow/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sigmaflow/error.hpp"
#include "sigmaflow/io.hpp"

namespace sigmaflow {

namespace {

constexpr double kConditionLimit = 1e8;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct UnitHalfspace {
  Eigen::VectorXd normal;
  double offset;
  std::string label;
};

UnitHalfspace normalize(const Halfspace& h) {
  const double len = h.normal.norm();
  if (!(len > 0.0)) throw DomainError("halfspace with zero normal");
  return {h.normal / len, h.offset / len, h.label};
}

std::size_t common_dim(const std::vector<Halfspace>& hs) {
  if (hs.empty()) throw DomainError("polytope needs at least one halfspace");
  const auto n = static_cast<std::size_t>(hs.front().normal.size());
  for (const auto& h : hs)
    if (static_cast<std::size_t>(h.normal.size()) != n) throw DomainError("mixed halfspace dimensions");
  if (n < 1 || n > 3) throw DomainError("polytopes are supported for dimension 1 to 3");
  return n;
}

// Intersections of n-subsets of bounding hyperplanes that satisfy every halfspace.
std::vector<Point> halfspace_vertices(const std::vector<UnitHalfspace>& hs, std::size_t n) {
  double scale = 1.0;
  for (const auto& h : hs) scale = std::max(scale, std::abs(h.offset));
  const double tol = 1e-9 * scale;
  std::vector<Point> out;
  std::vector<std::size_t> pick(n);
  const std::size_t m = hs.size();
  if (m < n + 1) throw DomainError("too few halfspaces to bound a polytope");
  std::vector<bool> mask(m, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n), true);
  do {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!mask[i]) continue;
      a.row(row) = hs[i].normal.transpose();
      b(row) = hs[i].offset;
      ++row;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < static_cast<Eigen::Index>(n)) continue;
    const Eigen::VectorXd x = lu.solve(b);
    const bool feasible = std::all_of(hs.begin(), hs.end(), [&](const UnitHalfspace& h) {
      return h.normal.dot(x) <= h.offset + tol;
    });
    if (feasible) out.push_back(x);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  if (out.empty()) throw DomainError("halfspaces have empty intersection");
  return out;
}

}  // namespace

Polytope Polytope::from_hull(HullResult hull) {
  Polytope p;
  p.dim_ = static_cast<std::size_t>(hull.vertices.front().size());
  p.vertices_ = std::move(hull.vertices);
  p.volume_ = hull.volume;
  for (auto& f : hull.facets) p.facets_.push_back({std::move(f.normal), f.offset, {}, std::move(f.vertices)});
  return p;
}

void Polytope::attach_labels(const std::vector<Halfspace>& halfspaces) {
  for (const Halfspace& raw : halfspaces) {
    if (raw.label.empty()) continue;
    const UnitHalfspace h = normalize(raw);
    for (Facet& f : facets_) {
      if ((f.normal - h.normal).norm() <= 1e-9 &&
          std::abs(f.offset - h.offset) <= 1e-9 * std::max(1.0, std::abs(h.offset))) {
        f.label = h.label;
      }
    }
  }
}

Polytope Polytope::from_vertices(const std::vector<Point>& points) {
  return from_hull(convex_hull(points));
}

Polytope Polytope::from_halfspaces(const std::vector<Halfspace>& halfspaces) {
  const std::size_t n = common_dim(halfspaces);
  std::vector<UnitHalfspace> hs;
  for (const auto& h : halfspaces) hs.push_back(normalize(h));
  Polytope p = from_hull(convex_hull(halfspace_vertices(hs, n)));
  p.attach_labels(halfspaces);
  return p;
}

Polytope Polytope::from_both(const std::vector<Point>& points,
                             const std::vector<Halfspace>& halfspaces) {
  Polytope v = from_vertices(points);
  const Polytope h = from_halfspaces(halfspaces);
  if (v.dim() != h.dim()) throw DomainError("vertex and halfspace dimensions differ");
  const double tol = 10.0 * hull_tolerance(v.vertices());
  auto covered = [tol](const std::vector<Point>& a, const std::vector<Point>& b) {
    return std::all_of(a.begin(), a.end(), [&](const Point& x) {
      return std::any_of(b.begin(), b.end(),
                         [&](const Point& y) { return (x - y).lpNorm<Eigen::Infinity>() <= tol; });
    });
  };
  if (v.vertices().size() != h.vertices().size() || !covered(v.vertices(), h.vertices()) ||
      !covered(h.vertices(), v.vertices()))
    throw DomainError("vertex list and halfspaces describe different polytopes");
  v.attach_labels(halfspaces);
  return v;
}

Polytope Polytope::translated(const Eigen::VectorXd& shift) const {
  if (static_cast<std::size_t>(shift.size()) != dim_) throw DomainError("translation dimension mismatch");
  Polytope p = *this;
  for (Point& x : p.vertices_) x += shift;
  for (Facet& f : p.facets_) f.offset += f.normal.dot(shift);
  return p;
}

Polytope Polytope::scaled(double t) const {
  if (!(t > 0.0)) throw DomainError("polytope scale factor must be positive");
  Polytope p = *this;
  for (Point& x : p.vertices_) x *= t;
  for (Facet& f : p.facets_) f.offset *= t;
  p.volume_ *= std::pow(t, static_cast<double>(dim_));
  return p;
}

bool Polytope::contains(const Eigen::VectorXd& x, double tol) const {
  return std::all_of(facets_.begin(), facets_.end(),
                     [&](const Facet& f) { return f.normal.dot(x) <= f.offset + tol; });
}

double Polytope::support(const Eigen::VectorXd& u) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const Point& v : vertices_) best = std::max(best, u.dot(v));
  return best;
}

Polytope minkowski_sum(const Polytope& p, const Polytope& q) {
  if (p.dim() != q.dim()) throw DomainError("minkowski_sum: dimension mismatch");
  std::vector<Point> pts;
  pts.reserve(p.vertices().size() * q.vertices().size());
  for (const Point& a : p.vertices())
    for (const Point& b : q.vertices()) pts.push_back(a + b);
  return Polytope::from_vertices(pts);
}

double combination_volume(const Polytope& p, const Polytope& q, double s, double t) {
  if (p.dim() != q.dim()) throw DomainError("combination_volume: dimension mismatch");
  if (s < 0.0 || t < 0.0 || (s == 0.0 && t == 0.0))
    throw DomainError("combination_volume: need s, t >= 0, not both zero");
  if (t == 0.0) return p.volume() * std::pow(s, static_cast<double>(p.dim()));
  if (s == 0.0) return q.volume() * std::pow(t, static_cast<double>(q.dim()));
  std::vector<Point> pts;
  for (const Point& a : p.vertices())
    for (const Point& b : q.vertices()) pts.push_back(s * a + t * b);
  return convex_hull(pts).volume;
}

double mixed_volume(const Polytope& p, const Polytope& q, int k) {
  if (p.dim() != q.dim()) throw DomainError("mixed_volume: dimension mismatch");
  const int n = static_cast<int>(p.dim());
  if (k < 0 || k > n) throw DomainError("mixed_volume: k must lie in [0, n]");
  if (k == n) return p.volume();
  if (k == 0) return q.volume();

  Eigen::MatrixXd m(n + 1, n + 1);
  Eigen::VectorXd vol(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double s = static_cast<double>(j) / n;
    const double t = 1.0 - s;
    for (int c = 0; c <= n; ++c) m(j, c) = binomial(n, c) * std::pow(s, c) * std::pow(t, n - c);
    vol(j) = combination_volume(p, q, s, t);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  if (!(cond < kConditionLimit)) {
    std::ostringstream log;
    log << "mixed_volume: interpolation ill conditioned (cond " << cond << "); samples:";
    for (int j = 0; j <= n; ++j) log << " (s=" << static_cast<double>(j) / n << ", vol=" << vol(j) << ")";
    throw NumericError(log.str());
  }
  const Eigen::VectorXd coef = m.colPivHouseholderQr().solve(vol);
  return coef(k);
}

Polytope polytope_from_json(const nlohmann::json& j, const std::string& context) {
  io::require_keys(j, {"vertices", "halfspaces"}, context);
  std::vector<Point> points;
  std::vector<Halfspace> hs;
  if (j.contains("vertices")) {
    const auto& vs = j.at("vertices");
    if (!vs.is_array()) throw ConfigError("key '" + context + ".vertices' must be an array");
    for (const auto& v : vs) {
      if (!v.is_array()) throw ConfigError("key '" + context + ".vertices' must hold arrays");
      Point x(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError("key '" + context + ".vertices' must hold numbers");
        x(static_cast<Eigen::Index>(i)) = v[i].get<double>();
      }
      points.push_back(x);
    }
  }
  if (j.contains("halfspaces")) {
    const auto& arr = j.at("halfspaces");
    if (!arr.is_array()) throw ConfigError("key '" + context + ".halfspaces' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string ctx = context + ".halfspaces[" + std::to_string(i) + "]";
      io::require_keys(arr[i], {"normal", "offset", "label"}, ctx);
      const std::vector<double> nrm = io::get_vector(arr[i], "normal", ctx);
      Halfspace h;
      h.normal = Eigen::Map<const Eigen::VectorXd>(nrm.data(), static_cast<Eigen::Index>(nrm.size()));
      h.offset = io::get_number(arr[i], "offset", ctx);
      h.label = io::get_string_or(arr[i], "label", "", ctx);
      hs.push_back(std::move(h));
    }
  }
  try {
    if (!points.empty() && !hs.empty()) return Polytope::from_both(points, hs);
    if (!points.empty()) return Polytope::from_vertices(points);
    if (!hs.empty()) return Polytope::from_halfspaces(hs);
  } catch (const DomainError& e) {
    throw ConfigError("invalid polytope '" + context + "': " + e.what());
  }
  throw ConfigError("polytope '" + context + "' needs vertices or halfspaces");
}

nlohmann::json polytope_to_json(const Polytope& p) {
  nlohmann::json verts = nlohmann::json::array();
  for (const Point& v : p.vertices()) verts.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  nlohmann::json hs = nlohmann::json::array();
  for (const Facet& f : p.facets()) {
    nlohmann::json h = {{"normal", std::vector<double>(f.normal.data(), f.normal.data() + f.normal.size())},
                        {"offset", f.offset}};
    if (!f.label.empty()) h["label"] = f.label;
    hs.push_back(h);
  }
  return {{"vertices", verts}, {"halfspaces", hs}};
}

}  // namespace sigmaflow
