#include "sigmaflow/toric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "sigmaflow/error.hpp"
#include "sigmaflow/io.hpp"

namespace sigmaflow {

namespace {

constexpr int kMaxDenominator = 1000;

using NormalKey = std::vector<std::vector<int>>;

std::vector<int> to_vec(const Eigen::VectorXi& v) { return {v.data(), v.data() + v.size()}; }

NormalKey key_of(const std::vector<Eigen::VectorXi>& normals) {
  NormalKey k;
  for (const auto& n : normals) k.push_back(to_vec(n));
  std::sort(k.begin(), k.end());
  return k;
}

double factorial(std::size_t p) {
  double f = 1.0;
  for (std::size_t i = 2; i <= p; ++i) f *= static_cast<double>(i);
  return f;
}

std::string normal_text(const Eigen::VectorXi& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v(i));
  }
  return s + ")";
}

Eigen::Vector3i cross3(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
  return Eigen::Vector3i(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2),
                         a(0) * b(1) - a(1) * b(0));
}

Eigen::VectorXi make_primitive(Eigen::VectorXi v) {
  int g = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) g = std::gcd(g, std::abs(v(i)));
  if (g > 1) v /= g;
  return v;
}

}  // namespace

Eigen::VectorXi primitive_direction(const Eigen::VectorXd& u) {
  const double top = u.lpNorm<Eigen::Infinity>();
  if (!(top > 0.0)) throw DomainError("primitive_direction: zero vector");
  const Eigen::VectorXd w = u / top;
  for (int q = 1; q <= kMaxDenominator; ++q) {
    const Eigen::VectorXd v = w * q;
    bool ok = true;
    for (Eigen::Index i = 0; i < v.size() && ok; ++i)
      ok = std::abs(v(i) - std::round(v(i))) <= 1e-7 * q;
    if (!ok) continue;
    Eigen::VectorXi r(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) r(i) = static_cast<int>(std::lround(v(i)));
    return make_primitive(r);
  }
  throw DomainError("facet normal is not a rational direction");
}

Eigen::MatrixXi face_lattice_basis(const std::vector<Eigen::VectorXi>& normals, std::size_t n) {
  if (normals.empty() || normals.size() >= n) throw DomainError("face_lattice_basis: bad codim");
  if (n == 2) {
    const Eigen::VectorXi& u = normals.front();
    Eigen::MatrixXi b(2, 1);
    b << -u(1), u(0);
    return b;
  }
  if (n != 3) throw DomainError("face_lattice_basis: dimension must be 2 or 3");
  if (normals.size() == 2) {
    Eigen::MatrixXi b(3, 1);
    b.col(0) = make_primitive(cross3(normals[0], normals[1]));
    if (b.col(0).isZero()) throw DomainError("face_lattice_basis: parallel normals");
    return b;
  }
  // Facet: b1 x b2 = +-u gives a basis of u^perp in Z^3.
  const Eigen::VectorXi& u = normals.front();
  const int radius = u.cwiseAbs().maxCoeff() + 1;
  std::vector<Eigen::Vector3i> cands;
  for (int x = -radius; x <= radius; ++x)
    for (int y = -radius; y <= radius; ++y)
      for (int z = -radius; z <= radius; ++z) {
        Eigen::Vector3i v(x, y, z);
        if (!v.isZero() && v(0) * u(0) + v(1) * u(1) + v(2) * u(2) == 0) cands.push_back(v);
      }
  std::stable_sort(cands.begin(), cands.end(), [](const Eigen::Vector3i& a, const Eigen::Vector3i& b) {
    return a.squaredNorm() < b.squaredNorm();
  });
  const Eigen::Vector3i target(u(0), u(1), u(2));
  for (std::size_t i = 0; i < cands.size(); ++i)
    for (std::size_t j = i + 1; j < cands.size(); ++j) {
      const Eigen::Vector3i c = cands[i].cross(cands[j]);
      if (c == target || c == -target) {
        Eigen::MatrixXi b(3, 2);
        b.col(0) = cands[i];
        b.col(1) = cands[j];
        return b;
      }
    }
  throw NumericError("face_lattice_basis: no lattice basis found for " + normal_text(u));
}

std::vector<Face> enumerate_faces(const Polytope& p) {
  const std::size_t n = p.dim();
  const auto& facets = p.facets();
  std::vector<Eigen::VectorXi> prim;
  std::vector<std::string> names;
  for (const Facet& f : facets) {
    prim.push_back(primitive_direction(f.normal));
    names.push_back(f.label.empty() ? normal_text(prim.back()) : f.label);
  }
  std::vector<std::set<std::size_t>> on_facet(facets.size());
  for (std::size_t f = 0; f < facets.size(); ++f)
    on_facet[f].insert(facets[f].vertices.begin(), facets[f].vertices.end());

  std::vector<Face> faces;
  auto add = [&](const std::vector<std::size_t>& which, std::vector<std::size_t> verts) {
    Face face;
    face.codim = std::min(which.size(), n);
    std::vector<std::size_t> order = which;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return to_vec(prim[a]) < to_vec(prim[b]);
    });
    for (std::size_t f : order) {
      face.normals.push_back(prim[f]);
      face.id += (face.id.empty() ? "" : "&") + names[f];
    }
    face.vertices = std::move(verts);
    faces.push_back(std::move(face));
  };

  for (std::size_t f = 0; f < facets.size(); ++f)
    add({f}, {on_facet[f].begin(), on_facet[f].end()});
  if (n == 3) {
    for (std::size_t f = 0; f < facets.size(); ++f)
      for (std::size_t g = f + 1; g < facets.size(); ++g) {
        std::vector<std::size_t> shared;
        std::set_intersection(on_facet[f].begin(), on_facet[f].end(), on_facet[g].begin(),
                              on_facet[g].end(), std::back_inserter(shared));
        if (shared.size() >= 2) add({f, g}, shared);
      }
  }
  if (n >= 2) {
    for (std::size_t v = 0; v < p.vertices().size(); ++v) {
      std::vector<std::size_t> which;
      for (std::size_t f = 0; f < facets.size(); ++f)
        if (on_facet[f].count(v)) which.push_back(f);
      add(which, {v});
      faces.back().codim = n;
    }
  } else {
    for (Face& f : faces) f.codim = 1;  // endpoints of an interval
  }
  std::stable_sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) {
    if (a.codim != b.codim) return a.codim < b.codim;
    return key_of(a.normals) < key_of(b.normals);
  });
  return faces;
}

Polytope face_polytope(const Polytope& p, const Face& face) {
  const std::size_t n = p.dim();
  if (face.codim >= n) throw DomainError("face_polytope: face is a point");
  const Eigen::MatrixXd basis = face_lattice_basis(face.normals, n).cast<double>();
  const Eigen::VectorXd origin = p.vertices()[face.vertices.front()];
  const auto solver = basis.colPivHouseholderQr();
  std::vector<Point> coords;
  for (std::size_t v : face.vertices) coords.push_back(solver.solve(p.vertices()[v] - origin));
  return Polytope::from_vertices(coords);
}

void require_compatible_fans(const Polytope& chi, const Polytope& alpha) {
  if (chi.dim() != alpha.dim()) throw DomainError("polytopes live in different dimensions");
  std::set<NormalKey> a, b;
  for (const Face& f : enumerate_faces(chi)) a.insert(key_of(f.normals));
  for (const Face& f : enumerate_faces(alpha)) b.insert(key_of(f.normals));
  if (a != b) throw DomainError("incompatible normal fans: classes are not on the same toric manifold");
}

double intersection_number(const Polytope& chi, const Polytope& alpha, int a, int b) {
  const int n = static_cast<int>(chi.dim());
  if (a < 0 || b < 0 || a + b != n) throw DomainError("intersection_number: need a + b = n");
  require_compatible_fans(chi, alpha);
  return factorial(static_cast<std::size_t>(n)) * mixed_volume(chi, alpha, a);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::SolvableJ: return "solvable-J";
    case Verdict::SolvableTwisted: return "solvable-twisted";
    case Verdict::Unstable: return "unstable";
  }
  return "unknown";
}

StabilityReport stability_report(const Polytope& chi, const Polytope& alpha,
                                 const StabilityOptions& options) {
  require_compatible_fans(chi, alpha);
  const std::size_t n = chi.dim();
  const int ni = static_cast<int>(n);
  StabilityReport r;
  r.chi_top = factorial(n) * chi.volume();
  r.chi_alpha = factorial(n) * mixed_volume(chi, alpha, ni - 1);
  r.c_supplied = options.c.has_value();
  r.c = options.c.value_or(static_cast<double>(n) * r.chi_alpha / r.chi_top);
  r.global_value = r.c * r.chi_top - static_cast<double>(n) * r.chi_alpha;

  const std::vector<Face> chi_faces = enumerate_faces(chi);
  std::map<NormalKey, const Face*> alpha_faces;
  const std::vector<Face> alpha_list = enumerate_faces(alpha);
  for (const Face& f : alpha_list) alpha_faces[key_of(f.normals)] = &f;

  for (const Face& f : chi_faces) {
    FaceMargin m;
    m.id = f.id;
    m.codim = f.codim;
    m.dim = n - f.codim;
    m.normals = f.normals;
    if (m.dim == 0) {
      m.margin = r.c;
    } else {
      const Polytope fc = face_polytope(chi, f);
      const Polytope fa = face_polytope(alpha, *alpha_faces.at(key_of(f.normals)));
      const auto p = static_cast<int>(m.dim);
      m.margin = factorial(m.dim) * (r.c * fc.volume() - p * mixed_volume(fc, fa, p - 1));
    }
    r.faces.push_back(std::move(m));
  }

  const auto worst = std::min_element(r.faces.begin(), r.faces.end(),
                                      [](const FaceMargin& a, const FaceMargin& b) { return a.margin < b.margin; });
  const double scale = std::max(1.0, std::abs(r.c * r.chi_top));
  if (worst != r.faces.end() && worst->margin <= options.margin_tol) {
    r.verdict = Verdict::Unstable;
    r.witness = worst->id;
  } else if (r.global_value < -options.equality_tol * scale) {
    r.verdict = Verdict::Unstable;
    r.witness = "global";
  } else if (std::abs(r.global_value) <= options.equality_tol * scale) {
    r.verdict = Verdict::SolvableJ;
  } else {
    r.verdict = Verdict::SolvableTwisted;
  }
  return r;
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json faces = nlohmann::json::array();
  for (const FaceMargin& f : r.faces) {
    nlohmann::json normals = nlohmann::json::array();
    for (const auto& v : f.normals) normals.push_back(to_vec(v));
    faces.push_back({{"id", f.id}, {"codim", f.codim}, {"dim", f.dim}, {"normals", normals},
                     {"margin", f.margin}});
  }
  nlohmann::json j = {{"c", r.c},
                      {"c_supplied", r.c_supplied},
                      {"int_chi_n", r.chi_top},
                      {"int_chi_n1_alpha", r.chi_alpha},
                      {"global_value", r.global_value},
                      {"verdict", to_string(r.verdict)},
                      {"faces", faces}};
  if (!r.witness.empty()) j["witness"] = r.witness;
  return j;
}

std::string face_table_csv(const StabilityReport& r) {
  io::CsvWriter csv({"face", "dim", "margin"});
  for (const FaceMargin& f : r.faces)
    csv.add_row({"\"" + f.id + "\"", std::to_string(f.dim), io::format_double(f.margin)});
  return csv.str();
}

}  // namespace sigmaflow
