#pragma once

// Toric intersection numbers and the face-wise stability criterion for a
// pair of Kaehler classes given by moment polytopes.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sigmaflow/polytope.hpp"

namespace sigmaflow {

// Primitive integer vector parallel to u. Throws DomainError when u is not a
// rational direction with denominators below 1000.
Eigen::VectorXi primitive_direction(const Eigen::VectorXd& u);

// Basis of the rank-p lattice orthogonal to the given primitive normals.
Eigen::MatrixXi face_lattice_basis(const std::vector<Eigen::VectorXi>& normals, std::size_t n);

struct Face {
  std::size_t codim = 0;
  std::vector<Eigen::VectorXi> normals;  // sorted primitive normals of the containing facets
  std::string id;
  std::vector<std::size_t> vertices;  // indices into the owning polytope's vertices
};

// Proper faces (facets, edges, vertices) keyed by their primitive normals,
// sorted by codim then lexicographic normals.
std::vector<Face> enumerate_faces(const Polytope& p);

// Face polytope in the lattice coordinates of its affine span (dim n - codim >= 1).
Polytope face_polytope(const Polytope& p, const Face& face);

// Throws DomainError unless both polytopes have the same face normals.
void require_compatible_fans(const Polytope& chi, const Polytope& alpha);

// int chi^a alpha^b = n! V(P_chi[a], P_alpha[b]), a + b = n.
double intersection_number(const Polytope& chi, const Polytope& alpha, int a, int b);

enum class Verdict { SolvableJ, SolvableTwisted, Unstable };
std::string to_string(Verdict v);

struct FaceMargin {
  std::string id;
  std::size_t codim = 0;
  std::size_t dim = 0;
  std::vector<Eigen::VectorXi> normals;
  double margin = 0.0;  // int_V c chi^p - p chi^{p-1} alpha
};

struct StabilityOptions {
  std::optional<double> c;  // default: equality case c int chi^n = n int chi^{n-1} alpha
  double margin_tol = 1e-9;
  double equality_tol = 1e-10;
};

struct StabilityReport {
  double c = 0.0;
  bool c_supplied = false;
  double chi_top = 0.0;    // int chi^n
  double chi_alpha = 0.0;  // int chi^{n-1} alpha
  double global_value = 0.0;  // c int chi^n - n int chi^{n-1} alpha
  std::vector<FaceMargin> faces;
  Verdict verdict = Verdict::Unstable;
  std::string witness;  // face id with the smallest margin, or "global"
};

StabilityReport stability_report(const Polytope& chi, const Polytope& alpha,
                                 const StabilityOptions& options = {});

nlohmann::json to_json(const StabilityReport& r);
std::string face_table_csv(const StabilityReport& r);

}  // namespace sigmaflow
