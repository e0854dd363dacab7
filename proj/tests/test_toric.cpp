#include <doctest.h>

#include <cmath>
#include <vector>

#include "sigmaflow/error.hpp"
#include "sigmaflow/random.hpp"
#include "sigmaflow/toric.hpp"

using namespace sigmaflow;

namespace {

Point pt(std::initializer_list<double> c) {
  Point p(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (double x : c) p(i++) = x;
  return p;
}

Halfspace hs(std::initializer_list<double> normal, double offset, std::string label = "") {
  return {pt(normal), offset, std::move(label)};
}

Polytope triangle(double a) {
  return Polytope::from_halfspaces({hs({-1, 0}, 0, "D1"), hs({0, -1}, 0, "D2"), hs({1, 1}, a, "H")});
}

// Bl_p CP^2 class H - bE as a trapezoid.
Polytope blowup(double b) {
  return Polytope::from_halfspaces(
      {hs({-1, 0}, 0, "D1"), hs({0, -1}, 0, "D2"), hs({1, 1}, 1, "H"), hs({-1, -1}, -b, "E")});
}

// Hexagon with the fan of CP^2 blown up at three points.
Polytope hexagon(const std::vector<double>& off) {
  return Polytope::from_halfspaces({hs({-1, 0}, off[0], "a"), hs({0, -1}, off[1], "b"),
                                    hs({1, 0}, off[2], "c"), hs({0, 1}, off[3], "d"),
                                    hs({1, 1}, off[4], "e"), hs({-1, -1}, off[5], "f")});
}

Polytope random_polygon(Rng& rng) {
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(pt({rng.uniform(-1, 1), rng.uniform(-1, 1)}));
  return Polytope::from_vertices(pts);
}

}  // namespace

TEST_CASE("volumes") {
  CHECK(Polytope::from_vertices({pt({0, 0}), pt({1, 0}), pt({0, 1}), pt({1, 1})}).volume() ==
        doctest::Approx(1.0));
  CHECK(triangle(3.0).volume() == doctest::Approx(4.5));
  const Polytope sq = Polytope::from_vertices({pt({0, 0}), pt({1, 0}), pt({0, 1}), pt({1, 1})});
  CHECK(minkowski_sum(sq, sq).volume() == doctest::Approx(4.0));
  // Unit square with one corner cut: 1 - 1/2.
  CHECK(Polytope::from_vertices({pt({0, 0}), pt({1, 0}), pt({1, 1}), pt({0, 1}), pt({0.5, 0.5})})
            .volume() == doctest::Approx(1.0));
  CHECK(Polytope::from_vertices({pt({0, 0}), pt({2, 0}), pt({2, 1}), pt({1, 2}), pt({0, 1})}).volume() ==
        doctest::Approx(3.0));
  const Polytope cube = Polytope::from_vertices({pt({0, 0, 0}), pt({1, 0, 0}), pt({0, 1, 0}), pt({0, 0, 1}),
                                                 pt({1, 1, 0}), pt({1, 0, 1}), pt({0, 1, 1}), pt({1, 1, 1})});
  CHECK(cube.volume() == doctest::Approx(1.0));
  CHECK_THROWS_AS(Polytope::from_vertices({pt({0, 0}), pt({1, 1}), pt({2, 2})}), DomainError);
}

TEST_CASE("mixed volume examples") {
  const Polytope sq = Polytope::from_vertices({pt({0, 0}), pt({1, 0}), pt({0, 1}), pt({1, 1})});
  const Polytope seg_box = Polytope::from_vertices({pt({0, 0}), pt({2, 0}), pt({0, 1}), pt({2, 1})});
  // Vol(s Q + t P) = (s + 2t)(s + t): mixed coefficient 3/2.
  CHECK(mixed_volume(seg_box, sq, 1) == doctest::Approx(1.5));
  Rng rng(31);
  for (int i = 0; i < 5; ++i) {
    const Polytope p = random_polygon(rng);
    for (int k = 0; k <= 2; ++k) CHECK(mixed_volume(p, p, k) == doctest::Approx(p.volume()).epsilon(1e-10));
  }
}

TEST_CASE("mixed volume properties") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const Polytope p = random_polygon(rng);
    const Polytope q = random_polygon(rng);
    for (int k = 0; k <= 2; ++k) {
      const double v = mixed_volume(p, q, k);
      CHECK(v == doctest::Approx(mixed_volume(q, p, 2 - k)).epsilon(1e-9));
      const double t = rng.uniform(0.5, 2.0);
      CHECK(mixed_volume(p.scaled(t), q, k) == doctest::Approx(std::pow(t, k) * v).epsilon(1e-10));
      // P inside P + small box is a nested pair.
      const Polytope bigger = minkowski_sum(p, Polytope::from_vertices(
                                                   {pt({0, 0}), pt({0.1, 0}), pt({0, 0.1}), pt({0.1, 0.1})}));
      CHECK(mixed_volume(p, q, k) <= mixed_volume(bigger, q, k) + 1e-12);
    }
  }
}

TEST_CASE("primitive directions") {
  Eigen::VectorXd u(2);
  u << 0.5, -1.5;
  const Eigen::VectorXi p = primitive_direction(u);
  CHECK(p(0) == 1);
  CHECK(p(1) == -3);
  u << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(primitive_direction(u) == Eigen::Vector2i(1, 1));
  u << 1.0, std::sqrt(2.0);
  CHECK_THROWS_AS(primitive_direction(u), DomainError);
}

TEST_CASE("intersection numbers on CP2") {
  for (double a : {1.0, 2.0, 3.0}) {
    const Polytope chi = triangle(a), alpha = triangle(1.0);
    CHECK(intersection_number(chi, alpha, 2, 0) == doctest::Approx(a * a));
    CHECK(intersection_number(chi, alpha, 1, 1) == doctest::Approx(a));
    CHECK(intersection_number(chi, alpha, 0, 2) == doctest::Approx(1.0));
  }
}

TEST_CASE("stability examples") {
  for (double a : {1.0, 2.0, 3.0}) {
    const StabilityReport r = stability_report(triangle(a), triangle(1.0));
    CHECK(r.c == doctest::Approx(2.0 / a));
    CHECK(r.verdict == Verdict::SolvableJ);
  }
  const StabilityReport u = stability_report(blowup(0.1), blowup(0.5));
  CHECK(u.c == doctest::Approx(2.0 * 0.95 / 0.99));
  CHECK(u.verdict == Verdict::Unstable);
  CHECK(u.witness == "E");
  for (const FaceMargin& f : u.faces)
    if (f.id == "E") CHECK(f.margin == doctest::Approx(u.c * 0.1 - 0.5));

  const StabilityReport s = stability_report(blowup(0.1), blowup(0.1));
  CHECK(s.c == doctest::Approx(2.0));
  CHECK(s.verdict == Verdict::SolvableJ);
  for (const FaceMargin& f : s.faces) {
    CHECK(f.margin > 0.0);
    if (f.id == "E") CHECK(f.margin == doctest::Approx(0.1));
  }
}

TEST_CASE("supplied constant takes the inequality branch") {
  StabilityOptions opt;
  opt.c = 3.0;
  const StabilityReport r = stability_report(triangle(1.0), triangle(1.0), opt);
  CHECK(r.c_supplied);
  CHECK(r.global_value > 0.0);
  CHECK(r.verdict == Verdict::SolvableTwisted);
  opt.c = 1.0;
  CHECK(stability_report(triangle(1.0), triangle(1.0), opt).verdict == Verdict::Unstable);
}

TEST_CASE("equality case and two-dimensional edge pairings") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto offsets = [&] {
      std::vector<double> o{rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.2),
                            rng.uniform(0.8, 1.2)};
      o.push_back(rng.uniform(1.2, 1.5));
      o.push_back(rng.uniform(1.2, 1.5));
      return o;
    };
    const Polytope chi = hexagon(offsets()), alpha = hexagon(offsets());
    const StabilityReport r = stability_report(chi, alpha);
    CHECK(std::abs(r.global_value) <= 1e-10 * std::max(1.0, r.c * r.chi_top));
    CHECK(r.verdict != Verdict::SolvableTwisted);
    // Edge margins are the lattice pairings c len_chi(F) - len_alpha(F).
    bool all_positive = true;
    const auto chi_faces = enumerate_faces(chi);
    const auto alpha_faces = enumerate_faces(alpha);
    for (const FaceMargin& m : r.faces) {
      if (m.dim != 1) continue;
      auto lattice_length = [&](const Polytope& p, const std::vector<Face>& faces) {
        for (const Face& f : faces) {
          if (f.normals != m.normals) continue;
          const Eigen::VectorXd e = p.vertices()[f.vertices[1]] - p.vertices()[f.vertices[0]];
          const Eigen::Vector2d dir(-f.normals[0](1), f.normals[0](0));
          return e.norm() / dir.norm();
        }
        return -1.0;
      };
      const double expect = r.c * lattice_length(chi, chi_faces) - lattice_length(alpha, alpha_faces);
      CHECK(m.margin == doctest::Approx(expect).epsilon(1e-9));
      all_positive = all_positive && expect > 1e-9;
    }
    CHECK((r.verdict == Verdict::SolvableJ) == all_positive);
  }
}

TEST_CASE("incompatible fans and inconsistent descriptions") {
  const Polytope sq = Polytope::from_vertices({pt({0, 0}), pt({1, 0}), pt({0, 1}), pt({1, 1})});
  CHECK_THROWS_AS(stability_report(triangle(1.0), sq), DomainError);
  CHECK_THROWS_AS(Polytope::from_both({pt({0, 0}), pt({1, 0}), pt({0, 1})},
                                      {hs({-1, 0}, 0), hs({0, -1}, 0), hs({1, 1}, 2)}),
                  DomainError);
}

TEST_CASE("polytope JSON") {
  const nlohmann::json j = {{"halfspaces",
                             {{{"normal", {-1, 0}}, {"offset", 0}, {"label", "D1"}},
                              {{"normal", {0, -1}}, {"offset", 0}},
                              {{"normal", {1, 1}}, {"offset", 2}}}}};
  CHECK(polytope_from_json(j, "chi").volume() == doctest::Approx(2.0));
  CHECK_THROWS_AS(polytope_from_json({{"vertex", {{0, 0}}}}, "chi"), ConfigError);
}
