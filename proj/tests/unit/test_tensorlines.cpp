#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "shearless/errors.hpp"
#include "shearless/tensorlines.hpp"

using namespace shearless;

namespace {

GridSpec square_grid(double half, int n) {
  return {{-half, -half}, 2.0 * half / (n - 1), 2.0 * half / (n - 1), n, n, std::nullopt};
}

/// C with eigenvalues l1 < l2 and the minor eigenvector at angle phi.
Sym2 rotated(double l1, double l2, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
}

/// Strainlines are circles about the origin.
StrainField circular_field() {
  return make_strain_field(square_grid(1.0, 201), [](const Vec2& p) {
    return rotated(0.5, 2.0, std::atan2(p.y, p.x) + 0.5 * std::numbers::pi);
  });
}

/// Smoothly rotating eigenframe with varying contrast.
StrainField wavy_field() {
  return make_strain_field(square_grid(1.0, 161), [](const Vec2& p) {
    const double l2 = 2.0 + 0.5 * std::sin(2.0 * p.x + p.y);
    return rotated(1.0 / l2, l2, 0.6 * std::sin(1.5 * p.x) * std::cos(1.2 * p.y));
  });
}

double distance_to_polyline(const Vec2& q, const Polyline& line) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 d = line[i + 1] - line[i];
    const double t = std::clamp(dot(q - line[i], d) / dot(d, d), 0.0, 1.0);
    best = std::min(best, norm(q - (line[i] + t * d)));
  }
  return best;
}

}  // namespace

TEST_SUITE("tensorlines") {

TEST_CASE("eigvec_at on a constant field") {
  const auto field = make_strain_field(square_grid(1.0, 11), [](const Vec2&) { return Sym2{1.0, 0.0, 4.0}; });
  const Vec2 fwd = eigvec_at(field, {0.1, 0.2}, Family::Strain, {0.3, 0.9});
  const Vec2 back = eigvec_at(field, {0.1, 0.2}, Family::Strain, {-0.3, 0.9});
  CHECK(fwd.x == doctest::Approx(1.0));
  CHECK(back.x == doctest::Approx(-1.0));
  CHECK(std::abs(eigvec_at(field, {0.0, 0.0}, Family::Stretch, {0.0, -1.0}).y + 1.0) < 1e-12);

  const auto flat = make_strain_field(square_grid(1.0, 11), [](const Vec2&) { return Sym2{1.0, 0.0, 1.0 + 2e-7}; });
  CHECK_THROWS_AS(eigvec_at(flat, {0.0, 0.0}, Family::Strain, {1.0, 0.0}), IsotropicPoint);
  CHECK_THROWS_AS(eigvec_at(field, {3.0, 0.0}, Family::Strain, {1.0, 0.0}), DomainEscape);
}

TEST_CASE("straight strainline on a constant field reaches the boundary") {
  const auto field = make_strain_field(square_grid(1.0, 21), [](const Vec2&) { return Sym2{1.0, 0.0, 4.0}; });
  const auto line = integrate_tensorline(field, {0.0, 0.0}, Family::Strain, {1.0, 0.0}, {});
  CHECK(line.end.tag == EndTag::Boundary);
  for (const Vec2& v : line.vertices) CHECK(std::abs(v.y) < 1e-12);
  CHECK(line.vertices.back().x == doctest::Approx(1.0).epsilon(0.03));
  CHECK(line.arclength == doctest::Approx(polyline_length(line.vertices)));
}

TEST_CASE("circular strainlines keep their radius and respect the length cap") {
  const auto field = circular_field();
  StopConfig stop;
  stop.max_length = std::numbers::pi * 0.6;
  const auto line = integrate_tensorline(field, {0.6, 0.0}, Family::Strain, {0.0, 1.0}, stop);
  CHECK(line.end.tag == EndTag::LengthCap);
  for (const Vec2& v : line.vertices) CHECK(norm(v) == doctest::Approx(0.6).epsilon(1e-3));
  CHECK(line.vertices.back().x == doctest::Approx(-0.6).epsilon(1e-2));
  for (std::size_t i = 0; i + 2 < line.vertices.size(); ++i)
    CHECK(dot(line.vertices[i + 1] - line.vertices[i], line.vertices[i + 2] - line.vertices[i + 1]) > 0.0);
}

TEST_CASE("capture at a target singularity") {
  const auto field = make_strain_field(square_grid(1.0, 41), [](const Vec2&) { return Sym2{1.0, 0.0, 4.0}; });
  StopConfig stop;
  stop.targets = {{7, {0.5, 0.0}, 0.0}, {8, {-0.5, 0.0}, 0.0}};
  const auto line = integrate_tensorline(field, {0.0, 0.0}, Family::Strain, {1.0, 0.0}, stop);
  CHECK(line.end.tag == EndTag::Singularity);
  CHECK(line.end.singularity == 7);
  CHECK(norm(line.vertices.back() - Vec2{0.5, 0.0}) <= stop.resolved_capture(field));
}

TEST_CASE("reversibility: forward and backward halves form one curve") {
  const auto field = wavy_field();
  StopConfig stop;
  stop.max_length = 0.8;
  const Vec2 x0{0.1, -0.2};
  const Vec2 d = eigvec_at(field, x0, Family::Strain, {1.0, 0.0});
  const auto fwd = integrate_tensorline(field, x0, Family::Strain, d, stop);
  const auto back = integrate_tensorline(field, x0, Family::Strain, -d, stop);
  REQUIRE(fwd.vertices.size() > 10);
  REQUIRE(back.vertices.size() > 10);
  CHECK(fwd.vertices.front() == x0);
  CHECK(back.vertices.front() == x0);
  const Vec2 t_fwd = normalized(fwd.vertices[1] - x0);
  const Vec2 t_back = normalized(back.vertices[1] - x0);
  // First chords differ from the tangent by O(curvature * step).
  CHECK(dot(t_fwd, t_back) < -1.0 + 1e-4);
  // The halves meet only at x0.
  const double h = stop.resolved_step(field);
  for (std::size_t i = 2; i < back.vertices.size(); ++i)
    CHECK(distance_to_polyline(back.vertices[i], fwd.vertices) > 0.5 * h);

  // Retracing from the end point returns to x0.
  const Vec2 end = fwd.vertices.back();
  const Vec2 t_end = normalized(end - fwd.vertices[fwd.vertices.size() - 2]);
  StopConfig retrace = stop;
  retrace.max_length = fwd.arclength + 2.0 * h;
  const auto ret = integrate_tensorline(field, end, Family::Strain, -t_end, retrace);
  CHECK(distance_to_polyline(x0, ret.vertices) < 1e-2 * h);
}

TEST_CASE("strain and stretch tangents are orthogonal") {
  const auto field = wavy_field();
  for (Vec2 p : {Vec2{0.3, 0.3}, Vec2{-0.55, 0.12}, Vec2{0.71, -0.64}}) {
    const Vec2 s = eigvec_at(field, p, Family::Strain, {1.0, 0.0});
    const Vec2 t = eigvec_at(field, p, Family::Stretch, {0.0, 1.0});
    CHECK(std::abs(dot(s, t)) < 1e-3);
  }
}

TEST_CASE("tensorlines are null geodesics of the shear") {
  const auto field = wavy_field();
  StopConfig stop;
  stop.max_length = 1.5;
  for (Family fam : {Family::Strain, Family::Stretch}) {
    for (Vec2 x0 : {Vec2{0.0, 0.0}, Vec2{-0.4, 0.5}, Vec2{0.3, -0.6}}) {
      const auto line = integrate_tensorline(field, x0, fam, {1.0, 1.0}, stop);
      REQUIRE(line.vertices.size() > 3);
      CHECK(max_shear_residual(field, line.vertices) <= stop.p_tol);
      CHECK(std::abs(averaged_shear(field, line.vertices)) <= stop.p_tol);
    }
  }
}

TEST_CASE("line export") {
  const auto field = make_strain_field(square_grid(1.0, 21), [](const Vec2&) { return Sym2{1.0, 0.0, 4.0}; });
  const auto line = integrate_tensorline(field, {0.0, 0.0}, Family::Stretch, {0.0, 1.0}, {});
  CHECK(line.family == Family::Stretch);
  CHECK(std::string(to_string(line.end.tag)) == "boundary");
}

}  // TEST_SUITE
