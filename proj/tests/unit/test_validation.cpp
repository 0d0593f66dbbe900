#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "shearless/errors.hpp"
#include "shearless/systems.hpp"
#include "shearless/validation.hpp"

using namespace shearless;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Polyline sine_samples(double spacing) {
  Polyline p;
  const int n = static_cast<int>(std::lround(1.0 / spacing));
  for (int i = 0; i <= n; ++i) p.push_back({i * spacing, std::sin(kTwoPi * i * spacing)});
  return p;
}

/// Point-set Hausdorff distance between densified polylines (brute force).
double brute_hausdorff(const Polyline& a, const Polyline& b, int refine) {
  auto densify = [refine](const Polyline& p) {
    Polyline d;
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
      for (int k = 0; k < refine; ++k) d.push_back(p[i] + (p[i + 1] - p[i]) * (static_cast<double>(k) / refine));
    d.push_back(p.back());
    return d;
  };
  const Polyline da = densify(a), db = densify(b);
  auto directed = [](const Polyline& from, const Polyline& to) {
    double worst = 0.0;
    for (const Vec2& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& q : to) best = std::min(best, norm(p - q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(da, db), directed(db, da));
}

Polyline random_polyline(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> len(1, 12);
  Polyline p(static_cast<std::size_t>(len(rng)));
  for (auto& v : p) v = {u(rng), u(rng)};
  return p;
}

}  // namespace

TEST_SUITE("validation") {

TEST_CASE("indicator seeds and first images") {
  const double a = 0.08, b = 0.125;
  const auto seeds = sntm_indicator_points(a);
  CHECK(seeds[0].x == doctest::Approx(0.29));
  CHECK(seeds[1].x == doctest::Approx(-0.21));

  const auto one = indicator_barrier(a, b, 1);
  REQUIRE(one.size() == 4);
  for (const Vec2& s : seeds) {
    const double y1 = -b * std::sin(kTwoPi * s.x);
    const double x1 = wrap_periodic(s.x + a * (1.0 - y1 * y1), -0.5, 1.0);
    bool seen_seed = false, seen_image = false;
    for (const Vec2& p : one) {
      seen_seed = seen_seed || norm(p - s) < 1e-15;
      seen_image = seen_image || norm(p - Vec2{x1, y1}) < 1e-15;
    }
    CHECK(seen_seed);
    CHECK(seen_image);
  }
  for (std::size_t i = 0; i + 1 < one.size(); ++i) CHECK(one[i].x <= one[i + 1].x);
}

TEST_CASE("indicator orbit stays bounded and symmetric") {
  const auto orbit = indicator_barrier(0.08, 0.125, 200);
  CHECK(orbit.size() == 402);
  double y_max = 0.0;
  for (const Vec2& p : orbit) {
    y_max = std::max(y_max, std::abs(p.y));
    CHECK(p.x >= -0.5);
    CHECK(p.x < 0.5);
  }
  // Reference run: 0.256594.
  CHECK(y_max <= 0.2566);
  // The union of both orbits is invariant under (x, y) -> (x + 1/2, -y).
  for (const Vec2& p : orbit) {
    const Vec2 q{wrap_periodic(p.x + 0.5, -0.5, 1.0), -p.y};
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& r : orbit) best = std::min(best, periodic_distance(q, r, 1.0));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("Hausdorff distance examples") {
  const Polyline a{{0.0, 0.0}, {1.0, 0.0}};
  CHECK(hausdorff_distance(a, a) == 0.0);
  CHECK(hausdorff_distance(a, {{0.0, 0.3}, {1.0, 0.3}}) == doctest::Approx(0.3));
  CHECK_THROWS_AS(hausdorff_distance({}, a), InvalidInput);

  const Polyline coarse = sine_samples(0.1);
  const Polyline dense = sine_samples(1e-4);
  const double d = hausdorff_distance(coarse, dense);
  CHECK(d < 0.15);
  CHECK(d == doctest::Approx(brute_hausdorff(coarse, sine_samples(1e-3), 50)).epsilon(5e-3));
}

TEST_CASE("periodic Hausdorff distance wraps x") {
  const Polyline left{{-0.49, 0.0}, {-0.45, 0.0}};
  const Polyline right{{0.47, 0.0}, {0.49, 0.0}};
  CHECK(hausdorff_distance(left, right, 1.0) == doctest::Approx(0.06));
  CHECK(hausdorff_distance(left, right) == doctest::Approx(0.96));
}

TEST_CASE("Hausdorff metric axioms on random polylines") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 300; ++k) {
    const Polyline a = random_polyline(rng), b = random_polyline(rng), c = random_polyline(rng);
    const double ab = hausdorff_distance(a, b);
    CHECK(ab == hausdorff_distance(b, a));
    CHECK(ab >= 0.0);
    CHECK(hausdorff_distance(a, a) == 0.0);
    CHECK(hausdorff_distance(a, c) <= ab + hausdorff_distance(b, c) + 1e-12);
    const std::optional<double> period = 2.0;
    CHECK(hausdorff_distance(a, b, period) == hausdorff_distance(b, a, period));
    CHECK(hausdorff_distance(a, c, period) <=
          hausdorff_distance(a, b, period) + hausdorff_distance(b, c, period) + 1e-12);
  }
}

TEST_CASE("FTLE profiles") {
  const auto flat = make_strain_field({{-1.0, -1.0}, 0.1, 0.1, 21, 21, std::nullopt},
                                      [](const Vec2&) { return Sym2{1.0, 0.0, 4.0}; });
  CHECK(ftle_transverse_profile(flat, 0.0, -0.9, 0.9, 37).trenches.empty());

  StrainFieldOptions opt{41, 37, 0.0, 1.0};
  const auto shear = compute_strain_field(canonical_shear_flow(), {-1.0, 1.0, -0.9, 0.9}, opt);
  const auto prof = ftle_transverse_profile(shear, 0.13, -0.8, 0.8, 81);
  CHECK(prof.y.size() == 81);
  REQUIRE(prof.trenches.size() == 1);
  CHECK(std::abs(prof.trenches[0]) <= 0.02);
}

TEST_CASE("blob stretch ratio") {
  CHECK(blob_stretch_ratio(canonical_shear_flow(), {0.0, 0.3}, 0.05, 32, 0.0, 0.0) == doctest::Approx(1.0));
  SolverConfig tight;
  tight.abs_tol = tight.rel_tol = 1e-11;
  CHECK(blob_stretch_ratio(rigid_rotation_flow(), {0.4, 0.2}, 0.1, 64, 0.0, 3.0, tight) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(blob_stretch_ratio(canonical_shear_flow(), {0.0, 0.5}, 0.05, 64, 0.0, 2.0) > 1.5);
  CHECK_THROWS_AS(blob_stretch_ratio(canonical_shear_flow(), {0.0, 0.5}, 0.05, 8, 0.0, 2.0), InvalidInput);
}

TEST_CASE("metric reports") {
  const auto ok = MetricReport::bounded("d", 0.01, 0.02);
  CHECK(ok.pass);
  const auto bad = MetricReport::bounded("d", 0.03, 0.02);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(MetricReport::bounded("d", std::nan(""), 0.02).pass);
}

}  // TEST_SUITE
