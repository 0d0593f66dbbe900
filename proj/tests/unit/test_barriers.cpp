#include <doctest.h>

#include <cmath>
#include <limits>

#include "shearless/barriers.hpp"
#include "shearless/systems.hpp"

using namespace shearless;

namespace {

GridSpec square_grid(double half, int n) {
  return {{-half, -half}, 2.0 * half / (n - 1), 2.0 * half / (n - 1), n, n, std::nullopt};
}

/// Horizontal strainlines whose neutrality (sqrt(l2) - 1)^2 has a transverse
/// profile set by `root` (sqrt(l2) as a function of y).
template <class Root>
StrainField layered_field(Root root) {
  return make_strain_field(square_grid(1.0, 101), [root](const Vec2& p) {
    const double l2 = root(p.y) * root(p.y);
    return Sym2{1.0 / l2, 0.0, l2};
  });
}

Connection horizontal_connection(double y, double x0, double x1, Family fam = Family::Strain) {
  Connection c;
  c.family = fam;
  c.from = 0;
  c.to = 1;
  c.tensorline.family = fam;
  for (int k = 0; k <= 100; ++k) c.tensorline.vertices.push_back({x0 + (x1 - x0) * k / 100.0, y});
  c.tensorline.start = {EndTag::Singularity, 0};
  c.tensorline.end = {EndTag::Singularity, 1};
  return c;
}

Singularity point(int id, Vec2 p, SingularityKind kind) {
  Singularity s;
  s.id = id;
  s.position = p;
  s.kind = kind;
  return s;
}

Tensorline line_through(const Polyline& v, int start_id, Family fam = Family::Strain) {
  Tensorline t;
  t.family = fam;
  t.vertices = v;
  t.start = {EndTag::Singularity, start_id};
  t.end = {EndTag::Seed, -1};
  return t;
}

Connection certified(int from, int to, Family fam, Polyline v) {
  Connection c;
  c.from = from;
  c.to = to;
  c.family = fam;
  c.tensorline = line_through(v, from, fam);
  c.tensorline.end = {EndTag::Singularity, to};
  c.convexity_ok = c.weak_min_ok = true;
  return c;
}

Polyline segment(Vec2 a, Vec2 b) {
  Polyline v;
  for (int k = 0; k <= 50; ++k) v.push_back(a + (b - a) * (k / 50.0));
  return v;
}

}  // namespace

TEST_SUITE("barriers") {

TEST_CASE("segment in a convex neutrality trench is certified") {
  const double y0 = 0.1;
  const auto field = layered_field([y0](double y) { return 2.0 + (y - y0) * (y - y0); });
  const auto c = certify_segment(field, horizontal_connection(y0, -0.6, 0.6));
  CHECK(c.samples > 10);
  CHECK(c.convexity_ok);
  CHECK(c.weak_min_ok);

  // Offset from the trench: the march reaches it through convex probes.
  const auto off = certify_segment(field, horizontal_connection(y0 + 0.05, -0.6, 0.6));
  CHECK(off.weak_min_ok);
}

TEST_CASE("segment on a neutrality ridge fails convexity") {
  const double y0 = -0.2;
  const auto field = layered_field([y0](double y) { return 2.0 - (y - y0) * (y - y0); });
  const auto c = certify_segment(field, horizontal_connection(y0, -0.6, 0.6));
  CHECK_FALSE(c.convexity_ok);
  CHECK_FALSE(c.certified());
}

TEST_CASE("raising the quorum never certifies more") {
  // Convex only for x > -0.2: roughly 65% of the samples pass.
  const auto field = make_strain_field(square_grid(1.0, 101), [](const Vec2& p) {
    const double bend = p.x > -0.2 ? 1.0 : -1.0;
    const double r = 2.0 + bend * p.y * p.y;
    return Sym2{1.0 / (r * r), 0.0, r * r};
  });
  int previous = std::numeric_limits<int>::max();
  for (double q : {0.0, 0.5, 0.6, 0.9, 1.0}) {
    CertifyConfig cfg;
    cfg.quorum = q;
    const int passed = certify_segment(field, horizontal_connection(0.0, -0.9, 0.9), cfg).convexity_ok ? 1 : 0;
    CHECK(passed <= previous);
    previous = passed;
  }
  CHECK(previous == 0);
}

TEST_CASE("connect_to_wedge") {
  const std::vector<Singularity> sings{point(1, {0.52, 0.0}, SingularityKind::Wedge),
                                       point(2, {-0.52, 0.0}, SingularityKind::Trisector)};
  const auto hit = connect_to_wedge(line_through(segment({0.0, 0.0}, {0.5, 0.0}), 5), sings, 0.05);
  REQUIRE(hit.has_value());
  CHECK(hit->from == 5);
  CHECK(hit->to == 1);
  CHECK(hit->tensorline.vertices.back() == Vec2{0.52, 0.0});
  CHECK(hit->tensorline.end.tag == EndTag::Singularity);

  // Tangent pointing away from the wedge.
  CHECK_FALSE(connect_to_wedge(line_through(segment({0.6, 0.0}, {0.5, 0.0}), 5), sings, 0.05));
  // Trisector-trisector near-connection.
  CHECK_FALSE(connect_to_wedge(line_through(segment({0.0, 0.0}, {-0.5, 0.0}), 5), sings, 0.05));
  // Line ending at the boundary far from any wedge.
  auto boundary = line_through(segment({0.0, 0.0}, {0.0, 1.0}), 5);
  boundary.end = {EndTag::Boundary, -1};
  CHECK_FALSE(connect_to_wedge(boundary, sings, 0.05));
  // Across the periodic seam.
  const std::vector<Singularity> seam{point(3, {0.98, 0.0}, SingularityKind::Wedge)};
  const auto across = connect_to_wedge(line_through(segment({-0.5, 0.0}, {-0.03, 0.0}), 4), seam, 0.05, 1.0);
  REQUIRE(across.has_value());
  CHECK(across->tensorline.vertices.back().x == doctest::Approx(-0.02));
}

TEST_CASE("chain assembly") {
  const auto field = make_strain_field(square_grid(3.0, 31), [](const Vec2&) { return Sym2{1.0, 0.0, 4.0}; });
  const std::vector<Singularity> sings{point(0, {0.0, 0.0}, SingularityKind::Trisector),
                                       point(1, {1.0, 0.0}, SingularityKind::Wedge),
                                       point(2, {2.0, 0.0}, SingularityKind::Trisector)};
  CHECK(assemble_chains({}, sings, field).empty());

  const std::vector<Connection> alternating{certified(0, 1, Family::Strain, segment({0, 0}, {1, 0})),
                                            certified(2, 1, Family::Stretch, segment({2, 0}, {1, 0}))};
  const auto chains = assemble_chains(alternating, sings, field);
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].segments.size() == 2);
  CHECK_FALSE(chains[0].closed);
  CHECK(chains[0].nodes.size() == 3);
  CHECK(chains[0].nodes[1] == 1);
  CHECK(assemble_chains(alternating, sings, field)[0].nodes == chains[0].nodes);

  // Same family at the junction: strict alternation splits the chain.
  const std::vector<Connection> same{certified(0, 1, Family::Strain, segment({0, 0}, {1, 0})),
                                     certified(2, 1, Family::Strain, segment({2, 0}, {1, 0}))};
  const auto split = assemble_chains(same, sings, field);
  CHECK(split.size() == 2);
  for (const auto& c : split) CHECK(c.segments.size() == 1);
  ChainConfig loose;
  loose.strict_alternation = false;
  CHECK(assemble_chains(same, sings, field, loose).size() == 1);

  // A sharp junction is not smooth.
  const std::vector<Connection> kinked{certified(0, 1, Family::Strain, segment({0, 0}, {1, 0})),
                                       certified(2, 1, Family::Stretch, segment({0.2, 0.4}, {1, 0}))};
  CHECK(assemble_chains(kinked, sings, field).size() == 2);

  // Uncertified connections are ignored.
  auto weak = alternating;
  weak[1].weak_min_ok = false;
  const auto partial = assemble_chains(weak, sings, field);
  REQUIRE(partial.size() == 1);
  CHECK(partial[0].segments.size() == 1);
}

TEST_CASE("closed chain around a periodic strip") {
  GridSpec grid{{0.0, -0.5}, 0.01, 0.01, 100, 101, 1.0};
  const auto field = make_strain_field(grid, [](const Vec2&) { return Sym2{1.0, 0.0, 4.0}; });
  const std::vector<Singularity> sings{point(0, {0.0, 0.0}, SingularityKind::Trisector),
                                       point(1, {0.25, 0.0}, SingularityKind::Wedge),
                                       point(2, {0.5, 0.0}, SingularityKind::Trisector),
                                       point(3, {0.75, 0.0}, SingularityKind::Wedge)};
  const std::vector<Connection> ring{certified(0, 1, Family::Strain, segment({0.0, 0}, {0.25, 0})),
                                     certified(2, 1, Family::Stretch, segment({0.5, 0}, {0.25, 0})),
                                     certified(2, 3, Family::Strain, segment({0.5, 0}, {0.75, 0})),
                                     certified(0, 3, Family::Stretch, segment({0.0, 0}, {-0.25, 0}))};
  const auto chains = assemble_chains(ring, sings, field);
  REQUIRE(chains.size() == 1);
  const auto& c = chains[0];
  CHECK(c.closed);
  CHECK(c.segments.size() == 4);
  CHECK(c.nodes.front() == c.nodes.back());
  for (std::size_t i = 0; i + 1 < c.segments.size(); ++i)
    CHECK(ring[c.segments[i].connection].family != ring[c.segments[i + 1].connection].family);
  CHECK(std::abs(c.polyline.back().x - c.polyline.front().x) == doctest::Approx(1.0));
}

TEST_CASE("hyperbolic scoring on degenerate inputs") {
  const auto field = make_strain_field(square_grid(1.0, 41), [](const Vec2&) { return Sym2{1.0, 0.0, 4.0}; });
  const std::vector<Vec2> seeds{{0.0, -0.1}, {0.0, 0.0}, {0.0, 0.1}};
  for (const auto& c : score_hyperbolic_candidates(field, seeds, Family::Strain, 0.15, {}, {}))
    CHECK_FALSE(c.is_local_extremum);
  const std::vector<Vec2> same{{0.0, 0.2}, {0.0, 0.2}, {0.0, 0.2}};
  for (const auto& c : score_hyperbolic_candidates(field, same, Family::Strain, 0.15, {}, {}))
    CHECK_FALSE(c.is_local_extremum);
}

TEST_CASE("counterexample: the stretchline on y = 0 is the attracting extremum") {
  StrainFieldOptions opt{101, 101, 0.0, 10.0};
  const auto field = compute_strain_field(ftle_counterexample_flow(), {-1.0, 1.0, -1.0, 1.0}, opt);
  std::vector<Vec2> seeds;
  for (int k = -3; k <= 3; ++k) seeds.push_back({0.0, 0.02 * k});
  StopConfig stop;
  stop.p_tol = std::numeric_limits<double>::infinity();
  const auto scored = score_hyperbolic_candidates(field, seeds, Family::Stretch, 0.05, stop, {});
  REQUIRE(scored.size() == seeds.size());
  for (const auto& c : scored) CHECK(c.is_local_extremum == (seeds[c.seed].y == 0.0));
}

TEST_CASE("pipeline is deterministic") {
  BarrierConfig cfg;
  cfg.field = {200, 400, 0.0, 100.0};
  cfg.classify.radius = 0.01;
  const auto map = standard_nontwist_map(0.08, 0.125);
  const auto first = extract_parabolic_barriers(map, map.domain(), cfg);
  const auto second = extract_parabolic_barriers(map, map.domain(), cfg);
  REQUIRE(first.singularities.size() == second.singularities.size());
  for (std::size_t i = 0; i < first.singularities.size(); ++i)
    CHECK(first.singularities[i].position == second.singularities[i].position);
  REQUIRE(first.connections.size() == second.connections.size());
  for (std::size_t i = 0; i < first.connections.size(); ++i)
    CHECK(first.connections[i].tensorline.vertices == second.connections[i].tensorline.vertices);
  REQUIRE(first.chains.size() == second.chains.size());
  for (std::size_t i = 0; i < first.chains.size(); ++i) {
    CHECK(first.chains[i].nodes == second.chains[i].nodes);
    CHECK(first.chains[i].polyline == second.chains[i].polyline);
  }
}

}  // TEST_SUITE
