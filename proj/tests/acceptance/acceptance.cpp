// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is nonzero when any criterion fails.

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "shearless/barriers.hpp"
#include "shearless/mean_field.hpp"
#include "shearless/singularities.hpp"
#include "shearless/systems.hpp"
#include "shearless/validation.hpp"

using namespace shearless;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome()> run;
};

cli::RunConfig bundled(const std::string& name) {
  return cli::load_run_config(fs::path(SHEARLESS_SOURCE_DIR) / "configs" / (name + ".json"));
}

BarrierResult run_pipeline(const cli::RunConfig& cfg, const DynamicalSystem& system, const BarrierConfig& barrier) {
  return extract_parabolic_barriers(system, cfg.window, barrier);
}

std::vector<CaptureTarget> cores_of(const std::vector<Singularity>& list) {
  std::vector<CaptureTarget> cores;
  for (const auto& s : list) cores.push_back({s.id, s.position, s.classify_radius});
  return cores;
}

double max_residual(const BarrierResult& r) {
  const auto cores = cores_of(r.singularities);
  double worst = 0.0;
  for (const auto& l : r.separatrices) worst = std::max(worst, max_shear_residual(r.field, l.vertices, cores));
  return worst;
}

/// Distance to the closest chain, preferring closed chains.
std::optional<double> oracle_distance(const BarrierResult& r, const Polyline& oracle) {
  std::optional<double> best;
  for (bool closed_only : {true, false}) {
    for (const auto& ch : r.chains) {
      if (closed_only && !ch.closed) continue;
      const double d = hausdorff_distance(ch.polyline, oracle, 1.0);
      if (!best || d < *best) best = d;
    }
    if (best) break;
  }
  return best;
}

int count_kind(const BarrierResult& r, SingularityKind kind) {
  return static_cast<int>(
      std::count_if(r.singularities.begin(), r.singularities.end(), [kind](const auto& s) { return s.kind == kind; }));
}

int count_closed(const BarrierResult& r) {
  return static_cast<int>(std::count_if(r.chains.begin(), r.chains.end(), [](const auto& c) { return c.closed; }));
}

/// Consecutive chain nodes alternate between trisectors and wedges.
bool alternates(const BarrierResult& r, const BarrierChain& ch) {
  auto kind = [&r](int id) {
    for (const auto& s : r.singularities)
      if (s.id == id) return s.kind;
    return SingularityKind::Unset;
  };
  for (std::size_t k = 1; k < ch.nodes.size(); ++k)
    if (kind(ch.nodes[k]) == kind(ch.nodes[k - 1])) return false;
  return true;
}

/// Shared runs; each is computed once on first use.
class Runs {
 public:
  const BarrierResult& integrable() {
    if (!integrable_) {
      const auto cfg = bundled("sntm-integrable");
      integrable_ = run_pipeline(cfg, *cfg.system, cfg.barrier);
    }
    return *integrable_;
  }

  /// Oracle runs at 100, 200 and 300 iterations.
  const std::map<int, BarrierResult>& oracle() {
    if (oracle_.empty()) {
      const auto cfg = bundled("sntm-oracle");
      for (int it : cfg.oracle.iterations) {
        BarrierConfig barrier = cfg.barrier;
        barrier.field.t1 = barrier.field.t0 + it;
        oracle_.emplace(it, run_pipeline(cfg, cli::build_system(cfg, barrier.field.t1), barrier));
      }
    }
    return oracle_;
  }

  const BarrierResult& chaotic() {
    if (!chaotic_) {
      const auto cfg = bundled("sntm-chaotic");
      chaotic_ = run_pipeline(cfg, *cfg.system, cfg.barrier);
    }
    return *chaotic_;
  }

 private:
  std::optional<BarrierResult> integrable_;
  std::map<int, BarrierResult> oracle_;
  std::optional<BarrierResult> chaotic_;
};

Outcome census(Runs& runs) {
  const auto& r = runs.integrable();
  const int tri = count_kind(r, SingularityKind::Trisector), wedge = count_kind(r, SingularityKind::Wedge);
  std::string where;
  for (const auto& s : r.singularities)
    where += fmt::format(" {}({:.3f},{:.3f})", s.kind == SingularityKind::Trisector ? 'T' : 'W', s.position.x,
                         s.position.y);
  return {tri == 2 && wedge == 4 && r.singularities.size() == 6,
          fmt::format("{} singularities ({} trisectors, {} wedges), expected 6 (2, 4):{}", r.singularities.size(), tri,
                      wedge, where)};
}

Outcome structure(Runs& runs) {
  const auto& r = runs.integrable();
  if (r.chains.size() != 1) return {false, fmt::format("{} chains, expected 1", r.chains.size())};
  const auto& ch = r.chains.front();
  bool certified = true;
  for (const auto& seg : ch.segments) certified = certified && r.connections.at(seg.connection).certified();
  const bool ok = ch.segments.size() == 4 && alternates(r, ch) && certified;
  return {ok, fmt::format("1 chain, {} segments, closed={}, alternating={}, certified={}", ch.segments.size(),
                          ch.closed, alternates(r, ch), certified)};
}

Outcome oracle_convergence(Runs& runs) {
  const auto cfg = bundled("sntm-oracle");
  const Polyline oracle = indicator_barrier(cfg.sntm->a, cfg.sntm->b, cfg.oracle.reference_iterations);
  std::vector<double> d;
  std::string text;
  for (const auto& [it, r] : runs.oracle()) {
    d.push_back(oracle_distance(r, oracle).value_or(std::nan("")));
    text += fmt::format(" d{}={:.5f}", it, d.back());
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < d.size(); ++k) decreasing = decreasing && d[k] < d[k - 1];
  const bool below = d.back() < *cfg.oracle.threshold;
  return {decreasing && below, fmt::format("Hausdorff{}; strictly decreasing={}, last < {}", text, decreasing,
                                           *cfg.oracle.threshold)};
}

Outcome chaotic_oracle(Runs& runs) {
  const auto cfg = bundled("sntm-chaotic");
  const Polyline oracle = indicator_barrier(cfg.sntm->a, cfg.sntm->b, cfg.oracle.reference_iterations);
  const auto d = oracle_distance(runs.chaotic(), oracle);
  if (!d) return {false, "no chain extracted"};
  return {*d < *cfg.oracle.threshold,
          fmt::format("Hausdorff {:.5f} < {} ({} chains, {} closed)", *d, *cfg.oracle.threshold,
                      runs.chaotic().chains.size(), count_closed(runs.chaotic()))};
}

Outcome residual(Runs& runs) {
  std::vector<std::pair<std::string, const BarrierResult*>> all{{"census", &runs.integrable()},
                                                                {"chaotic", &runs.chaotic()}};
  for (const auto& [it, r] : runs.oracle()) all.emplace_back(fmt::format("oracle{}", it), &r);
  double worst = 0.0;
  std::size_t lines = 0;
  std::string text;
  for (const auto& [name, r] : all) {
    const double w = max_residual(*r);
    text += fmt::format(" {}={:.2e}", name, w);
    worst = std::max(worst, w);
    lines += r->separatrices.size();
  }
  return {worst <= 1e-2,
          fmt::format("max |shear| {:.3e} <= 1e-2 over {} tensorlines outside singular cores:{}", worst, lines, text)};
}

Outcome ftle_counterexample() {
  const auto cfg = bundled("ftle-counterexample");
  const BarrierResult r = run_pipeline(cfg, *cfg.system, cfg.barrier);
  const double spacing = r.field.grid.dy;
  const int n_samples = static_cast<int>(std::lround(1.8 / spacing)) + 1;
  bool trenches = true;
  std::string text;
  for (double x : {-0.5, 0.25, 0.7}) {
    const auto prof = ftle_transverse_profile(r.field, x, -0.9, 0.9, n_samples);
    double nearest = std::numeric_limits<double>::infinity();
    for (double y : prof.trenches) nearest = std::min(nearest, std::abs(y));
    trenches = trenches && nearest <= spacing;
    text += fmt::format(" trench(x={})={:.3g}", x, nearest);
  }
  const double expected = std::exp(-10.0);
  double worst_rel = 0.0;
  for (int k = -8; k <= 8; ++k) {
    const auto c = r.field.tensor_at({0.1 * k, 0.0});
    if (!c) {
      worst_rel = std::numeric_limits<double>::infinity();
      break;
    }
    worst_rel = std::max(worst_rel, std::abs(normal_repulsion(*c, {0.0, 1.0}) / expected - 1.0));
  }
  int crossing = 0;
  for (const auto& ch : r.chains) {
    bool hits = false;
    for (std::size_t k = 0; k < ch.polyline.size(); ++k) {
      hits = hits || std::abs(ch.polyline[k].y) < spacing;
      if (k > 0) hits = hits || ch.polyline[k].y * ch.polyline[k - 1].y < 0.0;
    }
    crossing += hits;
  }
  return {trenches && worst_rel <= 0.1 && crossing == 0,
          fmt::format("{}; rho(y=0) rel. error {:.2e} <= 0.1; {} chains, {} meet y=0", text, worst_rel,
                      r.chains.size(), crossing)};
}

bool same_polyline(const Polyline& a, const Polyline& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].x != b[k].x || a[k].y != b[k].y) return false;
  return true;
}

Outcome mean_field(Runs& runs) {
  // Decoupled ensemble against the autonomous map.
  const auto cfg = bundled("sntm-integrable");
  const auto steps = std::lround(cfg.barrier.field.t1 - cfg.barrier.field.t0);
  auto idle = island_ensemble(20000, 0.0, cfg.sntm->a, cfg.sntm->b, 0.0, 12345, 0.05);
  const BarrierResult passive = run_pipeline(cfg, passive_sntm(mean_field_evolve(idle, steps).schedule), cfg.barrier);
  const auto& autonomous = runs.integrable();
  bool identical = passive.singularities.size() == autonomous.singularities.size() &&
                   passive.chains.size() == autonomous.chains.size() && !autonomous.chains.empty();
  for (std::size_t k = 0; identical && k < passive.singularities.size(); ++k)
    identical = passive.singularities[k].position.x == autonomous.singularities[k].position.x &&
                passive.singularities[k].position.y == autonomous.singularities[k].position.y;
  for (std::size_t k = 0; identical && k < passive.chains.size(); ++k)
    identical = same_polyline(passive.chains[k].polyline, autonomous.chains[k].polyline);

  // Coupled ensemble with the bundled parameters.
  const auto coupled_cfg = bundled("sntm-meanfield");
  const auto& s = coupled_cfg.resolved.at("system");
  auto state = island_ensemble(s.at("particles").get<std::size_t>(), s.at("gamma").get<double>(),
                               s.at("a").get<double>(), s.at("b0").get<double>(), s.at("theta0").get<double>(),
                               coupled_cfg.seed, s.at("spread").get<double>());
  const auto schedule =
      mean_field_evolve(std::move(state), std::lround(coupled_cfg.barrier.field.t1 - coupled_cfg.barrier.field.t0))
          .schedule;
  const auto [b_min, b_max] = std::minmax_element(schedule.b.begin(), schedule.b.end());
  const BarrierResult coupled = run_pipeline(coupled_cfg, passive_sntm(schedule), coupled_cfg.barrier);
  const bool varies = *b_min < *b_max;
  return {identical && varies && !coupled.chains.empty(),
          fmt::format("gamma=0 bitwise identical={}; coupled b in [{:.7f}, {:.7f}], {} chains ({} closed)",
                      identical, *b_min, *b_max, coupled.chains.size(), count_closed(coupled))};
}

Outcome bickley() {
  const auto cfg = bundled("bickley-quasiperiodic");
  const BarrierResult r = run_pipeline(cfg, *cfg.system, cfg.barrier);
  const double core = cfg.resolved.at("system").at("L_m").get<double>();
  int near_core = 0;
  for (const auto& ch : r.chains) {
    if (!ch.closed) continue;
    double mean_y = 0.0;
    for (const Vec2& p : ch.polyline) mean_y += p.y;
    mean_y /= static_cast<double>(ch.polyline.size());
    near_core += std::abs(mean_y) < core;
  }
  return {near_core > 0,
          fmt::format("{} singularities ({} T, {} W), {} certified connections, {} chains, {} closed near the core; "
                      "max |shear| {:.3e}",
                      r.singularities.size(), count_kind(r, SingularityKind::Trisector),
                      count_kind(r, SingularityKind::Wedge),
                      std::count_if(r.connections.begin(), r.connections.end(),
                                    [](const auto& c) { return c.certified(); }),
                      r.chains.size(), near_core, max_residual(r))};
}

Outcome shear_maximality() {
  const auto cfg = bundled("shear-canonical");
  const StrainField field = compute_strain_field(*cfg.system, cfg.window, cfg.barrier.field);
  const Rect box = field.grid.bounds();
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> ux(box.x_min, box.x_max), uy(box.y_min, box.y_max);
  constexpr double kPi = 3.14159265358979323846;
  double worst_sweep = 0.0, worst_boundary = 0.0;
  int points = 0;
  while (points < 100) {
    const Vec2 p{ux(rng), uy(rng)};
    const auto c = field.tensor_at(p);
    const auto e = field.eigen_at(p);
    if (!c || !e || e->lambda2 < e->lambda1 * (1.0 + 1e-3)) continue;
    const auto sv = shear_vector_field(e->lambda1, e->lambda2, e->xi1, e->xi2);
    const double analytic = lagrangian_shear(*c, sv.plus);
    double sweep = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3600; ++k) {
      const double th = kPi * k / 3600.0;
      sweep = std::max(sweep, lagrangian_shear(*c, {std::cos(th), std::sin(th)}));
    }
    worst_sweep = std::max(worst_sweep, std::abs(analytic - sweep));
    worst_boundary = std::max({worst_boundary, std::abs(boundary_term(e->lambda1, e->lambda2, sv.alpha, sv.beta)),
                               std::abs(boundary_term(e->lambda1, e->lambda2, sv.alpha, -sv.beta))});
    ++points;
  }
  return {worst_sweep <= 1e-6 && worst_boundary <= 1e-10,
          fmt::format("{} points: |p(eta+) - sweep max| <= {:.2e}, |boundary term| <= {:.2e}", points, worst_sweep,
                      worst_boundary)};
}

Outcome incompressibility(Runs& runs) {
  const double m = median_det_defect(runs.integrable().field);
  return {m < 1e-2, fmt::format("median |det C - 1| = {:.3e} < 1e-2", m)};
}

Outcome property_suites() {
  const int code = std::system(SHEARLESS_UNIT_TESTS " --minimal > /dev/null 2>&1");
  return {code == 0, fmt::format("unit property suites exit status {}", code)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  app.add_option("criteria", selected, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  Runs runs;
  const std::vector<Criterion> criteria{
      {1, "integrable SNTM singularity census", [&] { return census(runs); }},
      {2, "integrable SNTM barrier structure", [&] { return structure(runs); }},
      {3, "indicator oracle convergence", [&] { return oracle_convergence(runs); }},
      {4, "chaotic SNTM barrier", [&] { return chaotic_oracle(runs); }},
      {5, "shear residual along tensorlines", [&] { return residual(runs); }},
      {6, "FTLE trench counterexample", ftle_counterexample},
      {7, "mean-field decoupling and existence", [&] { return mean_field(runs); }},
      {8, "Bickley jet closed barrier", bickley},
      {9, "shear maximality and boundary term", shear_maximality},
      {10, "incompressibility", [&] { return incompressibility(runs); }},
      {11, "property suites", property_suites},
  };
  const std::set<int> wanted(selected.begin(), selected.end());
  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("error: {}", e.what())};
    }
    failed += !o.pass;
    fmt::print("{} C{:<2} {}: {}\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} failed\n", failed);
  return failed == 0 ? 0 : 1;
}
