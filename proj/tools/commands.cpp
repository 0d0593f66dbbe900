#include "commands.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "shearless/parallel.hpp"
#include "shearless/singularities.hpp"
#include "shearless/validation.hpp"

namespace shearless::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Log {
 public:
  explicit Log(LogLevel level) : level_(level) {}
  template <typename... Args>
  void at(LogLevel l, fmt::format_string<Args...> f, Args&&... args) const {
    if (l > level_) return;
    static constexpr const char* kTags[] = {"error", "warn", "info", "debug"};
    fmt::print(stderr, "[{}] {}\n", kTags[static_cast<int>(l)], fmt::format(f, std::forward<Args>(args)...));
  }

 private:
  LogLevel level_;
};

// Artifacts are only ever written below `dir`.
struct Context {
  const RunConfig& cfg;
  fs::path dir;
  const Log& log;
  std::vector<std::string> outputs;

  fs::path file(const std::string& name) {
    outputs.push_back(name);
    return dir / name;
  }
};

StrainField field_for(Context& ctx) {
  ctx.log.at(LogLevel::Info, "computing {}x{} strain field for {}", ctx.cfg.barrier.field.nx,
             ctx.cfg.barrier.field.ny, ctx.cfg.system_name);
  StrainField f = compute_strain_field(*ctx.cfg.system, ctx.cfg.window, ctx.cfg.barrier.field);
  if (f.quality_warning())
    ctx.log.at(LogLevel::Warn, "{:.1f}% of field nodes are invalid", 100.0 * f.invalid_fraction());
  return f;
}

BarrierResult pipeline(Context& ctx, const DynamicalSystem& system, const BarrierConfig& barrier) {
  BarrierResult r = extract_parabolic_barriers(system, ctx.cfg.window, barrier);
  ctx.log.at(LogLevel::Info, "{} singularities, {} separatrices, {} connections, {} chains", r.singularities.size(),
             r.separatrices.size(), r.connections.size(), r.chains.size());
  return r;
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

/// Closest chain to the oracle; closed chains take precedence over open ones.
std::optional<double> oracle_distance(const BarrierResult& r, const Polyline& oracle, std::optional<double> period) {
  std::optional<double> best;
  for (bool closed_only : {true, false}) {
    for (const auto& ch : r.chains) {
      if (closed_only && !ch.closed) continue;
      const double d = hausdorff_distance(ch.polyline, oracle, period);
      if (!best || d < *best) best = d;
    }
    if (best) break;
  }
  return best;
}

void write_polyline_csv(const Polyline& p, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  out << "vertex,x,y\n";
  for (std::size_t k = 0; k < p.size(); ++k) out << k << ',' << p[k].x << ',' << p[k].y << '\n';
}

int cmd_field(Context& ctx) {
  const StrainField f = field_for(ctx);
  write_strain_field(f, ctx.file("field.txt"));
  write_strain_field_csv(f, ctx.file("field.csv"));
  return kOk;
}

int cmd_singularities(Context& ctx) {
  const StrainField f = field_for(ctx);
  const auto list = classify_singularities(f, detect_singularities(f, ctx.cfg.barrier.det_tol, ctx.cfg.barrier.merge_radius),
                                           ctx.cfg.barrier.classify);
  ctx.log.at(LogLevel::Info, "{} singularities", list.size());
  write_singularities(list, ctx.file("singularities.csv"));
  return kOk;
}

int cmd_tensorlines(Context& ctx) {
  const BarrierResult r = pipeline(ctx, *ctx.cfg.system, ctx.cfg.barrier);
  write_singularities(r.singularities, ctx.file("singularities.csv"));
  write_tensorlines_csv(r.field, r.separatrices, ctx.file("tensorlines.csv"));
  write_tensorline_manifest(r.separatrices, ctx.file("tensorlines.txt"));
  return kOk;
}

int cmd_barriers(Context& ctx) {
  const BarrierResult r = pipeline(ctx, *ctx.cfg.system, ctx.cfg.barrier);
  write_singularities(r.singularities, ctx.file("singularities.csv"));
  write_tensorlines_csv(r.field, r.separatrices, ctx.file("tensorlines.csv"));
  write_tensorline_manifest(r.separatrices, ctx.file("tensorlines.txt"));
  write_barriers(r, ctx.file("barriers.txt"), ctx.file("barriers.csv"));
  write_barriers_svg(r, ctx.file("barriers.svg"));
  return kOk;
}

int cmd_hyperbolic(Context& ctx) {
  const auto& h = ctx.cfg.hyperbolic;
  if (h.seeds.empty()) throw ConfigError("hyperbolic.seeds", "required for the hyperbolic command");
  const StrainField f = field_for(ctx);
  std::vector<Singularity> list;
  try {
    list = classify_singularities(f, detect_singularities(f, ctx.cfg.barrier.det_tol, ctx.cfg.barrier.merge_radius),
                                  ctx.cfg.barrier.classify);
  } catch (const DegenerateField&) {
    ctx.log.at(LogLevel::Warn, "field is isotropic everywhere; no singularities to avoid");
  }
  const double neighborhood = h.neighborhood > 0.0 ? h.neighborhood : 2.0 * f.grid.spacing();
  const auto found = score_hyperbolic_candidates(f, h.seeds, h.family, neighborhood, ctx.cfg.barrier.stop, list);
  std::ofstream out(ctx.file("hyperbolic.csv"));
  out.precision(17);
  out << "seed,x,y,family,mean_stretch,local_extremum,arclength,end\n";
  std::vector<Tensorline> lines;
  for (const auto& c : found) {
    const Vec2 s = h.seeds[c.seed];
    out << c.seed << ',' << s.x << ',' << s.y << ',' << to_string(h.family) << ',' << c.mean_stretch << ','
        << (c.is_local_extremum ? 1 : 0) << ',' << c.line.arclength << ',' << to_string(c.line.end.tag) << '\n';
    lines.push_back(c.line);
  }
  write_tensorlines_csv(f, lines, ctx.file("hyperbolic_lines.csv"));
  return kOk;
}

int cmd_oracle(Context& ctx) {
  if (!ctx.cfg.sntm) throw ConfigError("system.name", "oracle-sntm needs an sntm or sntm-meanfield system");
  const auto [a, b] = *ctx.cfg.sntm;
  const auto& o = ctx.cfg.oracle;
  const Polyline oracle = indicator_barrier(a, b, o.reference_iterations);
  write_polyline_csv(oracle, ctx.file("indicator.csv"));
  const std::optional<double> period = 1.0;

  std::vector<MetricReport> reports;
  std::vector<double> distances;
  for (int it : o.iterations) {
    BarrierConfig barrier = ctx.cfg.barrier;
    barrier.field.t1 = barrier.field.t0 + it;
    const BarrierResult r = pipeline(ctx, build_system(ctx.cfg, barrier.field.t1), barrier);
    write_barriers(r, ctx.file(fmt::format("barriers_{}.txt", it)), ctx.file(fmt::format("barriers_{}.csv", it)));
    const auto d = oracle_distance(r, oracle, period);
    MetricReport m;
    m.name = fmt::format("hausdorff_{}", it);
    m.value = d.value_or(std::numeric_limits<double>::quiet_NaN());
    m.pass = d.has_value();
    m.context = fmt::format("chains={} reference_iterations={}", r.chains.size(), o.reference_iterations);
    reports.push_back(m);
    distances.push_back(m.value);
  }
  if (distances.size() > 1) {
    bool decreasing = true;
    for (std::size_t k = 1; k < distances.size(); ++k) decreasing = decreasing && distances[k] < distances[k - 1];
    MetricReport mono;
    mono.name = "strictly_decreasing";
    mono.value = decreasing ? 1.0 : 0.0;
    mono.pass = decreasing;
    reports.push_back(mono);
  }
  if (o.threshold && !distances.empty())
    reports.push_back(MetricReport::bounded(fmt::format("hausdorff_{}_threshold", o.iterations.back()),
                                            distances.back(), *o.threshold));
  write_metric_reports(reports, ctx.file("oracle.txt"));
  const bool ok = std::all_of(reports.begin(), reports.end(), [](const MetricReport& m) { return m.pass; });
  return ok ? kOk : kValidationFailed;
}

int cmd_tracers(Context& ctx) {
  const auto& t = ctx.cfg.tracers;
  if (t.centers.empty()) throw ConfigError("tracers.centers", "required for the tracers command");
  const auto& f = ctx.cfg.barrier.field;
  std::ofstream blobs(ctx.file("tracers.csv"));
  blobs.precision(17);
  blobs << "blob,vertex,x,y\n";
  std::vector<MetricReport> reports;
  for (std::size_t i = 0; i < t.centers.size(); ++i) {
    const Polyline p = advect_blob(*ctx.cfg.system, t.centers[i], t.radius, t.n_points, f.t0, f.t1, f.solver);
    for (std::size_t k = 0; k < p.size(); ++k) blobs << i << ',' << k << ',' << p[k].x << ',' << p[k].y << '\n';
    MetricReport m;
    m.name = fmt::format("stretch_ratio_{}", i);
    m.value = blob_stretch_ratio(*ctx.cfg.system, t.centers[i], t.radius, t.n_points, f.t0, f.t1, f.solver);
    m.pass = std::isfinite(m.value);
    m.context = fmt::format("center=({},{}) radius={}", t.centers[i].x, t.centers[i].y, t.radius);
    reports.push_back(m);
  }
  write_metric_reports(reports, ctx.file("tracers.txt"));
  return kOk;
}

MetricReport count_report(const std::string& name, int value, std::optional<int> expected) {
  MetricReport m;
  m.name = name;
  m.value = value;
  m.pass = !expected || value == *expected;
  m.context = expected ? fmt::format("expected={}", *expected) : "unchecked";
  return m;
}

int cmd_validate(Context& ctx) {
  const auto& v = ctx.cfg.validate;
  const BarrierResult r = pipeline(ctx, *ctx.cfg.system, ctx.cfg.barrier);
  std::vector<MetricReport> reports;
  reports.push_back(MetricReport::bounded("invalid_fraction", r.field.invalid_fraction(), v.invalid_fraction));
  if (v.area_preserving)
    reports.push_back(MetricReport::bounded("median_det_defect", median_det_defect(r.field), v.det_tolerance));
  reports.push_back(MetricReport::bounded("max_shear_residual", max_residual(r), ctx.cfg.barrier.stop.p_tol,
                                          "separatrices outside singular cores"));

  int trisectors = 0, wedges = 0;
  for (const auto& s : r.singularities) {
    trisectors += s.kind == SingularityKind::Trisector;
    wedges += s.kind == SingularityKind::Wedge;
  }
  reports.push_back(count_report("trisectors", trisectors, std::nullopt));
  reports.push_back(count_report("wedges", wedges, std::nullopt));
  const int closed = static_cast<int>(std::count_if(r.chains.begin(), r.chains.end(), [](const auto& c) { return c.closed; }));
  reports.push_back(count_report("chains", static_cast<int>(r.chains.size()), v.chains));
  reports.push_back(count_report("closed_chains", closed, v.closed_chains));
  if (v.segments_per_chain) {
    bool all = !r.chains.empty();
    for (const auto& c : r.chains) all = all && static_cast<int>(c.segments.size()) == *v.segments_per_chain;
    MetricReport m = count_report("segments_per_chain", all ? *v.segments_per_chain : -1, v.segments_per_chain);
    reports.push_back(m);
  }
  if (ctx.cfg.sntm && ctx.cfg.oracle.threshold) {
    const Polyline oracle = indicator_barrier(ctx.cfg.sntm->a, ctx.cfg.sntm->b, ctx.cfg.oracle.reference_iterations);
    const auto d = oracle_distance(r, oracle, 1.0);
    MetricReport m = MetricReport::bounded("oracle_hausdorff", d.value_or(std::numeric_limits<double>::quiet_NaN()),
                                           *ctx.cfg.oracle.threshold);
    m.pass = d && *d <= *ctx.cfg.oracle.threshold;
    reports.push_back(m);
  }
  write_metric_reports(reports, ctx.file("metrics.txt"));
  write_barriers(r, ctx.file("barriers.txt"), ctx.file("barriers.csv"));
  bool ok = true;
  for (const auto& m : reports) {
    ctx.log.at(m.pass ? LogLevel::Info : LogLevel::Warn, "{} = {} {}", m.name, m.value, m.pass ? "pass" : "FAIL");
    ok = ok && m.pass;
  }
  return ok ? kOk : kValidationFailed;
}

const std::map<std::string, std::function<int(Context&)>>& dispatch() {
  static const std::map<std::string, std::function<int(Context&)>> table{
      {"field", cmd_field},         {"singularities", cmd_singularities}, {"tensorlines", cmd_tensorlines},
      {"barriers", cmd_barriers},   {"hyperbolic", cmd_hyperbolic},       {"oracle-sntm", cmd_oracle},
      {"tracers", cmd_tracers},     {"validate", cmd_validate},
  };
  return table;
}

void write_manifest(const Invocation& inv, const RunConfig& cfg, const Context& ctx, int code,
                    const std::string& message) {
  json m;
  m["command"] = inv.command;
  m["config"] = cfg.resolved;
  m["threads"] = resolve_threads(cfg.barrier.field.threads);
  m["outputs"] = ctx.outputs;
  m["exit_code"] = code;
  if (!message.empty()) m["message"] = message;
  std::ofstream out(ctx.dir / "run_manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace

LogLevel log_level_from_string(const std::string& s) {
  if (s == "error") return LogLevel::Error;
  if (s == "warn") return LogLevel::Warn;
  if (s == "info") return LogLevel::Info;
  if (s == "debug") return LogLevel::Debug;
  throw ConfigError("--log-level", "expected error, warn, info or debug");
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : dispatch()) v.push_back(name);
    return v;
  }();
  return names;
}

int run(const Invocation& inv) {
  const Log log(inv.log_level);
  const auto it = dispatch().find(inv.command);
  if (it == dispatch().end()) {
    log.at(LogLevel::Error, "unknown command '{}'", inv.command);
    return kConfigError;
  }
  RunConfig cfg;
  try {
    cfg = load_run_config(inv.config_path);
    if (inv.threads) {
      cfg.barrier.field.threads = *inv.threads;
      cfg.resolved["threads"] = *inv.threads;
    }
    if (inv.out) {
      cfg.output_dir = *inv.out;
      cfg.resolved["output"] = inv.out->string();
    }
    fs::create_directories(cfg.output_dir);
  } catch (const ConfigError& e) {
    log.at(LogLevel::Error, "config error: {}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    log.at(LogLevel::Error, "config error: {}", e.what());
    return kConfigError;
  }

  Context ctx{cfg, cfg.output_dir, log, {}};
  int code = kOk;
  std::string message;
  try {
    code = it->second(ctx);
  } catch (const ConfigError& e) {
    log.at(LogLevel::Error, "config error: {}", e.what());
    code = kConfigError;
    message = e.what();
  } catch (const StageError& e) {
    log.at(LogLevel::Error, "stage {} failed: {}", e.stage(), e.what());
    code = kStageError;
    message = e.what();
  } catch (const std::exception& e) {
    log.at(LogLevel::Error, "{} failed: {}", inv.command, e.what());
    code = kStageError;
    message = e.what();
  }
  write_manifest(inv, cfg, ctx, code, message);
  return code;
}

}  // namespace shearless::cli
