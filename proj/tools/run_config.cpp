#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "shearless/mean_field.hpp"
#include "shearless/sampled.hpp"
#include "shearless/systems.hpp"

namespace shearless::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSecondsPerDay = 86400.0;

// One JSON object plus its dotted path. Every accessor records the value it
// resolved (explicit or default) into `out`; finish() rejects unknown keys.
class Section {
 public:
  Section(const json& j, std::string path, json& out) : j_(j), path_(std::move(path)), out_(out) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    seen_.insert(key);
    if (!has(key)) {
      if (!fallback) throw ConfigError(field(key), "required");
      store(key, *fallback);
      return *fallback;
    }
    const double v = to_number(j_.at(key), field(key));
    store(key, v);
    return v;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(field(key), "must be positive");
    return v;
  }

  double non_negative(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v >= 0.0)) throw ConfigError(field(key), "must be non-negative");
    return v;
  }

  long integer(const std::string& key, std::optional<long> fallback, long min_value) {
    seen_.insert(key);
    long v = 0;
    if (!has(key)) {
      if (!fallback) throw ConfigError(field(key), "required");
      v = *fallback;
    } else {
      const json& x = j_.at(key);
      if (!x.is_number_integer()) throw ConfigError(field(key), "expected an integer");
      v = x.get<long>();
    }
    if (v < min_value) throw ConfigError(field(key), "must be >= " + std::to_string(min_value));
    out_[key] = v;
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    seen_.insert(key);
    bool v = fallback;
    if (has(key)) {
      if (!j_.at(key).is_boolean()) throw ConfigError(field(key), "expected true or false");
      v = j_.at(key).get<bool>();
    }
    out_[key] = v;
    return v;
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    seen_.insert(key);
    std::string v;
    if (!has(key)) {
      if (!fallback) throw ConfigError(field(key), "required");
      v = *fallback;
    } else {
      if (!j_.at(key).is_string()) throw ConfigError(field(key), "expected a string");
      v = j_.at(key).get<std::string>();
    }
    out_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::size_t> size,
                              std::optional<std::vector<double>> fallback = std::nullopt) {
    seen_.insert(key);
    std::vector<double> v;
    if (!has(key)) {
      if (!fallback) throw ConfigError(field(key), "required");
      v = *fallback;
    } else {
      const json& x = j_.at(key);
      if (!x.is_array()) throw ConfigError(field(key), "expected an array of numbers");
      for (std::size_t i = 0; i < x.size(); ++i)
        v.push_back(to_number(x[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    if (size && v.size() != *size)
      throw ConfigError(field(key), "expected " + std::to_string(*size) + " entries");
    out_[key] = v;
    return v;
  }

  std::vector<Vec2> points(const std::string& key, std::vector<Vec2> fallback) {
    seen_.insert(key);
    if (!has(key)) {
      json arr = json::array();
      for (const auto& p : fallback) arr.push_back({p.x, p.y});
      out_[key] = arr;
      return fallback;
    }
    const json& x = j_.at(key);
    if (!x.is_array()) throw ConfigError(field(key), "expected an array of [x, y] pairs");
    std::vector<Vec2> v;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::string f = field(key) + "[" + std::to_string(i) + "]";
      if (!x[i].is_array() || x[i].size() != 2) throw ConfigError(f, "expected [x, y]");
      v.push_back({to_number(x[i][0], f), to_number(x[i][1], f)});
    }
    out_[key] = x;
    return v;
  }

  /// Sub-object; a missing key yields an empty object.
  Section sub(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    const json& child = has(key) ? j_.at(key) : empty;
    if (!out_.contains(key)) out_[key] = json::object();
    return Section(child, field(key), out_[key]);
  }

  std::vector<std::string> strings(const std::string& key, std::size_t size) {
    seen_.insert(key);
    if (!has(key)) throw ConfigError(field(key), "required");
    const json& x = j_.at(key);
    if (!x.is_array() || x.size() != size)
      throw ConfigError(field(key), "expected " + std::to_string(size) + " strings");
    std::vector<std::string> v;
    for (const auto& e : x) {
      if (!e.is_string()) throw ConfigError(field(key), "expected " + std::to_string(size) + " strings");
      v.push_back(e.get<std::string>());
    }
    out_[key] = x;
    return v;
  }

  void overwrite(const std::string& key, json value) { out_[key] = std::move(value); }

  void keep(const std::string& key) {
    seen_.insert(key);
    if (has(key)) out_[key] = j_.at(key);
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(field(item.key()), "unknown key");
  }

 private:
  static double to_number(const json& x, const std::string& f) {
    if (x.is_number()) return x.get<double>();
    if (x.is_string()) {
      const auto s = x.get<std::string>();
      if (s == "inf") return kInf;
    }
    throw ConfigError(f, "expected a number");
  }

  void store(const std::string& key, double v) {
    if (std::isinf(v)) out_[key] = v > 0 ? "inf" : "-inf";
    else out_[key] = v;
  }

  const json& j_;
  std::string path_;
  json& out_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void require_file(const std::string& field, const std::filesystem::path& p) {
  if (!std::filesystem::is_regular_file(p)) throw ConfigError(field, "file not found: " + p.string());
}

DynamicalSystem make_system(const json& s, const std::filesystem::path& base_dir, std::uint64_t seed,
                            double t1) {
  const std::string name = s.at("name").get<std::string>();
  if (name == "sntm") return standard_nontwist_map(s.at("a").get<double>(), s.at("b").get<double>());
  if (name == "sntm-meanfield") {
    const long steps = std::lround(t1);
    auto state = island_ensemble(s.at("particles").get<std::size_t>(), s.at("gamma").get<double>(),
                                 s.at("a").get<double>(), s.at("b0").get<double>(), s.at("theta0").get<double>(),
                                 seed, s.at("spread").get<double>());
    return passive_sntm(mean_field_evolve(std::move(state), steps).schedule);
  }
  if (name == "bickley") {
    BickleyConfig bc;
    bc.U = s.at("U_m_per_s").get<double>();
    bc.L = s.at("L_m").get<double>();
    bc.r0 = s.at("r0_m").get<double>();
    bc.y_half_width = s.at("y_half_width_m").get<double>();
    const auto c = s.at("c_m_per_s").get<std::vector<double>>();
    bc.c = {c[0], c[1], c[2]};
    const json& f = s.at("forcing");
    if (f.at("kind").get<std::string>() == "quasiperiodic") {
      const auto e = f.at("eps").get<std::vector<double>>();
      bc.forcing = QuasiperiodicForcing{{e[0], e[1], e[2]}};
    } else {
      ChaoticForcing cf;
      cf.eps3 = f.at("eps3").get<double>();
      if (f.contains("signal_files")) {
        const auto files = f.at("signal_files").get<std::vector<std::string>>();
        cf.eps1 = SampledSignal::read_csv(resolve(base_dir, files[0]));
        cf.eps2 = SampledSignal::read_csv(resolve(base_dir, files[1]));
      } else {
        const json& g = f.at("generator");
        const double begin = g.at("t_begin_s").get<double>();
        const double end = g.at("t_end_s").get<double>();
        const auto n = g.at("samples").get<std::size_t>();
        const double amp = g.at("rel_amplitude").get<double>();
        const double scale = g.at("time_scale_s").get<double>();
        const auto means = g.at("means").get<std::vector<double>>();
        cf.eps1 = duffing_signal(seed, begin, end, n, means[0], amp, scale);
        cf.eps2 = duffing_signal(seed + 1, begin, end, n, means[1], amp, scale);
      }
      bc.forcing = std::move(cf);
    }
    return bickley_jet(std::move(bc));
  }
  if (name == "ftle-counterexample") {
    const auto d = s.at("domain").get<std::vector<double>>();
    return ftle_counterexample_flow(Rect{d[0], d[1], d[2], d[3]});
  }
  if (name == "shear-canonical") return canonical_shear_flow();
  if (name == "sampled") {
    const auto path = resolve(base_dir, s.at("path").get<std::string>());
    const bool csv = path.extension() == ".csv";
    return sampled_velocity_system(csv ? read_sampled_velocity_csv(path) : read_sampled_velocity(path));
  }
  throw ConfigError("system.name", "unknown system '" + name + "'");
}

// Validates the system section and records its resolved form.
void parse_system(Section s, const std::filesystem::path& base_dir, RunConfig& cfg) {
  const std::string name = s.text("name");
  cfg.system_name = name;
  if (name == "sntm") {
    SntmParams p{s.number("a", 0.08), s.number("b", 0.125)};
    cfg.sntm = p;
  } else if (name == "sntm-meanfield") {
    const double a = s.number("a", 0.08);
    const double b0 = s.non_negative("b0", 0.125);
    s.number("theta0", 0.0);
    s.integer("particles", 20000, 1);
    s.non_negative("gamma", 2e-5);
    s.positive("spread", 0.05);
    cfg.sntm = SntmParams{a, b0};
  } else if (name == "bickley") {
    const BickleyConfig defaults;
    const double U = s.positive("U_m_per_s", defaults.U);
    s.positive("L_m", defaults.L);
    s.positive("r0_m", defaults.r0);
    s.positive("y_half_width_m", defaults.y_half_width);
    const auto c = BickleyConfig::default_phase_speeds(U);
    s.numbers("c_m_per_s", 3, std::vector<double>{c[0], c[1], c[2]});
    Section f = s.sub("forcing");
    const std::string kind = f.text("kind", "quasiperiodic");
    if (kind == "quasiperiodic") {
      f.numbers("eps", 3, std::vector<double>{0.075, 0.4, 0.3});
    } else if (kind == "chaotic") {
      f.number("eps3", 0.3);
      if (f.has("signal_files")) {
        json files = json::array();
        std::size_t i = 0;
        for (const auto& p : f.strings("signal_files", 2)) {
          const auto path = resolve(base_dir, p);
          require_file(f.field("signal_files") + "[" + std::to_string(i++) + "]", path);
          files.push_back(std::filesystem::absolute(path).string());
        }
        f.overwrite("signal_files", files);
      } else {
        Section g = f.sub("generator");
        g.number("t_begin_s", -kSecondsPerDay);
        g.number("t_end_s", 30.0 * kSecondsPerDay);
        g.integer("samples", 3001, 2);
        g.non_negative("rel_amplitude", 0.5);
        g.positive("time_scale_s", kSecondsPerDay);
        g.numbers("means", 2, std::vector<double>{0.075, 0.4});
        g.finish();
      }
    } else {
      throw ConfigError(f.field("kind"), "expected quasiperiodic or chaotic");
    }
    f.finish();
  } else if (name == "ftle-counterexample") {
    s.numbers("domain", 4, std::vector<double>{-1.0, 1.0, -1.0, 1.0});
  } else if (name == "shear-canonical") {
  } else if (name == "sampled") {
    const auto path = resolve(base_dir, s.text("path"));
    require_file(s.field("path"), path);
    s.overwrite("path", std::filesystem::absolute(path).string());
  } else {
    throw ConfigError(s.field("name"), "unknown system '" + name + "'");
  }
  s.finish();
}

}  // namespace

RunConfig parse_run_config(const json& input, const std::filesystem::path& base_dir) {
  const json& doc = input.contains("config") && input.contains("command") ? input.at("config") : input;
  RunConfig cfg;
  cfg.resolved = json::object();
  Section root(doc, "", cfg.resolved);

  cfg.seed = static_cast<std::uint64_t>(root.integer("seed", 1, 0));
  cfg.output_dir = root.text("output", "out");
  const long threads = root.integer("threads", 0, 0);

  parse_system(root.sub("system"), base_dir, cfg);

  Section time = root.sub("time");
  const std::string unit = time.text("unit", "nondimensional");
  double scale = 1.0;
  if (unit == "days") scale = kSecondsPerDay;
  else if (unit != "s" && unit != "iterations" && unit != "nondimensional")
    throw ConfigError(time.field("unit"), "expected s, days, iterations or nondimensional");
  const double t0 = time.number("t0", 0.0) * scale;
  const double t1 = time.number("t1") * scale;
  if (!(t1 != t0)) throw ConfigError(time.field("t1"), "must differ from t0");
  time.finish();

  auto& f = cfg.barrier.field;
  f.t0 = t0;
  f.t1 = t1;
  f.threads = static_cast<unsigned>(threads);
  const auto res = root.numbers("resolution", 2);
  if (res[0] < 3 || res[1] < 3 || res[0] != std::floor(res[0]) || res[1] != std::floor(res[1]))
    throw ConfigError("resolution", "expected two integers >= 3");
  f.nx = static_cast<int>(res[0]);
  f.ny = static_cast<int>(res[1]);

  Section solver = root.sub("solver");
  const std::string method = solver.text("method", "dopri5");
  if (method == "rk4") f.solver.method = IntegrationMethod::Rk4;
  else if (method == "dopri5") f.solver.method = IntegrationMethod::Dopri5;
  else throw ConfigError(solver.field("method"), "expected rk4 or dopri5");
  f.solver.step = solver.non_negative("step", 0.0);
  f.solver.abs_tol = solver.positive("abs_tol", 1e-8);
  f.solver.rel_tol = solver.positive("rel_tol", 1e-8);
  f.solver.max_steps = solver.integer("max_steps", 1'000'000, 1);
  f.solver.escape_margin = solver.positive("escape_margin", kInf);
  f.aux_spacing = solver.non_negative("aux_spacing", 0.0);
  solver.finish();

  const json resolved_system = cfg.resolved.at("system");
  try {
    cfg.system = make_system(resolved_system, base_dir, cfg.seed, t1);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("system", e.what());
  }

  if (root.has("window")) {
    const auto w = root.numbers("window", 4);
    cfg.window = Rect{w[0], w[1], w[2], w[3]};
  } else {
    cfg.window = cfg.system->domain();
    root.numbers("window", 4, std::vector<double>{cfg.window.x_min, cfg.window.x_max, cfg.window.y_min,
                                                 cfg.window.y_max});
  }
  if (!(cfg.window.width() > 0.0) || !(cfg.window.height() > 0.0))
    throw ConfigError("window", "expected x_min < x_max and y_min < y_max");

  Section sing = root.sub("singularities");
  cfg.barrier.det_tol = sing.positive("det_tol", 1.0);
  cfg.barrier.merge_radius = sing.non_negative("merge_radius", 0.0);
  cfg.barrier.classify.radius = sing.non_negative("classify_radius", 0.0);
  cfg.barrier.classify.n_samples = static_cast<int>(sing.integer("n_samples", 3600, 90));
  cfg.barrier.classify.high = sing.number("high", 0.95);
  cfg.barrier.classify.low = sing.number("low", 0.2);
  if (!(cfg.barrier.classify.low < cfg.barrier.classify.high))
    throw ConfigError(sing.field("low"), "must be below high");
  sing.finish();

  Section lines = root.sub("tensorlines");
  auto& stop = cfg.barrier.stop;
  stop.step = lines.non_negative("step", 0.0);
  stop.max_length = lines.non_negative("max_length", 0.0);
  stop.capture_radius = lines.non_negative("capture_radius", 0.0);
  stop.p_tol = lines.positive("p_tol", 1e-2);
  stop.launch_exclusion = lines.non_negative("launch_exclusion", 0.0);
  lines.finish();

  Section bar = root.sub("barriers");
  cfg.barrier.certify.spacing = bar.non_negative("spacing", 0.0);
  cfg.barrier.certify.quorum = bar.number("quorum", 0.9);
  if (!(cfg.barrier.certify.quorum > 0.0 && cfg.barrier.certify.quorum <= 1.0))
    throw ConfigError(bar.field("quorum"), "must lie in (0, 1]");
  cfg.barrier.certify.vertex_stride = static_cast<int>(bar.integer("vertex_stride", 4, 1));
  cfg.barrier.certify.max_march = static_cast<int>(bar.integer("max_march", 20, 1));
  cfg.barrier.chain.strict_alternation = bar.flag("strict_alternation", true);
  cfg.barrier.chain.junction_angle_deg = bar.number("junction_angle_deg", 120.0);
  bar.finish();

  Section hyp = root.sub("hyperbolic");
  try {
    cfg.hyperbolic.family = family_from_string(hyp.text("family", "strain"));
  } catch (const InvalidInput&) {
    throw ConfigError(hyp.field("family"), "expected strain or stretch");
  }
  cfg.hyperbolic.seeds = hyp.points("seeds", {});
  cfg.hyperbolic.neighborhood = hyp.non_negative("neighborhood", 0.0);
  hyp.finish();

  Section orc = root.sub("oracle");
  {
    const auto its = orc.numbers("iterations", std::nullopt, std::vector<double>{100, 200, 300});
    cfg.oracle.iterations.clear();
    for (double v : its) {
      if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(orc.field("iterations"), "expected positive integers");
      cfg.oracle.iterations.push_back(static_cast<int>(v));
    }
    cfg.oracle.reference_iterations = static_cast<int>(orc.integer("reference_iterations", 200, 1));
    if (orc.has("threshold")) cfg.oracle.threshold = orc.positive("threshold");
    else orc.keep("threshold");
  }
  orc.finish();

  Section tr = root.sub("tracers");
  cfg.tracers.centers = tr.points("centers", {});
  cfg.tracers.radius = tr.non_negative("radius", 0.0);
  cfg.tracers.n_points = static_cast<int>(tr.integer("n_points", 64, 16));
  if (!cfg.tracers.centers.empty() && !(cfg.tracers.radius > 0.0))
    throw ConfigError(tr.field("radius"), "must be positive when centers are given");
  tr.finish();

  Section val = root.sub("validate");
  if (val.has("chains")) cfg.validate.chains = static_cast<int>(val.integer("chains", std::nullopt, 0));
  if (val.has("closed_chains"))
    cfg.validate.closed_chains = static_cast<int>(val.integer("closed_chains", std::nullopt, 0));
  if (val.has("segments_per_chain"))
    cfg.validate.segments_per_chain = static_cast<int>(val.integer("segments_per_chain", std::nullopt, 1));
  cfg.validate.area_preserving = val.flag("area_preserving", true);
  cfg.validate.det_tolerance = val.positive("det_tolerance", 1e-2);
  cfg.validate.invalid_fraction = val.non_negative("invalid_fraction", 0.05);
  val.finish();

  root.finish();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", path.string() + ": " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

DynamicalSystem build_system(const RunConfig& cfg, double t1) {
  return make_system(cfg.resolved.at("system"), {}, cfg.seed, t1);
}

}  // namespace shearless::cli
