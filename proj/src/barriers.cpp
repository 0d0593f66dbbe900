#include "shearless/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>

#include "shearless/errors.hpp"
#include "shearless/parallel.hpp"

namespace shearless {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Shift p by whole periods so it lies next to ref.
Vec2 unwrap_near(const Vec2& p, const Vec2& ref, std::optional<double> period) {
  if (!period) return p;
  return {ref.x + std::remainder(p.x - ref.x, *period), p.y};
}

double angle_between(const Vec2& a, const Vec2& b) {
  return std::atan2(std::abs(cross(a, b)), dot(a, b));
}

}  // namespace

std::vector<Tensorline> trace_separatrices(const StrainField& field, const Singularity& trisector,
                                           const StopConfig& stop) {
  if (trisector.kind != SingularityKind::Trisector) throw InvalidInput("separatrices start at trisectors");
  const double radius = trisector.classify_radius > 0.0 ? trisector.classify_radius : 2.0 * field.grid.spacing();
  StopConfig cfg = stop;
  cfg.launch_id = trisector.id;
  std::vector<Tensorline> out;
  for (Family fam : {Family::Strain, Family::Stretch}) {
    for (double th : trisector.dirs(fam)) {
      const Vec2 dir{std::cos(th), std::sin(th)};
      const Vec2 x0 = trisector.position + radius * dir;
      if (!field.in_hull(x0)) continue;
      try {
        Tensorline line = integrate_tensorline(field, x0, fam, dir, cfg, {EndTag::Singularity, trisector.id});
        line.vertices.insert(line.vertices.begin(), trisector.position);
        line.arclength = polyline_length(line.vertices);
        out.push_back(std::move(line));
      } catch (const Error&) {
        // A failed branch does not affect the others.
      }
    }
  }
  return out;
}

std::optional<Connection> connect_to_wedge(const Tensorline& line, const std::vector<Singularity>& wedges,
                                           double capture_radius, std::optional<double> period_x) {
  if (line.start.tag != EndTag::Singularity || line.vertices.size() < 2) return std::nullopt;
  if (line.end.tag == EndTag::Boundary || line.end.tag == EndTag::LengthCap) return std::nullopt;
  const Vec2 last = line.vertices.back();
  const std::size_t back = line.vertices.size() >= 5 ? line.vertices.size() - 5 : 0;
  const Vec2 tangent = last - line.vertices[back];
  if (!(norm(tangent) > 0.0)) return std::nullopt;
  const Singularity* best = nullptr;
  double best_dist = capture_radius;
  for (const auto& w : wedges) {
    if (w.kind != SingularityKind::Wedge) continue;
    const Vec2 wp = unwrap_near(w.position, last, period_x);
    const double d = norm(wp - last);
    if (d > best_dist) continue;
    if (d > 0.0 && angle_between(tangent, wp - last) > 60.0 * kDeg) continue;
    best = &w;
    best_dist = d;
  }
  if (!best) return std::nullopt;
  Connection c;
  c.tensorline = line;
  c.tensorline.vertices.push_back(unwrap_near(best->position, last, period_x));
  c.tensorline.end = {EndTag::Singularity, best->id};
  c.tensorline.arclength = polyline_length(c.tensorline.vertices);
  c.from = line.start.singularity;
  c.to = best->id;
  c.family = line.family;
  return c;
}

namespace {

enum class Verdict { Pass, Fail, Indeterminate };

struct NeutralityProbe {
  const StrainField& field;
  Family family;
  double h;

  double value(const Vec2& p) const { return neutrality(field, p, family); }  // DomainEscape when outside

  bool convex(const Vec2& p) const {
    const auto e = field.eigen_at(p);
    if (!e) throw DomainEscape("probe next to invalid node");
    const Vec2 d = family == Family::Strain ? e->xi2 : e->xi1;
    return value(p + h * d) - 2.0 * value(p) + value(p - h * d) > 0.0;
  }
};

Verdict convexity_sample(const NeutralityProbe& probe, const Vec2& x) {
  try {
    return probe.convex(x) ? Verdict::Pass : Verdict::Fail;
  } catch (const DomainEscape&) {
    return Verdict::Indeterminate;
  }
}

// Distance in steps to the nearest trench along +-n, or -1 within the cap.
int steps_to_trench(const NeutralityProbe& probe, const Vec2& x, const Vec2& n, double side, int cap) {
  double prev = probe.value(x);
  for (int k = 0; k < cap; ++k) {
    const double next = probe.value(x + (side * (k + 1) * probe.h) * n);
    if (next >= prev) return k;
    prev = next;
  }
  return -1;
}

Verdict weak_min_sample(const NeutralityProbe& probe, const Vec2& x, const Vec2& n, int cap) {
  try {
    const double n0 = probe.value(x);
    const double np = probe.value(x + probe.h * n);
    const double nm = probe.value(x - probe.h * n);
    int best_steps = -1;
    double side = 1.0;
    if (np >= n0 && nm >= n0) {
      best_steps = 0;
    } else {
      for (double s : {1.0, -1.0}) {
        if ((s > 0 ? np : nm) >= n0) continue;
        const int k = steps_to_trench(probe, x, n, s, cap);
        if (k >= 0 && (best_steps < 0 || k < best_steps)) {
          best_steps = k;
          side = s;
        }
      }
    }
    if (best_steps < 0) return Verdict::Fail;
    for (int k = 0; k <= best_steps; ++k)
      if (!probe.convex(x + (side * k * probe.h) * n)) return Verdict::Fail;
    return Verdict::Pass;
  } catch (const DomainEscape&) {
    return Verdict::Indeterminate;
  }
}

}  // namespace

Connection certify_segment(const StrainField& field, Connection conn, const CertifyConfig& cfg) {
  if (!(cfg.quorum >= 0.0 && cfg.quorum <= 1.0)) throw InvalidInput("certification quorum must lie in [0, 1]");
  if (cfg.vertex_stride < 1 || cfg.max_march < 1) throw InvalidInput("certification stride and march must be positive");
  const NeutralityProbe probe{field, conn.family, cfg.spacing > 0.0 ? cfg.spacing : field.grid.spacing()};
  const auto& v = conn.tensorline.vertices;
  int convex_pass = 0, convex_det = 0, weak_pass = 0, weak_det = 0;
  conn.samples = 0;
  conn.indeterminate = 0;
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    if (k % static_cast<std::size_t>(cfg.vertex_stride) != 0) continue;
    const Vec2 chord = v[k + 1] - v[k - 1];
    if (!(norm(chord) > 0.0)) continue;
    const Vec2 n = normalized(perp(chord));
    ++conn.samples;
    const Verdict c = convexity_sample(probe, v[k]);
    const Verdict w = weak_min_sample(probe, v[k], n, cfg.max_march);
    if (c == Verdict::Indeterminate || w == Verdict::Indeterminate) ++conn.indeterminate;
    if (c != Verdict::Indeterminate) {
      ++convex_det;
      convex_pass += c == Verdict::Pass;
    }
    if (w != Verdict::Indeterminate) {
      ++weak_det;
      weak_pass += w == Verdict::Pass;
    }
  }
  conn.convexity_fraction = convex_det ? static_cast<double>(convex_pass) / convex_det : 0.0;
  conn.weak_min_fraction = weak_det ? static_cast<double>(weak_pass) / weak_det : 0.0;
  conn.convexity_ok = convex_det > 0 && conn.convexity_fraction >= cfg.quorum;
  conn.weak_min_ok = weak_det > 0 && conn.weak_min_fraction >= cfg.quorum;
  return conn;
}

// ---------------------------------------------------------------------------

namespace {

struct Step {
  std::size_t edge;
  bool reversed;
};

class ChainSearch {
 public:
  ChainSearch(const std::vector<Connection>& conns, const StrainField& field, const ChainConfig& cfg)
      : conns_(conns), field_(field), cfg_(cfg) {
    for (std::size_t e = 0; e < conns.size(); ++e) {
      if (!conns[e].certified()) continue;
      adj_[conns[e].from].push_back(e);
      adj_[conns[e].to].push_back(e);
    }
  }

  std::vector<BarrierChain> run() {
    for (const auto& [node, edges] : adj_)
      for (std::size_t e : edges) {
        const bool rev = conns_[e].to == node;
        std::vector<Step> path{{e, rev}};
        std::vector<int> nodes{node, other(e, node)};
        extend(path, nodes);
      }
    std::vector<BarrierChain> out;
    for (const auto& [key, chain] : found_) out.push_back(chain);
    return out;
  }

 private:
  int other(std::size_t e, int node) const { return conns_[e].from == node ? conns_[e].to : conns_[e].from; }

  // Unit direction of edge e leaving `node`.
  Vec2 branch(std::size_t e, int node) const {
    const auto& v = conns_[e].tensorline.vertices;
    const double reach = 2.0 * field_.grid.spacing();
    if (conns_[e].from == node) {
      for (const auto& p : v)
        if (norm(p - v.front()) >= reach) return normalized(p - v.front());
      return normalized(v.back() - v.front());
    }
    for (auto it = v.rbegin(); it != v.rend(); ++it)
      if (norm(*it - v.back()) >= reach) return normalized(*it - v.back());
    return normalized(v.front() - v.back());
  }

  bool junction_ok(std::size_t in, std::size_t out, int node) const {
    if (in == out) return false;
    if (cfg_.strict_alternation && conns_[in].family == conns_[out].family) return false;
    return angle_between(branch(in, node), branch(out, node)) >= cfg_.junction_angle_deg * kDeg;
  }

  bool can_extend_front(const std::vector<Step>& path, const std::vector<int>& nodes) const {
    const int node = nodes.front();
    for (std::size_t e : adj_.at(node)) {
      if (!junction_ok(path.front().edge, e, node)) continue;
      if (std::find(nodes.begin(), nodes.end(), other(e, node)) == nodes.end()) return true;
    }
    return false;
  }

  void extend(std::vector<Step>& path, std::vector<int>& nodes) {
    const int node = nodes.back();
    bool extended = false;
    for (std::size_t e : adj_.at(node)) {
      if (!junction_ok(path.back().edge, e, node)) continue;
      const int next = other(e, node);
      const bool used = std::any_of(path.begin(), path.end(), [&](const Step& s) { return s.edge == e; });
      if (used) continue;
      if (next == nodes.front()) {
        if (junction_ok(e, path.front().edge, next)) {
          auto closed = path;
          closed.push_back({e, conns_[e].to == node});
          auto cn = nodes;
          cn.push_back(next);
          record(closed, cn, true);
          extended = true;
        }
        continue;
      }
      if (std::find(nodes.begin(), nodes.end(), next) != nodes.end()) continue;
      path.push_back({e, conns_[e].to == node});
      nodes.push_back(next);
      extend(path, nodes);
      path.pop_back();
      nodes.pop_back();
      extended = true;
    }
    if (!extended && !can_extend_front(path, nodes)) record(path, nodes, false);
  }

  static std::vector<Step> reversed_path(const std::vector<Step>& p) {
    std::vector<Step> r;
    for (auto it = p.rbegin(); it != p.rend(); ++it) r.push_back({it->edge, !it->reversed});
    return r;
  }

  static std::vector<std::size_t> key_of(const std::vector<Step>& p) {
    std::vector<std::size_t> k;
    for (const auto& s : p) k.push_back(2 * s.edge + (s.reversed ? 1 : 0));
    return k;
  }

  void record(const std::vector<Step>& path, const std::vector<int>& nodes, bool closed) {
    std::vector<std::vector<Step>> variants{path, reversed_path(path)};
    if (closed) {
      const std::size_t n = path.size();
      for (std::size_t r = 1; r < n; ++r) {
        std::vector<Step> rot(path.begin() + static_cast<long>(r), path.end());
        rot.insert(rot.end(), path.begin(), path.begin() + static_cast<long>(r));
        variants.push_back(rot);
        variants.push_back(reversed_path(rot));
      }
    }
    const auto best = *std::min_element(variants.begin(), variants.end(),
                                        [](const auto& a, const auto& b) { return key_of(a) < key_of(b); });
    std::vector<std::size_t> key = key_of(best);
    key.insert(key.begin(), closed ? 1 : 0);
    if (found_.count(key)) return;
    (void)nodes;
    found_[key] = build(best, closed);
  }

  BarrierChain build(const std::vector<Step>& steps, bool closed) const {
    BarrierChain c;
    c.closed = closed;
    const auto period = field_.grid.period_x;
    for (const auto& s : steps) {
      const auto& conn = conns_[s.edge];
      c.segments.push_back({s.edge, s.reversed});
      if (c.nodes.empty()) c.nodes.push_back(s.reversed ? conn.to : conn.from);
      c.nodes.push_back(s.reversed ? conn.from : conn.to);
      Polyline seg = conn.tensorline.vertices;
      if (s.reversed) std::reverse(seg.begin(), seg.end());
      if (!c.polyline.empty()) {
        const Vec2 shift = unwrap_near(seg.front(), c.polyline.back(), period) - seg.front();
        for (auto& p : seg) p += shift;
        c.polyline.insert(c.polyline.end(), seg.begin() + 1, seg.end());
      } else {
        c.polyline = seg;
      }
    }
    return c;
  }

  const std::vector<Connection>& conns_;
  const StrainField& field_;
  const ChainConfig& cfg_;
  std::map<int, std::vector<std::size_t>> adj_;
  std::map<std::vector<std::size_t>, BarrierChain> found_;
};

}  // namespace

std::vector<BarrierChain> assemble_chains(const std::vector<Connection>& connections,
                                          const std::vector<Singularity>& singularities,
                                          const StrainField& field, const ChainConfig& cfg) {
  (void)singularities;
  return ChainSearch(connections, field, cfg).run();
}

// ---------------------------------------------------------------------------

BarrierResult extract_parabolic_barriers(StrainField field, const BarrierConfig& cfg) {
  BarrierResult r;
  r.field = std::move(field);
  const StrainField& f = r.field;
  try {
    r.singularities = classify_singularities(f, detect_singularities(f, cfg.det_tol, cfg.merge_radius), cfg.classify);
  } catch (const Error& e) {
    throw StageError("singularities", e.what());
  }

  StopConfig stop = cfg.stop;
  stop.targets.clear();
  for (const auto& s : r.singularities) stop.targets.push_back({s.id, s.position, s.classify_radius});

  std::vector<const Singularity*> trisectors;
  for (const auto& s : r.singularities)
    if (s.kind == SingularityKind::Trisector) trisectors.push_back(&s);
  std::vector<std::vector<Tensorline>> traced(trisectors.size());
  try {
    parallel_for(trisectors.size(), resolve_threads(cfg.field.threads),
                 [&](std::size_t i) { traced[i] = trace_separatrices(f, *trisectors[i], stop); });
  } catch (const Error& e) {
    throw StageError("separatrices", e.what());
  }
  for (auto& lines : traced)
    for (auto& l : lines) r.separatrices.push_back(std::move(l));

  const double capture = stop.resolved_capture(f);
  for (const auto& line : r.separatrices)
    if (auto c = connect_to_wedge(line, r.singularities, capture, f.grid.period_x)) r.connections.push_back(*c);

  try {
    parallel_for(r.connections.size(), resolve_threads(cfg.field.threads),
                 [&](std::size_t i) { r.connections[i] = certify_segment(f, r.connections[i], cfg.certify); });
  } catch (const Error& e) {
    throw StageError("certification", e.what());
  }
  r.chains = assemble_chains(r.connections, r.singularities, f, cfg.chain);
  return r;
}

BarrierResult extract_parabolic_barriers(const DynamicalSystem& system, const Rect& window,
                                         const BarrierConfig& cfg) {
  StrainField field;
  try {
    field = compute_strain_field(system, window, cfg.field);
  } catch (const Error& e) {
    throw StageError("strain-field", e.what());
  }
  return extract_parabolic_barriers(std::move(field), cfg);
}

// ---------------------------------------------------------------------------

std::vector<HyperbolicCandidate> score_hyperbolic_candidates(const StrainField& field,
                                                             const std::vector<Vec2>& seeds, Family family,
                                                             double neighborhood, const StopConfig& stop,
                                                             const std::vector<Singularity>& singularities) {
  const double capture = stop.resolved_capture(field);
  StopConfig cfg = stop;
  cfg.targets.clear();
  for (const auto& s : singularities) cfg.targets.push_back({s.id, s.position, s.classify_radius});

  std::vector<std::optional<HyperbolicCandidate>> slots(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const Vec2 x0 = seeds[i];
    try {
      if (!field.in_hull(x0)) continue;
      const Vec2 e = eigvec_at(field, x0, family, {1.0, 0.0});
      const Tensorline fwd = integrate_tensorline(field, x0, family, e, cfg);
      const Tensorline bwd = integrate_tensorline(field, x0, family, -e, cfg);
      HyperbolicCandidate c;
      c.seed = i;
      c.line.family = family;
      c.line.vertices.assign(bwd.vertices.rbegin(), bwd.vertices.rend());
      c.line.vertices.insert(c.line.vertices.end(), fwd.vertices.begin() + 1, fwd.vertices.end());
      c.line.start = bwd.end;
      c.line.end = fwd.end;
      c.line.arclength = polyline_length(c.line.vertices);

      bool near_singularity = false;
      for (const auto& p : c.line.vertices)
        for (const auto& s : singularities) near_singularity = near_singularity || field.distance(p, s.position) < capture;
      if (near_singularity) continue;

      double weighted = 0.0, length = 0.0;
      for (std::size_t k = 1; k < c.line.vertices.size(); ++k) {
        const Vec2 a = c.line.vertices[k - 1];
        const Vec2 b = c.line.vertices[k];
        const auto ev = field.eigen_at(0.5 * (a + b));
        if (!ev) continue;
        const double len = norm(b - a);
        weighted += len * std::sqrt(family == Family::Strain ? ev->lambda2 : ev->lambda1);
        length += len;
      }
      if (!(length > 0.0)) continue;
      c.mean_stretch = weighted / length;
      slots[i] = std::move(c);
    } catch (const Error&) {
      // Seeds at isotropic or invalid points yield no candidate.
    }
  }

  std::vector<HyperbolicCandidate> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  for (auto& c : out) {
    bool has_neighbor = false;
    bool extremal = true;
    for (const auto& o : out) {
      const double d = field.distance(seeds[c.seed], seeds[o.seed]);
      if (!(d > 0.0) || d > neighborhood) continue;
      has_neighbor = true;
      if (family == Family::Strain ? !(c.mean_stretch < o.mean_stretch) : !(c.mean_stretch > o.mean_stretch))
        extremal = false;
    }
    c.is_local_extremum = has_neighbor && extremal;
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_barriers(const BarrierResult& result, const std::filesystem::path& manifest_path,
                    const std::filesystem::path& csv_path) {
  std::ofstream out(manifest_path);
  if (!out) throw FormatError("cannot write " + manifest_path.string());
  out.precision(17);
  out << "# parabolic barriers\n";
  out << "singularities = " << result.singularities.size() << '\n';
  out << "separatrices = " << result.separatrices.size() << '\n';
  out << "connections = " << result.connections.size() << '\n';
  out << "chains = " << result.chains.size() << '\n';
  for (std::size_t i = 0; i < result.connections.size(); ++i) {
    const auto& c = result.connections[i];
    out << "connection." << i << " = " << to_string(c.family) << ' ' << c.from << ' ' << c.to << ' '
        << (c.convexity_ok ? "convex" : "not-convex") << ' ' << (c.weak_min_ok ? "weak-min" : "not-weak-min") << ' '
        << c.convexity_fraction << ' ' << c.weak_min_fraction << ' ' << c.samples << ' ' << c.indeterminate << ' '
        << c.tensorline.arclength << '\n';
  }
  for (std::size_t i = 0; i < result.chains.size(); ++i) {
    const auto& ch = result.chains[i];
    out << "chain." << i << ".closed = " << (ch.closed ? "true" : "false") << '\n';
    out << "chain." << i << ".nodes =";
    for (int n : ch.nodes) out << ' ' << n;
    out << "\nchain." << i << ".segments =";
    for (const auto& s : ch.segments)
      out << ' ' << s.connection << ':' << to_string(result.connections[s.connection].family)
          << (s.reversed ? ":reversed" : ":forward");
    out << '\n';
  }

  std::ofstream csv(csv_path);
  if (!csv) throw FormatError("cannot write " + csv_path.string());
  csv.precision(17);
  csv << "chain,segment,family,vertex,x,y\n";
  for (std::size_t i = 0; i < result.chains.size(); ++i) {
    for (std::size_t s = 0; s < result.chains[i].segments.size(); ++s) {
      const auto& seg = result.chains[i].segments[s];
      const auto& conn = result.connections[seg.connection];
      Polyline v = conn.tensorline.vertices;
      if (seg.reversed) std::reverse(v.begin(), v.end());
      for (std::size_t k = 0; k < v.size(); ++k) {
        const Vec2 p = result.field.wrap(v[k]);
        csv << i << ',' << s << ',' << to_string(conn.family) << ',' << k << ',' << p.x << ',' << p.y << '\n';
      }
    }
  }
}

void write_barriers_svg(const BarrierResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  const auto& f = result.field;
  const Rect b = f.grid.bounds();
  const double width = 800.0;
  const double scale = width / b.width();
  const double height = b.height() * scale;
  auto sx = [&](double x) { return (x - b.x_min) * scale; };
  auto sy = [&](double y) { return (b.y_max - y) * scale; };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";

  const int cols = std::min(f.grid.nx, 200);
  const int rows = std::min(f.grid.ny, 200);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = 0; k < f.ftle.size(); ++k)
    if (f.valid[k]) {
      lo = std::min(lo, f.ftle[k]);
      hi = std::max(hi, f.ftle[k]);
    }
  const double cw = width / cols;
  const double chh = height / rows;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int i = c * f.grid.nx / cols;
      const int j = r * f.grid.ny / rows;
      const std::size_t k = f.grid.index(i, j);
      int shade = 255;
      if (f.valid[k] && hi > lo) shade = 255 - static_cast<int>(200.0 * (f.ftle[k] - lo) / (hi - lo));
      out << "<rect x=\"" << c * cw << "\" y=\"" << height - (r + 1) * chh << "\" width=\"" << cw + 0.5
          << "\" height=\"" << chh + 0.5 << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade << ")\"/>\n";
    }
  for (const auto& ch : result.chains)
    for (const auto& seg : ch.segments) {
      const auto& conn = result.connections[seg.connection];
      const char* stroke = conn.family == Family::Strain ? "#d62728" : "#1f77b4";
      auto open = [&] { out << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << stroke << "\" points=\""; };
      open();
      std::optional<Vec2> prev;
      for (const auto& p0 : conn.tensorline.vertices) {
        const Vec2 p = f.wrap(p0);
        // Split at the periodic seam instead of drawing across the window.
        if (prev && f.periodic() && std::abs(p.x - prev->x) > 0.5 * *f.grid.period_x) {
          out << "\"/>\n";
          open();
        }
        out << sx(p.x) << ',' << sy(p.y) << ' ';
        prev = p;
      }
      out << "\"/>\n";
    }
  for (const auto& s : result.singularities) {
    const char* color = s.kind == SingularityKind::Trisector ? "#2ca02c"
                        : s.kind == SingularityKind::Wedge   ? "#9467bd"
                                                             : "#7f7f7f";
    out << "<circle cx=\"" << sx(s.position.x) << "\" cy=\"" << sy(s.position.y) << "\" r=\"4\" fill=\"" << color
        << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace shearless
