#include "shearless/tensorlines.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "shearless/errors.hpp"

namespace shearless {

const char* to_string(EndTag t) {
  switch (t) {
    case EndTag::Seed: return "seed";
    case EndTag::Singularity: return "singularity";
    case EndTag::Boundary: return "boundary";
    case EndTag::LengthCap: return "length-cap";
    case EndTag::IsotropicRegion: return "isotropic";
    case EndTag::ResidualExceeded: return "residual";
  }
  return "?";
}

double StopConfig::resolved_max_length(const StrainField& f) const {
  if (max_length > 0.0) return max_length;
  const Rect b = f.grid.bounds();
  return 4.0 * (b.width() + b.height());
}

Vec2 eigvec_at(const StrainField& field, const Vec2& p, Family family, const Vec2& reference_dir) {
  const auto e = field.eigen_at(p);
  if (!e) throw DomainEscape("eigenvector queried next to an invalid node");
  if (e->isotropic) throw IsotropicPoint("eigenvectors undefined at an isotropic point");
  const Vec2 v = family == Family::Strain ? e->xi1 : e->xi2;
  return dot(v, reference_dir) >= 0.0 ? v : -v;
}

namespace {

enum class Probe { Ok, Outside, Isotropic };

Probe direction(const StrainField& field, const Vec2& p, Family family, const Vec2& ref, Vec2& out) {
  if (!field.in_hull(p)) return Probe::Outside;
  try {
    out = eigvec_at(field, p, family, ref);
  } catch (const IsotropicPoint&) {
    return Probe::Isotropic;
  } catch (const DomainEscape&) {
    return Probe::Outside;
  }
  return Probe::Ok;
}

double vertex_residual(const StrainField& field, const Vec2& p, const Vec2& chord) {
  if (!(norm(chord) > 0.0) || !field.in_hull(p)) return 0.0;
  const auto c = field.tensor_at(p);
  return c ? std::abs(lagrangian_shear(*c, chord)) : 0.0;
}

bool in_core(const StrainField& field, const Vec2& p, const std::vector<CaptureTarget>& cores) {
  for (const auto& t : cores)
    if (t.core_radius > 0.0 && field.distance(p, t.position) < t.core_radius) return true;
  return false;
}

}  // namespace

Tensorline integrate_tensorline(const StrainField& field, const Vec2& x0, Family family,
                                const Vec2& initial_dir, const StopConfig& stop, EndPoint start) {
  if (!(norm(initial_dir) > 0.0)) throw InvalidInput("tensorline needs a non-zero initial direction");
  if (!field.in_hull(x0)) throw DomainEscape("tensorline seed lies outside the field hull");
  const double h = stop.resolved_step(field);
  const double capture = stop.resolved_capture(field);
  const double cap = stop.resolved_max_length(field);
  const double exclusion = stop.launch_exclusion > 0.0 ? stop.launch_exclusion : 3.0 * capture;

  Tensorline line;
  line.family = family;
  line.start = start;
  line.vertices.push_back(x0);
  Vec2 x = x0;
  Vec2 dir = normalized(initial_dir);
  int slow_steps = 0;

  auto exceeds = [&](const Vec2& p, const Vec2& chord) {
    return std::isfinite(stop.p_tol) && !in_core(field, p, stop.targets) &&
           vertex_residual(field, p, chord) > stop.p_tol;
  };
  // The last vertex only has a one-sided chord, so it is checked on exit.
  auto finish = [&](EndTag tag, int id = -1) {
    auto& v = line.vertices;
    while (v.size() > 1 && exceeds(v.back(), v.back() - v[v.size() - 2])) v.pop_back();
    line.end = {tag, id};
    line.arclength = polyline_length(line.vertices);
    return line;
  };

  for (;;) {
    if (line.arclength + h > cap + 1e-12 * cap) return finish(EndTag::LengthCap);
    Vec2 k1, k2, k3, k4;
    Probe pr = direction(field, x, family, dir, k1);
    if (pr == Probe::Ok) pr = direction(field, x + 0.5 * h * k1, family, k1, k2);
    if (pr == Probe::Ok) pr = direction(field, x + 0.5 * h * k2, family, k2, k3);
    if (pr == Probe::Ok) pr = direction(field, x + h * k3, family, k3, k4);
    if (pr == Probe::Outside) return finish(EndTag::Boundary);
    if (pr == Probe::Isotropic) return finish(EndTag::IsotropicRegion);

    const Vec2 dx = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double moved = norm(dx);
    if (moved < 1e-3 * h) {
      if (++slow_steps >= 10) throw Stagnation("tensorline made no progress for 10 steps");
      continue;
    }
    slow_steps = 0;
    // A reversal means the line ran into a singular region.
    if (line.vertices.size() > 1 && dot(dx, dir) <= 0.0) return finish(EndTag::IsotropicRegion);
    const Vec2 next = x + dx;
    if (!field.in_hull(next)) return finish(EndTag::Boundary);

    x = next;
    dir = dx / moved;
    line.vertices.push_back(x);
    line.arclength += moved;

    if (line.vertices.size() >= 3) {
      auto& v = line.vertices;
      const std::size_t k = v.size() - 2;
      if (exceeds(v[k], v[k + 1] - v[k - 1])) {
        v.pop_back();
        return finish(EndTag::ResidualExceeded);
      }
    }

    for (const auto& t : stop.targets) {
      if (t.id == stop.launch_id && line.arclength < exclusion) continue;
      if (field.distance(x, t.position) < capture) return finish(EndTag::Singularity, t.id);
    }
  }
}

double max_shear_residual(const StrainField& field, const Polyline& line,
                          const std::vector<CaptureTarget>& cores) {
  double worst = 0.0;
  const std::size_t n = line.size();
  if (n < 2) return 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 chord = line[std::min(k + 1, n - 1)] - line[k == 0 ? 0 : k - 1];
    if (!(norm(chord) > 0.0) || in_core(field, line[k], cores)) continue;
    const auto c = field.in_hull(line[k]) ? field.tensor_at(line[k]) : std::nullopt;
    if (!c) continue;
    worst = std::max(worst, std::abs(lagrangian_shear(*c, chord)));
  }
  return worst;
}

void write_tensorlines_csv(const StrainField& field, const std::vector<Tensorline>& lines,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  out << "id,family,vertex,x,y\n";
  for (std::size_t id = 0; id < lines.size(); ++id) {
    const auto& l = lines[id];
    for (std::size_t k = 0; k < l.vertices.size(); ++k) {
      const Vec2 p = field.wrap(l.vertices[k]);
      out << id << ',' << to_string(l.family) << ',' << k << ',' << p.x << ',' << p.y << '\n';
    }
  }
}

void write_tensorline_manifest(const std::vector<Tensorline>& lines, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  out << "# id family start start_singularity end end_singularity arclength vertices\n";
  for (std::size_t id = 0; id < lines.size(); ++id) {
    const auto& l = lines[id];
    out << "line." << id << " = " << to_string(l.family) << ' ' << to_string(l.start.tag) << ' '
        << l.start.singularity << ' ' << to_string(l.end.tag) << ' ' << l.end.singularity << ' '
        << l.arclength << ' ' << l.vertices.size() << '\n';
  }
}

}  // namespace shearless
