#include "shearless/strainfield.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "shearless/binary_io.hpp"
#include "shearless/errors.hpp"
#include "shearless/keyvalue.hpp"
#include "shearless/parallel.hpp"

namespace shearless {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec2 canonical_sign(Vec2 v) {
  if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) return -v;
  return v;
}

}  // namespace

const char* to_string(Family f) { return f == Family::Strain ? "strain" : "stretch"; }

Family family_from_string(const std::string& s) {
  if (s == "strain") return Family::Strain;
  if (s == "stretch") return Family::Stretch;
  throw InvalidInput("unknown tensorline family '" + s + "'");
}

bool is_isotropic(double lambda1, double lambda2) {
  return (lambda2 - lambda1) < kIsotropicContrast * (lambda2 + lambda1);
}

EigenSym2 eig_sym2(const Sym2& c, std::optional<double> det) {
  if (!c.finite() || (det && !std::isfinite(*det))) throw InvalidInput("eig_sym2: non-finite tensor");
  const double mean = 0.5 * (c.c11 + c.c22);
  const double half_diff = 0.5 * (c.c11 - c.c22);
  const double radius = std::hypot(half_diff, c.c12);
  EigenSym2 e;
  e.lambda2 = mean + radius;
  const double d = det ? *det : c.det();
  e.lambda1 = e.lambda2 > 0.0 ? d / e.lambda2 : mean - radius;
  if (e.lambda1 > e.lambda2) e.lambda1 = e.lambda2;
  e.isotropic = is_isotropic(e.lambda1, e.lambda2);
  const double phi = 0.5 * std::atan2(2.0 * c.c12, c.c11 - c.c22);
  const Vec2 major{std::cos(phi), std::sin(phi)};
  e.xi2 = canonical_sign(major);
  e.xi1 = canonical_sign(perp(major));
  return e;
}

Sym2 d_tensor(const Sym2& c) {
  return {c.c12, 0.5 * (c.c22 - c.c11), -c.c12};
}

double normal_repulsion(const Sym2& c, const Vec2& n) {
  const double det = c.det();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw InvalidInput("normal_repulsion: singular C");
  // <n, C^-1 n> = <n, adj(C) n> / det C
  const double q = (c.c22 * n.x * n.x - 2.0 * c.c12 * n.x * n.y + c.c11 * n.y * n.y) / det;
  if (!(q > 0.0)) throw InvalidInput("normal_repulsion: C is not positive definite");
  return 1.0 / std::sqrt(q);
}

double lagrangian_shear(const Sym2& c, const Vec2& tangent) {
  const double tt = dot(tangent, tangent);
  if (!(tt > 0.0)) throw InvalidInput("lagrangian_shear: zero tangent");
  return d_tensor(c).quad(tangent) / std::sqrt(c.quad(tangent) * tt);
}

double neutrality_from_eigen(double lambda1, double lambda2, Family family) {
  const double r = std::sqrt(family == Family::Strain ? lambda2 : lambda1) - 1.0;
  return r * r;
}

ShearVectors shear_vector_field(double lambda1, double lambda2, const Vec2& xi1, const Vec2& xi2) {
  if (!(lambda2 > lambda1)) throw IsotropicPoint("shear vectors are undefined where lambda1 == lambda2");
  const double s1 = std::sqrt(lambda1);
  const double s2 = std::sqrt(lambda2);
  ShearVectors sv;
  sv.alpha = std::sqrt(s2 / (s1 + s2));
  sv.beta = std::sqrt(s1 / (s1 + s2));
  const Vec2 n = cross(xi1, xi2) >= 0.0 ? xi2 : -xi2;
  sv.plus = sv.alpha * xi1 + sv.beta * n;
  sv.minus = sv.alpha * xi1 - sv.beta * n;
  return sv;
}

double boundary_term(double lambda1, double lambda2, double alpha, double beta) {
  const double a2 = alpha * alpha;
  const double b2 = beta * beta;
  const double dl = lambda2 - lambda1;
  const double q = a2 * lambda1 + b2 * lambda2;
  const double num = q * (a2 - b2) * dl - a2 * b2 * dl * dl;
  return num / (std::sqrt(a2 + b2) * q * std::sqrt(q));
}

// ---------------------------------------------------------------------------

Rect GridSpec::bounds() const {
  const double w = period_x ? *period_x : (nx - 1) * dx;
  return {origin.x, origin.x + w, origin.y, origin.y + (ny - 1) * dy};
}

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) throw InvalidInput("grid needs nx, ny >= 2");
  if (!(dx > 0.0) || !(dy > 0.0)) throw InvalidInput("grid spacing must be positive");
  if (period_x && std::abs(*period_x - nx * dx) > 1e-9 * *period_x)
    throw InvalidInput("periodic grid requires dx = period / nx");
}

void StrainField::allocate() {
  const std::size_t n = grid.nodes();
  for (auto* ch : {&c11, &c12, &c22, &lambda1, &lambda2, &xi1x, &xi1y, &ftle, &det_c}) ch->assign(n, kNaN);
  valid.assign(n, 0);
}

void StrainField::set_node(std::size_t k, const Sym2& c, double det) {
  const EigenSym2 e = eig_sym2(c, det);
  if (!(e.lambda1 > 0.0)) {
    set_invalid(k);
    return;
  }
  c11[k] = c.c11;
  c12[k] = c.c12;
  c22[k] = c.c22;
  lambda1[k] = e.lambda1;
  lambda2[k] = e.lambda2;
  xi1x[k] = e.xi1.x;
  xi1y[k] = e.xi1.y;
  const double span = std::abs(t1 - t0);
  ftle[k] = span > 0.0 ? std::log(e.lambda2) / (2.0 * span) : 0.0;
  det_c[k] = det;
  valid[k] = 1;
}

void StrainField::set_invalid(std::size_t k) {
  for (auto* ch : {&c11, &c12, &c22, &lambda1, &lambda2, &xi1x, &xi1y, &ftle, &det_c}) (*ch)[k] = kNaN;
  valid[k] = 0;
}

std::size_t StrainField::invalid_count() const {
  std::size_t n = 0;
  for (auto v : valid) n += v ? 0 : 1;
  return n;
}

double StrainField::invalid_fraction() const {
  return valid.empty() ? 1.0 : static_cast<double>(invalid_count()) / static_cast<double>(valid.size());
}

EigenSym2 StrainField::eigen_at_node(std::size_t k) const {
  EigenSym2 e;
  e.lambda1 = lambda1[k];
  e.lambda2 = lambda2[k];
  e.xi1 = {xi1x[k], xi1y[k]};
  e.xi2 = canonical_sign(-perp(e.xi1));
  e.isotropic = is_isotropic(e.lambda1, e.lambda2);
  return e;
}

bool StrainField::in_hull(const Vec2& p) const {
  if (!is_finite(p)) return false;
  const Rect b = grid.bounds();
  const double tol = 1e-12 * std::max(grid.dx, grid.dy);
  const bool x_ok = periodic() || (p.x >= b.x_min - tol && p.x <= b.x_max + tol);
  return x_ok && p.y >= b.y_min - tol && p.y <= b.y_max + tol;
}

Vec2 StrainField::wrap(const Vec2& p) const {
  if (!periodic()) return p;
  return {wrap_periodic(p.x, grid.origin.x, *grid.period_x), p.y};
}

StrainField::Cell StrainField::locate(const Vec2& p) const {
  if (!in_hull(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ") lies outside the strain-field hull";
    throw DomainEscape(msg.str());
  }
  double fx = (p.x - grid.origin.x) / grid.dx;
  double fy = (p.y - grid.origin.y) / grid.dy;
  int i0 = 0;
  int i1 = 0;
  if (periodic()) {
    fx = std::fmod(fx, static_cast<double>(grid.nx));
    if (fx < 0.0) fx += grid.nx;
    i0 = std::min(static_cast<int>(fx), grid.nx - 1);
    i1 = (i0 + 1) % grid.nx;
  } else {
    fx = std::clamp(fx, 0.0, static_cast<double>(grid.nx - 1));
    i0 = std::min(static_cast<int>(fx), grid.nx - 2);
    i1 = i0 + 1;
  }
  fy = std::clamp(fy, 0.0, static_cast<double>(grid.ny - 1));
  const int j0 = std::min(static_cast<int>(fy), grid.ny - 2);
  return {grid.index(i0, j0), grid.index(i1, j0), grid.index(i0, j0 + 1), grid.index(i1, j0 + 1),
          fx - i0, fy - j0};
}

std::optional<double> StrainField::interpolate(const Cell& c, const std::vector<double>& ch) const {
  if (!valid[c.k00] || !valid[c.k10] || !valid[c.k01] || !valid[c.k11]) return std::nullopt;
  return (1.0 - c.sy) * ((1.0 - c.sx) * ch[c.k00] + c.sx * ch[c.k10]) +
         c.sy * ((1.0 - c.sx) * ch[c.k01] + c.sx * ch[c.k11]);
}

std::optional<Sym2> StrainField::tensor_at(const Vec2& p) const {
  const Cell c = locate(p);
  const auto a = interpolate(c, c11);
  if (!a) return std::nullopt;
  return Sym2{*a, *interpolate(c, c12), *interpolate(c, c22)};
}

std::optional<EigenSym2> StrainField::eigen_at(const Vec2& p) const {
  const Cell c = locate(p);
  const auto a = interpolate(c, c11);
  if (!a) return std::nullopt;
  return eig_sym2({*a, *interpolate(c, c12), *interpolate(c, c22)}, *interpolate(c, det_c));
}

std::optional<double> StrainField::ftle_at(const Vec2& p) const { return interpolate(locate(p), ftle); }

// ---------------------------------------------------------------------------

StrainField compute_strain_field(const DynamicalSystem& system, const Rect& window,
                                 const StrainFieldOptions& opt) {
  if (opt.nx < 2 || opt.ny < 2) throw InvalidInput("strain field resolution must be at least 2 x 2");
  if (!(window.width() > 0.0) || !(window.height() > 0.0)) throw InvalidInput("empty strain-field window");
  const Rect& dom = system.domain();
  const double slack = 1e-9 * dom.min_extent();
  const bool x_inside = system.periodic_x() || (window.x_min >= dom.x_min - slack && window.x_max <= dom.x_max + slack);
  if (!x_inside || window.y_min < dom.y_min - slack || window.y_max > dom.y_max + slack)
    throw InvalidInput("strain-field window must lie inside the system domain");
  opt.solver.validate();

  StrainField f;
  f.t0 = opt.t0;
  f.t1 = opt.t1;
  f.system_id = system.id();
  f.aux_spacing = opt.aux_spacing > 0.0 ? opt.aux_spacing : default_aux_spacing(system);
  auto& g = f.grid;
  g.origin = {window.x_min, window.y_min};
  g.nx = opt.nx;
  g.ny = opt.ny;
  g.dy = window.height() / (opt.ny - 1);
  const auto period = system.period_x();
  if (period && std::abs(window.width() - *period) <= 1e-9 * *period) {
    g.period_x = *period;
    g.dx = *period / opt.nx;
  } else {
    g.dx = window.width() / (opt.nx - 1);
  }
  f.allocate();

  parallel_for(g.nodes(), resolve_threads(opt.threads), [&](std::size_t k) {
    const int i = static_cast<int>(k % static_cast<std::size_t>(g.nx));
    const int j = static_cast<int>(k / static_cast<std::size_t>(g.nx));
    try {
      const Mat2 grad = flow_map_gradient(system, g.node(i, j), opt.t0, opt.t1, f.aux_spacing, opt.solver);
      const Sym2 c = cauchy_green(grad);
      const double dj = grad.det();
      if (!c.finite() || !std::isfinite(dj)) return;
      f.set_node(k, c, dj * dj);
    } catch (const DomainEscape&) {
    } catch (const BudgetExceeded&) {
    } catch (const NumericalBlowup&) {
    } catch (const SignalOutOfRange&) {
    }
  });

  if (f.invalid_count() == f.grid.nodes())
    throw FieldFailure(system.id() + ": every strain-field node is invalid");
  return f;
}

StrainField make_strain_field(const GridSpec& grid, const std::function<Sym2(const Vec2&)>& tensor,
                              double t0, double t1, std::string system_id) {
  grid.validate();
  StrainField f;
  f.grid = grid;
  f.t0 = t0;
  f.t1 = t1;
  f.system_id = std::move(system_id);
  f.allocate();
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Sym2 c = tensor(grid.node(i, j));
      if (c.finite()) f.set_node(grid.index(i, j), c, c.det());
    }
  if (f.invalid_count() == grid.nodes()) throw FieldFailure(f.system_id + ": every node is invalid");
  return f;
}

double neutrality(const StrainField& field, const Vec2& p, Family family) {
  const auto e = field.eigen_at(p);
  if (!e) throw DomainEscape("neutrality queried next to an invalid node");
  return neutrality_from_eigen(e->lambda1, e->lambda2, family);
}

double lagrangian_shear(const StrainField& field, const Vec2& p, const Vec2& tangent) {
  const auto c = field.tensor_at(p);
  if (!c) throw DomainEscape("Lagrangian shear queried next to an invalid node");
  return lagrangian_shear(*c, tangent);
}

double averaged_shear(const StrainField& field, const Polyline& curve) {
  if (curve.size() < 2) throw InvalidInput("averaged_shear needs at least 2 vertices");
  for (const auto& v : curve)
    if (!field.in_hull(v)) throw DomainEscape("averaged_shear: vertex outside the field hull");
  double weighted = 0.0;
  double length = 0.0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    const Vec2 seg = curve[k] - curve[k - 1];
    const double len = norm(seg);
    if (len == 0.0) continue;
    weighted += len * lagrangian_shear(field, 0.5 * (curve[k] + curve[k - 1]), seg);
    length += len;
  }
  if (length == 0.0) throw InvalidInput("averaged_shear: curve has zero length");
  return weighted / length;
}

// ---------------------------------------------------------------------------

namespace {

struct Channel {
  const char* name;
  std::vector<double> StrainField::*data;
};

constexpr Channel kChannels[] = {
    {"c11", &StrainField::c11},         {"c12", &StrainField::c12},   {"c22", &StrainField::c22},
    {"lambda1", &StrainField::lambda1}, {"lambda2", &StrainField::lambda2},
    {"xi1x", &StrainField::xi1x},       {"xi1y", &StrainField::xi1y}, {"ftle", &StrainField::ftle},
    {"detc", &StrainField::det_c},
};

}  // namespace

void write_strain_field(const StrainField& field, const std::filesystem::path& header_path) {
  std::ofstream out(header_path);
  if (!out) throw FormatError("cannot write " + header_path.string());
  const auto& g = field.grid;
  const std::string stem = header_path.stem().string();
  const auto dir = header_path.parent_path();
  out.precision(17);
  out << "# strain field\n";
  out << "system = " << field.system_id << '\n';
  out << "origin = " << g.origin.x << ' ' << g.origin.y << '\n';
  out << "spacing = " << g.dx << ' ' << g.dy << '\n';
  out << "size = " << g.nx << ' ' << g.ny << '\n';
  out << "periodic_x = ";
  if (g.period_x) out << *g.period_x; else out << "none";
  out << "\ntimes = " << field.t0 << ' ' << field.t1 << '\n';
  out << "aux_spacing = " << field.aux_spacing << '\n';
  out << "layout = row-major-x-fastest\ndtype = float64-le\n";
  out << "invalid_fraction = " << field.invalid_fraction() << '\n';
  for (const auto& ch : kChannels) {
    const std::string name = stem + "." + ch.name + ".bin";
    out << ch.name << " = " << name << '\n';
    std::ofstream bin(dir / name, std::ios::binary);
    if (!bin) throw FormatError("cannot write " + name);
    io::write_le_f64(bin, field.*ch.data);
  }
  const std::string mask = stem + ".valid.bin";
  out << "valid = " << mask << '\n';
  std::ofstream bin(dir / mask, std::ios::binary);
  bin.write(reinterpret_cast<const char*>(field.valid.data()), static_cast<std::streamsize>(field.valid.size()));
}

StrainField read_strain_field(const std::filesystem::path& header_path) {
  const auto doc = io::KeyValueDoc::read(header_path);
  StrainField f;
  f.system_id = doc.str("system");
  const auto origin = doc.nums("origin");
  const auto spacing = doc.nums("spacing");
  const auto size = doc.nums("size");
  const auto times = doc.nums("times");
  if (origin.size() != 2 || spacing.size() != 2 || size.size() != 2 || times.size() != 2)
    throw FormatError(header_path.string() + ": origin, spacing, size and times need 2 values each");
  f.grid.origin = {origin[0], origin[1]};
  f.grid.dx = spacing[0];
  f.grid.dy = spacing[1];
  f.grid.nx = static_cast<int>(size[0]);
  f.grid.ny = static_cast<int>(size[1]);
  if (doc.str("periodic_x") != "none") f.grid.period_x = doc.num("periodic_x");
  try {
    f.grid.validate();
  } catch (const InvalidInput& e) {
    throw FormatError(header_path.string() + ": " + e.what());
  }
  f.t0 = times[0];
  f.t1 = times[1];
  f.aux_spacing = doc.num("aux_spacing");
  const auto dir = header_path.parent_path();
  const std::size_t n = f.grid.nodes();
  for (const auto& ch : kChannels) {
    const auto p = dir / doc.str(ch.name);
    std::ifstream in(p, std::ios::binary);
    if (!in || !io::read_le_f64(in, n, f.*ch.data)) throw FormatError(p.string() + ": missing or short channel");
  }
  const auto mp = dir / doc.str("valid");
  std::ifstream in(mp, std::ios::binary);
  f.valid.resize(n);
  if (!in || !in.read(reinterpret_cast<char*>(f.valid.data()), static_cast<std::streamsize>(n)))
    throw FormatError(mp.string() + ": missing or short validity mask");
  return f;
}

void write_strain_field_csv(const StrainField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  out << "i,j,x,y,c11,c12,c22,lambda1,lambda2,xi1x,xi1y,ftle,detc,valid\n";
  const auto& g = field.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const Vec2 p = g.node(i, j);
      out << i << ',' << j << ',' << p.x << ',' << p.y;
      for (const auto& ch : kChannels) out << ',' << (field.*ch.data)[k];
      out << ',' << int(field.valid[k]) << '\n';
    }
}

}  // namespace shearless
