#include "shearless/sampled.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "shearless/binary_io.hpp"
#include "shearless/errors.hpp"
#include "shearless/keyvalue.hpp"

namespace shearless {

void SampledGridHeader::validate() const {
  if (nx < 2 || ny < 2) throw FormatError("sampled grid needs at least 2 nodes per axis");
  if (!(dx > 0.0) || !(dy > 0.0)) throw FormatError("sampled grid spacing must be positive");
  if (!is_finite(origin)) throw FormatError("sampled grid origin must be finite");
  if (times.empty()) throw FormatError("sampled grid needs at least one time stamp");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw FormatError("time stamps must be strictly increasing");
  if (period_x && std::abs(*period_x - nx * dx) > 1e-9 * *period_x)
    throw FormatError("periodic_x must equal nx * dx");
}

namespace {

void check_data(const SampledVelocityData& d) {
  d.header.validate();
  const std::size_t nt = d.header.times.size();
  if (d.u.size() != nt || d.v.size() != nt)
    throw FormatError("velocity data must hold one u and one v block per time stamp");
  for (std::size_t k = 0; k < nt; ++k)
    if (d.u[k].size() != d.header.nodes() || d.v[k].size() != d.header.nodes())
      throw FormatError("velocity block " + std::to_string(k) + " does not match nx * ny");
}

struct Bracket {
  std::size_t k0 = 0;
  std::size_t k1 = 0;
  double w = 0.0;
};

}  // namespace

DynamicalSystem sampled_velocity_system(SampledVelocityData data, std::string id) {
  check_data(data);
  auto d = std::make_shared<const SampledVelocityData>(std::move(data));
  const auto& h = d->header;
  const Rect domain{h.origin.x, h.origin.x + (h.period_x ? *h.period_x : (h.nx - 1) * h.dx),
                    h.origin.y, h.origin.y + (h.ny - 1) * h.dy};

  auto rhs = [d](const Vec2& p, double t) -> Vec2 {
    const auto& g = d->header;
    const auto& ts = g.times;
    Bracket br;
    if (ts.size() > 1) {
      if (t < ts.front() || t > ts.back())
        throw DomainEscape("sampled field queried outside its time range", t);
      const auto it = std::upper_bound(ts.begin(), ts.end(), t);
      br.k1 = std::min<std::size_t>(static_cast<std::size_t>(it - ts.begin()), ts.size() - 1);
      br.k0 = br.k1 - 1;
      br.w = (t - ts[br.k0]) / (ts[br.k1] - ts[br.k0]);
    }

    double fx = (p.x - g.origin.x) / g.dx;
    const double fy = (p.y - g.origin.y) / g.dy;
    if (g.period_x) {
      fx = std::fmod(fx, static_cast<double>(g.nx));
      if (fx < 0.0) fx += g.nx;
    } else if (fx < 0.0 || fx > g.nx - 1) {
      throw DomainEscape("sampled field queried outside its x range", t);
    }
    if (!(fy >= 0.0 && fy <= g.ny - 1)) throw DomainEscape("sampled field queried outside its y range", t);

    int i0 = std::min(static_cast<int>(fx), g.period_x ? g.nx - 1 : g.nx - 2);
    const int j0 = std::min(static_cast<int>(fy), g.ny - 2);
    const int i1 = g.period_x ? (i0 + 1) % g.nx : i0 + 1;
    const double sx = fx - i0;
    const double sy = fy - j0;
    auto bilinear = [&](const std::vector<double>& f) {
      const auto at = [&](int i, int j) { return f[static_cast<std::size_t>(j) * g.nx + i]; };
      return (1 - sy) * ((1 - sx) * at(i0, j0) + sx * at(i1, j0)) +
             sy * ((1 - sx) * at(i0, j0 + 1) + sx * at(i1, j0 + 1));
    };
    const Vec2 v0{bilinear(d->u[br.k0]), bilinear(d->v[br.k0])};
    if (br.k0 == br.k1) return v0;
    const Vec2 v1{bilinear(d->u[br.k1]), bilinear(d->v[br.k1])};
    return (1.0 - br.w) * v0 + br.w * v1;
  };
  return DynamicalSystem::continuous(std::move(id), rhs, domain, h.period_x);
}

SampledVelocityData read_sampled_velocity(const std::filesystem::path& header_path) {
  const auto doc = io::KeyValueDoc::read(header_path);
  SampledVelocityData d;
  auto& h = d.header;
  const auto origin = doc.nums("origin");
  const auto spacing = doc.nums("spacing");
  const auto size = doc.nums("size");
  if (origin.size() != 2) throw FormatError(header_path.string() + ": origin needs 2 numbers");
  if (spacing.size() != 2) throw FormatError(header_path.string() + ": spacing needs 2 numbers");
  if (size.size() != 2) throw FormatError(header_path.string() + ": size needs 2 integers");
  h.origin = {origin[0], origin[1]};
  h.dx = spacing[0];
  h.dy = spacing[1];
  h.nx = static_cast<int>(size[0]);
  h.ny = static_cast<int>(size[1]);
  if (h.nx != size[0] || h.ny != size[1]) throw FormatError(header_path.string() + ": size must be integers");
  h.times = doc.nums("times");
  if (doc.has("periodic_x") && doc.str("periodic_x") != "none") h.period_x = doc.num("periodic_x");
  if (doc.has("order") && doc.str("order") != "u-then-v")
    throw FormatError(header_path.string() + ": only component order u-then-v is supported");
  if (doc.has("dtype") && doc.str("dtype") != "float64-le")
    throw FormatError(header_path.string() + ": only dtype float64-le is supported");
  h.validate();

  const auto files = doc.words("files");
  if (files.size() != h.times.size())
    throw FormatError(header_path.string() + ": need one data file per time stamp");
  const auto dir = header_path.parent_path();
  for (const auto& name : files) {
    const std::filesystem::path p = std::filesystem::path(name).is_absolute() ? std::filesystem::path(name) : dir / name;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw FormatError("cannot open velocity block " + p.string());
    std::vector<double> u, v;
    if (!io::read_le_f64(in, h.nodes(), u) || !io::read_le_f64(in, h.nodes(), v))
      throw FormatError(p.string() + ": file shorter than 2 * nx * ny doubles");
    if (in.peek() != std::char_traits<char>::eof())
      throw FormatError(p.string() + ": trailing data after 2 * nx * ny doubles");
    d.u.push_back(std::move(u));
    d.v.push_back(std::move(v));
  }
  return d;
}

void write_sampled_velocity(const SampledVelocityData& data, const std::filesystem::path& header_path) {
  check_data(data);
  const auto& h = data.header;
  std::ofstream out(header_path);
  if (!out) throw FormatError("cannot write " + header_path.string());
  out.precision(17);
  out << "# sampled velocity field\n";
  out << "origin = " << h.origin.x << ' ' << h.origin.y << '\n';
  out << "spacing = " << h.dx << ' ' << h.dy << '\n';
  out << "size = " << h.nx << ' ' << h.ny << '\n';
  out << "periodic_x = ";
  if (h.period_x) out << *h.period_x; else out << "none";
  out << "\norder = u-then-v\ndtype = float64-le\ntimes =";
  for (double t : h.times) out << ' ' << t;
  out << "\nfiles =";
  const std::string stem = header_path.stem().string();
  for (std::size_t k = 0; k < h.times.size(); ++k) {
    const std::string name = stem + "_" + std::to_string(k) + ".bin";
    out << ' ' << name;
    std::ofstream bin(header_path.parent_path() / name, std::ios::binary);
    if (!bin) throw FormatError("cannot write " + name);
    io::write_le_f64(bin, data.u[k]);
    io::write_le_f64(bin, data.v[k]);
  }
  out << '\n';
}

namespace {

std::size_t index_of(const std::vector<double>& sorted, double value) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), value) - sorted.begin());
}

std::vector<double> uniform_axis(std::vector<double> v, const char* name) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() < 2) throw FormatError(std::string("CSV grid needs at least 2 distinct ") + name + " values");
  const double step = (v.back() - v.front()) / static_cast<double>(v.size() - 1);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i] - (v.front() + step * static_cast<double>(i))) > 1e-9 * std::max(1.0, std::abs(step) * v.size()))
      throw FormatError(std::string("CSV ") + name + " values are not uniformly spaced");
  return v;
}

}  // namespace

SampledVelocityData read_sampled_velocity_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  struct Row {
    double x, y, t, u, v;
  };
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Row r{};
    if (!(ss >> r.x >> r.y >> r.t >> r.u >> r.v)) {
      if (rows.empty() && line_no == 1) continue;  // header row
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected x,y,t,u,v");
    }
    rows.push_back(r);
  }
  std::vector<double> xs, ys, ts;
  for (const auto& r : rows) {
    xs.push_back(r.x);
    ys.push_back(r.y);
    ts.push_back(r.t);
  }
  xs = uniform_axis(xs, "x");
  ys = uniform_axis(ys, "y");
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  SampledVelocityData d;
  auto& h = d.header;
  h.origin = {xs.front(), ys.front()};
  h.nx = static_cast<int>(xs.size());
  h.ny = static_cast<int>(ys.size());
  h.dx = (xs.back() - xs.front()) / (h.nx - 1);
  h.dy = (ys.back() - ys.front()) / (h.ny - 1);
  h.times = ts;
  if (rows.size() != h.nodes() * ts.size())
    throw FormatError(path.string() + ": rows do not cover the full x * y * t grid");
  d.u.assign(ts.size(), std::vector<double>(h.nodes(), std::nan("")));
  d.v = d.u;
  std::vector<std::vector<char>> seen(ts.size(), std::vector<char>(h.nodes(), 0));
  for (const auto& r : rows) {
    const auto i = static_cast<std::size_t>(std::lround((r.x - h.origin.x) / h.dx));
    const auto j = static_cast<std::size_t>(std::lround((r.y - h.origin.y) / h.dy));
    const auto k = index_of(ts, r.t);
    const std::size_t n = j * h.nx + i;
    if (seen[k][n]) throw FormatError(path.string() + ": duplicate sample at x=" + std::to_string(r.x) +
                                      " y=" + std::to_string(r.y) + " t=" + std::to_string(r.t));
    seen[k][n] = 1;
    d.u[k][n] = r.u;
    d.v[k][n] = r.v;
  }
  h.validate();
  return d;
}

SampledVelocityData sample_velocity(const DynamicalSystem& system, const SampledGridHeader& header) {
  header.validate();
  SampledVelocityData d;
  d.header = header;
  for (double t : header.times) {
    std::vector<double> u(header.nodes()), v(header.nodes());
    for (int j = 0; j < header.ny; ++j)
      for (int i = 0; i < header.nx; ++i) {
        const Vec2 w = system.velocity({header.origin.x + i * header.dx, header.origin.y + j * header.dy}, t);
        u[static_cast<std::size_t>(j) * header.nx + i] = w.x;
        v[static_cast<std::size_t>(j) * header.nx + i] = w.y;
      }
    d.u.push_back(std::move(u));
    d.v.push_back(std::move(v));
  }
  return d;
}

}  // namespace shearless
