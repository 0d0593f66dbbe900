#include "shearless/validation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "shearless/errors.hpp"
#include "shearless/systems.hpp"

namespace shearless {

MetricReport MetricReport::bounded(std::string name, double value, double tolerance, std::string context) {
  MetricReport r;
  r.name = std::move(name);
  r.value = value;
  r.tolerance = tolerance;
  r.pass = value <= tolerance;
  r.context = std::move(context);
  return r;
}

void write_metric_reports(const std::vector<MetricReport>& reports, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  out << "# metric = value tolerance pass context\n";
  for (const auto& r : reports) {
    out << r.name << " = " << r.value << ' ';
    if (r.tolerance) out << *r.tolerance; else out << "none";
    out << ' ' << (r.pass ? "pass" : "fail") << ' ' << r.context << '\n';
  }
}

Polyline indicator_barrier(double a, double b, int n_iter) {
  if (n_iter < 1) throw InvalidInput("indicator_barrier needs at least one iteration");
  Polyline pts;
  for (Vec2 p : sntm_indicator_points(a)) {
    pts.push_back({wrap_periodic(p.x, -0.5, 1.0), p.y});
    for (int n = 0; n < n_iter; ++n) {
      p = sntm_step(p, a, b, 0.0);
      pts.push_back({wrap_periodic(p.x, -0.5, 1.0), p.y});
    }
  }
  std::sort(pts.begin(), pts.end(), [](const Vec2& u, const Vec2& v) { return u.x < v.x || (u.x == v.x && u.y < v.y); });
  return pts;
}

namespace {

double point_segment(const Vec2& p, const Vec2& q0, const Vec2& q1) {
  const Vec2 d = q1 - q0;
  const double len2 = dot(d, d);
  // Endpoints are measured directly so coincident vertices give exactly zero.
  const double ends = std::min(norm(p - q0), norm(p - q1));
  if (!(len2 > 0.0)) return ends;
  const double t = dot(p - q0, d) / len2;
  if (t <= 0.0 || t >= 1.0) return ends;
  return std::min(ends, norm(p - (q0 + t * d)));
}

double point_polyline(const Vec2& p, const Polyline& b, std::optional<double> period) {
  if (b.size() == 1) return periodic_distance(p, b[0], period);
  double best = INFINITY;
  for (std::size_t k = 1; k < b.size(); ++k) {
    Vec2 q0 = b[k - 1];
    Vec2 q1 = b[k];
    Vec2 pp = p;
    if (period) {
      // Place the segment continuously and bring p next to its start.
      q1.x = q0.x + std::remainder(q1.x - q0.x, *period);
      pp.x = q0.x + std::remainder(p.x - q0.x, *period);
    }
    best = std::min(best, point_segment(pp, q0, q1));
    if (period) {
      for (double s : {-1.0, 1.0}) best = std::min(best, point_segment(pp + Vec2{s * *period, 0.0}, q0, q1));
    }
  }
  return best;
}

double directed(const Polyline& a, const Polyline& b, std::optional<double> period) {
  double worst = 0.0;
  for (const auto& p : a) worst = std::max(worst, point_polyline(p, b, period));
  return worst;
}

}  // namespace

double hausdorff_distance(const Polyline& a, const Polyline& b, std::optional<double> period_x) {
  if (a.empty() || b.empty()) throw InvalidInput("hausdorff_distance needs non-empty polylines");
  if (period_x && !(*period_x > 0.0)) throw InvalidInput("period must be positive");
  return std::max(directed(a, b, period_x), directed(b, a, period_x));
}

FtleProfile ftle_transverse_profile(const StrainField& field, double x_fixed, double y_min, double y_max,
                                    int n_samples) {
  if (n_samples < 3) throw InvalidInput("FTLE profile needs at least 3 samples");
  if (!(y_max > y_min)) throw InvalidInput("FTLE profile needs y_max > y_min");
  FtleProfile prof;
  for (int k = 0; k < n_samples; ++k) {
    const double y = y_min + (y_max - y_min) * k / (n_samples - 1);
    prof.y.push_back(y);
    const auto v = field.ftle_at({x_fixed, y});
    prof.ftle.push_back(v ? *v : std::nan(""));
  }
  for (int k = 1; k + 1 < n_samples; ++k) {
    const double f = prof.ftle[k];
    if (f < prof.ftle[k - 1] && f < prof.ftle[k + 1]) prof.trenches.push_back(prof.y[k]);
  }
  return prof;
}

double blob_stretch_ratio(const DynamicalSystem& system, const Vec2& center, double radius, int n_pts, double t0,
                          double t1, const SolverConfig& cfg) {
  if (n_pts < 16) throw InvalidInput("blob_stretch_ratio needs at least 16 points");
  const Polyline pts = advect_blob(system, center, radius, n_pts, t0, t1, cfg);
  double diameter = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) diameter = std::max(diameter, norm(pts[i] - pts[j]));
  return diameter / (2.0 * radius);
}

double median_det_defect(const StrainField& field) {
  std::vector<double> d;
  for (std::size_t k = 0; k < field.valid.size(); ++k)
    if (field.valid[k]) d.push_back(std::abs(field.det_c[k] - 1.0));
  if (d.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(d.begin(), mid));
}

}  // namespace shearless
