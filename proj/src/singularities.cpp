#include "shearless/singularities.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "shearless/errors.hpp"

namespace shearless {

const char* to_string(SingularityKind k) {
  switch (k) {
    case SingularityKind::Unset: return "unset";
    case SingularityKind::Trisector: return "trisector";
    case SingularityKind::Wedge: return "wedge";
    case SingularityKind::Unclassified: return "unclassified";
  }
  return "?";
}

namespace {

// Zero crossings of v along the closed corner loop; corners are 0..3 counter-clockwise.
std::vector<Vec2> edge_zeros(const std::array<double, 4>& v, const std::array<Vec2, 4>& p) {
  std::vector<Vec2> z;
  for (int k = 0; k < 4; ++k) {
    const double a = v[k];
    const double b = v[(k + 1) % 4];
    if ((a < 0.0) == (b < 0.0)) continue;
    const double t = a / (a - b);
    z.push_back(p[k] + t * (p[(k + 1) % 4] - p[k]));
  }
  return z;
}

std::optional<Vec2> segment_intersection(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const Vec2 d1 = p2 - p1;
  const Vec2 d2 = q2 - q1;
  const double den = cross(d1, d2);
  if (den == 0.0) return std::nullopt;
  const Vec2 w = q1 - p1;
  const double s = cross(w, d2) / den;
  const double t = cross(w, d1) / den;
  if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) return std::nullopt;
  return p1 + s * d1;
}

double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

}  // namespace

std::vector<RawCandidate> singularity_candidates(const StrainField& field) {
  const auto& g = field.grid;
  std::vector<RawCandidate> out;
  const int cells_x = field.periodic() ? g.nx : g.nx - 1;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i < cells_x; ++i) {
      const int i1 = (i + 1) % g.nx;
      const std::array<std::size_t, 4> k{g.index(i, j), g.index(i1, j), g.index(i1, j + 1), g.index(i, j + 1)};
      if (!field.valid[k[0]] || !field.valid[k[1]] || !field.valid[k[2]] || !field.valid[k[3]]) continue;
      const std::array<Vec2, 4> p{g.node(i, j), g.node(i + 1, j), g.node(i + 1, j + 1), g.node(i, j + 1)};
      std::array<double, 4> f{}, gv{};
      double defect = 0.0;
      for (int c = 0; c < 4; ++c) {
        f[c] = field.c11[k[c]] - field.c22[k[c]];
        gv[c] = field.c12[k[c]];
        defect = std::max(defect, std::abs(field.det_c[k[c]] - 1.0));
      }
      const auto zf = edge_zeros(f, p);
      const auto zg = edge_zeros(gv, p);
      if (zf.size() < 2 || zg.size() < 2) continue;
      for (std::size_t a = 0; a + 1 < zf.size(); a += 2)
        for (std::size_t b = 0; b + 1 < zg.size(); b += 2)
          if (auto hit = segment_intersection(zf[a], zf[a + 1], zg[b], zg[b + 1]))
            out.push_back({field.wrap(*hit), defect});
    }
  }
  return out;
}

std::vector<Singularity> detect_singularities(const StrainField& field, double det_tol, double merge_radius) {
  if (!(det_tol >= 0.0)) throw InvalidInput("det_tol must be non-negative");
  bool any_anisotropic = false;
  for (std::size_t k = 0; k < field.valid.size() && !any_anisotropic; ++k)
    any_anisotropic = field.valid[k] && !is_isotropic(field.lambda1[k], field.lambda2[k]);
  if (!any_anisotropic) throw DegenerateField("every valid node is isotropic");

  const auto raw = singularity_candidates(field);
  const std::size_t n = raw.size();
  // Single-linkage clustering via union-find.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  if (merge_radius < 0.0) throw InvalidInput("merge_radius must be non-negative");
  const double link = merge_radius > 0.0 ? merge_radius : field.grid.diagonal();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (field.distance(raw[a].position, raw[b].position) <= link) parent[find(a)] = find(b);

  std::vector<std::vector<std::size_t>> clusters;
  std::vector<long> slot(n, -1);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t r = find(a);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(slot[r])].push_back(a);
  }

  std::vector<Singularity> out;
  for (const auto& members : clusters) {
    bool noisy = false;
    for (auto m : members) noisy = noisy || raw[m].det_defect > det_tol;
    if (noisy) continue;
    // Centroid with members unwrapped next to the first one.
    const Vec2 ref = raw[members.front()].position;
    Vec2 sum{};
    std::vector<Vec2> pts;
    for (auto m : members) {
      Vec2 p = raw[m].position;
      if (field.periodic()) p.x = ref.x + std::remainder(p.x - ref.x, *field.grid.period_x);
      pts.push_back(p);
      sum += p;
    }
    Singularity s;
    s.position = sum / static_cast<double>(members.size());
    s.members = static_cast<int>(members.size());
    for (const auto& p : pts) s.cluster_radius = std::max(s.cluster_radius, norm(p - s.position));
    s.position = field.wrap(s.position);
    if (!field.in_hull(s.position)) continue;
    if (auto c = field.tensor_at(s.position)) s.quality = std::abs(c->c11 - c->c22) + std::abs(c->c12);
    s.id = static_cast<int>(out.size());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> alignment_profile(const StrainField& field, const Vec2& center, double radius,
                                      int n_samples, Family family) {
  std::vector<double> f(static_cast<std::size_t>(n_samples), std::nan(""));
  for (int k = 0; k < n_samples; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n_samples;
    const Vec2 r{std::cos(th), std::sin(th)};
    const Vec2 q = center + radius * r;
    if (!field.in_hull(q)) continue;
    const auto e = field.eigen_at(q);
    if (!e || e->isotropic) continue;
    const Vec2 xi = family == Family::Strain ? e->xi1 : e->xi2;
    const double v = std::abs(dot(xi, r)) / norm(xi);
    if (!(v >= 0.0 && v <= 1.0 + 1e-12)) throw NumericalBlowup("alignment outside [0, 1]");
    f[static_cast<std::size_t>(k)] = std::min(v, 1.0);
  }
  return f;
}

namespace {

struct Run {
  int state;
  int first;  // sample index of the first member
  int last;   // sample index of the last member (may be < first when wrapping)
};

// Cyclic runs of the thresholded states; samples between the bands are ignored.
std::vector<Run> state_runs(const std::vector<double>& f, double high, double low) {
  std::vector<Run> runs;
  const int n = static_cast<int>(f.size());
  for (int k = 0; k < n; ++k) {
    int s = -1;
    if (f[k] > high) s = 1;
    else if (f[k] < low) s = 0;
    if (s < 0) continue;
    if (!runs.empty() && runs.back().state == s) runs.back().last = k;
    else runs.push_back({s, k, k});
  }
  if (runs.size() > 1 && runs.front().state == runs.back().state) {
    runs.front().first = runs.back().first;
    runs.pop_back();
  }
  return runs;
}

double sample_angle(const std::vector<double>& f, int k) {
  const int n = static_cast<int>(f.size());
  const double fm = f[(k + n - 1) % n];
  const double f0 = f[k];
  const double fp = f[(k + 1) % n];
  double offset = 0.0;
  const double den = fm - 2.0 * f0 + fp;
  if (den < 0.0) offset = std::clamp(0.5 * (fm - fp) / den, -0.5, 0.5);
  return normalize_angle(2.0 * std::numbers::pi * (k + offset) / n);
}

// Sample indices from first to last going forward around the circle.
std::vector<int> run_indices(const Run& r, int n) {
  std::vector<int> idx;
  for (int k = r.first;; k = (k + 1) % n) {
    idx.push_back(k);
    if (k == r.last) break;
  }
  return idx;
}

std::optional<std::pair<SingularityKind, std::vector<double>>> classify_profile(const std::vector<double>& f,
                                                                                double high, double low) {
  for (double v : f)
    if (std::isnan(v)) return std::nullopt;
  const int n = static_cast<int>(f.size());
  const auto runs = state_runs(f, high, low);
  int ones = 0, zeros = 0;
  for (const auto& r : runs) (r.state == 1 ? ones : zeros)++;
  std::vector<double> dirs;
  if (ones == 3 && zeros == 3) {
    for (const auto& r : runs) {
      if (r.state != 1) continue;
      int best = r.first;
      for (int k : run_indices(r, n)) if (f[k] > f[best]) best = k;
      dirs.push_back(sample_angle(f, best));
    }
    return std::make_pair(SingularityKind::Trisector, dirs);
  }
  if (ones == 1 && zeros == 1) {
    const Run& r = runs[0].state == 1 ? runs[0] : runs[1];
    const auto idx = run_indices(r, n);
    std::vector<int> peaks;
    for (int k : idx) {
      const double fm = f[(k + n - 1) % n];
      const double fp = f[(k + 1) % n];
      if (f[k] > high && f[k] >= fm && f[k] > fp) peaks.push_back(k);
    }
    if (peaks.empty()) {
      int best = r.first;
      for (int k : idx) if (f[k] > f[best]) best = k;
      peaks.push_back(best);
    }
    dirs.push_back(sample_angle(f, peaks.front()));
    if (peaks.size() > 1) dirs.push_back(sample_angle(f, peaks.back()));
    return std::make_pair(SingularityKind::Wedge, dirs);
  }
  return std::nullopt;
}

}  // namespace

Singularity classify_singularity(const StrainField& field, Singularity s, const ClassifyOptions& opt) {
  if (opt.n_samples < 90) throw InvalidInput("classification needs at least 90 samples");
  if (!(opt.low < opt.high)) throw InvalidInput("classification bands must satisfy low < high");
  const double radius = opt.radius > 0.0 ? opt.radius : 2.0 * field.grid.spacing();
  s.classify_radius = radius;
  s.kind = SingularityKind::Unclassified;
  s.separatrix_dirs = {};
  std::array<std::optional<std::pair<SingularityKind, std::vector<double>>>, 2> res;
  for (Family fam : {Family::Strain, Family::Stretch})
    res[static_cast<int>(fam)] =
        classify_profile(alignment_profile(field, s.position, radius, opt.n_samples, fam), opt.high, opt.low);
  if (!res[0] || !res[1] || res[0]->first != res[1]->first) return s;
  s.kind = res[0]->first;
  s.separatrix_dirs = {res[0]->second, res[1]->second};
  return s;
}

std::vector<Singularity> classify_singularities(const StrainField& field, std::vector<Singularity> list,
                                                const ClassifyOptions& opt) {
  const double base = opt.radius > 0.0 ? opt.radius : 2.0 * field.grid.spacing();
  for (auto& s : list) {
    ClassifyOptions o = opt;
    o.radius = s.members > 1 ? std::max(base, s.cluster_radius + field.grid.spacing()) : base;
    s = classify_singularity(field, std::move(s), o);
  }
  return list;
}

void write_singularities(const std::vector<Singularity>& list, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  out << "# id = x y kind quality members | strain angles | stretch angles\n";
  for (const auto& s : list) {
    out << "singularity." << s.id << " = " << s.position.x << ' ' << s.position.y << ' ' << to_string(s.kind)
        << ' ' << s.quality << ' ' << s.members << " |";
    for (double a : s.dirs(Family::Strain)) out << ' ' << a;
    out << " |";
    for (double a : s.dirs(Family::Stretch)) out << ' ' << a;
    out << '\n';
  }
}

}  // namespace shearless
