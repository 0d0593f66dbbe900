#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shearless/strainfield.hpp"

namespace shearless {

/// Named scalar with an optional acceptance bound.
struct MetricReport {
  std::string name;
  double value = 0.0;
  /// pass <=> value <= tolerance when set; otherwise pass is set by the caller.
  std::optional<double> tolerance;
  bool pass = false;
  std::string context;

  static MetricReport bounded(std::string name, double value, double tolerance, std::string context = {});
};

void write_metric_reports(const std::vector<MetricReport>& reports, const std::filesystem::path& path);

/// Orbits of both indicator points for n_iter steps (seeds included), x
/// wrapped into [-1/2, 1/2) and sorted by x.
Polyline indicator_barrier(double a, double b, int n_iter);

/// Symmetric Hausdorff distance between polylines using point-to-segment
/// distances. With period_x set, x is compared on the cylinder.
double hausdorff_distance(const Polyline& a, const Polyline& b, std::optional<double> period_x = std::nullopt);

struct FtleProfile {
  std::vector<double> y;
  std::vector<double> ftle;  ///< NaN next to invalid nodes
  std::vector<double> trenches;  ///< y of strict discrete local minima
};

/// FTLE sampled along the vertical segment x = x_fixed.
FtleProfile ftle_transverse_profile(const StrainField& field, double x_fixed, double y_min, double y_max,
                                    int n_samples);

/// Median of |det C - 1| over valid nodes; NaN when no node is valid.
double median_det_defect(const StrainField& field);

/// Largest pairwise distance among advected circle points over the initial
/// diameter, in unwrapped coordinates.
double blob_stretch_ratio(const DynamicalSystem& system, const Vec2& center, double radius, int n_pts, double t0,
                          double t1, const SolverConfig& cfg = {});

}  // namespace shearless
