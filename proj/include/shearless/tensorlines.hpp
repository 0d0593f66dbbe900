#pragma once

#include <filesystem>
#include <vector>

#include "shearless/strainfield.hpp"

namespace shearless {

/// ResidualExceeded: the next vertex would break |p| <= p_tol, i.e. the grid
/// no longer resolves the eigenvector field along the line.
enum class EndTag { Seed, Singularity, Boundary, LengthCap, IsotropicRegion, ResidualExceeded };

const char* to_string(EndTag t);

struct EndPoint {
  EndTag tag = EndTag::Seed;
  /// Singularity id when tag == Singularity, otherwise -1.
  int singularity = -1;

  friend bool operator==(const EndPoint&, const EndPoint&) = default;
};

/// Oriented polyline tangent to xi1 (strain) or xi2 (stretch). Vertices are
/// kept unwrapped on periodic fields.
struct Tensorline {
  Family family = Family::Strain;
  Polyline vertices;
  EndPoint start;
  EndPoint end;
  double arclength = 0.0;
};

/// A singularity the integrator terminates at. Inside `core_radius` the
/// field is near-isotropic and the shear residual is not enforced.
struct CaptureTarget {
  int id = -1;
  Vec2 position;
  double core_radius = 0.0;
};

struct StopConfig {
  /// RK4 step; zero selects a quarter of the grid spacing.
  double step = 0.0;
  /// Arclength cap; zero selects twice the hull perimeter.
  double max_length = 0.0;
  /// Zero selects 1.5 grid spacings.
  double capture_radius = 0.0;
  /// Largest Lagrangian-shear residual allowed at a vertex; the line is cut
  /// before the first vertex that exceeds it. Infinity disables the check.
  double p_tol = 1e-2;
  std::vector<CaptureTarget> targets;
  /// Target ignored until the line has travelled `launch_exclusion` (zero
  /// selects three capture radii); used for the singularity a line leaves.
  int launch_id = -1;
  double launch_exclusion = 0.0;

  double resolved_step(const StrainField& f) const { return step > 0.0 ? step : 0.25 * f.grid.spacing(); }
  double resolved_capture(const StrainField& f) const {
    return capture_radius > 0.0 ? capture_radius : 1.5 * f.grid.spacing();
  }
  double resolved_max_length(const StrainField& f) const;
};

/// Eigenvector of the interpolated C for the family, signed to agree with
/// reference_dir. Throws IsotropicPoint when the local contrast is below the
/// shared threshold and DomainEscape outside the hull or next to invalid nodes.
Vec2 eigvec_at(const StrainField& field, const Vec2& p, Family family, const Vec2& reference_dir);

/// Fixed-step RK4 along the orientation-continued eigenvector field. Throws
/// Stagnation after 10 consecutive steps shorter than 1e-3 of the step.
Tensorline integrate_tensorline(const StrainField& field, const Vec2& x0, Family family,
                                const Vec2& initial_dir, const StopConfig& stop,
                                EndPoint start = {});

/// Largest |p| over vertices, with tangents from central chords (one-sided at
/// the ends). Vertices next to invalid nodes or inside a target core are skipped.
double max_shear_residual(const StrainField& field, const Polyline& line,
                          const std::vector<CaptureTarget>& cores = {});

/// CSV rows "id,family,vertex,x,y" (x wrapped for presentation).
void write_tensorlines_csv(const StrainField& field, const std::vector<Tensorline>& lines,
                           const std::filesystem::path& path);
/// Text manifest with tags and arclength per line.
void write_tensorline_manifest(const std::vector<Tensorline>& lines, const std::filesystem::path& path);

}  // namespace shearless
