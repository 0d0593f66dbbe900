#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "shearless/strainfield.hpp"

namespace shearless {

enum class SingularityKind { Unset, Trisector, Wedge, Unclassified };

const char* to_string(SingularityKind k);

/// Point where C is isotropic, i.e. a common zero of f = C11 - C22 and g = C12.
struct Singularity {
  int id = -1;
  Vec2 position;
  SingularityKind kind = SingularityKind::Unset;
  /// Separatrix angles (radians) indexed by Family: strain then stretch.
  std::array<std::vector<double>, 2> separatrix_dirs;
  /// |f| + |g| of the interpolated tensor at the position.
  double quality = 0.0;
  /// Number of raw cell intersections merged into this detection and their
  /// largest distance from the reported position.
  int members = 1;
  double cluster_radius = 0.0;
  /// Circle radius the classification used (0 before classification).
  double classify_radius = 0.0;

  const std::vector<double>& dirs(Family f) const { return separatrix_dirs[static_cast<int>(f)]; }
};

/// Raw per-cell intersections of the zero isolines of f and g.
struct RawCandidate {
  Vec2 position;
  /// Largest |det C - 1| over the cell's corners.
  double det_defect = 0.0;
};

std::vector<RawCandidate> singularity_candidates(const StrainField& field);

/// Cell intersections merged by single linkage within merge_radius (zero
/// selects one cell diagonal); a cluster is dropped when any member cell has
/// |det C - 1| > det_tol. Ids are assigned in scan order. Throws
/// DegenerateField when every valid node is isotropic.
std::vector<Singularity> detect_singularities(const StrainField& field, double det_tol = 1.0,
                                              double merge_radius = 0.0);

struct ClassifyOptions {
  /// Circle radius; zero selects two grid spacings.
  double radius = 0.0;
  int n_samples = 3600;
  /// States for f_i: near 1 above `high`, near 0 below `low`, ignored between.
  double high = 0.95;
  double low = 0.2;
};

/// Samples f_i(theta) = |<xi_i, r>| on a circle around s for both families.
/// Three alternating near-1 / near-0 runs give a trisector, one of each a
/// wedge; anything else (or disagreement between families) is Unclassified.
Singularity classify_singularity(const StrainField& field, Singularity s, const ClassifyOptions& opt = {});

/// Classify every detection; the radius grows to cluster_radius + one grid
/// spacing when a detection merged several intersections.
std::vector<Singularity> classify_singularities(const StrainField& field, std::vector<Singularity> list,
                                                const ClassifyOptions& opt = {});

/// f_i(theta) samples on the circle (NaN where undefined), exposed for tests.
std::vector<double> alignment_profile(const StrainField& field, const Vec2& center, double radius,
                                      int n_samples, Family family);

void write_singularities(const std::vector<Singularity>& list, const std::filesystem::path& path);

}  // namespace shearless
