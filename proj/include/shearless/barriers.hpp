#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "shearless/singularities.hpp"
#include "shearless/tensorlines.hpp"

namespace shearless {

/// Certified separatrix from a trisector to a wedge. The polyline starts at
/// the trisector position and ends at the wedge position.
struct Connection {
  Tensorline tensorline;
  int from = -1;  ///< trisector id
  int to = -1;    ///< wedge id
  Family family = Family::Strain;
  bool convexity_ok = false;
  bool weak_min_ok = false;
  /// Passing fraction over determinate samples and the sample counts.
  double convexity_fraction = 0.0;
  double weak_min_fraction = 0.0;
  int samples = 0;
  int indeterminate = 0;

  bool certified() const { return convexity_ok && weak_min_ok; }
};

/// A chain segment: a connection walked forward (trisector to wedge) or in reverse.
struct ChainSegment {
  std::size_t connection = 0;  ///< index into the connection list
  bool reversed = false;
};

/// Alternating strainline/stretchline sequence joined at singularities.
struct BarrierChain {
  std::vector<ChainSegment> segments;
  /// Singularity ids visited, one more than segments (first == last when closed).
  std::vector<int> nodes;
  bool closed = false;
  /// Concatenated polyline, unwrapped so consecutive vertices are close.
  Polyline polyline;
};

struct CertifyConfig {
  /// Finite-difference spacing and march step; zero selects the grid spacing.
  double spacing = 0.0;
  /// Fraction of determinate samples that must pass.
  double quorum = 0.9;
  /// Probe every n-th interior vertex.
  int vertex_stride = 4;
  /// Largest march, in steps, while looking for the nearest trench.
  int max_march = 20;
};

struct ChainConfig {
  /// Junctions require strict strain/stretch alternation unless disabled.
  bool strict_alternation = true;
  /// Smallest angle (degrees) between the two branches meeting at a junction.
  double junction_angle_deg = 120.0;
};

/// Launch one tensorline per separatrix direction and family, offset from the
/// trisector by its classification radius. The trisector position is
/// prepended. Branch failures are dropped without aborting the others.
std::vector<Tensorline> trace_separatrices(const StrainField& field, const Singularity& trisector,
                                           const StopConfig& stop);

/// Connection when the line ends within capture_radius of a wedge and its
/// terminal tangent lies within 60 degrees of the direction to the wedge.
/// Only singularities of kind Wedge are considered; distances wrap with
/// period_x when given.
std::optional<Connection> connect_to_wedge(const Tensorline& line, const std::vector<Singularity>& wedges,
                                           double capture_radius,
                                           std::optional<double> period_x = std::nullopt);

/// Convexity: second difference of the segment's neutrality along the
/// complementary eigenvector is positive. Weak minimality: marching along the
/// fixed normal to the nearest trench of the neutrality only meets convex
/// probes. Probes leaving the hull make a sample indeterminate.
Connection certify_segment(const StrainField& field, Connection conn, const CertifyConfig& cfg = {});

/// Maximal alternating chains over certified connections with smooth
/// junctions, canonicalised and deduplicated.
std::vector<BarrierChain> assemble_chains(const std::vector<Connection>& connections,
                                          const std::vector<Singularity>& singularities,
                                          const StrainField& field, const ChainConfig& cfg = {});

struct BarrierConfig {
  StrainFieldOptions field{};
  double det_tol = 1.0;
  /// Detection merge radius; zero selects one cell diagonal.
  double merge_radius = 0.0;
  ClassifyOptions classify{};
  StopConfig stop{};
  CertifyConfig certify{};
  ChainConfig chain{};
};

/// Every intermediate product of the extraction pipeline.
struct BarrierResult {
  StrainField field;
  std::vector<Singularity> singularities;
  std::vector<Tensorline> separatrices;
  std::vector<Connection> connections;
  std::vector<BarrierChain> chains;
};

/// Stages run on an existing field.
BarrierResult extract_parabolic_barriers(StrainField field, const BarrierConfig& cfg);
/// Full pipeline; stage failures surface as StageError.
BarrierResult extract_parabolic_barriers(const DynamicalSystem& system, const Rect& window,
                                         const BarrierConfig& cfg);

struct HyperbolicCandidate {
  std::size_t seed = 0;  ///< index into the seed list
  Tensorline line;
  double mean_stretch = 0.0;
  bool is_local_extremum = false;
};

/// Tensorline through each seed (both directions joined), dropped when it
/// passes within the capture radius of a singularity. Strain lines carry the
/// arclength mean of sqrt(lambda2) and are flagged at a strict local minimum;
/// stretch lines carry the mean of sqrt(lambda1) and are flagged at a strict
/// local maximum, over seeds at distance (0, neighborhood].
std::vector<HyperbolicCandidate> score_hyperbolic_candidates(const StrainField& field,
                                                             const std::vector<Vec2>& seeds, Family family,
                                                             double neighborhood, const StopConfig& stop,
                                                             const std::vector<Singularity>& singularities);

/// Manifest of chains and segments plus one CSV of chain polylines.
void write_barriers(const BarrierResult& result, const std::filesystem::path& manifest_path,
                    const std::filesystem::path& csv_path);
/// Chains and singularities over the FTLE field as an SVG.
void write_barriers_svg(const BarrierResult& result, const std::filesystem::path& path);

}  // namespace shearless
