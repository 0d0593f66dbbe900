#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shearless/dynamics.hpp"

namespace shearless {

/// Tensorline families: strainlines are tangent to xi1, stretchlines to xi2.
enum class Family { Strain, Stretch };

const char* to_string(Family f);
Family family_from_string(const std::string& s);
inline Family other(Family f) { return f == Family::Strain ? Family::Stretch : Family::Strain; }

/// Contrast (l2 - l1) / (l2 + l1) below which C counts as isotropic.
inline constexpr double kIsotropicContrast = 1e-6;

struct EigenSym2 {
  double lambda1 = 1.0;  ///< smaller eigenvalue
  double lambda2 = 1.0;  ///< larger eigenvalue
  Vec2 xi1{1.0, 0.0};
  Vec2 xi2{0.0, 1.0};
  bool isotropic = true;
};

/// Closed-form eigen-decomposition with lambda1 <= lambda2. Each eigenvector has
/// a nonnegative first component (ties: nonnegative second). When det is given
/// lambda1 is taken as det / lambda2, which keeps it accurate when lambda2 is
/// huge. Throws InvalidInput on non-finite input.
EigenSym2 eig_sym2(const Sym2& c, std::optional<double> det = std::nullopt);

bool is_isotropic(double lambda1, double lambda2);

/// D = (C Omega - Omega C) / 2 with Omega the counter-clockwise quarter turn.
/// Symmetric and traceless.
Sym2 d_tensor(const Sym2& c);

/// 1 / sqrt(<n, C^-1 n>) for unit n. Throws InvalidInput for singular C.
double normal_repulsion(const Sym2& c, const Vec2& n);

/// <r', D r'> / sqrt(<r', C r'> <r', r'>). Throws InvalidInput for a zero tangent.
double lagrangian_shear(const Sym2& c, const Vec2& tangent);

/// Complementary-eigenvalue neutrality: (sqrt(l2) - 1)^2 for strainlines,
/// (sqrt(l1) - 1)^2 for stretchlines.
double neutrality_from_eigen(double lambda1, double lambda2, Family family);

struct ShearVectors {
  Vec2 plus;
  Vec2 minus;
  double alpha = 0.0;  ///< coefficient of xi1
  double beta = 0.0;   ///< coefficient of xi2
};

/// Unit directions of extremal Lagrangian shear, alpha xi1 +- beta xi2. xi2 is
/// re-oriented to the counter-clockwise normal of xi1 so that `plus` is the
/// maximiser. Throws IsotropicPoint when lambda1 == lambda2.
ShearVectors shear_vector_field(double lambda1, double lambda2, const Vec2& xi1, const Vec2& xi2);

/// Normal-perturbation boundary term for a unit tangent alpha xi1 + beta xi2.
double boundary_term(double lambda1, double lambda2, double alpha, double beta);

/// Uniform node lattice. With period_x set the lattice has nx nodes per period
/// (dx = period / nx) and wraps in x.
struct GridSpec {
  Vec2 origin;
  double dx = 1.0;
  double dy = 1.0;
  int nx = 2;
  int ny = 2;
  std::optional<double> period_x;

  std::size_t nodes() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  Vec2 node(int i, int j) const { return {origin.x + i * dx, origin.y + j * dy}; }
  double spacing() const { return std::min(dx, dy); }
  double diagonal() const { return std::hypot(dx, dy); }
  Rect bounds() const;
  void validate() const;
};

/// Cauchy-Green data on a grid. Invalid nodes hold NaN in every channel.
class StrainField {
 public:
  GridSpec grid;
  double t0 = 0.0;
  double t1 = 0.0;
  double aux_spacing = 0.0;
  std::string system_id;

  std::vector<double> c11, c12, c22;
  std::vector<double> lambda1, lambda2;
  std::vector<double> xi1x, xi1y;
  std::vector<double> ftle;
  std::vector<double> det_c;
  std::vector<std::uint8_t> valid;

  /// Allocate all channels for the grid, every node invalid.
  void allocate();
  /// Fill channels at node k from C (and det C) and mark it valid.
  void set_node(std::size_t k, const Sym2& c, double det);
  void set_invalid(std::size_t k);

  std::size_t invalid_count() const;
  double invalid_fraction() const;
  /// True when more than 5% of nodes are invalid.
  bool quality_warning() const { return invalid_fraction() > 0.05; }

  Sym2 tensor_at_node(std::size_t k) const { return {c11[k], c12[k], c22[k]}; }
  EigenSym2 eigen_at_node(std::size_t k) const;

  bool periodic() const { return grid.period_x.has_value(); }
  bool in_hull(const Vec2& p) const;
  /// Wrap x into the lattice period; identity for non-periodic fields.
  Vec2 wrap(const Vec2& p) const;

  /// Bilinear interpolation of C at p. Throws DomainEscape outside the hull;
  /// returns nullopt when a surrounding node is invalid.
  std::optional<Sym2> tensor_at(const Vec2& p) const;
  /// Eigen data of the interpolated tensor (det C interpolated alongside).
  std::optional<EigenSym2> eigen_at(const Vec2& p) const;
  /// Interpolated FTLE (nullopt next to invalid nodes).
  std::optional<double> ftle_at(const Vec2& p) const;

  /// Periodic-aware distance between two points.
  double distance(const Vec2& a, const Vec2& b) const { return periodic_distance(a, b, grid.period_x); }

 private:
  struct Cell {
    std::size_t k00, k10, k01, k11;
    double sx, sy;
  };
  Cell locate(const Vec2& p) const;
  std::optional<double> interpolate(const Cell& c, const std::vector<double>& ch) const;
};

struct StrainFieldOptions {
  int nx = 100;
  int ny = 100;
  double t0 = 0.0;
  double t1 = 1.0;
  SolverConfig solver{};
  /// Zero selects default_aux_spacing(system).
  double aux_spacing = 0.0;
  unsigned threads = 0;
};

/// Cauchy-Green field over a window. A periodic system whose window spans a
/// full period gets a wrapping lattice. Throws FieldFailure when every node
/// is invalid.
StrainField compute_strain_field(const DynamicalSystem& system, const Rect& window,
                                 const StrainFieldOptions& opt);

/// Field built from an analytic tensor function sampled at the grid nodes
/// (det C taken from the tensor itself). Non-finite or indefinite samples
/// become invalid nodes.
StrainField make_strain_field(const GridSpec& grid, const std::function<Sym2(const Vec2&)>& tensor,
                              double t0 = 0.0, double t1 = 1.0, std::string system_id = "analytic");

double neutrality(const StrainField& field, const Vec2& p, Family family);
double lagrangian_shear(const StrainField& field, const Vec2& p, const Vec2& tangent);
/// Arc-length weighted mean of p over segment midpoints and segment tangents.
double averaged_shear(const StrainField& field, const Polyline& curve);

/// Text header plus one little-endian float64 file per channel; the validity
/// mask is stored as bytes.
void write_strain_field(const StrainField& field, const std::filesystem::path& header_path);
StrainField read_strain_field(const std::filesystem::path& header_path);
/// Per-node CSV export: i,j,x,y,c11,c12,c22,lambda1,lambda2,xi1x,xi1y,ftle,detc,valid.
void write_strain_field_csv(const StrainField& field, const std::filesystem::path& path);

}  // namespace shearless
