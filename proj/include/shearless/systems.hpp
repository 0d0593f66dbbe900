#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "shearless/dynamics.hpp"

namespace shearless {

/// Steady parallel shear flow u = 1 - y^2, v = 0, x-periodic with period 2.
DynamicalSystem canonical_shear_flow();

/// Steady incompressible flow x' = x (1 + 3y^2), y' = -y - y^3 whose attracting
/// line y = 0 is an FTLE trench but not a jet core.
DynamicalSystem ftle_counterexample_flow(Rect domain = {-1.0, 1.0, -1.0, 1.0});

/// Rigid rotation u = -y, v = x.
DynamicalSystem rigid_rotation_flow(Rect domain = {-2.0, 2.0, -2.0, 2.0});

/// Constant velocity field.
DynamicalSystem uniform_flow(Vec2 velocity, Rect domain = {-10.0, 10.0, -10.0, 10.0});

/// One step of the (possibly phase-shifted) standard non-twist map:
///   y' = y - b sin(2 pi x - theta),  x' = x + a (1 - y'^2).
Vec2 sntm_step(const Vec2& p, double a, double b, double theta);

/// Standard non-twist map on [-0.5, 0.5) x [-2, 2], x-periodic with period 1.
DynamicalSystem standard_nontwist_map(double a, double b);

/// Indicator points whose orbits trace the shearless curve: (a/2 + 1/4, 0) and
/// its image (a/2 - 1/4, 0) under the symmetry (x, y) -> (x + 1/2, -y). The
/// mirror point (-a/2 - 1/4, 0) lies on a different invariant curve of this map.
std::array<Vec2, 2> sntm_indicator_points(double a);

// ---------------------------------------------------------------------------
// Bickley jet

/// Piecewise-linear signal sampled at strictly increasing times.
class SampledSignal {
 public:
  SampledSignal() = default;
  SampledSignal(std::vector<double> t, std::vector<double> value);

  /// Throws SignalOutOfRange outside [t.front(), t.back()].
  double operator()(double t) const;
  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& values() const { return value_; }

  /// Two-column CSV "t,value"; a non-numeric first line is treated as a header.
  static SampledSignal read_csv(const std::filesystem::path& path);
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::vector<double> t_;
  std::vector<double> value_;
};

/// Chaotic amplitude signal built from the x-coordinate of a forced Duffing
/// oscillator (x'' + 0.3 x' - x + x^3 = 0.5 cos 1.2 tau), tau = t / time_scale:
///   eps(t) = mean * (1 + rel_amplitude * x(tau) / 1.5).
/// The seed perturbs the oscillator's initial condition.
SampledSignal duffing_signal(std::uint64_t seed, double t_begin, double t_end, std::size_t n_samples,
                             double mean, double rel_amplitude, double time_scale);

struct QuasiperiodicForcing {
  std::array<double, 3> eps{0.075, 0.4, 0.3};
};

struct ChaoticForcing {
  SampledSignal eps1;
  SampledSignal eps2;
  double eps3 = 0.3;
};

struct BickleyConfig {
  double U = 62.66;       // m/s
  double L = 1.77e6;      // m
  double r0 = 6.371e6;    // mean Earth radius, m
  /// Rossby-wave phase speeds in m/s. Not fixed by the jet model itself; the
  /// defaults are the customary c_n = (0.1446, 0.205, 0.461) U.
  std::array<double, 3> c = default_phase_speeds(62.66);
  std::variant<QuasiperiodicForcing, ChaoticForcing> forcing = QuasiperiodicForcing{};
  /// Half-width of the meridional domain, m.
  double y_half_width = 3.0e6;

  static std::array<double, 3> default_phase_speeds(double U) {
    return {0.1446 * U, 0.205 * U, 0.461 * U};
  }
  double wavenumber(int n) const { return 2.0 * n / r0; }
  /// Zonal period of the perturbation, pi * r0.
  double period_x() const;
  void validate() const;
};

/// Velocity (-d psi/dy, d psi/dx) of the Bickley jet, derivatives taken analytically.
Vec2 bickley_velocity(const BickleyConfig& cfg, double x, double y, double t);

/// Stream function psi0 + psi1.
double bickley_streamfunction(const BickleyConfig& cfg, double x, double y, double t);

DynamicalSystem bickley_jet(BickleyConfig cfg);

}  // namespace shearless
