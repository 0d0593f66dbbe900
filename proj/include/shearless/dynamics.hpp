#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "shearless/geometry.hpp"

namespace shearless {

enum class SystemKind { Continuous, Discrete };

/// Velocity field v(x, t) of a continuous-time system.
using VelocityFn = std::function<Vec2(const Vec2&, double)>;
/// One application of a discrete map; the second argument is the step index n
/// (the map sends x_n to x_{n+1}).
using StepFn = std::function<Vec2(const Vec2&, long)>;

/// A two-dimensional flow or map over an axis-aligned domain.
///
/// Evaluation is pure: the same (position, time) always yields the same result.
/// Right-hand sides and steps never wrap x; periodic systems are evaluated on
/// unwrapped coordinates and wrapped only for presentation.
class DynamicalSystem {
 public:
  static DynamicalSystem continuous(std::string id, VelocityFn rhs, Rect domain,
                                    std::optional<double> period_x = std::nullopt);
  static DynamicalSystem discrete(std::string id, StepFn step, Rect domain,
                                  std::optional<double> period_x = std::nullopt);

  SystemKind kind() const { return kind_; }
  const std::string& id() const { return id_; }
  const Rect& domain() const { return domain_; }
  std::optional<double> period_x() const { return period_x_; }
  bool periodic_x() const { return period_x_.has_value(); }

  Vec2 velocity(const Vec2& x, double t) const;
  Vec2 step(const Vec2& x, long n) const;

  /// True when p lies inside the domain grown by margin * (domain extent) on
  /// every side; x is unconstrained for periodic systems.
  bool inside(const Vec2& p, double margin) const;

 private:
  DynamicalSystem() = default;

  SystemKind kind_ = SystemKind::Continuous;
  std::string id_;
  VelocityFn rhs_;
  StepFn step_;
  Rect domain_;
  std::optional<double> period_x_;
};

enum class IntegrationMethod { Rk4, Dopri5 };

struct SolverConfig {
  IntegrationMethod method = IntegrationMethod::Dopri5;
  /// Fixed step for Rk4, initial step for Dopri5 (0 selects |t1 - t0| / 100).
  double step = 0.0;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  long max_steps = 1'000'000;
  /// Relative margin around the domain before a trajectory counts as escaped.
  /// Infinity disables the check (non-finite states always escape).
  double escape_margin = std::numeric_limits<double>::infinity();

  /// Throws InvalidInput when tolerances, step or budget are not positive.
  void validate() const;
};

/// Position at t1 of the trajectory through x0 at t0. Discrete systems require
/// integer times with t1 >= t0 and apply the map t1 - t0 times.
Vec2 flow_map(const DynamicalSystem& system, const Vec2& x0, double t0, double t1,
              const SolverConfig& cfg = {});

/// Default auxiliary spacing for gradient finite differences: 1e-4 of the
/// smaller domain extent.
double default_aux_spacing(const DynamicalSystem& system);

/// Central-difference Jacobian of the flow map from four auxiliary trajectories
/// started at x0 +- h e1 and x0 +- h e2.
Mat2 flow_map_gradient(const DynamicalSystem& system, const Vec2& x0, double t0, double t1,
                       double aux_spacing, const SolverConfig& cfg = {});

/// Advect n_pts tracers placed uniformly on a circle; ordering is preserved and
/// x is left unwrapped.
Polyline advect_blob(const DynamicalSystem& system, const Vec2& center, double radius, int n_pts,
                     double t0, double t1, const SolverConfig& cfg = {});

/// Points uniformly spaced on a circle, counter-clockwise from angle 0.
Polyline circle_points(const Vec2& center, double radius, int n_pts);

}  // namespace shearless
