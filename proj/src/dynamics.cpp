#include "shearless/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "shearless/errors.hpp"

namespace shearless {

double polyline_length(const Polyline& p) {
  double len = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) len += norm(p[i] - p[i - 1]);
  return len;
}

DynamicalSystem DynamicalSystem::continuous(std::string id, VelocityFn rhs, Rect domain,
                                            std::optional<double> period_x) {
  if (!rhs) throw InvalidInput("continuous system requires a velocity field");
  if (period_x && !(*period_x > 0.0)) throw InvalidInput("x-period must be positive");
  DynamicalSystem s;
  s.kind_ = SystemKind::Continuous;
  s.id_ = std::move(id);
  s.rhs_ = std::move(rhs);
  s.domain_ = domain;
  s.period_x_ = period_x;
  return s;
}

DynamicalSystem DynamicalSystem::discrete(std::string id, StepFn step, Rect domain,
                                          std::optional<double> period_x) {
  if (!step) throw InvalidInput("discrete system requires a step map");
  if (period_x && !(*period_x > 0.0)) throw InvalidInput("x-period must be positive");
  DynamicalSystem s;
  s.kind_ = SystemKind::Discrete;
  s.id_ = std::move(id);
  s.step_ = std::move(step);
  s.domain_ = domain;
  s.period_x_ = period_x;
  return s;
}

Vec2 DynamicalSystem::velocity(const Vec2& x, double t) const {
  if (kind_ != SystemKind::Continuous) throw InvalidInput(id_ + " is a discrete map");
  return rhs_(x, t);
}

Vec2 DynamicalSystem::step(const Vec2& x, long n) const {
  if (kind_ != SystemKind::Discrete) throw InvalidInput(id_ + " is a continuous flow");
  return step_(x, n);
}

bool DynamicalSystem::inside(const Vec2& p, double margin) const {
  if (!is_finite(p)) return false;
  if (std::isinf(margin)) return true;
  const double mx = margin * domain_.width();
  const double my = margin * domain_.height();
  const bool x_ok = periodic_x() || (p.x >= domain_.x_min - mx && p.x <= domain_.x_max + mx);
  return x_ok && p.y >= domain_.y_min - my && p.y <= domain_.y_max + my;
}

void SolverConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw InvalidInput("solver tolerances must be positive");
  if (max_steps <= 0) throw InvalidInput("max_steps must be positive");
  if (step < 0.0) throw InvalidInput("solver step must be non-negative");
  if (method == IntegrationMethod::Rk4 && !(step > 0.0))
    throw InvalidInput("fixed-step RK4 requires a positive step");
  if (!(escape_margin >= 0.0)) throw InvalidInput("escape margin must be non-negative");
}

namespace {

[[noreturn]] void escape(const DynamicalSystem& s, const Vec2& p, double t) {
  std::ostringstream msg;
  msg << s.id() << ": trajectory escaped at t=" << t << " (x=" << p.x << ", y=" << p.y << ")";
  throw DomainEscape(msg.str(), t);
}

long as_step_index(double t) {
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-9) throw InvalidInput("discrete systems require integer times");
  return static_cast<long>(r);
}

Vec2 iterate_map(const DynamicalSystem& s, Vec2 x, double t0, double t1, const SolverConfig& cfg) {
  const long n0 = as_step_index(t0);
  const long n1 = as_step_index(t1);
  if (n1 < n0) throw InvalidInput("discrete flow map requires t1 >= t0");
  if (n1 - n0 > cfg.max_steps) throw BudgetExceeded(s.id() + ": iteration count exceeds max_steps");
  for (long n = n0; n < n1; ++n) {
    x = s.step(x, n);
    if (!s.inside(x, cfg.escape_margin)) escape(s, x, static_cast<double>(n + 1));
  }
  return x;
}

Vec2 integrate_rk4(const DynamicalSystem& s, Vec2 x, double t0, double t1, const SolverConfig& cfg) {
  const double span = t1 - t0;
  const long n = std::max<long>(1, static_cast<long>(std::ceil(std::abs(span) / cfg.step - 1e-12)));
  if (n > cfg.max_steps) throw BudgetExceeded(s.id() + ": RK4 step count exceeds max_steps");
  const double h = span / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const Vec2 k1 = s.velocity(x, t);
    const Vec2 k2 = s.velocity(x + 0.5 * h * k1, t + 0.5 * h);
    const Vec2 k3 = s.velocity(x + 0.5 * h * k2, t + 0.5 * h);
    const Vec2 k4 = s.velocity(x + h * k3, t + h);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!s.inside(x, cfg.escape_margin)) escape(s, x, t + h);
  }
  return x;
}

// Dormand-Prince 5(4) with standard PI-free step-size control.
Vec2 integrate_dopri5(const DynamicalSystem& s, Vec2 x, double t0, double t1, const SolverConfig& cfg) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double span = t1 - t0;
  const double dir = span >= 0.0 ? 1.0 : -1.0;
  double h = cfg.step > 0.0 ? cfg.step : std::abs(span) / 100.0;
  h = std::min(h, std::abs(span));
  double t = t0;
  long attempts = 0;
  Vec2 k1 = s.velocity(x, t);
  while (dir * (t1 - t) > 0.0) {
    if (++attempts > cfg.max_steps) throw BudgetExceeded(s.id() + ": adaptive step budget exhausted");
    const double remaining = std::abs(t1 - t);
    const bool last = h >= remaining * (1.0 - 1e-12);
    const double hs = dir * (last ? remaining : h);

    const Vec2 k2 = s.velocity(x + hs * (a21 * k1), t + c2 * hs);
    const Vec2 k3 = s.velocity(x + hs * (a31 * k1 + a32 * k2), t + c3 * hs);
    const Vec2 k4 = s.velocity(x + hs * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * hs);
    const Vec2 k5 = s.velocity(x + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * hs);
    const Vec2 k6 =
        s.velocity(x + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + hs);
    const Vec2 xn = x + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec2 k7 = s.velocity(xn, t + hs);
    const Vec2 err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double sx = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x.x), std::abs(xn.x));
    const double sy = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x.y), std::abs(xn.y));
    const double en = std::sqrt(0.5 * ((err.x / sx) * (err.x / sx) + (err.y / sy) * (err.y / sy)));
    if (!std::isfinite(en)) escape(s, xn, t + hs);

    const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    if (en <= 1.0) {
      t = last ? t1 : t + hs;
      x = xn;
      k1 = k7;
      if (!s.inside(x, cfg.escape_margin)) escape(s, x, t);
    }
    h = std::abs(hs) * factor;
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw BudgetExceeded(s.id() + ": step size underflow");
  }
  return x;
}

}  // namespace

Vec2 flow_map(const DynamicalSystem& system, const Vec2& x0, double t0, double t1,
              const SolverConfig& cfg) {
  cfg.validate();
  if (!is_finite(x0)) throw InvalidInput("initial position must be finite");
  if (system.kind() == SystemKind::Discrete) return iterate_map(system, x0, t0, t1, cfg);
  if (t1 == t0) return x0;
  if (cfg.method == IntegrationMethod::Rk4) return integrate_rk4(system, x0, t0, t1, cfg);
  return integrate_dopri5(system, x0, t0, t1, cfg);
}

double default_aux_spacing(const DynamicalSystem& system) {
  return 1e-4 * system.domain().min_extent();
}

Mat2 flow_map_gradient(const DynamicalSystem& system, const Vec2& x0, double t0, double t1,
                       double aux_spacing, const SolverConfig& cfg) {
  if (!(aux_spacing > 0.0)) throw InvalidInput("aux_spacing must be positive");
  const Vec2 ex{aux_spacing, 0.0};
  const Vec2 ey{0.0, aux_spacing};
  const Vec2 xp = flow_map(system, x0 + ex, t0, t1, cfg);
  const Vec2 xm = flow_map(system, x0 - ex, t0, t1, cfg);
  const Vec2 yp = flow_map(system, x0 + ey, t0, t1, cfg);
  const Vec2 ym = flow_map(system, x0 - ey, t0, t1, cfg);
  const double inv = 1.0 / (2.0 * aux_spacing);
  return {(xp.x - xm.x) * inv, (yp.x - ym.x) * inv, (xp.y - xm.y) * inv, (yp.y - ym.y) * inv};
}

Polyline circle_points(const Vec2& center, double radius, int n_pts) {
  Polyline pts;
  pts.reserve(static_cast<std::size_t>(std::max(n_pts, 0)));
  for (int k = 0; k < n_pts; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n_pts;
    pts.push_back(center + radius * Vec2{std::cos(th), std::sin(th)});
  }
  return pts;
}

Polyline advect_blob(const DynamicalSystem& system, const Vec2& center, double radius, int n_pts,
                     double t0, double t1, const SolverConfig& cfg) {
  if (n_pts < 3) throw InvalidInput("advect_blob requires at least 3 points");
  if (!(radius > 0.0)) throw InvalidInput("blob radius must be positive");
  Polyline pts = circle_points(center, radius, n_pts);
  for (auto& p : pts) p = flow_map(system, p, t0, t1, cfg);
  return pts;
}

}  // namespace shearless
