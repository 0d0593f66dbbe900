#pragma once

#include <cmath>
#include <optional>
#include <vector>

namespace shearless {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator/(const Vec2& a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline Vec2 normalized(const Vec2& a) { return a / norm(a); }
/// Counter-clockwise rotation by 90 degrees (the matrix [[0,-1],[1,0]]).
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }
inline bool is_finite(const Vec2& a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// General 2x2 matrix, row-major.
struct Mat2 {
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;

  static constexpr Mat2 identity() { return {}; }
  constexpr double det() const { return a11 * a22 - a12 * a21; }
  constexpr double trace() const { return a11 + a22; }
  constexpr Mat2 transposed() const { return {a11, a21, a12, a22}; }
  friend constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
  }
  friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a11 * n.a11 + m.a12 * n.a21, m.a11 * n.a12 + m.a12 * n.a22,
            m.a21 * n.a11 + m.a22 * n.a21, m.a21 * n.a12 + m.a22 * n.a22};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

/// Symmetric 2x2 tensor [[c11, c12], [c12, c22]].
struct Sym2 {
  double c11 = 1.0;
  double c12 = 0.0;
  double c22 = 1.0;

  static constexpr Sym2 identity() { return {}; }
  constexpr double det() const { return c11 * c22 - c12 * c12; }
  constexpr double trace() const { return c11 + c22; }
  constexpr Vec2 operator*(const Vec2& v) const {
    return {c11 * v.x + c12 * v.y, c12 * v.x + c22 * v.y};
  }
  constexpr double quad(const Vec2& v) const {
    return c11 * v.x * v.x + 2.0 * c12 * v.x * v.y + c22 * v.y * v.y;
  }
  bool finite() const {
    return std::isfinite(c11) && std::isfinite(c12) && std::isfinite(c22);
  }
  friend constexpr bool operator==(const Sym2&, const Sym2&) = default;
};

/// Right Cauchy-Green tensor (F^T F) with the symmetric part enforced.
constexpr Sym2 cauchy_green(const Mat2& f) {
  const double c11 = f.a11 * f.a11 + f.a21 * f.a21;
  const double c22 = f.a12 * f.a12 + f.a22 * f.a22;
  const double c12 = f.a11 * f.a12 + f.a21 * f.a22;
  return {c11, c12, c22};
}

struct Rect {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;

  constexpr double width() const { return x_max - x_min; }
  constexpr double height() const { return y_max - y_min; }
  constexpr bool contains(const Vec2& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  constexpr double min_extent() const { return width() < height() ? width() : height(); }
};

using Polyline = std::vector<Vec2>;

/// Wrap x into [origin, origin + period).
inline double wrap_periodic(double x, double origin, double period) {
  double r = std::fmod(x - origin, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return origin + r;
}

/// Distance between points, optionally measured on a cylinder of the given x-period.
inline double periodic_distance(const Vec2& a, const Vec2& b, std::optional<double> period) {
  double dx = a.x - b.x;
  if (period) dx -= *period * std::round(dx / *period);
  return std::hypot(dx, a.y - b.y);
}

double polyline_length(const Polyline& p);

}  // namespace shearless
