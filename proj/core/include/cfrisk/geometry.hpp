#ifndef CFRISK__GEOMETRY_HPP_
#define CFRISK__GEOMETRY_HPP_

#include <cmath>

namespace cfrisk
{

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Vec2
{
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2 & o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }

  Vec2 rotated(double angle) const
  {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
};

/// Normalize an angle to (-pi, pi].
inline double normalize_angle(double angle)
{
  double r = std::fmod(angle + kPi, 2.0 * kPi);
  if (r <= 0.0) {
    r += 2.0 * kPi;
  }
  return r - kPi;
}

/// Signed shortest arc from `a` to `b`, in (-pi, pi].
inline double shortest_angle_dist(double a, double b)
{
  return normalize_angle(b - a);
}

/// Interpolate headings along the shortest arc; u in [0, 1].
inline double lerp_angle(double a, double b, double u)
{
  return normalize_angle(a + shortest_angle_dist(a, b) * u);
}

/// Axis-aligned footprint dimensions, meters. length is along heading.
struct Footprint
{
  double length{0.0};
  double width{0.0};

  /// Radius of the circumscribed disc: half the footprint diagonal.
  double disc_radius() const { return 0.5 * std::sqrt(length * length + width * width); }
};

struct OrientedBox
{
  Vec2 center;
  double heading{0.0};
  Footprint footprint;
};

/// Separating-axis overlap test for two oriented rectangles.
/// Touching boxes (zero gap) count as overlapping.
bool boxes_overlap(const OrientedBox & a, const OrientedBox & b);

}  // namespace cfrisk

#endif  // CFRISK__GEOMETRY_HPP_
