#include "cfrisk/geometry.hpp"

#include <array>

namespace cfrisk
{
namespace
{

std::array<Vec2, 4> box_corners(const OrientedBox & b)
{
  const Vec2 ax = Vec2{std::cos(b.heading), std::sin(b.heading)} * (0.5 * b.footprint.length);
  const Vec2 ay = Vec2{-std::sin(b.heading), std::cos(b.heading)} * (0.5 * b.footprint.width);
  return {b.center + ax + ay, b.center + ax - ay, b.center - ax - ay, b.center - ax + ay};
}

// Projections of both boxes onto `axis` are separated by a positive gap.
bool separated_on_axis(
  const Vec2 & axis, const std::array<Vec2, 4> & a, const std::array<Vec2, 4> & b)
{
  double a_min = axis.dot(a[0]);
  double a_max = a_min;
  for (int i = 1; i < 4; ++i) {
    const double p = axis.dot(a[i]);
    a_min = std::min(a_min, p);
    a_max = std::max(a_max, p);
  }
  double b_min = axis.dot(b[0]);
  double b_max = b_min;
  for (int i = 1; i < 4; ++i) {
    const double p = axis.dot(b[i]);
    b_min = std::min(b_min, p);
    b_max = std::max(b_max, p);
  }
  return a_max < b_min || b_max < a_min;
}

}  // namespace

bool boxes_overlap(const OrientedBox & a, const OrientedBox & b)
{
  const auto ca = box_corners(a);
  const auto cb = box_corners(b);
  const std::array<Vec2, 4> axes = {
    Vec2{std::cos(a.heading), std::sin(a.heading)},
    Vec2{-std::sin(a.heading), std::cos(a.heading)},
    Vec2{std::cos(b.heading), std::sin(b.heading)},
    Vec2{-std::sin(b.heading), std::cos(b.heading)},
  };
  for (const auto & axis : axes) {
    if (separated_on_axis(axis, ca, cb)) {
      return false;
    }
  }
  return true;
}

}  // namespace cfrisk
