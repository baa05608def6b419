#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reachplan/types.hpp"

namespace reachplan {

enum class ObstacleKind { rect, disc };

/// Axis-aligned rectangle or disc.
template <typename Scalar>
struct Obstacle {
  ObstacleKind kind = ObstacleKind::rect;
  Vec2<Scalar> center = Vec2<Scalar>::Zero();
  Vec2<Scalar> half_extents = Vec2<Scalar>::Zero();
  Scalar radius = Scalar(0);
  bool is_target = false;

  static Obstacle rect(const Vec2<Scalar>& center, const Vec2<Scalar>& half_extents,
                       bool target = false) {
    Obstacle o;
    o.kind = ObstacleKind::rect;
    o.center = center;
    o.half_extents = half_extents;
    o.is_target = target;
    return o;
  }

  static Obstacle disc(const Vec2<Scalar>& center, Scalar radius, bool target = false) {
    Obstacle o;
    o.kind = ObstacleKind::disc;
    o.center = center;
    o.radius = radius;
    o.is_target = target;
    return o;
  }

  /// Radius of the smallest centered circle containing the shape.
  Scalar bounding_radius() const {
    return kind == ObstacleKind::disc ? radius : half_extents.norm();
  }

  bool operator==(const Obstacle&) const = default;
};

/// Signed distance between a segment and an obstacle, with the witness
/// parameter t on the segment and the gradient n of the distance with respect
/// to a rigid displacement of the witness point a + t (b - a). n is a unit
/// vector except where the deepest penetration sits on a crease between two
/// faces, where it blends both face normals.
template <typename Scalar>
struct SegmentDistance {
  Scalar distance;
  Scalar t;
  Vec2<Scalar> normal;
};

namespace detail {

template <typename Scalar>
Scalar closest_param(const Vec2<Scalar>& a, const Vec2<Scalar>& b, const Vec2<Scalar>& p) {
  const Vec2<Scalar> d = b - a;
  const Scalar len_sq = d.squaredNorm();
  if (len_sq <= Scalar(0)) return Scalar(0);
  return std::clamp((p - a).dot(d) / len_sq, Scalar(0), Scalar(1));
}

/// Liang-Barsky clip of a + t d against |x| <= hx, |y| <= hy (local frame).
template <typename Scalar>
bool clip_to_box(const Vec2<Scalar>& a, const Vec2<Scalar>& d, const Vec2<Scalar>& half,
                 Scalar& t0, Scalar& t1) {
  t0 = Scalar(0);
  t1 = Scalar(1);
  const std::array<Scalar, 4> p{-d.x(), d.x(), -d.y(), d.y()};
  const std::array<Scalar, 4> q{a.x() + half.x(), half.x() - a.x(), a.y() + half.y(),
                                half.y() - a.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == Scalar(0)) {
      if (q[i] < Scalar(0)) return false;
      continue;
    }
    const Scalar r = q[i] / p[i];
    if (p[i] < Scalar(0)) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  return true;
}

/// Gradient of the segment's signed distance at its deepest point p inside
/// the box. Depth is the minimum of four affine face terms h_f - n_f . p(t);
/// at an interior maximum where an increasing and a decreasing term cross,
/// the derivative is their slope-weighted blend.
template <typename Scalar>
Vec2<Scalar> penetration_gradient(const Vec2<Scalar>& p, const Vec2<Scalar>& d,
                                  const Vec2<Scalar>& h, Scalar t) {
  using std::abs;
  const std::array<Vec2<Scalar>, 4> normals{Vec2<Scalar>(1, 0), Vec2<Scalar>(-1, 0),
                                            Vec2<Scalar>(0, 1), Vec2<Scalar>(0, -1)};
  std::array<Scalar, 4> depth{};
  Scalar deepest = std::numeric_limits<Scalar>::infinity();
  for (std::size_t f = 0; f < 4; ++f) {
    depth[f] = (f < 2 ? h.x() : h.y()) - normals[f].dot(p);
    deepest = std::min(deepest, depth[f]);
  }
  const Scalar tol = Scalar(1e-12) * (Scalar(1) + h.cwiseAbs().maxCoeff() + d.norm());
  int rising = -1;
  int falling = -1;
  int flat = -1;
  for (std::size_t f = 0; f < 4; ++f) {
    if (depth[f] - deepest > tol) continue;
    const Scalar slope = -normals[f].dot(d);
    if (abs(slope) <= tol) {
      flat = static_cast<int>(f);
    } else if (slope > 0) {
      rising = static_cast<int>(f);
    } else {
      falling = static_cast<int>(f);
    }
  }
  if (flat >= 0) return normals[static_cast<std::size_t>(flat)];
  const bool interior = t > Scalar(0) && t < Scalar(1);
  if (interior && rising >= 0 && falling >= 0) {
    const auto i = static_cast<std::size_t>(rising);
    const auto j = static_cast<std::size_t>(falling);
    const Scalar si = -normals[i].dot(d);
    const Scalar sj = -normals[j].dot(d);
    return (si * normals[j] - sj * normals[i]) / (si - sj);
  }
  // Maximum at a segment end: the single face term active there.
  if (t <= Scalar(0) && falling >= 0) return normals[static_cast<std::size_t>(falling)];
  if (t >= Scalar(1) && rising >= 0) return normals[static_cast<std::size_t>(rising)];
  return normals[static_cast<std::size_t>(std::max(rising, falling))];
}

}  // namespace detail

/// Exact signed distance from segment [a, b] to an axis-aligned rectangle.
/// Inside, the magnitude is the deepest penetration: the largest distance
/// from any segment point to the rectangle boundary.
template <typename Scalar>
SegmentDistance<Scalar> segment_rect_distance(const Vec2<Scalar>& a_world,
                                              const Vec2<Scalar>& b_world,
                                              const Obstacle<Scalar>& rect) {
  using std::abs;
  const Vec2<Scalar> a = a_world - rect.center;
  const Vec2<Scalar> b = b_world - rect.center;
  const Vec2<Scalar> d = b - a;
  const Vec2<Scalar>& h = rect.half_extents;

  Scalar t0, t1;
  if (detail::clip_to_box(a, d, h, t0, t1)) {
    // Depth along the clipped piece is concave piecewise linear, so its
    // maximum sits at an end of the piece or at a breakpoint.
    const auto depth_at = [&](Scalar t) {
      const Vec2<Scalar> p = a + t * d;
      return std::min(h.x() - abs(p.x()), h.y() - abs(p.y()));
    };
    std::array<Scalar, 8> candidates{};
    int count = 0;
    candidates[count++] = t0;
    candidates[count++] = t1;
    if (d.x() != Scalar(0)) candidates[count++] = -a.x() / d.x();
    if (d.y() != Scalar(0)) candidates[count++] = -a.y() / d.y();
    for (const Scalar sx : {Scalar(-1), Scalar(1)}) {
      for (const Scalar sy : {Scalar(-1), Scalar(1)}) {
        const Scalar denom = sx * d.x() - sy * d.y();
        if (denom != Scalar(0) && count < 8)
          candidates[count++] = (h.x() - h.y() - sx * a.x() + sy * a.y()) / denom;
      }
    }
    Scalar best_t = t0;
    Scalar best_depth = depth_at(t0);
    for (int i = 1; i < count; ++i) {
      const Scalar t = candidates[static_cast<std::size_t>(i)];
      if (t < t0 || t > t1) continue;
      const Scalar depth = depth_at(t);
      if (depth > best_depth) {
        best_depth = depth;
        best_t = t;
      }
    }
    return {-best_depth, best_t, detail::penetration_gradient(Vec2<Scalar>(a + best_t * d), d, h, best_t)};
  }

  // Disjoint: the closest pair involves a segment endpoint or a rectangle corner.
  SegmentDistance<Scalar> best{std::numeric_limits<Scalar>::infinity(), Scalar(0),
                               Vec2<Scalar>::UnitX()};
  for (const Scalar t : {Scalar(0), Scalar(1)}) {
    const Vec2<Scalar> p = a + t * d;
    const Vec2<Scalar> c = p.cwiseMax(-h).cwiseMin(h);
    const Vec2<Scalar> diff = p - c;
    const Scalar dist = diff.norm();
    if (dist < best.distance) best = {dist, t, diff / dist};
  }
  for (const Scalar sx : {Scalar(-1), Scalar(1)}) {
    for (const Scalar sy : {Scalar(-1), Scalar(1)}) {
      const Vec2<Scalar> corner(sx * h.x(), sy * h.y());
      const Scalar t = detail::closest_param(a, b, corner);
      const Vec2<Scalar> diff = a + t * d - corner;
      const Scalar dist = diff.norm();
      if (dist < best.distance) best = {dist, t, diff / dist};
    }
  }
  return best;
}

/// Signed distance from segment [a, b] to a disc: distance to center minus radius.
template <typename Scalar>
SegmentDistance<Scalar> segment_disc_distance(const Vec2<Scalar>& a, const Vec2<Scalar>& b,
                                              const Obstacle<Scalar>& disc) {
  const Scalar t = detail::closest_param(a, b, disc.center);
  const Vec2<Scalar> diff = a + t * (b - a) - disc.center;
  const Scalar dist = diff.norm();
  Vec2<Scalar> n;
  if (dist > Scalar(0)) {
    n = diff / dist;
  } else {
    const Vec2<Scalar> d = b - a;
    n = d.squaredNorm() > Scalar(0) ? Vec2<Scalar>(perp(d).normalized())
                                    : Vec2<Scalar>(Vec2<Scalar>::UnitX());
  }
  return {dist - disc.radius, t, n};
}

template <typename Scalar>
SegmentDistance<Scalar> segment_distance(const Vec2<Scalar>& a, const Vec2<Scalar>& b,
                                         const Obstacle<Scalar>& obstacle) {
  return obstacle.kind == ObstacleKind::rect ? segment_rect_distance(a, b, obstacle)
                                             : segment_disc_distance(a, b, obstacle);
}

template <typename Scalar>
Scalar sd_segment_rect(const Vec2<Scalar>& a, const Vec2<Scalar>& b,
                       const Obstacle<Scalar>& rect) {
  if (rect.kind != ObstacleKind::rect) throw std::invalid_argument("obstacle is not a rect");
  return segment_rect_distance(a, b, rect).distance;
}

template <typename Scalar>
Scalar sd_segment_disc(const Vec2<Scalar>& a, const Vec2<Scalar>& b,
                       const Obstacle<Scalar>& disc) {
  if (disc.kind != ObstacleKind::disc) throw std::invalid_argument("obstacle is not a disc");
  return segment_disc_distance(a, b, disc).distance;
}

/// Lower bound on the distance between a segment and an obstacle, from
/// bounding circles. Used to skip exact queries that cannot matter.
template <typename Scalar>
Scalar segment_distance_lower_bound(const Vec2<Scalar>& a, const Vec2<Scalar>& b,
                                    const Obstacle<Scalar>& obstacle) {
  const Vec2<Scalar> mid = Scalar(0.5) * (a + b);
  return (mid - obstacle.center).norm() - Scalar(0.5) * (b - a).norm() -
         obstacle.bounding_radius();
}

}  // namespace reachplan
