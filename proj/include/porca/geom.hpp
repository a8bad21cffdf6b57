#pragma once

#include <cmath>
#include <optional>
#include <ostream>

namespace porca {

/// 2D position (m) or velocity (m/s).
struct Vector2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vector2() = default;
  constexpr Vector2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vector2 operator+(const Vector2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vector2 operator-(const Vector2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vector2 operator-() const { return {-x, -y}; }
  constexpr Vector2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vector2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vector2& operator+=(const Vector2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vector2& operator-=(const Vector2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vector2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  constexpr bool operator==(const Vector2&) const = default;

  bool is_finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vector2 operator*(double s, const Vector2& v) { return v * s; }

constexpr double dot(const Vector2& a, const Vector2& b) { return a.x * b.x + a.y * b.y; }

/// z-component of the 3D cross product; positive when b is counter-clockwise of a.
constexpr double cross(const Vector2& a, const Vector2& b) { return a.x * b.y - a.y * b.x; }

constexpr double abs_sq(const Vector2& v) { return dot(v, v); }
inline double abs(const Vector2& v) { return std::sqrt(abs_sq(v)); }

/// Unit vector along v; the zero vector maps to itself.
inline Vector2 normalized(const Vector2& v) {
  const double n = abs(v);
  return n > 0.0 ? v / n : Vector2{};
}

/// Counter-clockwise rotation by 90 degrees.
constexpr Vector2 perp(const Vector2& v) { return {-v.y, v.x}; }

inline Vector2 rotated(const Vector2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline std::ostream& operator<<(std::ostream& os, const Vector2& v) {
  return os << '(' << v.x << ", " << v.y << ')';
}

inline constexpr double kHalfPlaneTolerance = 1e-9;

/// Permitted velocity set {v : (v - point) . normal >= 0}.
struct HalfPlane {
  Vector2 point;
  Vector2 normal;  // unit length

  /// Signed slack; negative means v lies outside the permitted set.
  double slack(const Vector2& v) const { return dot(v - point, normal); }
};

inline bool halfplane_contains(const HalfPlane& hp, const Vector2& v) {
  return hp.slack(v) >= -kHalfPlaneTolerance;
}

/// Truncated velocity obstacle of agent A induced by B over the window (0, tau].
///
/// Built only through make(), which refuses the overlapping configuration
/// |center| <= combinedRadius where no cone exists.
class VOCone {
 public:
  static std::optional<VOCone> make(const Vector2& center, double combined_radius, double tau) {
    if (!(combined_radius > 0.0) || !(tau > 0.0) || !center.is_finite()) return std::nullopt;
    if (abs_sq(center) <= combined_radius * combined_radius) return std::nullopt;
    return VOCone(center, combined_radius, tau);
  }

  const Vector2& center() const { return center_; }
  double combined_radius() const { return radius_; }
  double tau() const { return tau_; }

  /// Center and radius of the disc that truncates the cone near the apex.
  Vector2 cutoff_center() const { return center_ / tau_; }
  double cutoff_radius() const { return radius_ / tau_; }

  /// Half opening angle of the cone legs.
  double leg_half_angle() const { return std::asin(radius_ / abs(center_)); }

 private:
  VOCone(const Vector2& c, double r, double t) : center_(c), radius_(r), tau_(t) {}

  Vector2 center_;
  double radius_;
  double tau_;
};

/// True iff the relative trajectory t*v, t in (0, tau], meets the disc (center, combinedRadius).
inline bool vo_contains(const VOCone& cone, const Vector2& v) {
  const double vv = abs_sq(v);
  if (vv == 0.0) return false;
  const double vc = dot(v, cone.center());
  if (vc <= 0.0) return false;
  const double t = std::min(vc / vv, cone.tau());
  const double r = cone.combined_radius();
  return abs_sq(v * t - cone.center()) <= r * r;
}

struct BoundaryPoint {
  Vector2 point;
  Vector2 normal;  // unit, pointing out of the cone
};

namespace detail {

struct BoundaryCandidate {
  Vector2 point;
  Vector2 normal;
  double dist_sq;
};

inline BoundaryCandidate closest_on_leg(const Vector2& v, const Vector2& dir, double tangent_len,
                                        const Vector2& normal) {
  const Vector2 start = dir * tangent_len;
  const double t = std::max(0.0, dot(v - start, dir));
  const Vector2 p = start + dir * t;
  return {p, normal, abs_sq(v - p)};
}

}  // namespace detail

/// Closest point on the cone boundary to v, with the outward unit normal there.
///
/// The boundary has three pieces: the left and right legs (rays starting at their
/// tangency with the cutoff circle) and the apex-facing cutoff arc between the
/// two tangency points. Each is minimized in closed form. Equidistant pieces
/// resolve to the one whose correction u = point - v turns left of the cone axis.
inline BoundaryPoint vo_closest_boundary(const VOCone& cone, const Vector2& v) {
  const Vector2 cc = cone.cutoff_center();
  const double cr = cone.cutoff_radius();
  const double dist_c = abs(cc);
  const Vector2 axis = cc / dist_c;
  const double alpha = std::asin(std::min(1.0, cr / dist_c));
  const double tangent_len = std::sqrt(std::max(0.0, dist_c * dist_c - cr * cr));

  const Vector2 left_dir = rotated(axis, alpha);
  const Vector2 right_dir = rotated(axis, -alpha);

  using detail::BoundaryCandidate;
  const BoundaryCandidate left = detail::closest_on_leg(v, left_dir, tangent_len, perp(left_dir));
  const BoundaryCandidate right = detail::closest_on_leg(v, right_dir, tangent_len, -perp(right_dir));

  // The arc spans directions (from cc) within angle beta of -axis, cos(beta) = cr / |cc|.
  BoundaryCandidate arc;
  const Vector2 w = v - cc;
  const double wlen = abs(w);
  const double cos_beta = cr / dist_c;
  Vector2 dir_from_center = wlen > 0.0 ? w / wlen : -axis;
  if (dot(dir_from_center, -axis) >= cos_beta) {
    arc.normal = dir_from_center;
    arc.point = cc + dir_from_center * cr;
  } else {
    // Beyond the arc ends; the nearest arc point is a tangency point, which the
    // legs already contain, so keep the end on the same side as v.
    const Vector2 end_dir = cross(axis, w) >= 0.0 ? left_dir : right_dir;
    arc.point = end_dir * tangent_len;
    arc.normal = normalized(arc.point - cc);
  }
  arc.dist_sq = abs_sq(v - arc.point);

  const double tie = 1e-12 * std::max(1.0, abs_sq(v) + dist_c * dist_c);
  auto better = [&](const BoundaryCandidate& a, const BoundaryCandidate& b) {
    if (a.dist_sq < b.dist_sq - tie) return true;
    if (b.dist_sq < a.dist_sq - tie) return false;
    const double ca = cross(axis, a.point - v);
    const double cb = cross(axis, b.point - v);
    return (ca >= 0.0) && !(cb >= 0.0);
  };

  BoundaryCandidate best = arc;
  if (better(left, best)) best = left;
  if (better(right, best)) best = right;
  return {best.point, best.normal};
}

}  // namespace porca
