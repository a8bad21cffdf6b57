#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "porca/geom.hpp"

namespace porca {

/// One agent's velocity selection problem: the permitted half-planes, the speed
/// disc, the preferred velocity and the patience weight of the slowdown penalty.
struct VelocityProgram {
  std::vector<HalfPlane> half_planes;
  double max_speed = 1.0;
  Vector2 v_pref;
  double patience = 1.0;
  Vector2 v_current;
};

inline bool program_feasible_at(const VelocityProgram& prog, const Vector2& v, double tol = 1e-9) {
  if (abs(v) > prog.max_speed + tol) return false;
  return std::all_of(prog.half_planes.begin(), prog.half_planes.end(),
                     [&](const HalfPlane& hp) { return hp.slack(v) >= -tol; });
}

inline double linear_cost(const VelocityProgram& prog, const Vector2& v) {
  return abs_sq(v - prog.v_pref);
}

/// |v - vPref|^2 + (1/patience) * | |v|^2 - |vPref|^2 |
inline double patience_cost(const VelocityProgram& prog, const Vector2& v) {
  return abs_sq(v - prog.v_pref) +
         std::abs(abs_sq(v) - abs_sq(prog.v_pref)) / prog.patience;
}

/// Largest signed violation max_i -(v - p_i) . n_i; non-positive when v is feasible.
inline double max_violation(std::span<const HalfPlane> planes, const Vector2& v) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& hp : planes) worst = std::max(worst, -hp.slack(v));
  return worst;
}

namespace lp {

inline constexpr double kParallelEps = 1e-12;

/// Boundary direction with the permitted side on its left.
inline Vector2 boundary_direction(const HalfPlane& hp) { return {hp.normal.y, -hp.normal.x}; }

/// Optimizes on the boundary of planes[index] subject to planes[0, index) and
/// the disc of the given radius. With maximize_along set, `target` is a unit
/// direction to push along; otherwise the result is the point closest to it.
inline bool solve_on_line(std::span<const HalfPlane> planes, std::size_t index, double radius,
                          const Vector2& target, bool maximize_along, Vector2& result) {
  const HalfPlane& line = planes[index];
  const Vector2 dir = boundary_direction(line);
  const double pd = dot(line.point, dir);
  const double disc = pd * pd + radius * radius - abs_sq(line.point);
  if (disc < 0.0) return false;

  const double sq = std::sqrt(disc);
  double t_left = -pd - sq;
  double t_right = -pd + sq;

  for (std::size_t j = 0; j < index; ++j) {
    const double den = dot(planes[j].normal, dir);
    const double num = dot(planes[j].normal, planes[j].point - line.point);
    if (std::abs(den) <= kParallelEps) {
      if (num > 0.0) return false;
      continue;
    }
    const double t = num / den;
    if (den > 0.0) {
      t_left = std::max(t_left, t);
    } else {
      t_right = std::min(t_right, t);
    }
    if (t_left > t_right) return false;
  }

  if (maximize_along) {
    result = line.point + dir * (dot(target, dir) > 0.0 ? t_right : t_left);
  } else {
    const double t = std::clamp(dot(dir, target - line.point), t_left, t_right);
    result = line.point + dir * t;
  }
  return true;
}

/// Incremental 2D LP over half-planes and a disc. Returns planes.size() on
/// success, otherwise the index of the first plane that made it infeasible
/// (result then holds the optimum over the preceding planes).
inline std::size_t solve_incremental(std::span<const HalfPlane> planes, double radius,
                                     const Vector2& target, bool maximize_along, Vector2& result) {
  if (maximize_along) {
    result = target * radius;
  } else if (abs_sq(target) > radius * radius) {
    result = normalized(target) * radius;
  } else {
    result = target;
  }

  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (planes[i].slack(result) < 0.0) {
      const Vector2 previous = result;
      if (!solve_on_line(planes, i, radius, target, maximize_along, result)) {
        result = previous;
        return i;
      }
    }
  }
  return planes.size();
}

/// Minimizes the largest violation over the disc, starting from the partial
/// optimum `result` that satisfies planes[0, begin).
inline void minimize_max_violation(std::span<const HalfPlane> planes, std::size_t begin,
                                   double radius, Vector2& result) {
  double distance = 0.0;
  std::vector<HalfPlane> projected;
  for (std::size_t i = begin; i < planes.size(); ++i) {
    if (-planes[i].slack(result) <= distance) continue;

    projected.clear();
    for (std::size_t j = 0; j < i; ++j) {
      HalfPlane bisector;
      const Vector2 di = boundary_direction(planes[i]);
      const Vector2 dj = boundary_direction(planes[j]);
      const double det = cross(di, dj);
      if (std::abs(det) <= kParallelEps) {
        if (dot(planes[i].normal, planes[j].normal) > 0.0) continue;
        bisector.point = (planes[i].point + planes[j].point) * 0.5;
      } else {
        bisector.point = planes[i].point + di * (cross(dj, planes[i].point - planes[j].point) / det);
      }
      bisector.normal = normalized(planes[j].normal - planes[i].normal);
      projected.push_back(bisector);
    }

    const Vector2 previous = result;
    if (solve_incremental(projected, radius, planes[i].normal, true, result) < projected.size()) {
      // Only reachable through rounding; the previous point is still valid.
      result = previous;
    }
    distance = -planes[i].slack(result);
  }
}

}  // namespace lp

/// Feasible velocity closest to vPref, or nullopt when the half-planes and the
/// speed disc have an empty intersection.
inline std::optional<Vector2> solve_linear_objective(const VelocityProgram& prog) {
  Vector2 result;
  const std::size_t fail =
      lp::solve_incremental(prog.half_planes, prog.max_speed, prog.v_pref, false, result);
  if (fail < prog.half_planes.size()) return std::nullopt;
  return result;
}

/// Velocity in the speed disc with the smallest worst-case violation. Among
/// equally good velocities the one with the smallest speed is returned.
inline Vector2 fallback_least_violation(std::span<const HalfPlane> planes, double max_speed) {
  Vector2 result;
  const std::size_t fail = lp::solve_incremental(planes, max_speed, Vector2{}, false, result);
  if (fail == planes.size()) return result;

  lp::minimize_max_violation(planes, fail, max_speed, result);
  const double level = std::max(0.0, max_violation(planes, result)) + 1e-9;

  std::vector<HalfPlane> relaxed(planes.begin(), planes.end());
  for (auto& hp : relaxed) hp.point -= hp.normal * level;
  Vector2 smallest;
  if (lp::solve_incremental(relaxed, max_speed, Vector2{}, false, smallest) == relaxed.size()) {
    result = smallest;
  }
  return result;
}

namespace detail {

inline void line_circle_points(const HalfPlane& hp, double radius, std::vector<Vector2>& out) {
  if (!(radius > 0.0)) return;
  const Vector2 dir = lp::boundary_direction(hp);
  const double pd = dot(hp.point, dir);
  const double disc = pd * pd + radius * radius - abs_sq(hp.point);
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  out.push_back(hp.point + dir * (-pd - sq));
  out.push_back(hp.point + dir * (-pd + sq));
}

}  // namespace detail

/// Minimizer of the patience-weighted objective over the same feasible set as
/// solve_linear_objective.
///
/// Inside |v| = |vPref| the objective is concave (linear at patience 1), and
/// outside it is a convex quadratic whose stationary point lies inside, so the
/// optimum is one of a finite set of boundary points: vPref itself, the
/// outer-circle point along vPref, per-edge minimizers of the outer quadratic,
/// edge/edge vertices and edge intersections with both circles. Candidates within
/// 1e-9 of the best cost are resolved toward vCurrent, then toward a left turn.
inline std::optional<Vector2> solve_patience_objective(const VelocityProgram& prog) {
  const auto linear = solve_linear_objective(prog);
  if (!linear) return std::nullopt;

  const Vector2 p = prog.v_pref;
  if (program_feasible_at(prog, p, 0.0)) return p;

  const double k = 1.0 / prog.patience;
  const double s = abs(p);
  const double m = prog.max_speed;
  const auto& planes = prog.half_planes;

  std::vector<Vector2> candidates;
  candidates.reserve(4 + planes.size() * (5 + planes.size() / 2));
  candidates.push_back(*linear);
  candidates.push_back(p / (1.0 + k));
  if (s > 0.0) candidates.push_back(p * (m / s));

  for (std::size_t i = 0; i < planes.size(); ++i) {
    const HalfPlane& hp = planes[i];
    const Vector2 dir = lp::boundary_direction(hp);
    const double t = (dot(dir, p) - (1.0 + k) * dot(hp.point, dir)) / (1.0 + k);
    const Vector2 edge_min = hp.point + dir * t;
    if (abs(edge_min) >= s) candidates.push_back(edge_min);

    detail::line_circle_points(hp, s, candidates);
    detail::line_circle_points(hp, m, candidates);

    for (std::size_t j = i + 1; j < planes.size(); ++j) {
      const Vector2 dj = lp::boundary_direction(planes[j]);
      const double det = cross(dir, dj);
      if (std::abs(det) <= lp::kParallelEps) continue;
      candidates.push_back(hp.point + dir * (cross(dj, hp.point - planes[j].point) / det));
    }
  }

  constexpr double kFeasTol = 1e-9;
  constexpr double kCostTol = 1e-9;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (program_feasible_at(prog, c, kFeasTol)) best_cost = std::min(best_cost, patience_cost(prog, c));
  }

  const Vector2* chosen = nullptr;
  double chosen_gap = 0.0;
  for (const auto& c : candidates) {
    if (!program_feasible_at(prog, c, kFeasTol) || patience_cost(prog, c) > best_cost + kCostTol) {
      continue;
    }
    const double gap = abs_sq(c - prog.v_current);
    if (chosen == nullptr || gap < chosen_gap - 1e-12 ||
        (gap <= chosen_gap + 1e-12 && cross(p, c) > 0.0 && cross(p, *chosen) <= 0.0)) {
      chosen = &c;
      chosen_gap = gap;
    }
  }
  return chosen != nullptr ? *chosen : *linear;
}

}  // namespace porca
