#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "porca/geom.hpp"
#include "porca/velocity_opt.hpp"

namespace porca {

enum class AgentKind { pedestrian, vehicle };

/// A disc agent as seen by the pedestrian motion model.
struct AgentState {
  int id = 0;
  Vector2 position;
  Vector2 velocity;
  double radius = 0.3;
  double pref_speed = 1.2;
  double max_speed = 1.2;
  double patience = 1.0;
  std::optional<double> low_speed_since;
  AgentKind kind = AgentKind::pedestrian;
};

struct Intention {
  enum class Kind { goal, stop };
  Kind kind = Kind::stop;
  std::optional<Vector2> goal;

  static Intention stop() { return {}; }
  static Intention toward(const Vector2& g) { return {Kind::goal, g}; }
};

/// Which objective agents optimize when picking a new velocity.
enum class Objective {
  linear,    // closest to the preferred velocity
  patience,  // closest to preferred plus the patience-weighted slowdown penalty
};

enum class VOptMode { current, preferred };

struct PorcaParams {
  double tau = 2.0;
  double sigma_fraction = 0.2;  // low-speed threshold, fraction of |vPref|
  double rho_min = 0.1;
  double decay_rate = 1.0;      // 1/s
  double resp_distance = 1.5;   // m, surface gap
  double resp_max = 0.95;
  double neighbor_radius = 5.0;
  VOptMode v_opt_mode = VOptMode::current;
  double arrival_radius = 0.3;

  Objective pedestrian_objective = Objective::patience;
  bool variable_responsibility = true;
  /// When false, vehicles keep their velocity and only constrain others.
  bool solve_vehicles = true;

  /// Plain reciprocal avoidance: linear objective, equal shares, no patience.
  static PorcaParams orca() {
    PorcaParams p;
    p.pedestrian_objective = Objective::linear;
    p.variable_responsibility = false;
    return p;
  }
};

inline Vector2 preferred_velocity(const AgentState& agent, const Intention& intention,
                                  const PorcaParams& params = {}) {
  if (intention.kind == Intention::Kind::stop || !intention.goal) return {};
  const Vector2 to_goal = *intention.goal - agent.position;
  const double dist = abs(to_goal);
  if (dist <= params.arrival_radius) return {};
  return to_goal * (agent.pref_speed / dist);
}

/// Pedestrian's share of the avoidance correction for a disc-surface gap to a
/// vehicle. The vehicle takes the complement.
inline double responsibility(double gap, const PorcaParams& params) {
  gap = std::max(0.0, gap);
  if (gap >= params.resp_distance) return 0.5;
  return params.resp_max - (params.resp_max - 0.5) * gap / params.resp_distance;
}

/// Half-plane of velocities for `a` that takes `share` of the correction needed
/// to keep clear of `b` for tau seconds. Overlapping discs get an emergency
/// plane that separates them within `dt`.
inline HalfPlane orca_halfplane(const AgentState& a, const AgentState& b, const Vector2& v_opt_a,
                                const Vector2& v_opt_b, double tau, double share, double dt) {
  const Vector2 rel_pos = b.position - a.position;
  const Vector2 rel_vel = v_opt_a - v_opt_b;
  const double combined = a.radius + b.radius;

  Vector2 u;
  Vector2 normal;
  if (const auto cone = VOCone::make(rel_pos, combined, tau)) {
    const BoundaryPoint bp = vo_closest_boundary(*cone, rel_vel);
    u = bp.point - rel_vel;
    normal = bp.normal;
  } else {
    const Vector2 w = rel_vel - rel_pos / dt;
    const double wlen = abs(w);
    if (wlen > 0.0) {
      normal = w / wlen;
    } else if (abs_sq(rel_pos) > 0.0) {
      normal = -normalized(rel_pos);
    } else {
      normal = a.id < b.id ? Vector2{-1.0, 0.0} : Vector2{1.0, 0.0};
    }
    u = normal * (combined / dt - wlen);
  }
  return {v_opt_a + u * share, normal};
}

/// New patience and low-speed start time after a step that produced `new_speed`.
inline std::pair<double, std::optional<double>> update_patience(const AgentState& agent,
                                                                double new_speed,
                                                                double v_pref_mag, double dt,
                                                                double now,
                                                                const PorcaParams& params) {
  const double threshold = params.sigma_fraction * v_pref_mag;
  if (v_pref_mag <= 0.0 || new_speed > threshold) return {1.0, std::nullopt};
  const double since = agent.low_speed_since.value_or(now - dt);
  const double p = std::exp(-params.decay_rate * (now - since));
  return {std::max(params.rho_min, std::min(1.0, p)), since};
}

struct StepDiagnostics {
  std::vector<int> infeasible_ids;  // agents that fell back to least violation
};

struct StepResult {
  std::vector<AgentState> agents;
  StepDiagnostics diagnostics;
};

/// Preferred velocities for every agent, clamped to each agent's speed limit.
inline std::vector<Vector2> preferred_velocities(std::span<const AgentState> agents,
                                                 std::span<const Intention> intentions,
                                                 const PorcaParams& params) {
  std::vector<Vector2> prefs(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    Vector2 pv = preferred_velocity(agents[i], intentions[i], params);
    const double sp = abs(pv);
    if (sp > agents[i].max_speed) pv = pv * (agents[i].max_speed / sp);
    prefs[i] = pv;
  }
  return prefs;
}

struct AgentSolve {
  Vector2 velocity;
  bool infeasible = false;
};

/// New velocity of agents[index] given everyone's preferred velocity.
inline AgentSolve solve_agent_velocity(std::span<const AgentState> agents,
                                       std::span<const Vector2> prefs, std::size_t index,
                                       const PorcaParams& params, double dt) {
  const AgentState& a = agents[index];
  const bool is_vehicle = a.kind == AgentKind::vehicle;
  auto v_opt = [&](std::size_t i) {
    return params.v_opt_mode == VOptMode::current ? agents[i].velocity : prefs[i];
  };

  const double range_sq = params.neighbor_radius * params.neighbor_radius;
  std::vector<std::pair<double, std::size_t>> neighbors;
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (j == index) continue;
    const double d2 = abs_sq(agents[j].position - a.position);
    if (d2 < range_sq) neighbors.emplace_back(d2, j);
  }
  // Order by (distance, id) so the result does not depend on input order.
  std::sort(neighbors.begin(), neighbors.end(), [&](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first < r.first;
    return agents[l.second].id < agents[r.second].id;
  });

  VelocityProgram prog;
  prog.max_speed = a.max_speed;
  prog.v_pref = prefs[index];
  prog.patience = a.patience;
  prog.v_current = a.velocity;
  prog.half_planes.reserve(neighbors.size());
  for (const auto& [d2, j] : neighbors) {
    const AgentState& b = agents[j];
    double share = 0.5;
    if (params.variable_responsibility && a.kind != b.kind) {
      const double gap = std::sqrt(d2) - (a.radius + b.radius);
      const double ped_share = responsibility(gap, params);
      share = is_vehicle ? 1.0 - ped_share : ped_share;
    }
    prog.half_planes.push_back(
        orca_halfplane(a, b, v_opt(index), v_opt(j), params.tau, share, dt));
  }

  const bool use_patience = !is_vehicle && params.pedestrian_objective == Objective::patience;
  const auto v_new = use_patience ? solve_patience_objective(prog) : solve_linear_objective(prog);
  if (v_new) return {*v_new, false};
  return {fallback_least_violation(prog.half_planes, prog.max_speed), true};
}

/// Advances every agent by dt from the same pre-step snapshot. `now` is the
/// time at the end of the step; it drives the patience clock.
/// Same as porca_step, with the preferred velocities supplied by the caller.
inline StepResult porca_step_with_prefs(std::span<const AgentState> agents,
                                        std::span<const Intention> intentions,
                                        std::span<const Vector2> prefs, const PorcaParams& params,
                                        double dt, double now) {
  if (agents.size() != intentions.size() || agents.size() != prefs.size()) {
    throw std::invalid_argument("porca_step: one intention and preference per agent required");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("porca_step: dt must be positive");

  StepResult out;
  out.agents.assign(agents.begin(), agents.end());

  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentState& a = agents[i];
    AgentState& next = out.agents[i];
    const bool is_vehicle = a.kind == AgentKind::vehicle;

    if (is_vehicle && !params.solve_vehicles) {
      next.position = a.position + a.velocity * dt;
      continue;
    }

    const AgentSolve solved = solve_agent_velocity(agents, prefs, i, params, dt);
    if (solved.infeasible) out.diagnostics.infeasible_ids.push_back(a.id);
    next.velocity = solved.velocity;
    next.position = a.position + solved.velocity * dt;

    const bool patient_kind =
        !is_vehicle && params.pedestrian_objective == Objective::patience;
    if (patient_kind && intentions[i].kind == Intention::Kind::goal) {
      const auto [patience, since] =
          update_patience(a, abs(solved.velocity), abs(prefs[i]), dt, now, params);
      next.patience = patience;
      next.low_speed_since = since;
    } else {
      next.patience = 1.0;
      next.low_speed_since.reset();
    }
  }
  return out;
}

inline StepResult porca_step(std::span<const AgentState> agents,
                             std::span<const Intention> intentions, const PorcaParams& params,
                             double dt, double now) {
  if (agents.size() != intentions.size()) {
    throw std::invalid_argument("porca_step: one intention per agent required");
  }
  const std::vector<Vector2> prefs = preferred_velocities(agents, intentions, params);
  return porca_step_with_prefs(agents, intentions, prefs, params, dt, now);
}

}  // namespace porca
