#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "porca/geom.hpp"
#include "porca/porca.hpp"
#include "porca/rng.hpp"

namespace porca {

/// Polyline with arc-length parameterization.
class Path {
 public:
  Path() = default;

  explicit Path(std::vector<Vector2> waypoints) : points_(std::move(waypoints)) {
    if (points_.size() < 2) throw std::invalid_argument("path needs at least two waypoints");
    cumulative_.assign(1, 0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double seg = abs(points_[i] - points_[i - 1]);
      if (!(seg > 0.0)) throw std::invalid_argument("path has repeated consecutive waypoints");
      cumulative_.push_back(cumulative_.back() + seg);
    }
  }

  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  const std::vector<Vector2>& waypoints() const { return points_; }

  Vector2 point_at(double s) const {
    const std::size_t i = segment_index(s);
    const double seg = cumulative_[i + 1] - cumulative_[i];
    const double t = std::clamp((s - cumulative_[i]) / seg, 0.0, 1.0);
    return points_[i] + (points_[i + 1] - points_[i]) * t;
  }

  double heading_at(double s) const {
    const std::size_t i = segment_index(s);
    const Vector2 d = points_[i + 1] - points_[i];
    return std::atan2(d.y, d.x);
  }

  /// Arc length of the point on the path closest to p.
  double project(const Vector2& p) const {
    double best_s = 0.0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      const Vector2 a = points_[i];
      const Vector2 d = points_[i + 1] - a;
      const double t = std::clamp(dot(p - a, d) / abs_sq(d), 0.0, 1.0);
      const double dist = abs_sq(a + d * t - p);
      if (dist < best_d) {
        best_d = dist;
        best_s = cumulative_[i] + t * (cumulative_[i + 1] - cumulative_[i]);
      }
    }
    return best_s;
  }

 private:
  std::size_t segment_index(double s) const {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - cumulative_.begin() - 1));
    return std::min(idx, points_.size() - 2);
  }

  std::vector<Vector2> points_;
  std::vector<double> cumulative_;
};

enum class Action { accelerate, decelerate, maintain };

inline constexpr std::string_view action_name(Action a) {
  switch (a) {
    case Action::accelerate: return "accelerate";
    case Action::decelerate: return "decelerate";
    case Action::maintain: return "maintain";
  }
  return "?";
}

struct VehicleParams {
  double v_max = 1.0;
  double accel = 0.5;
  double radius = 1.0;
  double goal_tolerance = 0.2;
};

struct NoiseParams {
  bool enabled = false;
  double speed_sigma = 0.02;    // m/s on the realized vehicle speed
  double position_sigma = 0.05; // m per step on pedestrian positions
};

struct VehicleState {
  Vector2 position;
  double heading = 0.0;
  double speed = 0.0;
  double progress = 0.0;

  Vector2 velocity() const { return Vector2{std::cos(heading), std::sin(heading)} * speed; }
};

inline double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

inline VehicleState vehicle_at(const Path& path, double progress, double speed) {
  const double s = std::clamp(progress, 0.0, path.length());
  return {path.point_at(s), normalize_angle(path.heading_at(s)), speed, s};
}

inline double next_speed(double v, Action action, const VehicleParams& params, double dt) {
  switch (action) {
    case Action::accelerate: return std::min(v + params.accel * dt, params.v_max);
    case Action::decelerate: return std::max(v - params.accel * dt, 0.0);
    case Action::maintain: return v;
  }
  return v;
}

struct VehicleStep {
  VehicleState state;
  bool goal_reached = false;
};

/// Speed update for the action, then a drive of dt along the path. The optional
/// noise perturbs only the distance driven, never the commanded speed.
inline VehicleStep vehicle_transition(const VehicleState& veh, Action action, const Path& path,
                                      const VehicleParams& params, double dt,
                                      const NoiseParams& noise, Rng& rng) {
  const double v = next_speed(veh.speed, action, params, dt);
  double realized = v;
  if (noise.enabled) realized = std::max(0.0, v + gaussian(rng, noise.speed_sigma));
  const double s = veh.progress + realized * dt;
  VehicleStep out;
  out.state = vehicle_at(path, s, v);
  out.goal_reached = s >= path.length() - params.goal_tolerance;
  return out;
}

inline constexpr int kVehicleAgentId = -1;

inline AgentState vehicle_agent(const VehicleState& veh, const VehicleParams& params) {
  AgentState a;
  a.id = kVehicleAgentId;
  a.kind = AgentKind::vehicle;
  a.position = veh.position;
  a.velocity = veh.velocity();
  a.radius = params.radius;
  a.pref_speed = veh.speed;
  a.max_speed = params.v_max;
  return a;
}

/// The vehicle as a non-reacting agent for one step from `before` to `after`:
/// placed at its start with the velocity that covers the realized displacement.
inline AgentState vehicle_agent_for_step(const VehicleState& before, const VehicleState& after,
                                         const VehicleParams& params, double dt) {
  AgentState a = vehicle_agent(before, params);
  a.velocity = (after.position - before.position) / dt;
  return a;
}

/// What a controller sees each step: all positions and velocities are exact.
struct Observation {
  double time = 0.0;
  VehicleState vehicle;
  std::vector<AgentState> pedestrians;
};

/// Ground-truth simulation state of one trial.
struct World {
  double time = 0.0;
  int step = 0;
  double dt = 1.0 / 3.0;
  Path path;
  VehicleParams vehicle_params;
  VehicleState vehicle;
  std::vector<AgentState> pedestrians;
  std::vector<Intention> intentions;
  PorcaParams porca;
  NoiseParams noise;

  bool goal_reached = false;
  bool collided = false;
  int collision_count = 0;
  int accel_decel_count = 0;
  int infeasible_solves = 0;

  Observation observe() const { return {time, vehicle, pedestrians}; }
};

/// True iff some pedestrian's center is strictly closer to the vehicle's than
/// the sum of the radii.
inline bool detect_collision(const World& world) {
  for (const auto& p : world.pedestrians) {
    const double r = p.radius + world.vehicle_params.radius;
    if (abs_sq(p.position - world.vehicle.position) < r * r) return true;
  }
  return false;
}

struct WorldStepReport {
  bool collision = false;
  int infeasible = 0;
};

/// One synchronized step: the vehicle executes the action, pedestrians advance
/// one motion-model step with the vehicle's realized motion for the step as a
/// non-reacting agent, then collisions are checked.
inline WorldStepReport step_world(World& world, Action action, Rng& rng) {
  WorldStepReport report;
  const double now = world.time + world.dt;

  const VehicleState before = world.vehicle;
  const VehicleStep vs = vehicle_transition(before, action, world.path, world.vehicle_params,
                                            world.dt, world.noise, rng);

  if (!world.pedestrians.empty()) {
    std::vector<AgentState> agents = world.pedestrians;
    std::vector<Intention> intents = world.intentions;
    agents.push_back(vehicle_agent_for_step(before, vs.state, world.vehicle_params, world.dt));
    intents.push_back(Intention::stop());

    PorcaParams params = world.porca;
    params.solve_vehicles = false;
    StepResult step = porca_step(agents, intents, params, world.dt, now);
    step.agents.pop_back();
    if (world.noise.enabled) {
      for (auto& p : step.agents) {
        p.position += Vector2{gaussian(rng, world.noise.position_sigma),
                              gaussian(rng, world.noise.position_sigma)};
      }
    }
    world.pedestrians = std::move(step.agents);
    report.infeasible = static_cast<int>(step.diagnostics.infeasible_ids.size());
    world.infeasible_solves += report.infeasible;
  }

  world.vehicle = vs.state;
  world.goal_reached = world.goal_reached || vs.goal_reached;
  if (action != Action::maintain) ++world.accel_decel_count;

  world.time = now;
  ++world.step;

  report.collision = detect_collision(world);
  if (report.collision) {
    world.collided = true;
    ++world.collision_count;
  }
  return report;
}

}  // namespace porca
