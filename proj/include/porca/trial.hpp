#pragma once

#include <cstdio>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "porca/planner.hpp"
#include "porca/scenario.hpp"
#include "porca/world.hpp"

namespace porca {

enum class Algorithm { porca_pomdp, prefvel_pomdp, reactive, const_speed };

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "porca-pomdp") return Algorithm::porca_pomdp;
  if (s == "prefvel-pomdp") return Algorithm::prefvel_pomdp;
  if (s == "reactive") return Algorithm::reactive;
  if (s == "const-speed") return Algorithm::const_speed;
  return std::nullopt;
}

inline std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::porca_pomdp: return "porca-pomdp";
    case Algorithm::prefvel_pomdp: return "prefvel-pomdp";
    case Algorithm::reactive: return "reactive";
    case Algorithm::const_speed: return "const-speed";
  }
  return "?";
}

struct ControllerSettings {
  PomdpParams pomdp;
  double const_speed_target = 0.66;
};

inline std::unique_ptr<Controller> make_controller(Algorithm algo, const ScenarioConfig& cfg,
                                                   const ControllerSettings& settings,
                                                   std::uint64_t seed) {
  switch (algo) {
    case Algorithm::reactive:
      return std::make_unique<ReactiveController>(settings.pomdp.d_near, settings.pomdp.d_far,
                                                  cfg.vehicle.radius);
    case Algorithm::const_speed:
      return std::make_unique<ConstSpeedController>(settings.const_speed_target,
                                                    cfg.vehicle.accel, cfg.dt);
    case Algorithm::porca_pomdp:
    case Algorithm::prefvel_pomdp: {
      PlannerContext ctx{Path(cfg.path), cfg.vehicle, cfg.porca, cfg.dt};
      PomdpParams p = settings.pomdp;
      p.motion = algo == Algorithm::porca_pomdp ? MotionModel::porca : MotionModel::pref_vel;
      p.pref_speed = cfg.ped_pref_speed;
      p.reward.v_max = cfg.vehicle.v_max;
      return std::make_unique<PomdpController>(std::move(ctx), p, derive_seed(seed, {0x91a7ULL}));
    }
  }
  return nullptr;
}

inline bool uses_belief(Algorithm a) {
  return a == Algorithm::porca_pomdp || a == Algorithm::prefvel_pomdp;
}

struct TrialMetrics {
  bool collided = false;
  int collision_count = 0;  // steps that ended in contact
  double travel_time = 0.0;
  int accel_decel_count = 0;
  bool success = false;
  int steps = 0;
  int budget_overruns = 0;
  int belief_resets = 0;
  int infeasible_solves = 0;
};

/// One JSON object per step, written as it happens.
inline void write_step_record(std::ostream& out, const World& w, Action action, bool collision) {
  nlohmann::json rec;
  rec["step"] = w.step;
  rec["t"] = w.time;
  rec["vehicle"] = {{"x", w.vehicle.position.x},
                    {"y", w.vehicle.position.y},
                    {"heading", w.vehicle.heading},
                    {"speed", w.vehicle.speed},
                    {"radius", w.vehicle_params.radius}};
  rec["action"] = std::string(action_name(action));
  rec["collision"] = collision;
  nlohmann::json peds = nlohmann::json::array();
  for (const auto& p : w.pedestrians) {
    peds.push_back({{"id", p.id},
                    {"x", p.position.x},
                    {"y", p.position.y},
                    {"vx", p.velocity.x},
                    {"vy", p.velocity.y},
                    {"r", p.radius}});
  }
  rec["pedestrians"] = std::move(peds);
  out << rec.dump() << '\n';
}

/// Runs one closed-loop trial. Deterministic in (cfg, algo, settings, seed).
inline TrialMetrics run_trial(const ScenarioConfig& cfg, Algorithm algo,
                              const ControllerSettings& settings, std::uint64_t seed,
                              std::ostream* log = nullptr) {
  World world = build_world(cfg, seed);
  auto controller = make_controller(algo, cfg, settings, seed);
  Rng rng(derive_seed(seed, {0x51dULL}));

  Belief belief = Belief::over_goals(cfg.goals);
  for (const auto& p : world.pedestrians) belief.of(p.id);
  Observation prev = world.observe();

  TrialMetrics m;
  const auto max_steps = static_cast<int>(std::ceil(cfg.timeout / cfg.dt - 1e-9));
  while (m.steps < max_steps) {
    const Observation obs = world.observe();
    if (uses_belief(algo) && m.steps > 0) {
      const auto report = belief_update(belief, prev, obs, cfg.vehicle, cfg.porca,
                                        settings.pomdp.sigma_b, cfg.dt, cfg.ped_pref_speed);
      m.belief_resets += static_cast<int>(report.reset_ids.size());
    }
    const Action action = controller->act(obs, belief);
    prev = obs;
    const WorldStepReport r = step_world(world, action, rng);
    ++m.steps;
    if (log != nullptr) write_step_record(*log, world, action, r.collision);
    if (r.collision && cfg.collision_policy == CollisionPolicy::terminate) break;
    if (world.goal_reached) break;
  }

  m.collided = world.collided;
  m.collision_count = world.collision_count;
  m.accel_decel_count = world.accel_decel_count;
  m.infeasible_solves = world.infeasible_solves;
  m.travel_time = world.time;
  m.success = world.goal_reached && world.time <= cfg.timeout + 1e-9 &&
              !(world.collided && cfg.collision_policy == CollisionPolicy::terminate);
  m.budget_overruns = controller->budget_overruns();
  return m;
}

/// Table-style summary; rates and means use successful trials only.
struct AggregateMetrics {
  int trials = 0;
  int successes = 0;
  double collision_rate = 0.0;
  double mean_travel_time = 0.0;
  double mean_accel_decel = 0.0;
  double success_rate = 0.0;
};

inline AggregateMetrics aggregate(std::span<const TrialMetrics> trials) {
  AggregateMetrics a;
  a.trials = static_cast<int>(trials.size());
  int collided = 0;
  double time = 0.0;
  double changes = 0.0;
  for (const auto& t : trials) {
    if (!t.success) continue;
    ++a.successes;
    collided += t.collided ? 1 : 0;
    time += t.travel_time;
    changes += t.accel_decel_count;
  }
  if (a.trials > 0) a.success_rate = static_cast<double>(a.successes) / a.trials;
  if (a.successes > 0) {
    a.collision_rate = static_cast<double>(collided) / a.successes;
    a.mean_travel_time = time / a.successes;
    a.mean_accel_decel = changes / a.successes;
  }
  return a;
}

inline constexpr std::string_view kMetricsHeader =
    "scenario,algorithm,trials,collision_rate,mean_travel_time_s,mean_accel_decel,success_rate";

/// CSV row matching kMetricsHeader. Means over zero successes print as empty fields.
inline std::string metrics_row(std::string_view scenario, std::string_view algorithm,
                               const AggregateMetrics& a) {
  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << scenario << ',' << algorithm << ',' << a.trials << ',';
  if (a.successes > 0) {
    out << fmt(a.collision_rate) << ',' << fmt(a.mean_travel_time) << ','
        << fmt(a.mean_accel_decel);
  } else {
    out << ",,";
  }
  out << ',' << fmt(a.success_rate);
  return out.str();
}

}  // namespace porca
