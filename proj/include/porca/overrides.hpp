#pragma once

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "porca/scenario.hpp"
#include "porca/trial.hpp"

namespace porca {

/// Everything a simulate run can tune: the scenario plus controller settings.
struct RunSettings {
  ScenarioConfig scenario;
  ControllerSettings controller;
};

namespace detail {

inline double parse_real(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ConfigError("--set " + std::string(key) + ": expected a number, got '" +
                      std::string(text) + "'");
  return v;
}

inline int parse_count(std::string_view key, std::string_view text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("--set " + std::string(key) + ": expected an integer, got '" +
                      std::string(text) + "'");
  return v;
}

inline bool parse_flag(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("--set " + std::string(key) + ": expected true or false, got '" +
                    std::string(text) + "'");
}

using Setter = std::function<void(RunSettings&, std::string_view key, std::string_view value)>;

template <typename F>
Setter real_field(F field) {
  return [field](RunSettings& s, std::string_view k, std::string_view v) {
    field(s) = parse_real(k, v);
  };
}

template <typename F>
Setter int_field(F field) {
  return [field](RunSettings& s, std::string_view k, std::string_view v) {
    field(s) = parse_count(k, v);
  };
}

inline const std::map<std::string, Setter, std::less<>>& override_table() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    // clang-format off
    t["planner.gamma"]          = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.gamma; });
    t["planner.depth"]          = int_field([](RunSettings& s) -> int& { return s.controller.pomdp.search_depth; });
    t["planner.scenarios"]      = int_field([](RunSettings& s) -> int& { return s.controller.pomdp.scenario_count; });
    t["planner.max_expansions"] = int_field([](RunSettings& s) -> int& { return s.controller.pomdp.max_expansions; });
    t["planner.budget_s"]       = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.planning_budget; });
    t["planner.max_tracked"]    = int_field([](RunSettings& s) -> int& { return s.controller.pomdp.max_tracked; });
    t["planner.obs_cell"]       = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.obs_cell; });
    t["planner.max_children"]   = int_field([](RunSettings& s) -> int& { return s.controller.pomdp.max_children; });
    t["planner.model_radius"]   = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.model_radius; });
    t["planner.safety_margin"]  = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.safety_margin; });
    t["planner.sigma_b"]        = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.sigma_b; });
    t["planner.ped_noise"]      = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.ped_noise; });
    t["planner.vehicle_noise"]  = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.vehicle_noise; });
    t["reward.collision_scale"] = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.reward.collision_scale; });
    t["reward.collision_offset"]= real_field([](RunSettings& s) -> double& { return s.controller.pomdp.reward.collision_offset; });
    t["reward.accel_penalty"]   = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.reward.accel_penalty; });
    t["reactive.d_near"]        = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.d_near; });
    t["reactive.d_far"]         = real_field([](RunSettings& s) -> double& { return s.controller.pomdp.d_far; });
    t["const_speed.target"]     = real_field([](RunSettings& s) -> double& { return s.controller.const_speed_target; });
    t["vehicle.v_max"]          = real_field([](RunSettings& s) -> double& { return s.scenario.vehicle.v_max; });
    t["vehicle.accel"]          = real_field([](RunSettings& s) -> double& { return s.scenario.vehicle.accel; });
    t["vehicle.radius"]         = real_field([](RunSettings& s) -> double& { return s.scenario.vehicle.radius; });
    t["vehicle.goal_tolerance"] = real_field([](RunSettings& s) -> double& { return s.scenario.vehicle.goal_tolerance; });
    t["vehicle.start_speed"]    = real_field([](RunSettings& s) -> double& { return s.scenario.start_speed; });
    t["pedestrian.radius"]      = real_field([](RunSettings& s) -> double& { return s.scenario.ped_radius; });
    t["pedestrian.pref_speed"]  = real_field([](RunSettings& s) -> double& { return s.scenario.ped_pref_speed; });
    t["pedestrian.max_speed"]   = real_field([](RunSettings& s) -> double& { return s.scenario.ped_max_speed; });
    t["sim.dt"]                 = real_field([](RunSettings& s) -> double& { return s.scenario.dt; });
    t["sim.timeout"]            = real_field([](RunSettings& s) -> double& { return s.scenario.timeout; });
    t["sim.speed_sigma"]        = real_field([](RunSettings& s) -> double& { return s.scenario.noise.speed_sigma; });
    t["sim.position_sigma"]     = real_field([](RunSettings& s) -> double& { return s.scenario.noise.position_sigma; });
    t["sim.spawn_jitter"]       = real_field([](RunSettings& s) -> double& { return s.scenario.spawn_jitter; });
    t["porca.tau"]              = real_field([](RunSettings& s) -> double& { return s.scenario.porca.tau; });
    t["porca.sigma_fraction"]   = real_field([](RunSettings& s) -> double& { return s.scenario.porca.sigma_fraction; });
    t["porca.rho_min"]          = real_field([](RunSettings& s) -> double& { return s.scenario.porca.rho_min; });
    t["porca.decay_rate"]       = real_field([](RunSettings& s) -> double& { return s.scenario.porca.decay_rate; });
    t["porca.resp_distance"]    = real_field([](RunSettings& s) -> double& { return s.scenario.porca.resp_distance; });
    t["porca.resp_max"]         = real_field([](RunSettings& s) -> double& { return s.scenario.porca.resp_max; });
    t["porca.neighbor_radius"]  = real_field([](RunSettings& s) -> double& { return s.scenario.porca.neighbor_radius; });
    // clang-format on
    t["sim.noise"] = [](RunSettings& s, std::string_view k, std::string_view v) {
      s.scenario.noise.enabled = parse_flag(k, v);
    };
    t["sim.collision_policy"] = [](RunSettings& s, std::string_view k, std::string_view v) {
      if (v == "record") {
        s.scenario.collision_policy = CollisionPolicy::record;
      } else if (v == "terminate") {
        s.scenario.collision_policy = CollisionPolicy::terminate;
      } else {
        throw ConfigError("--set " + std::string(k) + ": expected record or terminate");
      }
    };
    return t;
  }();
  return table;
}

}  // namespace detail

inline std::vector<std::string> override_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : detail::override_table()) keys.push_back(k);
  return keys;
}

/// Rejects planner settings the search cannot run with.
inline void validate(const ControllerSettings& c) {
  const auto& p = c.pomdp;
  if (!(p.gamma > 0.0 && p.gamma <= 1.0)) throw ConfigError("planner.gamma must be in (0, 1]");
  if (p.search_depth < 1) throw ConfigError("planner.depth must be >= 1");
  if (p.scenario_count < 1) throw ConfigError("planner.scenarios must be >= 1");
  if (p.max_expansions < 0) throw ConfigError("planner.max_expansions must be >= 0");
  if (p.max_tracked < 0) throw ConfigError("planner.max_tracked must be >= 0");
  if (!(p.obs_cell > 0.0)) throw ConfigError("planner.obs_cell must be positive");
  if (p.max_children < 1) throw ConfigError("planner.max_children must be >= 1");
  if (!(p.model_radius > 0.0)) throw ConfigError("planner.model_radius must be positive");
  if (p.safety_margin < 0.0) throw ConfigError("planner.safety_margin must be >= 0");
  if (!(p.sigma_b > 0.0)) throw ConfigError("planner.sigma_b must be positive");
  if (p.ped_noise < 0.0 || p.vehicle_noise < 0.0) throw ConfigError("planner noise must be >= 0");
  if (!(p.d_near < p.d_far)) throw ConfigError("reactive.d_near must be below reactive.d_far");
  if (!(c.const_speed_target >= 0.0)) throw ConfigError("const_speed.target must be >= 0");
}

/// Applies one `key=value` assignment. Unknown keys and malformed values throw ConfigError.
inline void apply_override(RunSettings& s, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  const auto key = assignment.substr(0, eq);
  const auto value = assignment.substr(eq + 1);
  const auto& table = detail::override_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("--set: unknown parameter '" + std::string(key) + "'");
  it->second(s, key, value);
}

}  // namespace porca
