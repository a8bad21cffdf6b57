#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "porca/porca.hpp"
#include "porca/rng.hpp"
#include "porca/world.hpp"

namespace porca {

enum class CollisionPolicy { record, terminate };

struct PedestrianSpawn {
  Vector2 position;
  int goal = -1;  // index into the goal list; -1 stands still
};

/// Pedestrians drawn uniformly in a box, each heading to a random goal.
struct RandomSpawn {
  int count = 0;
  Vector2 min;
  Vector2 max;
  double min_separation = 0.8;
  bool stationary = false;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::vector<Vector2> path;
  std::vector<Vector2> goals;
  std::vector<PedestrianSpawn> pedestrians;
  std::optional<RandomSpawn> spawn;
  double spawn_jitter = 0.0;  // m, per-seed Gaussian offset of listed spawns

  VehicleParams vehicle;
  double start_speed = 0.0;
  double ped_radius = 0.3;
  double ped_pref_speed = 1.2;
  double ped_max_speed = 1.2;

  double dt = 1.0 / 3.0;
  double timeout = 360.0;
  CollisionPolicy collision_policy = CollisionPolicy::record;
  NoiseParams noise;  // ground-truth noise, off unless asked for
  PorcaParams porca;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline Vector2 read_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Vector2> read_points(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected a list of points");
  std::vector<Vector2> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(read_point(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <class T>
void read_number(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
  } else {
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  }
  out = v.get<T>();
}

}  // namespace detail

/// Validates cross-field invariants; throws ConfigError.
inline void validate(const ScenarioConfig& c) {
  if (c.path.size() < 2) throw ConfigError("path: needs at least two waypoints");
  try {
    Path p(c.path);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("path: ") + e.what());
  }
  for (std::size_t i = 0; i < c.goals.size(); ++i) {
    for (std::size_t j = i + 1; j < c.goals.size(); ++j) {
      if (abs_sq(c.goals[i] - c.goals[j]) == 0.0) throw ConfigError("goals: duplicate goal");
    }
  }
  for (const auto& s : c.pedestrians) {
    if (s.goal < -1 || s.goal >= static_cast<int>(c.goals.size())) {
      throw ConfigError("pedestrians: goal index out of range");
    }
  }
  if (c.spawn) {
    if (c.spawn->count < 0) throw ConfigError("spawn.count: must be >= 0");
    if (!(c.spawn->max.x > c.spawn->min.x) || !(c.spawn->max.y > c.spawn->min.y)) {
      throw ConfigError("spawn: empty area");
    }
    if (!c.spawn->stationary && c.spawn->count > 0 && c.goals.empty()) {
      throw ConfigError("spawn: walking pedestrians need goals");
    }
  }
  if (!(c.timeout > 0.0)) throw ConfigError("sim.timeout: must be positive");
  if (!(c.dt > 0.0)) throw ConfigError("sim.dt: must be positive");
  if (!(c.vehicle.v_max > 0.0) || !(c.vehicle.accel > 0.0) || !(c.vehicle.radius > 0.0)) {
    throw ConfigError("vehicle: v_max, accel and radius must be positive");
  }
  if (c.start_speed < 0.0 || c.start_speed > c.vehicle.v_max) {
    throw ConfigError("vehicle.start_speed: must lie in [0, v_max]");
  }
  if (!(c.ped_radius > 0.0) || c.ped_pref_speed < 0.0 || c.ped_max_speed < c.ped_pref_speed) {
    throw ConfigError("pedestrian: bad radius or speeds");
  }
}

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  using detail::read_number;
  detail::reject_unknown(j, {"name", "path", "goals", "pedestrians", "spawn", "spawn_jitter",
                             "vehicle", "pedestrian", "sim", "porca"},
                         "scenario");
  ScenarioConfig c;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError("name: expected a string");
    c.name = j["name"].get<std::string>();
  }
  if (!j.contains("path")) throw ConfigError("path: required");
  c.path = detail::read_points(j["path"], "path");
  if (j.contains("goals")) c.goals = detail::read_points(j["goals"], "goals");
  read_number(j, "spawn_jitter", c.spawn_jitter, "scenario");

  if (j.contains("pedestrians")) {
    const auto& list = j["pedestrians"];
    if (!list.is_array()) throw ConfigError("pedestrians: expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "pedestrians[" + std::to_string(i) + "]";
      detail::reject_unknown(list[i], {"position", "goal"}, where);
      PedestrianSpawn s;
      if (!list[i].contains("position")) throw ConfigError(where + ".position: required");
      s.position = detail::read_point(list[i]["position"], where + ".position");
      if (list[i].contains("goal")) {
        const auto& g = list[i]["goal"];
        if (g.is_string() && g.get<std::string>() == "stop") {
          s.goal = -1;
        } else if (g.is_number_integer()) {
          s.goal = g.get<int>();
        } else {
          throw ConfigError(where + ".goal: expected a goal index or \"stop\"");
        }
      }
      c.pedestrians.push_back(s);
    }
  }

  if (j.contains("spawn")) {
    const auto& s = j["spawn"];
    detail::reject_unknown(s, {"count", "min", "max", "min_separation", "stationary"}, "spawn");
    RandomSpawn r;
    read_number(s, "count", r.count, "spawn");
    if (!s.contains("min") || !s.contains("max")) throw ConfigError("spawn: min and max required");
    r.min = detail::read_point(s["min"], "spawn.min");
    r.max = detail::read_point(s["max"], "spawn.max");
    read_number(s, "min_separation", r.min_separation, "spawn");
    read_number(s, "stationary", r.stationary, "spawn");
    c.spawn = r;
  }

  if (j.contains("vehicle")) {
    const auto& v = j["vehicle"];
    detail::reject_unknown(v, {"v_max", "accel", "radius", "goal_tolerance", "start_speed"},
                           "vehicle");
    read_number(v, "v_max", c.vehicle.v_max, "vehicle");
    read_number(v, "accel", c.vehicle.accel, "vehicle");
    read_number(v, "radius", c.vehicle.radius, "vehicle");
    read_number(v, "goal_tolerance", c.vehicle.goal_tolerance, "vehicle");
    read_number(v, "start_speed", c.start_speed, "vehicle");
  }
  if (j.contains("pedestrian")) {
    const auto& p = j["pedestrian"];
    detail::reject_unknown(p, {"radius", "pref_speed", "max_speed"}, "pedestrian");
    read_number(p, "radius", c.ped_radius, "pedestrian");
    read_number(p, "pref_speed", c.ped_pref_speed, "pedestrian");
    read_number(p, "max_speed", c.ped_max_speed, "pedestrian");
  }
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    detail::reject_unknown(s, {"dt", "timeout", "collision_policy", "noise", "speed_sigma",
                               "position_sigma"},
                           "sim");
    read_number(s, "dt", c.dt, "sim");
    read_number(s, "timeout", c.timeout, "sim");
    read_number(s, "noise", c.noise.enabled, "sim");
    read_number(s, "speed_sigma", c.noise.speed_sigma, "sim");
    read_number(s, "position_sigma", c.noise.position_sigma, "sim");
    if (s.contains("collision_policy")) {
      const auto& p = s["collision_policy"];
      if (p == "record") {
        c.collision_policy = CollisionPolicy::record;
      } else if (p == "terminate") {
        c.collision_policy = CollisionPolicy::terminate;
      } else {
        throw ConfigError("sim.collision_policy: expected \"record\" or \"terminate\"");
      }
    }
  }
  if (j.contains("porca")) {
    const auto& p = j["porca"];
    detail::reject_unknown(p, {"tau", "sigma_fraction", "rho_min", "decay_rate", "resp_distance",
                               "resp_max", "neighbor_radius"},
                           "porca");
    read_number(p, "tau", c.porca.tau, "porca");
    read_number(p, "sigma_fraction", c.porca.sigma_fraction, "porca");
    read_number(p, "rho_min", c.porca.rho_min, "porca");
    read_number(p, "decay_rate", c.porca.decay_rate, "porca");
    read_number(p, "resp_distance", c.porca.resp_distance, "porca");
    read_number(p, "resp_max", c.porca.resp_max, "porca");
    read_number(p, "neighbor_radius", c.porca.neighbor_radius, "porca");
  }
  validate(c);
  return c;
}

inline ScenarioConfig load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::ios_base::failure("cannot open scenario file: " + file);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file + ": " + e.what());
  }
  return parse_scenario(j);
}

/// Initial world for a trial. All randomness comes from `seed`.
inline World build_world(const ScenarioConfig& c, std::uint64_t seed) {
  World w;
  w.dt = c.dt;
  w.path = Path(c.path);
  w.vehicle_params = c.vehicle;
  w.vehicle = vehicle_at(w.path, 0.0, c.start_speed);
  w.porca = c.porca;
  w.noise = c.noise;

  Rng rng(derive_seed(seed, {0x5ce7eULL}));
  auto add = [&](Vector2 pos, int goal) {
    AgentState a;
    a.id = static_cast<int>(w.pedestrians.size());
    a.position = pos;
    a.radius = c.ped_radius;
    a.pref_speed = c.ped_pref_speed;
    a.max_speed = c.ped_max_speed;
    w.pedestrians.push_back(a);
    w.intentions.push_back(goal < 0 ? Intention::stop() : Intention::toward(c.goals[goal]));
  };

  for (const auto& s : c.pedestrians) {
    add(s.position + Vector2{gaussian(rng, c.spawn_jitter), gaussian(rng, c.spawn_jitter)}, s.goal);
  }
  if (c.spawn && c.spawn->count > 0) {
    const auto& s = *c.spawn;
    std::uniform_real_distribution<double> ux(s.min.x, s.max.x);
    std::uniform_real_distribution<double> uy(s.min.y, s.max.y);
    std::uniform_int_distribution<int> ug(0, std::max(0, static_cast<int>(c.goals.size()) - 1));
    const double veh_clear = c.vehicle.radius + c.ped_radius + 1.0;
    int placed = 0;
    for (int attempt = 0; placed < s.count && attempt < 10000 * std::max(1, s.count); ++attempt) {
      const Vector2 p{ux(rng), uy(rng)};
      const int goal = s.stationary ? -1 : ug(rng);
      if (abs(p - w.vehicle.position) < veh_clear) continue;
      bool clear = true;
      for (const auto& other : w.pedestrians) {
        if (abs(p - other.position) < s.min_separation) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      add(p, goal);
      ++placed;
    }
    if (placed < s.count) throw ConfigError("spawn: area too small for the requested count");
  }
  return w;
}

}  // namespace porca
