#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "porca/porca.hpp"
#include "porca/rng.hpp"

namespace porca {

/// A position track sampled at integer frame indices.
struct Track {
  int id = 0;
  std::vector<int> frames;
  std::vector<Vector2> positions;
  std::optional<Vector2> goal;

  /// Index of `frame` in this track, if recorded.
  std::optional<std::size_t> index_of(int frame) const {
    const auto it = std::lower_bound(frames.begin(), frames.end(), frame);
    if (it == frames.end() || *it != frame) return std::nullopt;
    return static_cast<std::size_t>(it - frames.begin());
  }
};

struct TrajectoryDataset {
  double frame_interval = 0.33;  // s
  std::vector<Track> pedestrians;  // ascending id
  std::optional<Track> vehicle;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      std::string_view f = line.substr(start, i - start);
      while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
      while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
      out.push_back(f);
      start = i + 1;
    }
  }
  return out;
}

template <class T>
std::optional<T> parse_field(std::string_view s) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  return v;
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace detail

/// Parses `ped_id,frame,x,y` rows. Rows with ped_id "vehicle" form the vehicle
/// track. Frames must strictly increase within each track.
inline TrajectoryDataset parse_trajectories(std::istream& in, const std::string& name = "<input>",
                                            double frame_interval = 0.33) {
  if (!(frame_interval > 0.0)) throw std::invalid_argument("frame interval must be positive");
  TrajectoryDataset ds;
  ds.frame_interval = frame_interval;
  std::map<int, Track> peds;
  std::optional<Track> vehicle;

  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    const auto fields = detail::split_csv(line);
    if (!header_seen) {
      const std::vector<std::string_view> want = {"ped_id", "frame", "x", "y"};
      if (fields != want) {
        throw ParseError(name, lineno, "expected header 'ped_id,frame,x,y'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) throw ParseError(name, lineno, "expected 4 fields");
    const auto frame = detail::parse_field<int>(fields[1]);
    const auto x = detail::parse_field<double>(fields[2]);
    const auto y = detail::parse_field<double>(fields[3]);
    if (!frame || !x || !y) throw ParseError(name, lineno, "malformed number");

    Track* track = nullptr;
    if (fields[0] == "vehicle") {
      if (!vehicle) vehicle.emplace().id = -1;
      track = &*vehicle;
    } else {
      const auto id = detail::parse_field<int>(fields[0]);
      if (!id || *id < 0) throw ParseError(name, lineno, "ped_id must be a non-negative integer or 'vehicle'");
      track = &peds[*id];
      track->id = *id;
    }
    if (!track->frames.empty() && *frame <= track->frames.back()) {
      throw ParseError(name, lineno, "frame index does not increase for this track");
    }
    track->frames.push_back(*frame);
    track->positions.push_back({*x, *y});
  }
  for (auto& [id, t] : peds) ds.pedestrians.push_back(std::move(t));
  ds.vehicle = std::move(vehicle);
  return ds;
}

/// Reads `ped_id,goal_x,goal_y` rows and attaches goals to the dataset's tracks.
inline void parse_goals(std::istream& in, TrajectoryDataset& ds, const std::string& name = "<goals>") {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    const auto fields = detail::split_csv(line);
    if (!header_seen) {
      const std::vector<std::string_view> want = {"ped_id", "goal_x", "goal_y"};
      if (fields != want) throw ParseError(name, lineno, "expected header 'ped_id,goal_x,goal_y'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw ParseError(name, lineno, "expected 3 fields");
    const auto id = detail::parse_field<int>(fields[0]);
    const auto gx = detail::parse_field<double>(fields[1]);
    const auto gy = detail::parse_field<double>(fields[2]);
    if (!id || !gx || !gy) throw ParseError(name, lineno, "malformed number");
    auto it = std::find_if(ds.pedestrians.begin(), ds.pedestrians.end(),
                           [&](const Track& t) { return t.id == *id; });
    if (it == ds.pedestrians.end()) throw ParseError(name, lineno, "goal for unknown ped_id");
    if (it->goal) throw ParseError(name, lineno, "duplicate goal for ped_id");
    it->goal = Vector2{*gx, *gy};
  }
}

inline TrajectoryDataset load_trajectories(const std::string& file,
                                           const std::optional<std::string>& goals_file = {},
                                           double frame_interval = 0.33) {
  std::ifstream in(file);
  if (!in) throw std::ios_base::failure("cannot open trajectory file: " + file);
  TrajectoryDataset ds = parse_trajectories(in, file, frame_interval);
  if (goals_file) {
    std::ifstream g(*goals_file);
    if (!g) throw std::ios_base::failure("cannot open goals file: " + *goals_file);
    parse_goals(g, ds, *goals_file);
  }
  return ds;
}

inline void write_trajectories(std::ostream& out, const TrajectoryDataset& ds) {
  out << "ped_id,frame,x,y\n";
  char buf[96];
  for (const auto& t : ds.pedestrians) {
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", t.id, t.frames[i], t.positions[i].x,
                    t.positions[i].y);
      out << buf;
    }
  }
  if (ds.vehicle) {
    for (std::size_t i = 0; i < ds.vehicle->frames.size(); ++i) {
      std::snprintf(buf, sizeof buf, "vehicle,%d,%.6f,%.6f\n", ds.vehicle->frames[i],
                    ds.vehicle->positions[i].x, ds.vehicle->positions[i].y);
      out << buf;
    }
  }
}

inline void write_goals(std::ostream& out, const TrajectoryDataset& ds) {
  out << "ped_id,goal_x,goal_y\n";
  char buf[96];
  for (const auto& t : ds.pedestrians) {
    if (!t.goal) continue;
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", t.id, t.goal->x, t.goal->y);
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// Predictors

enum class PredictionModel { const_vel, pref_vel, orca, porca };

inline std::string_view model_name(PredictionModel m) {
  switch (m) {
    case PredictionModel::const_vel: return "ConstVel";
    case PredictionModel::pref_vel: return "PrefVel";
    case PredictionModel::orca: return "ORCA";
    case PredictionModel::porca: return "PORCA";
  }
  return "?";
}

inline std::optional<PredictionModel> parse_model(std::string_view s) {
  for (auto m : {PredictionModel::const_vel, PredictionModel::pref_vel, PredictionModel::orca,
                 PredictionModel::porca}) {
    std::string lower(model_name(m));
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string in(s);
    std::transform(in.begin(), in.end(), in.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (in == lower) return m;
  }
  return std::nullopt;
}

inline bool needs_goal(PredictionModel m) { return m != PredictionModel::const_vel; }

/// Everyone visible at one frame, with backward-difference velocities.
struct SceneSnapshot {
  std::vector<AgentState> pedestrians;
  std::vector<std::optional<Vector2>> goals;  // parallel to pedestrians
  std::optional<AgentState> vehicle;
};

struct EvalParams {
  double horizon = 3.0;    // s
  double threshold = 0.4;  // m
  double pref_speed = 1.2;
  double vehicle_radius = 1.0;
  double ped_radius = 0.3;
};

/// Number of predicted frames covering the horizon at the dataset's interval.
inline int horizon_frames(const EvalParams& p, double frame_interval) {
  const auto n = static_cast<int>(std::llround(p.horizon / frame_interval));
  if (n < 1) throw std::invalid_argument("horizon shorter than one frame");
  return n;
}

/// Snapshot at `frame`: agents seen at both frame-1 and frame.
inline SceneSnapshot snapshot_at(const TrajectoryDataset& ds, int frame, const EvalParams& p) {
  SceneSnapshot s;
  auto velocity = [&](const Track& t, std::size_t i) -> std::optional<Vector2> {
    if (i == 0 || t.frames[i - 1] != frame - 1) return std::nullopt;
    return (t.positions[i] - t.positions[i - 1]) / ds.frame_interval;
  };
  for (const auto& t : ds.pedestrians) {
    const auto i = t.index_of(frame);
    if (!i) continue;
    const auto v = velocity(t, *i);
    if (!v) continue;
    AgentState a;
    a.id = t.id;
    a.position = t.positions[*i];
    a.velocity = *v;
    a.radius = p.ped_radius;
    a.pref_speed = p.pref_speed;
    a.max_speed = std::max(p.pref_speed, abs(*v));
    s.pedestrians.push_back(a);
    s.goals.push_back(t.goal);
  }
  if (ds.vehicle) {
    if (const auto i = ds.vehicle->index_of(frame)) {
      if (const auto v = velocity(*ds.vehicle, *i)) {
        AgentState a;
        a.id = -1;
        a.kind = AgentKind::vehicle;
        a.position = ds.vehicle->positions[*i];
        a.velocity = *v;
        a.radius = p.vehicle_radius;
        a.pref_speed = abs(*v);
        a.max_speed = abs(*v);
        s.vehicle = a;
      }
    }
  }
  return s;
}

struct Prediction {
  int id = 0;
  bool skipped = false;  // model needed a goal this pedestrian lacks
  std::vector<Vector2> positions;
};

/// Predicted positions for `frames` steps of length `dt` after the snapshot.
inline std::vector<Prediction> predict_trajectory(PredictionModel model, const SceneSnapshot& s,
                                                  int frames, double dt) {
  const std::size_t n = s.pedestrians.size();
  std::vector<Prediction> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = s.pedestrians[i].id;
    out[i].skipped = needs_goal(model) && !s.goals[i];
    if (!out[i].skipped) out[i].positions.reserve(static_cast<std::size_t>(frames));
  }

  if (model == PredictionModel::const_vel || model == PredictionModel::pref_vel) {
    const PorcaParams params;
    for (std::size_t i = 0; i < n; ++i) {
      if (out[i].skipped) continue;
      AgentState a = s.pedestrians[i];
      for (int k = 1; k <= frames; ++k) {
        const Vector2 v = model == PredictionModel::const_vel
                              ? a.velocity
                              : preferred_velocity(a, Intention::toward(*s.goals[i]), params);
        a.position += v * dt;
        out[i].positions.push_back(a.position);
      }
    }
    return out;
  }

  PorcaParams params = model == PredictionModel::orca ? PorcaParams::orca() : PorcaParams{};
  params.solve_vehicles = false;
  std::vector<AgentState> agents = s.pedestrians;
  std::vector<Intention> intents;
  for (std::size_t i = 0; i < n; ++i) {
    intents.push_back(s.goals[i] ? Intention::toward(*s.goals[i]) : Intention::stop());
  }
  if (s.vehicle) {
    agents.push_back(*s.vehicle);
    intents.push_back(Intention::stop());
  }
  double now = 0.0;
  for (int k = 1; k <= frames; ++k) {
    now += dt;
    StepResult step = porca_step(agents, intents, params, dt, now);
    agents = std::move(step.agents);
    for (std::size_t i = 0; i < n; ++i) {
      if (!out[i].skipped) out[i].positions.push_back(agents[i].position);
    }
  }
  return out;
}

/// Mean Euclidean distance between aligned sequences.
inline double mean_displacement(std::span<const Vector2> predicted, std::span<const Vector2> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("prediction and ground truth lengths differ");
  }
  if (predicted.empty()) throw std::invalid_argument("empty prediction");
  double sum = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) sum += abs(predicted[k] - truth[k]);
  return sum / static_cast<double>(predicted.size());
}

/// Fraction of predictions whose mean displacement is strictly below the threshold.
inline double success_rate(std::span<const std::vector<Vector2>> predictions,
                           std::span<const std::vector<Vector2>> truths, const EvalParams& p) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("prediction and ground truth counts differ");
  }
  if (predictions.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (mean_displacement(predictions[i], truths[i]) < p.threshold) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(predictions.size());
}

struct ModelScore {
  PredictionModel model = PredictionModel::porca;
  int windows = 0;
  int successes = 0;
  int skipped = 0;  // windows dropped for a missing goal
  int trajectories = 0;
  int trajectory_successes = 0;

  double success_rate() const { return windows > 0 ? static_cast<double>(successes) / windows : 0.0; }
  double trajectory_rate() const {
    return trajectories > 0 ? static_cast<double>(trajectory_successes) / trajectories : 0.0;
  }
};

/// Scores a model over every sliding window: each frame where a pedestrian has
/// a backward-difference velocity and a full future over the horizon. A
/// trajectory counts as a success when its windows' mean displacements average
/// below the threshold.
inline ModelScore evaluate_model(const TrajectoryDataset& ds, PredictionModel model,
                                 const EvalParams& p) {
  const int h = horizon_frames(p, ds.frame_interval);
  ModelScore score;
  score.model = model;

  std::vector<int> frames;
  for (const auto& t : ds.pedestrians) frames.insert(frames.end(), t.frames.begin(), t.frames.end());
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  std::map<int, std::pair<double, int>> per_track;  // id -> (sum of window means, count)
  for (const int f : frames) {
    const SceneSnapshot snap = snapshot_at(ds, f, p);
    if (snap.pedestrians.empty()) continue;
    // Only pedestrians with a full recorded future are scored.
    std::vector<std::optional<std::vector<Vector2>>> truth(snap.pedestrians.size());
    bool any = false;
    for (std::size_t i = 0; i < snap.pedestrians.size(); ++i) {
      const Track& t = *std::find_if(ds.pedestrians.begin(), ds.pedestrians.end(),
                                     [&](const Track& tr) { return tr.id == snap.pedestrians[i].id; });
      const std::size_t at = *t.index_of(f);
      if (at + static_cast<std::size_t>(h) >= t.frames.size()) continue;
      if (t.frames[at + static_cast<std::size_t>(h)] != f + h) continue;
      truth[i].emplace(t.positions.begin() + static_cast<std::ptrdiff_t>(at) + 1,
                       t.positions.begin() + static_cast<std::ptrdiff_t>(at) + 1 + h);
      any = true;
    }
    if (!any) continue;
    const auto preds = predict_trajectory(model, snap, h, ds.frame_interval);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (!truth[i]) continue;
      if (preds[i].skipped) {
        ++score.skipped;
        continue;
      }
      const double err = mean_displacement(preds[i].positions, *truth[i]);
      ++score.windows;
      if (err < p.threshold) ++score.successes;
      auto& acc = per_track[preds[i].id];
      acc.first += err;
      ++acc.second;
    }
  }
  for (const auto& [id, acc] : per_track) {
    ++score.trajectories;
    if (acc.first / acc.second < p.threshold) ++score.trajectory_successes;
  }
  return score;
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticParams {
  int pedestrians = 46;
  int per_scene = 6;
  int frames = 40;          // per scene
  double frame_interval = 0.33;
  double noise = 0.0;       // m, Gaussian observation noise on recorded positions
  double vehicle_speed = 0.8;
  double half_extent = 5.0;  // m, spawn box half-width
};

/// Trajectories produced by the PORCA simulator itself: small scenes of
/// pedestrians crossing a workspace that a constant-velocity vehicle drives
/// through. Scenes occupy disjoint frame ranges.
inline TrajectoryDataset generate_porca_dataset(const SyntheticParams& sp, std::uint64_t seed) {
  TrajectoryDataset ds;
  ds.frame_interval = sp.frame_interval;
  Track vehicle_track;
  vehicle_track.id = -1;
  Rng rng(derive_seed(seed, {0xda7aULL}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const PorcaParams params = [] {
    PorcaParams p;
    p.solve_vehicles = false;
    return p;
  }();
  const int scene_gap = sp.frames + 10;
  int next_id = 0;
  for (int scene = 0; next_id < sp.pedestrians; ++scene) {
    const int count = std::min(sp.per_scene, sp.pedestrians - next_id);
    const int base_frame = scene * scene_gap;

    std::vector<AgentState> agents;
    std::vector<Intention> intents;
    std::vector<Vector2> goals;
    while (static_cast<int>(agents.size()) < count) {
      // Start anywhere in the workspace and head for a point on its rim.
      const Vector2 start{(unit(rng) - 0.5) * 2.0 * sp.half_extent,
                          (unit(rng) - 0.5) * 2.0 * sp.half_extent};
      const double b = 2.0 * std::numbers::pi * unit(rng);
      const Vector2 goal = Vector2{std::cos(b), std::sin(b)} * (sp.half_extent + 4.0);
      bool clear = true;
      for (const auto& o : agents) clear = clear && abs(o.position - start) > 1.0;
      clear = clear && abs(goal - start) > 4.0;
      if (!clear) continue;
      AgentState ag;
      ag.id = next_id + static_cast<int>(agents.size());
      ag.position = start;
      ag.velocity = normalized(goal - start) * 1.2;
      agents.push_back(ag);
      intents.push_back(Intention::toward(goal));
      goals.push_back(goal);
    }
    AgentState veh;
    veh.id = -1;
    veh.kind = AgentKind::vehicle;
    veh.radius = 1.0;
    const double heading = 2.0 * std::numbers::pi * unit(rng);
    const Vector2 dir{std::cos(heading), std::sin(heading)};
    veh.position = dir * -(sp.half_extent + 1.0) + perp(dir) * ((unit(rng) - 0.5) * 2.0);
    veh.velocity = dir * sp.vehicle_speed;
    veh.max_speed = sp.vehicle_speed;
    veh.pref_speed = sp.vehicle_speed;
    agents.push_back(veh);
    intents.push_back(Intention::stop());

    std::vector<Track> tracks(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      tracks[static_cast<std::size_t>(i)].id = agents[static_cast<std::size_t>(i)].id;
      tracks[static_cast<std::size_t>(i)].goal = goals[static_cast<std::size_t>(i)];
    }
    double now = 0.0;
    for (int f = 0; f < sp.frames; ++f) {
      for (int i = 0; i < count; ++i) {
        tracks[static_cast<std::size_t>(i)].frames.push_back(base_frame + f);
        tracks[static_cast<std::size_t>(i)].positions.push_back(agents[static_cast<std::size_t>(i)].position);
      }
      vehicle_track.frames.push_back(base_frame + f);
      vehicle_track.positions.push_back(agents.back().position);
      now += sp.frame_interval;
      agents = porca_step(agents, intents, params, sp.frame_interval, now).agents;
    }
    for (auto& t : tracks) ds.pedestrians.push_back(std::move(t));
    next_id += count;
  }

  if (sp.noise > 0.0) {
    Rng noise(derive_seed(seed, {0x0b5ULL}));
    for (auto& t : ds.pedestrians) {
      for (auto& p : t.positions) p += Vector2{gaussian(noise, sp.noise), gaussian(noise, sp.noise)};
    }
  }
  ds.vehicle = std::move(vehicle_track);
  return ds;
}

}  // namespace porca
