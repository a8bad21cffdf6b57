#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "porca/porca.hpp"
#include "porca/rng.hpp"
#include "porca/world.hpp"

namespace porca {

// ---------------------------------------------------------------------------
// Reward

struct RewardParams {
  double collision_scale = 1000.0;
  double collision_offset = 0.5;
  double accel_penalty = 0.1;
  double v_max = 1.0;
};

/// Reward of arriving in a state with vehicle speed `speed` after `action`.
/// Reaching the goal ends the episode with zero reward.
inline double reward(double speed, bool collision, bool goal_reached, Action action,
                     const RewardParams& p) {
  double r = 0.0;
  if (collision) r -= p.collision_scale * (speed * speed + p.collision_offset);
  if (goal_reached && !collision) return 0.0;
  r += (speed - p.v_max) / p.v_max;
  if (action != Action::maintain) r -= p.accel_penalty;
  return r;
}

// ---------------------------------------------------------------------------
// Belief over intentions

/// Per-pedestrian distribution over a shared intention set (goals, then stop).
struct Belief {
  std::vector<Intention> intentions;
  std::map<int, std::vector<double>> probs;

  static Belief over_goals(std::span<const Vector2> goals) {
    Belief b;
    for (const auto& g : goals) b.intentions.push_back(Intention::toward(g));
    b.intentions.push_back(Intention::stop());
    return b;
  }

  std::vector<double> uniform() const {
    return std::vector<double>(intentions.size(), 1.0 / static_cast<double>(intentions.size()));
  }

  const std::vector<double>& of(int id) {
    auto it = probs.find(id);
    if (it == probs.end()) it = probs.emplace(id, uniform()).first;
    return it->second;
  }

  std::vector<double> get(int id) const {
    const auto it = probs.find(id);
    return it == probs.end() ? uniform() : it->second;
  }

  std::size_t most_likely(int id) const {
    const auto p = get(id);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }
};

struct BeliefUpdateReport {
  std::vector<int> reset_ids;  // rows that underflowed and were reset to uniform
};

/// Bayes update of every pedestrian present in both observations. The
/// likelihood of intention g is an isotropic Gaussian (sigma_b) around the
/// noise-free motion-model prediction from `prev` under g.
inline BeliefUpdateReport belief_update(Belief& belief, const Observation& prev,
                                        const Observation& next, const VehicleParams& vehicle,
                                        const PorcaParams& porca, double sigma_b, double dt,
                                        double pref_speed = 1.2) {
  BeliefUpdateReport report;

  std::vector<AgentState> agents = prev.pedestrians;
  for (auto& a : agents) a.pref_speed = pref_speed;
  agents.push_back(vehicle_agent_for_step(prev.vehicle, next.vehicle, vehicle, dt));
  std::vector<Intention> base(agents.size(), Intention::stop());
  PorcaParams params = porca;
  params.solve_vehicles = false;

  std::map<int, std::size_t> prev_index;
  for (std::size_t i = 0; i < prev.pedestrians.size(); ++i) prev_index[prev.pedestrians[i].id] = i;

  std::map<int, std::vector<double>> updated;
  for (const auto& ped : next.pedestrians) {
    const auto found = prev_index.find(ped.id);
    std::vector<double> prior = belief.get(ped.id);
    if (found == prev_index.end()) {
      updated[ped.id] = belief.uniform();
      continue;
    }
    const std::size_t i = found->second;
    std::vector<Vector2> prefs = preferred_velocities(agents, base, params);
    std::vector<double> post(prior.size());
    double total = 0.0;
    for (std::size_t g = 0; g < belief.intentions.size(); ++g) {
      if (prior[g] <= 0.0) {
        post[g] = 0.0;
        continue;
      }
      Vector2 pv = preferred_velocity(agents[i], belief.intentions[g], params);
      const double sp = abs(pv);
      if (sp > agents[i].max_speed) pv = pv * (agents[i].max_speed / sp);
      prefs[i] = pv;
      const Vector2 v = solve_agent_velocity(agents, prefs, i, params, dt).velocity;
      const Vector2 predicted = agents[i].position + v * dt;
      const double d2 = abs_sq(ped.position - predicted);
      post[g] = prior[g] * std::exp(-d2 / (2.0 * sigma_b * sigma_b));
      total += post[g];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      report.reset_ids.push_back(ped.id);
      updated[ped.id] = belief.uniform();
      continue;
    }
    for (auto& p : post) p /= total;
    updated[ped.id] = std::move(post);
  }
  belief.probs = std::move(updated);
  return report;
}

// ---------------------------------------------------------------------------
// Baseline controllers

/// Surface gap from the vehicle to the nearest pedestrian ahead of it.
inline double nearest_pedestrian_gap(const VehicleState& veh, std::span<const AgentState> peds,
                                     double vehicle_radius) {
  const Vector2 heading{std::cos(veh.heading), std::sin(veh.heading)};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : peds) {
    const Vector2 d = p.position - veh.position;
    if (dot(d, heading) < 0.0) continue;
    best = std::min(best, abs(d) - p.radius - vehicle_radius);
  }
  return best;
}

inline Action reactive_action(double nearest, double d_near, double d_far) {
  if (nearest < d_near) return Action::decelerate;
  if (nearest > d_far) return Action::accelerate;
  return Action::maintain;
}

inline Action reactive_controller(const Observation& obs, double d_near, double d_far,
                                  double vehicle_radius) {
  return reactive_action(nearest_pedestrian_gap(obs.vehicle, obs.pedestrians, vehicle_radius),
                         d_near, d_far);
}

/// Bang-bang speed hold; within half an acceleration step of the target it maintains.
inline Action const_speed_controller(double speed, double target, double accel, double dt) {
  const double half_step = 0.5 * accel * dt;
  if (speed < target - half_step) return Action::accelerate;
  if (speed > target + half_step) return Action::decelerate;
  return Action::maintain;
}

// ---------------------------------------------------------------------------
// Generative model

enum class MotionModel { porca, pref_vel };

struct PomdpParams {
  double gamma = 0.95;
  int search_depth = 10;
  int scenario_count = 100;
  double planning_budget = 0.333;  // s; <= 0 disables the wall-clock limit
  int max_expansions = 0;          // 0 = unlimited
  int max_tracked = 6;
  double obs_cell = 0.3;
  int max_children = 8;
  double model_radius = 10.0;      // pedestrians farther from the vehicle are not simulated
  // Extra clearance counted as a collision in the model. Pedestrians that yield
  // under reciprocal avoidance pass tangentially, so any positive margin makes
  // every yielding pass look like contact and the vehicle never commits.
  double safety_margin = 0.0;
  double d_near = 1.5;
  double d_far = 4.0;
  double sigma_b = 0.2;
  double ped_noise = 0.05;
  double vehicle_noise = 0.02;
  double pref_speed = 1.2;
  MotionModel motion = MotionModel::porca;
  RewardParams reward;
};

/// Fixed pieces of the world the planner simulates against.
struct PlannerContext {
  Path path;
  VehicleParams vehicle;
  PorcaParams porca;
  double dt = 1.0 / 3.0;
};

struct ModelState {
  VehicleState vehicle;
  std::vector<AgentState> peds;
  std::vector<Intention> intents;
  double time = 0.0;
  bool terminal = false;
};

/// Next pedestrian positions given one intention per pedestrian. `vehicle` takes
/// part as a non-reacting agent (see vehicle_agent_for_step).
///
/// Noise of sigma_p metres per step perturbs where each pedestrian wants to go.
/// Under the PORCA model the perturbation enters through the preferred velocity
/// (sigma_p / dt per axis), so pedestrians still avoid what they can see; with
/// straight-line motion it lands on the position directly.
inline std::vector<AgentState> pedestrian_transition_model(
    std::span<const AgentState> peds, std::span<const Intention> intents,
    const AgentState& vehicle, const PorcaParams& porca, MotionModel motion, double dt,
    double now, double sigma_p, Rng& rng) {
  auto jitter = [&](double sigma) { return Vector2{gaussian(rng, sigma), gaussian(rng, sigma)}; };
  std::vector<AgentState> out;
  if (motion == MotionModel::pref_vel) {
    out.assign(peds.begin(), peds.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Vector2 v = preferred_velocity(peds[i], intents[i], porca);
      out[i].velocity = v;
      out[i].position = peds[i].position + v * dt;
      if (sigma_p > 0.0) out[i].position += jitter(sigma_p);
    }
    return out;
  }

  std::vector<AgentState> agents(peds.begin(), peds.end());
  std::vector<Intention> all(intents.begin(), intents.end());
  agents.push_back(vehicle);
  all.push_back(Intention::stop());
  PorcaParams params = porca;
  params.solve_vehicles = false;
  std::vector<Vector2> prefs = preferred_velocities(agents, all, params);
  if (sigma_p > 0.0) {
    for (std::size_t i = 0; i + 1 < prefs.size(); ++i) {
      prefs[i] += jitter(sigma_p / dt);
      const double sp = abs(prefs[i]);
      if (sp > agents[i].max_speed) prefs[i] = prefs[i] * (agents[i].max_speed / sp);
    }
  }
  StepResult step = porca_step_with_prefs(agents, all, prefs, params, dt, now);
  step.agents.pop_back();
  return std::move(step.agents);
}

struct ModelStep {
  double reward = 0.0;
};

/// Advances a sampled state by one action in place.
inline ModelStep model_step(ModelState& s, Action action, const PlannerContext& ctx,
                            const PomdpParams& params, Rng& rng) {
  if (s.terminal) return {0.0};
  const double now = s.time + ctx.dt;
  NoiseParams noise;
  noise.enabled = params.vehicle_noise > 0.0;
  noise.speed_sigma = params.vehicle_noise;
  const VehicleStep vs = vehicle_transition(s.vehicle, action, ctx.path, ctx.vehicle, ctx.dt, noise, rng);
  s.peds = pedestrian_transition_model(
      s.peds, s.intents, vehicle_agent_for_step(s.vehicle, vs.state, ctx.vehicle, ctx.dt),
      ctx.porca, params.motion, ctx.dt, now, params.ped_noise, rng);
  s.vehicle = vs.state;
  s.time = now;

  bool collision = false;
  for (const auto& p : s.peds) {
    const double r = p.radius + ctx.vehicle.radius + params.safety_margin;
    if (abs_sq(p.position - s.vehicle.position) < r * r) {
      collision = true;
      break;
    }
  }
  const double r = reward(s.vehicle.speed, collision, vs.goal_reached, action, params.reward);
  if (collision || vs.goal_reached) s.terminal = true;
  return {r};
}

inline Action rollout_action(const ModelState& s, const PlannerContext& ctx,
                             const PomdpParams& params) {
  return reactive_action(nearest_pedestrian_gap(s.vehicle, s.peds, ctx.vehicle.radius),
                         params.d_near, params.d_far);
}

// ---------------------------------------------------------------------------
// Belief-tree search

struct PlanResult {
  Action action = Action::maintain;
  double root_value = 0.0;     // lower-bound value of the chosen policy
  double default_value = 0.0;  // rollout-policy value at the root
  std::array<double, 3> action_values{};
  int expansions = 0;
  int nodes = 0;
  bool fell_back = false;      // budget ran out before the root was expanded
  double elapsed = 0.0;        // s
};

namespace search {

inline constexpr std::array<Action, 3> kActions = {Action::accelerate, Action::decelerate,
                                                   Action::maintain};

inline std::size_t action_index(Action a) {
  return a == Action::accelerate ? 0 : (a == Action::decelerate ? 1 : 2);
}

struct Particle {
  ModelState state;
  int scenario = 0;
};

struct Node;

struct Branch {
  double mean_reward = 0.0;
  std::vector<std::unique_ptr<Node>> children;
  double lower = 0.0;
  double upper = 0.0;
};

struct Node {
  int depth = 0;
  double weight = 1.0;  // fraction of all scenarios reaching this node
  std::vector<Particle> particles;
  double default_value = 0.0;
  double optimistic = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool expanded = false;
  Node* parent = nullptr;
  std::array<Branch, 3> branches;
};

class Searcher {
 public:
  using Clock = std::chrono::steady_clock;

  Searcher(const PlannerContext& ctx, const PomdpParams& params, std::uint64_t seed,
           std::vector<int> tracked_ids, Clock::time_point deadline, bool timed)
      : ctx_(ctx),
        params_(params),
        seed_(seed),
        tracked_(std::move(tracked_ids)),
        deadline_(deadline),
        timed_(timed) {}

  bool out_of_time() const { return timed_ && Clock::now() >= deadline_; }

  Rng step_rng(int scenario, int depth) const {
    return Rng(derive_seed(seed_, {static_cast<std::uint64_t>(scenario),
                                   static_cast<std::uint64_t>(depth)}));
  }

  /// Discounted return of the rollout policy from `depth` to the horizon.
  double rollout(ModelState s, int scenario, int depth) const {
    double total = 0.0;
    double discount = 1.0;
    for (int d = depth; d < params_.search_depth && !s.terminal; ++d) {
      Rng rng = step_rng(scenario, d);
      total += discount * model_step(s, rollout_action(s, ctx_, params_), ctx_, params_, rng).reward;
      discount *= params_.gamma;
    }
    return total;
  }

  /// Return if the vehicle could accelerate freely with nothing in the way.
  double optimistic_value(const ModelState& s, int depth) const {
    if (s.terminal) return 0.0;
    double total = 0.0;
    double discount = 1.0;
    double v = s.vehicle.speed;
    double progress = s.vehicle.progress;
    const double goal = ctx_.path.length() - ctx_.vehicle.goal_tolerance;
    for (int d = depth; d < params_.search_depth; ++d) {
      const double nv = std::min(v + ctx_.vehicle.accel * ctx_.dt, ctx_.vehicle.v_max);
      progress += nv * ctx_.dt;
      if (progress >= goal) break;
      const double r_acc = nv > v ? params_.reward.accel_penalty : 0.0;
      total += discount * ((nv - ctx_.vehicle.v_max) / ctx_.vehicle.v_max - r_acc);
      v = nv;
      discount *= params_.gamma;
    }
    return total;
  }

  void evaluate_leaf(Node& node, bool& aborted) const {
    double sum = 0.0;
    double opt = 0.0;
    for (const auto& p : node.particles) {
      if (out_of_time()) {
        aborted = true;
        return;
      }
      sum += rollout(p.state, p.scenario, node.depth);
      opt += optimistic_value(p.state, node.depth);
    }
    const double n = static_cast<double>(node.particles.size());
    node.default_value = sum / n;
    node.optimistic = std::max(opt / n, node.default_value);
    node.lower = node.default_value;
    node.upper = node.optimistic;
  }

  std::vector<int> observation_key(const ModelState& before, const ModelState& after) const {
    std::vector<int> key;
    key.reserve(tracked_.size() * 2 + 1);
    key.push_back(after.terminal ? 1 : 0);
    for (const int id : tracked_) {
      const AgentState* a = nullptr;
      const AgentState* b = nullptr;
      for (std::size_t i = 0; i < before.peds.size(); ++i) {
        if (before.peds[i].id == id) {
          a = &before.peds[i];
          b = &after.peds[i];
          break;
        }
      }
      if (a == nullptr) continue;
      const Vector2 d = b->position - a->position;
      key.push_back(static_cast<int>(std::floor(d.x / params_.obs_cell)));
      key.push_back(static_cast<int>(std::floor(d.y / params_.obs_cell)));
    }
    return key;
  }

  /// Expands all three actions of `node`. Returns false if the deadline hit.
  bool expand(Node& node) {
    std::array<Branch, 3> branches;
    const double n = static_cast<double>(node.particles.size());
    for (std::size_t ai = 0; ai < kActions.size(); ++ai) {
      const Action action = kActions[ai];
      std::map<std::vector<int>, std::vector<Particle>> groups;
      double reward_sum = 0.0;
      for (const auto& p : node.particles) {
        if (out_of_time()) return false;
        Particle next = p;
        Rng rng = step_rng(p.scenario, node.depth);
        reward_sum += model_step(next.state, action, ctx_, params_, rng).reward;
        groups[observation_key(p.state, next.state)].push_back(std::move(next));
      }

      std::vector<std::pair<std::vector<int>, std::vector<Particle>>> ordered(
          std::make_move_iterator(groups.begin()), std::make_move_iterator(groups.end()));
      std::stable_sort(ordered.begin(), ordered.end(), [](const auto& l, const auto& r) {
        return l.second.size() > r.second.size();
      });
      const auto keep = std::min<std::size_t>(ordered.size(),
                                              static_cast<std::size_t>(params_.max_children));
      for (std::size_t g = keep; g < ordered.size(); ++g) {
        std::size_t target = 0;
        long best = std::numeric_limits<long>::max();
        for (std::size_t h = 0; h < keep; ++h) {
          long dist = 0;
          const auto& a = ordered[g].first;
          const auto& b = ordered[h].first;
          for (std::size_t c = 0; c < std::min(a.size(), b.size()); ++c) dist += std::labs(a[c] - b[c]);
          if (dist < best) {
            best = dist;
            target = h;
          }
        }
        auto& dst = ordered[target].second;
        std::move(ordered[g].second.begin(), ordered[g].second.end(), std::back_inserter(dst));
      }
      ordered.resize(keep);

      Branch& br = branches[ai];
      br.mean_reward = reward_sum / n;
      for (auto& [key, parts] : ordered) {
        auto child = std::make_unique<Node>();
        child->depth = node.depth + 1;
        child->parent = &node;
        child->weight = node.weight * static_cast<double>(parts.size()) / n;
        // Particles keep scenario order so value sums are order-stable.
        std::sort(parts.begin(), parts.end(),
                  [](const Particle& l, const Particle& r) { return l.scenario < r.scenario; });
        child->particles = std::move(parts);
        bool aborted = false;
        evaluate_leaf(*child, aborted);
        if (aborted) return false;
        br.children.push_back(std::move(child));
        ++nodes_;
      }
    }
    node.branches = std::move(branches);
    node.expanded = true;
    return true;
  }

  void backup(Node* node) const {
    for (; node != nullptr; node = node->parent) {
      if (!node->expanded) continue;
      double best_l = node->default_value;
      double best_u = -std::numeric_limits<double>::infinity();
      const double n = static_cast<double>(node->particles.size());
      for (auto& br : node->branches) {
        double l = 0.0;
        double u = 0.0;
        for (const auto& c : br.children) {
          const double w = static_cast<double>(c->particles.size()) / n;
          l += w * c->lower;
          u += w * c->upper;
        }
        br.lower = br.mean_reward + params_.gamma * l;
        br.upper = br.mean_reward + params_.gamma * u;
        best_l = std::max(best_l, br.lower);
        best_u = std::max(best_u, br.upper);
      }
      node->lower = best_l;
      node->upper = std::max(best_u, best_l);
    }
  }

  /// Walks down the optimistic path to the leaf with the largest weighted gap.
  Node* select(Node& root) const {
    Node* node = &root;
    while (node->expanded) {
      std::size_t best_a = 0;
      for (std::size_t a = 1; a < 3; ++a) {
        if (node->branches[a].upper > node->branches[best_a].upper) best_a = a;
      }
      Node* next = nullptr;
      double best_gap = 1e-9;
      for (const auto& c : node->branches[best_a].children) {
        const double gap = c->weight * (c->upper - c->lower);
        if (gap > best_gap) {
          best_gap = gap;
          next = c.get();
        }
      }
      if (next == nullptr) return nullptr;
      node = next;
    }
    if (node->depth >= params_.search_depth) return nullptr;
    bool all_terminal = std::all_of(node->particles.begin(), node->particles.end(),
                                    [](const Particle& p) { return p.state.terminal; });
    return all_terminal ? nullptr : node;
  }

  int nodes() const { return nodes_; }

 private:
  const PlannerContext& ctx_;
  const PomdpParams& params_;
  std::uint64_t seed_;
  std::vector<int> tracked_;
  Clock::time_point deadline_;
  bool timed_;
  int nodes_ = 1;
};

}  // namespace search

/// Modeled pedestrians: within model_radius of the vehicle, nearest first.
inline std::vector<AgentState> modeled_pedestrians(const Observation& obs, const PomdpParams& params) {
  std::vector<std::pair<double, AgentState>> near;
  for (const auto& p : obs.pedestrians) {
    const double d = abs(p.position - obs.vehicle.position);
    if (d <= params.model_radius) near.emplace_back(d, p);
  }
  std::stable_sort(near.begin(), near.end(), [](const auto& l, const auto& r) {
    return l.first < r.first || (l.first == r.first && l.second.id < r.second.id);
  });
  std::vector<AgentState> out;
  out.reserve(near.size());
  for (auto& [d, p] : near) {
    p.pref_speed = params.pref_speed;
    p.patience = 1.0;
    p.low_speed_since.reset();
    out.push_back(p);
  }
  return out;
}

/// Picks the speed action with the best estimated discounted return under the
/// belief, by sampled-scenario belief-tree search bounded by the planning budget
/// and the expansion cap.
inline PlanResult plan_action(const Belief& belief, const Observation& obs,
                              const PlannerContext& ctx, const PomdpParams& params,
                              std::uint64_t seed) {
  using Clock = search::Searcher::Clock;
  const auto start = Clock::now();
  const bool timed = params.planning_budget > 0.0;
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(
                  std::chrono::duration<double>(std::max(0.0, params.planning_budget)));

  PlanResult result;
  const std::vector<AgentState> peds = modeled_pedestrians(obs, params);
  std::vector<int> tracked;
  for (std::size_t i = 0; i < peds.size() && static_cast<int>(i) < params.max_tracked; ++i) {
    tracked.push_back(peds[i].id);
  }

  search::Searcher searcher(ctx, params, seed, tracked, deadline, timed);
  search::Node root;
  root.particles.reserve(static_cast<std::size_t>(params.scenario_count));
  for (int k = 0; k < params.scenario_count; ++k) {
    Rng rng(derive_seed(seed, {0xbe11efULL, static_cast<std::uint64_t>(k)}));
    search::Particle p;
    p.scenario = k;
    p.state.vehicle = obs.vehicle;
    p.state.time = obs.time;
    p.state.peds = peds;
    p.state.intents.reserve(peds.size());
    for (const auto& ped : peds) {
      const std::vector<double> probs = belief.get(ped.id);
      std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
      const std::size_t g = belief.intentions.empty() ? 0 : pick(rng);
      p.state.intents.push_back(belief.intentions.empty() ? Intention::stop()
                                                          : belief.intentions[g]);
    }
    root.particles.push_back(std::move(p));
  }

  const Action fallback = rollout_action(root.particles.front().state, ctx, params);
  auto finish = [&](PlanResult r) {
    r.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    r.nodes = searcher.nodes();
    return r;
  };

  bool aborted = false;
  searcher.evaluate_leaf(root, aborted);
  if (aborted) {
    result.action = fallback;
    result.fell_back = true;
    return finish(result);
  }
  result.default_value = root.default_value;

  while (params.max_expansions <= 0 || result.expansions < params.max_expansions) {
    if (searcher.out_of_time()) break;
    search::Node* leaf = searcher.select(root);
    if (leaf == nullptr) break;
    if (!searcher.expand(*leaf)) break;
    ++result.expansions;
    searcher.backup(leaf);
  }

  if (!root.expanded) {
    result.action = fallback;
    result.fell_back = true;
    result.root_value = root.default_value;
    return finish(result);
  }

  // Ties resolve to maintain, then decelerate, then accelerate.
  constexpr std::array<Action, 3> preference = {Action::maintain, Action::decelerate,
                                                Action::accelerate};
  double best = -std::numeric_limits<double>::infinity();
  for (const Action a : preference) {
    const double q = root.branches[search::action_index(a)].lower;
    result.action_values[search::action_index(a)] = q;
    if (q > best + 1e-9) {
      best = q;
      result.action = a;
    }
  }
  result.root_value = root.lower;
  return finish(result);
}

// ---------------------------------------------------------------------------
// Controllers

/// Common interface the trial runner drives: observation and belief in, action out.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual Action act(const Observation& obs, const Belief& belief) = 0;
  /// Wall-clock budget overruns seen so far.
  virtual int budget_overruns() const { return 0; }
};

class ReactiveController final : public Controller {
 public:
  ReactiveController(double d_near, double d_far, double vehicle_radius)
      : d_near_(d_near), d_far_(d_far), vehicle_radius_(vehicle_radius) {}

  Action act(const Observation& obs, const Belief&) override {
    return reactive_controller(obs, d_near_, d_far_, vehicle_radius_);
  }

 private:
  double d_near_;
  double d_far_;
  double vehicle_radius_;
};

class ConstSpeedController final : public Controller {
 public:
  ConstSpeedController(double target, double accel, double dt)
      : target_(target), accel_(accel), dt_(dt) {}

  Action act(const Observation& obs, const Belief&) override {
    return const_speed_controller(obs.vehicle.speed, target_, accel_, dt_);
  }

 private:
  double target_;
  double accel_;
  double dt_;
};

class PomdpController final : public Controller {
 public:
  PomdpController(PlannerContext ctx, PomdpParams params, std::uint64_t seed)
      : ctx_(std::move(ctx)), params_(params), seed_(seed) {}

  Action act(const Observation& obs, const Belief& belief) override {
    const PlanResult r = plan_action(belief, obs, ctx_, params_, derive_seed(seed_, {calls_++}));
    if (params_.planning_budget > 0.0 && r.elapsed > params_.planning_budget) ++overruns_;
    last_ = r;
    return r.action;
  }

  int budget_overruns() const override { return overruns_; }
  const PlanResult& last() const { return last_; }

 private:
  PlannerContext ctx_;
  PomdpParams params_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
  int overruns_ = 0;
  PlanResult last_;
};

}  // namespace porca
