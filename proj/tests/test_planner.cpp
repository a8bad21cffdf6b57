#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "porca/planner.hpp"

using namespace porca;

namespace {

constexpr double kDt = 1.0 / 3;

AgentState pedestrian(int id, Vector2 pos, Vector2 vel = {}) {
  AgentState a;
  a.id = id;
  a.position = pos;
  a.velocity = vel;
  return a;
}

PlannerContext straight_context() {
  return {Path({{0, 0}, {16, 0}}), VehicleParams{}, PorcaParams{}, kDt};
}

PomdpParams deterministic_params(int depth) {
  PomdpParams p;
  p.search_depth = depth;
  p.scenario_count = 1;
  p.planning_budget = 0.0;
  p.max_expansions = 0;
  p.ped_noise = 0.0;
  p.vehicle_noise = 0.0;
  return p;
}

Observation observe(const PlannerContext& ctx, double speed, std::vector<AgentState> peds,
                    double progress = 0.0) {
  return {0.0, vehicle_at(ctx.path, progress, speed), std::move(peds)};
}

/// Best discounted return over every open-loop action sequence of length depth.
std::pair<double, Action> exhaustive_best(const ModelState& start, const PlannerContext& ctx,
                                          const PomdpParams& params, int depth) {
  double best = -std::numeric_limits<double>::infinity();
  Action first = Action::maintain;
  const std::array<Action, 3> order = {Action::maintain, Action::decelerate, Action::accelerate};
  std::function<double(const ModelState&, int)> value = [&](const ModelState& s, int d) {
    if (d == depth || s.terminal) return 0.0;
    double v = -std::numeric_limits<double>::infinity();
    for (const Action a : order) {
      ModelState next = s;
      Rng rng(0);
      const double r = model_step(next, a, ctx, params, rng).reward;
      v = std::max(v, r + params.gamma * value(next, d + 1));
    }
    return v;
  };
  for (const Action a : order) {
    ModelState next = start;
    Rng rng(0);
    const double q = model_step(next, a, ctx, params, rng).reward + params.gamma * value(next, 1);
    if (q > best + 1e-9) {
      best = q;
      first = a;
    }
  }
  return {best, first};
}

}  // namespace

TEST(Reward, Examples) {
  const RewardParams p;
  EXPECT_DOUBLE_EQ(reward(1.0, true, false, Action::maintain, p), -1500.0);
  EXPECT_DOUBLE_EQ(reward(1.0, false, false, Action::maintain, p), 0.0);
  EXPECT_DOUBLE_EQ(reward(0.5, false, false, Action::accelerate, p), -0.6);
  EXPECT_DOUBLE_EQ(reward(0.3, false, true, Action::decelerate, p), 0.0);
}

TEST(Reward, StaysWithinBounds) {
  const RewardParams p;
  const double floor = -1000.0 * (p.v_max * p.v_max + 0.5) - 1.1;
  for (int k = 0; k <= 20; ++k) {
    const double v = p.v_max * k / 20.0;
    for (const Action a : {Action::accelerate, Action::decelerate, Action::maintain}) {
      for (const bool col : {false, true}) {
        for (const bool goal : {false, true}) {
          const double r = reward(v, col, goal, a, p);
          EXPECT_GE(r, floor);
          EXPECT_LE(r, 0.0);
        }
      }
    }
  }
}

TEST(Reactive, Thresholds) {
  EXPECT_EQ(reactive_action(0.5, 1.5, 4), Action::decelerate);
  EXPECT_EQ(reactive_action(10, 1.5, 4), Action::accelerate);
  EXPECT_EQ(reactive_action(2.0, 1.5, 4), Action::maintain);
}

TEST(Reactive, IgnoresPedestriansBehind) {
  const auto ctx = straight_context();
  const auto obs = observe(ctx, 0.5, {pedestrian(0, {-2, 0}), pedestrian(1, {6, 0})}, 4.0);
  EXPECT_NEAR(nearest_pedestrian_gap(obs.vehicle, obs.pedestrians, 1.0), 0.7, 1e-12);
  EXPECT_EQ(reactive_controller(obs, 1.5, 4, 1.0), Action::decelerate);
}

TEST(ConstSpeed, Examples) {
  EXPECT_EQ(const_speed_controller(0.0, 0.66, 0.5, kDt), Action::accelerate);
  EXPECT_EQ(const_speed_controller(0.66, 0.66, 0.5, kDt), Action::maintain);
  EXPECT_EQ(const_speed_controller(0.96, 0.66, 0.5, kDt), Action::decelerate);
}

// ---------------------------------------------------------------------------
// Belief

TEST(Belief, SymmetricEvidenceLeavesPriorAlone) {
  const VehicleParams vp;
  Belief b;
  b.intentions = {Intention::toward({10, 5}), Intention::toward({10, -5})};
  Observation prev{0, vehicle_at(Path({{-20, 0}, {-19, 0}}), 0, 0), {pedestrian(0, {0, 0}, {1.2, 0})}};
  Observation next = prev;
  next.pedestrians[0].position = {0.4, 0};
  belief_update(b, prev, next, vp, {}, 0.2, kDt);
  EXPECT_NEAR(b.get(0)[0], 0.5, 1e-12);
  EXPECT_NEAR(b.get(0)[1], 0.5, 1e-12);
}

TEST(Belief, GaussianRatioExample) {
  const VehicleParams vp;
  Belief b;
  // Predictions for the two goals land 0.4 m apart: 60 degrees apart at 0.4 m per step.
  const double a = std::numbers::pi / 3;
  b.intentions = {Intention::toward({10, 0}), Intention::toward({10 * std::cos(a), 10 * std::sin(a)})};
  Observation prev{0, vehicle_at(Path({{-20, 0}, {-19, 0}}), 0, 0), {pedestrian(0, {0, 0}, {1.2, 0})}};
  Observation next = prev;
  next.pedestrians[0].position = {0.4, 0};
  belief_update(b, prev, next, vp, {}, 0.2, kDt);
  const double e2 = std::exp(2.0);
  EXPECT_NEAR(b.get(0)[0], e2 / (e2 + 1), 1e-9);
  EXPECT_NEAR(b.get(0)[0], 0.8808, 1e-4);
}

TEST(Belief, ZeroPriorStaysZeroAndRowsNormalize) {
  const VehicleParams vp;
  Belief b = Belief::over_goals(std::vector<Vector2>{{10, 0}, {0, 10}, {-10, 0}});
  b.probs[0] = {0.0, 0.5, 0.3, 0.2};
  Observation prev{0, vehicle_at(Path({{-20, 0}, {-19, 0}}), 0, 0),
                   {pedestrian(0, {0, 0}, {1.2, 0}), pedestrian(1, {3, 3})}};
  Observation next = prev;
  next.pedestrians[0].position = {0.4, 0.05};
  next.pedestrians[1].position = {3.1, 3.2};
  next.pedestrians.push_back(pedestrian(7, {5, 5}));
  belief_update(b, prev, next, vp, {}, 0.2, kDt);
  EXPECT_EQ(b.get(0)[0], 0.0);
  for (const int id : {0, 1, 7}) {
    const auto row = b.get(id);
    double sum = 0;
    for (const double p : row) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  EXPECT_EQ(b.get(7), b.uniform());
}

TEST(Belief, UnderflowResetsToUniform) {
  const VehicleParams vp;
  Belief b = Belief::over_goals(std::vector<Vector2>{{10, 0}});
  Observation prev{0, vehicle_at(Path({{-20, 0}, {-19, 0}}), 0, 0), {pedestrian(0, {0, 0})}};
  Observation next = prev;
  next.pedestrians[0].position = {40, 40};
  const auto report = belief_update(b, prev, next, vp, {}, 0.2, kDt);
  ASSERT_EQ(report.reset_ids.size(), 1u);
  EXPECT_EQ(b.get(0), b.uniform());
}

TEST(Belief, StaysNormalizedOverRandomWalks) {
  const VehicleParams vp;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0, 0.15);
  Belief b = Belief::over_goals(std::vector<Vector2>{{10, 0}, {0, 10}, {-10, 0}, {0, -10}});
  Observation prev{0, vehicle_at(Path({{-20, 0}, {-19, 0}}), 0, 0),
                   {pedestrian(0, {0, 0}), pedestrian(1, {2, 1})}};
  for (int step = 0; step < 100; ++step) {
    Observation next = prev;
    for (auto& p : next.pedestrians) {
      const Vector2 d{0.3 + noise(rng), noise(rng)};
      p.velocity = d / kDt;
      p.position += d;
    }
    belief_update(b, prev, next, vp, {}, 0.2, kDt);
    for (const int id : {0, 1}) {
      double sum = 0;
      for (const double p : b.get(id)) sum += p;
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
    prev = next;
  }
}

// ---------------------------------------------------------------------------
// Transition model

TEST(TransitionModel, NoiseFreeMatchesPorcaStep) {
  const auto ctx = straight_context();
  const std::vector<AgentState> peds = {pedestrian(0, {3, 1}, {0, -1}), pedestrian(1, {5, -1}, {0, 1})};
  const std::vector<Intention> intents = {Intention::toward({3, -6}), Intention::toward({5, 6})};
  const VehicleState before = vehicle_at(ctx.path, 0, 0.8);
  const VehicleState after = vehicle_at(ctx.path, 0.8 * kDt, 0.8);
  const AgentState veh = vehicle_agent_for_step(before, after, ctx.vehicle, kDt);
  Rng rng(1);
  const auto modeled = pedestrian_transition_model(peds, intents, veh, ctx.porca, MotionModel::porca,
                                                   kDt, kDt, 0.0, rng);
  std::vector<AgentState> all = peds;
  all.push_back(veh);
  std::vector<Intention> all_int = intents;
  all_int.push_back(Intention::stop());
  PorcaParams p = ctx.porca;
  p.solve_vehicles = false;
  const auto direct = porca_step(all, all_int, p, kDt, kDt);
  for (std::size_t i = 0; i < peds.size(); ++i) {
    EXPECT_EQ(modeled[i].position, direct.agents[i].position);
  }
}

TEST(TransitionModel, StoppedPedestriansStayPut) {
  const auto ctx = straight_context();
  const std::vector<AgentState> peds = {pedestrian(0, {8, 8}), pedestrian(1, {12, -8})};
  const std::vector<Intention> intents(2, Intention::stop());
  const auto veh = vehicle_agent(vehicle_at(ctx.path, 0, 1.0), ctx.vehicle);
  for (const auto motion : {MotionModel::porca, MotionModel::pref_vel}) {
    Rng rng(2);
    const auto out = pedestrian_transition_model(peds, intents, veh, ctx.porca, motion, kDt, kDt, 0.0, rng);
    EXPECT_EQ(out[0].position, peds[0].position);
    EXPECT_EQ(out[1].position, peds[1].position);
  }
}

TEST(TransitionModel, SeededNoiseIsReproducible) {
  const auto ctx = straight_context();
  const std::vector<AgentState> peds = {pedestrian(0, {3, 5}), pedestrian(1, {5, -1})};
  const std::vector<Intention> intents = {Intention::toward({3, 12}), Intention::stop()};
  const auto veh = vehicle_agent(vehicle_at(ctx.path, 0, 1.0), ctx.vehicle);
  Rng a(77), b(77), c(78);
  const auto x = pedestrian_transition_model(peds, intents, veh, ctx.porca, MotionModel::porca, kDt, kDt, 0.05, a);
  const auto y = pedestrian_transition_model(peds, intents, veh, ctx.porca, MotionModel::porca, kDt, kDt, 0.05, b);
  const auto z = pedestrian_transition_model(peds, intents, veh, ctx.porca, MotionModel::porca, kDt, kDt, 0.05, c);
  EXPECT_EQ(x[0].position, y[0].position);
  EXPECT_NE(x[0].position, z[0].position);
}

// ---------------------------------------------------------------------------
// Search

TEST(PlanAction, EmptyRoadAcceleratesBelowTopSpeed) {
  const auto ctx = straight_context();
  const auto params = deterministic_params(1);
  const Belief belief;
  for (const double v : {0.0, 0.3, 0.8}) {
    const auto r = plan_action(belief, observe(ctx, v, {}), ctx, params, 1);
    ModelState s{vehicle_at(ctx.path, 0, v), {}, {}, 0.0, false};
    const auto [value, best] = exhaustive_best(s, ctx, params, 1);
    EXPECT_EQ(r.action, Action::accelerate) << "speed " << v;
    EXPECT_EQ(best, Action::accelerate);
    EXPECT_NEAR(r.root_value, value, 1e-12);
  }
}

TEST(PlanAction, EmptyRoadMaintainsAtTopSpeed) {
  const auto ctx = straight_context();
  const auto params = deterministic_params(1);
  const auto r = plan_action({}, observe(ctx, 1.0, {}), ctx, params, 1);
  ModelState s{vehicle_at(ctx.path, 0, 1.0), {}, {}, 0.0, false};
  const auto [value, best] = exhaustive_best(s, ctx, params, 1);
  EXPECT_EQ(r.action, Action::maintain);
  EXPECT_EQ(best, Action::maintain);
  EXPECT_NEAR(r.root_value, value, 1e-12);
  EXPECT_NEAR(r.action_values[0], -0.1, 1e-12);
}

TEST(PlanAction, CrossingPedestrianMatchesOracle) {
  const auto ctx = straight_context();
  // Walks straight across the lane; holding speed for three steps hits them,
  // while holding once and then braking twice lets them pass first.
  Belief belief;
  belief.intentions = {Intention::toward({2.2, 10})};
  const auto walker = pedestrian(0, {2.2, -1.2}, {0, 1.2});
  const auto obs = observe(ctx, 1.0, {walker});
  for (const int depth : {2, 3, 4}) {
    PomdpParams params = deterministic_params(depth);
    params.motion = MotionModel::pref_vel;
    const auto r = plan_action(belief, obs, ctx, params, 3);
    ModelState s{obs.vehicle, {walker}, {belief.intentions[0]}, 0.0, false};
    const auto [value, best] = exhaustive_best(s, ctx, params, depth);
    EXPECT_EQ(r.action, best) << "depth " << depth;
    EXPECT_NEAR(r.root_value, value, 1e-9) << "depth " << depth;
    EXPECT_GT(r.root_value, -2.0) << "depth " << depth;
  }
}

TEST(PlanAction, RootValueNeverBelowDefaultPolicy) {
  const auto ctx = straight_context();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> x(1, 12), y(-3, 3), unit(0, 1);
  PomdpParams params;
  params.scenario_count = 20;
  params.search_depth = 6;
  params.planning_budget = 0.0;
  params.max_expansions = 40;
  const std::vector<Vector2> goals = {{8, 8}, {8, -8}, {20, 0}};
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<AgentState> peds;
    for (int i = 0; i < 4; ++i) peds.push_back(pedestrian(i, {x(rng), y(rng)}));
    const auto belief = Belief::over_goals(goals);
    const auto r = plan_action(belief, observe(ctx, unit(rng), peds), ctx, params, trial);
    EXPECT_GE(r.root_value, r.default_value - 1e-12);
    EXPECT_FALSE(r.fell_back);
  }
}

TEST(PlanAction, SeedDeterminesResult) {
  const auto ctx = straight_context();
  PomdpParams params;
  params.scenario_count = 30;
  params.planning_budget = 0.0;
  params.max_expansions = 30;
  const auto belief = Belief::over_goals(std::vector<Vector2>{{8, 8}, {8, -8}});
  const auto obs = observe(ctx, 0.6, {pedestrian(0, {4, -1.5}, {0, 1}), pedestrian(1, {6, 1})});
  const auto a = plan_action(belief, obs, ctx, params, 99);
  const auto b = plan_action(belief, obs, ctx, params, 99);
  EXPECT_EQ(a.action, b.action);
  EXPECT_EQ(a.root_value, b.root_value);
  EXPECT_EQ(a.action_values, b.action_values);
  EXPECT_EQ(a.nodes, b.nodes);
}

TEST(PlanAction, PrefVelModelUsesSameSearch) {
  const auto ctx = straight_context();
  PomdpParams params;
  params.scenario_count = 10;
  params.planning_budget = 0.0;
  params.max_expansions = 10;
  params.motion = MotionModel::pref_vel;
  const auto belief = Belief::over_goals(std::vector<Vector2>{{8, 8}});
  const auto r = plan_action(belief, observe(ctx, 0.5, {pedestrian(0, {5, -2})}), ctx, params, 1);
  EXPECT_FALSE(r.fell_back);
  EXPECT_GT(r.expansions, 0);
}

TEST(PlanAction, ExhaustedBudgetFallsBackToRollout) {
  const auto ctx = straight_context();
  PomdpParams params;
  params.planning_budget = 1e-9;
  const auto obs = observe(ctx, 0.5, {pedestrian(0, {2.5, 0})});
  const auto r = plan_action(Belief::over_goals(std::vector<Vector2>{{8, 8}}), obs, ctx, params, 1);
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.action, reactive_controller(obs, params.d_near, params.d_far, 1.0));
}

TEST(PlanAction, TracksNearestPedestriansOnly) {
  PomdpParams params;
  params.max_tracked = 2;
  params.model_radius = 10;
  const auto ctx = straight_context();
  const auto obs = observe(ctx, 0, {pedestrian(0, {9, 0}), pedestrian(1, {2, 0}), pedestrian(2, {30, 0}),
                                    pedestrian(3, {4, 0})});
  const auto modeled = modeled_pedestrians(obs, params);
  ASSERT_EQ(modeled.size(), 3u);
  EXPECT_EQ(modeled[0].id, 1);
  EXPECT_EQ(modeled[1].id, 3);
  EXPECT_EQ(modeled[2].id, 0);
}
