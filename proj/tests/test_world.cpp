#include <gtest/gtest.h>

#include <sstream>

#include "porca/replay.hpp"
#include "porca/scenario.hpp"
#include "porca/trial.hpp"
#include "porca/world.hpp"

using namespace porca;

namespace {

const std::string kScenarios = std::string(PORCA_SOURCE_DIR) + "/scenarios/";

World empty_world() {
  World w;
  w.path = Path({{0, 0}, {16, 0}});
  w.vehicle = vehicle_at(w.path, 0.0, 0.5);
  return w;
}

AgentState pedestrian(int id, Vector2 pos) {
  AgentState a;
  a.id = id;
  a.position = pos;
  return a;
}

ScenarioConfig bare_scenario() {
  ScenarioConfig c;
  c.name = "bare";
  c.path = {{0, 0}, {16, 0}};
  c.goals = {{8, 8}};
  return c;
}

}  // namespace

TEST(Path, ArcLengthAndHeading) {
  const Path p({{0, 0}, {3, 4}, {3, 10}});
  EXPECT_DOUBLE_EQ(p.length(), 11.0);
  EXPECT_NEAR(abs(p.point_at(2.5) - Vector2{1.5, 2}), 0, 1e-12);
  EXPECT_NEAR(abs(p.point_at(8) - Vector2{3, 7}), 0, 1e-12);
  EXPECT_NEAR(p.heading_at(8), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(p.project({5, 7}), 8.0, 1e-12);
  EXPECT_THROW(Path({{0, 0}}), std::invalid_argument);
  EXPECT_THROW(Path({{0, 0}, {0, 0}}), std::invalid_argument);
}

TEST(VehicleTransition, SpeedExamples) {
  const Path path({{0, 0}, {16, 0}});
  const VehicleParams vp;
  const NoiseParams quiet;
  Rng rng(1);
  const double dt = 1.0 / 3;
  auto from = [&](double v, Action a) {
    return vehicle_transition(vehicle_at(path, 0, v), a, path, vp, dt, quiet, rng).state;
  };
  EXPECT_NEAR(from(0.5, Action::accelerate).speed, 2.0 / 3, 1e-12);
  EXPECT_EQ(from(0.1, Action::decelerate).speed, 0.0);
  EXPECT_EQ(from(1.0, Action::accelerate).speed, 1.0);
  EXPECT_EQ(from(0.7, Action::maintain).speed, 0.7);
  EXPECT_NEAR(from(0.5, Action::accelerate).progress, 2.0 / 9, 1e-12);
}

TEST(VehicleTransition, ClampsAtPathEndAndFlagsGoal) {
  const Path path({{0, 0}, {16, 0}});
  const VehicleParams vp;
  Rng rng(1);
  const auto step = vehicle_transition(vehicle_at(path, 15.9, 1.0), Action::maintain, path, vp,
                                       1.0 / 3, {}, rng);
  EXPECT_TRUE(step.goal_reached);
  EXPECT_DOUBLE_EQ(step.state.progress, 16.0);
  EXPECT_EQ(step.state.position, (Vector2{16, 0}));
}

TEST(VehicleTransition, NoiseMovesDistanceNotCommand) {
  const Path path({{0, 0}, {16, 0}});
  const VehicleParams vp;
  NoiseParams noise;
  noise.enabled = true;
  noise.speed_sigma = 0.1;
  Rng rng(3);
  const auto step = vehicle_transition(vehicle_at(path, 0, 0.5), Action::maintain, path, vp,
                                       1.0 / 3, noise, rng);
  EXPECT_EQ(step.state.speed, 0.5);
  EXPECT_NE(step.state.progress, 0.5 / 3);
}

TEST(VehicleTransition, HeadingStaysNormalized) {
  EXPECT_NEAR(normalize_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(normalize_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(normalize_angle(0.5), 0.5, 1e-12);
}

TEST(DetectCollision, StrictBoundary) {
  World w = empty_world();
  w.vehicle = vehicle_at(w.path, 0, 0);
  w.pedestrians = {pedestrian(0, {5, 0})};
  EXPECT_FALSE(detect_collision(w));
  w.pedestrians = {pedestrian(0, {1.29, 0})};
  EXPECT_TRUE(detect_collision(w));
  w.pedestrians = {pedestrian(0, {1.3, 0})};
  EXPECT_FALSE(detect_collision(w));
}

TEST(StepWorld, EmptyCrowdIsVehicleTransition) {
  World w = empty_world();
  Rng a(4), b(4);
  const auto expected = vehicle_transition(w.vehicle, Action::accelerate, w.path, w.vehicle_params,
                                           w.dt, w.noise, a);
  step_world(w, Action::accelerate, b);
  EXPECT_EQ(w.vehicle.position, expected.state.position);
  EXPECT_EQ(w.vehicle.speed, expected.state.speed);
  EXPECT_EQ(w.accel_decel_count, 1);
  EXPECT_EQ(w.step, 1);
}

TEST(StepWorld, StationaryCrowdStaysPut) {
  World w = empty_world();
  w.pedestrians = {pedestrian(0, {4, 8}), pedestrian(1, {12, -9})};
  w.intentions = {Intention::stop(), Intention::stop()};
  Rng rng(1);
  step_world(w, Action::maintain, rng);
  EXPECT_EQ(w.pedestrians[0].position, (Vector2{4, 8}));
  EXPECT_EQ(w.pedestrians[1].position, (Vector2{12, -9}));
  EXPECT_NEAR(w.vehicle.progress, 0.5 / 3, 1e-12);
  EXPECT_EQ(w.accel_decel_count, 0);
}

TEST(StepWorld, SeededScenarioIsReproducible) {
  auto cfg = load_scenario(kScenarios + "s2.json");
  cfg.noise.enabled = true;
  auto run = [&] {
    World w = build_world(cfg, 42);
    Rng rng(derive_seed(42, {1}));
    for (int i = 0; i < 2; ++i) step_world(w, Action::accelerate, rng);
    return w;
  };
  const World a = run();
  const World b = run();
  ASSERT_EQ(a.pedestrians.size(), b.pedestrians.size());
  for (std::size_t i = 0; i < a.pedestrians.size(); ++i) {
    EXPECT_EQ(a.pedestrians[i].position, b.pedestrians[i].position);
  }
  EXPECT_EQ(a.vehicle.progress, b.vehicle.progress);
}

TEST(StepWorld, PedestrianSpeedsRespectLimit) {
  const auto cfg = load_scenario(kScenarios + "s3.json");
  World w = build_world(cfg, 5);
  Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    step_world(w, i < 4 ? Action::accelerate : Action::maintain, rng);
    for (const auto& p : w.pedestrians) EXPECT_LE(abs(p.velocity), p.max_speed + 1e-6);
  }
}

TEST(Scenario, ShippedFilesLoad) {
  const auto s1 = load_scenario(kScenarios + "s1.json");
  const auto s2 = load_scenario(kScenarios + "s2.json");
  const auto s3 = load_scenario(kScenarios + "s3.json");
  EXPECT_DOUBLE_EQ(Path(s1.path).length(), 16.0);
  EXPECT_DOUBLE_EQ(Path(s2.path).length(), 16.0);
  for (const auto& p : s1.pedestrians) EXPECT_EQ(p.goal, -1);
  EXPECT_EQ(build_world(s3, 1).pedestrians.size(), 30u);
  EXPECT_EQ(s3.goals.size(), 7u);
}

TEST(Scenario, RejectsUnknownKeys) {
  nlohmann::json j = {{"name", "x"}, {"path", {{0, 0}, {1, 0}}}, {"goals", {{2, 2}}}, {"colour", 1}};
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j.erase("colour");
  j["vehicle"] = {{"v_max", 1.0}, {"wheels", 4}};
  EXPECT_THROW(parse_scenario(j), ConfigError);
}

TEST(Scenario, RejectsInvalidValues) {
  nlohmann::json j = {{"name", "x"}, {"path", {{0, 0}, {1, 0}}}, {"goals", {{2, 2}, {2, 2}}}};
  EXPECT_THROW(parse_scenario(j), ConfigError);
  j["goals"] = {{2, 2}};
  j["sim"] = {{"timeout", -1}};
  EXPECT_THROW(parse_scenario(j), ConfigError);
  EXPECT_THROW(load_scenario(kScenarios + "missing.json"), std::ios_base::failure);
}

TEST(RunTrial, ConstSpeedOnClearPath) {
  const auto m = run_trial(bare_scenario(), Algorithm::const_speed, {}, 1);
  EXPECT_TRUE(m.success);
  EXPECT_FALSE(m.collided);
  // 15.8 m to the goal band at 2/3 m/s after a four-step ramp from rest.
  EXPECT_NEAR(m.travel_time, 24.2, 0.5);
  EXPECT_EQ(m.accel_decel_count, 4);
}

TEST(RunTrial, ReactiveStallsBehindStandingCrowd) {
  const auto cfg = load_scenario(kScenarios + "s1.json");
  ControllerSettings s;
  const auto m = run_trial(cfg, Algorithm::reactive, s, 3);
  EXPECT_FALSE(m.success);
  EXPECT_FALSE(m.collided);
  EXPECT_NEAR(m.travel_time, cfg.timeout, 1e-6);
}

TEST(RunTrial, TerminatePolicyStopsAtFirstContact) {
  auto cfg = bare_scenario();
  // Too slow to get out of the way.
  cfg.pedestrians = {{{8, 0}, -1}};
  cfg.ped_pref_speed = 0.05;
  cfg.ped_max_speed = 0.05;
  ControllerSettings s;
  s.const_speed_target = 1.0;
  const auto recorded = run_trial(cfg, Algorithm::const_speed, s, 1);
  EXPECT_TRUE(recorded.collided);
  EXPECT_TRUE(recorded.success);
  cfg.collision_policy = CollisionPolicy::terminate;
  const auto stopped = run_trial(cfg, Algorithm::const_speed, s, 1);
  EXPECT_TRUE(stopped.collided);
  EXPECT_FALSE(stopped.success);
  EXPECT_EQ(stopped.collision_count, 1);
  EXPECT_LT(stopped.travel_time, recorded.travel_time);
}

TEST(RunTrial, SameSeedSameMetrics) {
  const auto cfg = load_scenario(kScenarios + "s2.json");
  const auto a = run_trial(cfg, Algorithm::reactive, {}, 9);
  const auto b = run_trial(cfg, Algorithm::reactive, {}, 9);
  EXPECT_EQ(a.travel_time, b.travel_time);
  EXPECT_EQ(a.accel_decel_count, b.accel_decel_count);
  EXPECT_EQ(a.collision_count, b.collision_count);
}

TEST(Aggregate, UsesSuccessfulTrialsOnly) {
  std::vector<TrialMetrics> t(4);
  t[0] = {true, 2, 10.0, 4, true, 30, 0, 0, 0};
  t[1] = {false, 0, 20.0, 6, true, 60, 0, 0, 0};
  t[2] = {false, 0, 360.0, 99, false, 1080, 0, 0, 0};
  t[3] = {true, 1, 5.0, 1, false, 15, 0, 0, 0};
  const auto a = aggregate(t);
  EXPECT_EQ(a.successes, 2);
  EXPECT_DOUBLE_EQ(a.success_rate, 0.5);
  EXPECT_DOUBLE_EQ(a.collision_rate, 0.5);
  EXPECT_DOUBLE_EQ(a.mean_travel_time, 15.0);
  EXPECT_DOUBLE_EQ(a.mean_accel_decel, 5.0);
  EXPECT_EQ(metrics_row("s1", "reactive", a), "s1,reactive,4,0.500000,15.000000,5.000000,0.500000");
  EXPECT_EQ(metrics_row("s1", "reactive", aggregate(std::span(t).subspan(2, 2))),
            "s1,reactive,2,,,,0.000000");
}

TEST(TrialLog, RoundTripsToSvg) {
  auto cfg = bare_scenario();
  cfg.pedestrians = {{{8, 3}, 0}};
  std::ostringstream log;
  const auto m = run_trial(cfg, Algorithm::const_speed, {}, 2, &log);
  std::istringstream in(log.str());
  const TrialLog parsed = read_trial_log(in);
  EXPECT_EQ(static_cast<int>(parsed.vehicle.size()), m.steps);
  EXPECT_EQ(parsed.pedestrians.size(), 1u);
  EXPECT_DOUBLE_EQ(parsed.duration, m.travel_time);
  const std::string svg = render_svg(parsed);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg, render_svg(parsed));
  std::istringstream bad("{\"step\": 1}\n");
  EXPECT_THROW(read_trial_log(bad), LogError);
}
