// Batch front end: simulation benchmarks, prediction scoring, log rendering.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "porca/overrides.hpp"
#include "porca/predict.hpp"
#include "porca/replay.hpp"
#include "porca/scenario.hpp"
#include "porca/trial.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Bad input the user can fix by changing the command line or config.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes `content` next to `path` and renames it into place, so readers never
/// see a half-written file. "-" means stdout.
void write_atomically(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::ios_base::failure("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

/// Planner settings for batch runs. A fixed expansion cap replaces the
/// wall-clock limit so that results do not depend on machine load.
porca::ControllerSettings batch_defaults() {
  porca::ControllerSettings s;
  s.pomdp.scenario_count = 100;
  s.pomdp.search_depth = 10;
  s.pomdp.max_expansions = 100;
  s.pomdp.planning_budget = 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string scenario;
  std::string algo;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::vector<std::string> overrides;
  std::optional<double> budget_ms;
  std::string log_dir;
  bool svg = false;
  unsigned jobs = 0;
};

nlohmann::json manifest_json(const SimulateArgs& a) {
  nlohmann::json m;
  m["command"] = "simulate";
  m["scenario"] = a.scenario;
  m["algorithm"] = a.algo;
  m["trials"] = a.trials;
  m["seed"] = a.seed;
  m["out"] = a.out;
  m["overrides"] = a.overrides;
  if (a.budget_ms) m["budget_ms"] = *a.budget_ms;
  return m;
}

int run_simulate(const SimulateArgs& a) {
  const auto algo = porca::parse_algorithm(a.algo);
  if (!algo) {
    throw UsageError("unknown algorithm '" + a.algo +
                     "' (expected porca-pomdp, prefvel-pomdp, reactive or const-speed)");
  }
  if (!fs::exists(a.scenario)) throw UsageError("unknown scenario file: " + a.scenario);

  porca::RunSettings run{porca::load_scenario(a.scenario), batch_defaults()};
  for (const auto& o : a.overrides) porca::apply_override(run, o);
  if (a.budget_ms) {
    if (!(*a.budget_ms > 0.0)) throw UsageError("--budget-ms must be positive");
    run.controller.pomdp.planning_budget = *a.budget_ms / 1000.0;
    run.controller.pomdp.max_expansions = 0;
  }
  porca::validate(run.scenario);
  porca::validate(run.controller);

  if (!a.log_dir.empty()) {
    fs::create_directories(a.log_dir);
    write_atomically((fs::path(a.log_dir) / "manifest.json").string(),
                     manifest_json(a).dump(2) + "\n");
  }

  // Trials are independent; workers claim indices and results land in order.
  std::vector<porca::TrialMetrics> results(static_cast<std::size_t>(a.trials));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < a.trials; i = next++) {
      try {
        const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
        std::ostringstream log;
        const bool logging = !a.log_dir.empty();
        results[static_cast<std::size_t>(i)] =
            porca::run_trial(run.scenario, *algo, run.controller, seed, logging ? &log : nullptr);
        if (logging) {
          const auto stem = fs::path(a.log_dir) / ("trial_" + std::to_string(i));
          write_atomically(stem.string() + ".jsonl", log.str());
          if (a.svg) {
            std::istringstream in(log.str());
            write_atomically(stem.string() + ".svg", porca::render_svg(porca::read_trial_log(in)));
          }
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = a.trials;
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(a.jobs ? a.jobs : std::thread::hardware_concurrency(),
                                                        static_cast<unsigned>(a.trials)));
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  const auto agg = porca::aggregate(results);
  std::string csv(porca::kMetricsHeader);
  csv += '\n';
  csv += porca::metrics_row(run.scenario.name, a.algo, agg);
  csv += '\n';
  write_atomically(a.out, csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string input;
  std::string goals;
  std::string out = "-";
  std::vector<std::string> models = {"ConstVel", "PrefVel", "ORCA", "PORCA"};
  double threshold = 0.4;
  double horizon = 3.0;
  double frame_interval = 0.33;
};

inline constexpr const char* kPredictHeader =
    "model,windows,successes,success_rate,skipped,trajectories,trajectory_successes,"
    "trajectory_success_rate";

int run_predict(const PredictArgs& a) {
  std::vector<porca::PredictionModel> models;
  for (const auto& name : a.models) {
    const auto m = porca::parse_model(name);
    if (!m) throw UsageError("unknown model '" + name + "' (expected ConstVel, PrefVel, ORCA, PORCA)");
    models.push_back(*m);
  }
  if (!(a.threshold > 0.0)) throw UsageError("--threshold must be positive");
  if (!(a.frame_interval > 0.0)) throw UsageError("--frame-interval must be positive");
  porca::EvalParams p;
  p.threshold = a.threshold;
  p.horizon = a.horizon;
  try {
    (void)porca::horizon_frames(p, a.frame_interval);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  const auto ds = porca::load_trajectories(
      a.input, a.goals.empty() ? std::nullopt : std::optional<std::string>(a.goals),
      a.frame_interval);

  std::string csv = std::string(kPredictHeader) + "\n";
  for (const auto m : models) {
    const auto s = porca::evaluate_model(ds, m, p);
    csv += std::string(porca::model_name(m)) + ',' + std::to_string(s.windows) + ',' +
           std::to_string(s.successes) + ',' + format_real(s.success_rate()) + ',' +
           std::to_string(s.skipped) + ',' + std::to_string(s.trajectories) + ',' +
           std::to_string(s.trajectory_successes) + ',' + format_real(s.trajectory_rate()) + '\n';
  }
  write_atomically(a.out, csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// replay and generate

int run_replay(const std::string& log_file, const std::string& out) {
  std::ifstream in(log_file);
  if (!in) throw std::ios_base::failure("cannot open log file: " + log_file);
  write_atomically(out, porca::render_svg(porca::read_trial_log(in)));
  return kExitOk;
}

struct GenerateArgs {
  std::string out;
  std::string goals_out;
  std::uint64_t seed = 0;
  porca::SyntheticParams params;
};

int run_generate(const GenerateArgs& a) {
  if (a.params.pedestrians < 1 || a.params.per_scene < 1 || a.params.frames < 2)
    throw UsageError("--pedestrians, --per-scene must be >= 1 and --frames >= 2");
  if (a.params.noise < 0.0) throw UsageError("--noise must be >= 0");
  const auto ds = porca::generate_porca_dataset(a.params, a.seed);
  std::ostringstream traj, goals;
  porca::write_trajectories(traj, ds);
  porca::write_goals(goals, ds);
  write_atomically(a.out, traj.str());
  write_atomically(a.goals_out, goals.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowd navigation benchmarks and pedestrian-prediction scoring"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run seeded closed-loop trials and write a metrics CSV");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON file")->required();
  simulate->add_option("--algo", sim.algo, "porca-pomdp | prefvel-pomdp | reactive | const-speed")
      ->required();
  simulate->add_option("--trials", sim.trials, "Number of trials (>= 1)")
      ->check(CLI::Range(1, 1000000));
  simulate->add_option("--seed", sim.seed, "Base seed; trial i uses seed + i");
  simulate->add_option("--out", sim.out, "Metrics CSV path ('-' for stdout)");
  simulate->add_option("--set", sim.overrides, "Parameter override key=value (repeatable)")
      ->take_all();
  simulate->add_option("--budget-ms", sim.budget_ms,
                       "Wall-clock planning budget per step; replaces the expansion cap");
  simulate->add_option("--log-dir", sim.log_dir, "Directory for per-trial JSONL logs");
  simulate->add_flag("--svg", sim.svg, "Also render one SVG per trial into --log-dir");
  simulate->add_option("--jobs", sim.jobs, "Worker threads (default: all cores)");

  PredictArgs pred;
  auto* predict = app.add_subcommand("predict", "Score motion models on recorded trajectories");
  predict->add_option("input", pred.input, "Trajectory CSV (ped_id,frame,x,y)")->required();
  predict->add_option("--goals", pred.goals, "Goal CSV (ped_id,goal_x,goal_y)");
  predict->add_option("--out", pred.out, "Results CSV path ('-' for stdout)");
  predict->add_option("--models", pred.models, "Subset of ConstVel PrefVel ORCA PORCA")
      ->delimiter(',');
  predict->add_option("--threshold", pred.threshold, "Success distance in metres")->capture_default_str();
  predict->add_option("--horizon", pred.horizon, "Prediction horizon in seconds")->capture_default_str();
  predict->add_option("--frame-interval", pred.frame_interval, "Seconds between frames")->capture_default_str();

  std::string replay_log, replay_out = "-";
  auto* replay = app.add_subcommand("replay", "Render a trial log as SVG");
  replay->add_option("log", replay_log, "JSONL trial log")->required();
  replay->add_option("--out", replay_out, "SVG path ('-' for stdout)");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write synthetic PORCA trajectories and goals");
  generate->add_option("--out", gen.out, "Trajectory CSV path")->required();
  generate->add_option("--goals-out", gen.goals_out, "Goal CSV path")->required();
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--pedestrians", gen.params.pedestrians, "Number of trajectories")->capture_default_str();
  generate->add_option("--per-scene", gen.params.per_scene, "Pedestrians sharing a scene")->capture_default_str();
  generate->add_option("--frames", gen.params.frames, "Frames per scene")->capture_default_str();
  generate->add_option("--noise", gen.params.noise, "Observation noise sigma in metres")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*predict) return run_predict(pred);
    if (*replay) return run_replay(replay_log, replay_out);
    if (*generate) return run_generate(gen);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const porca::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const porca::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const porca::LogError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
