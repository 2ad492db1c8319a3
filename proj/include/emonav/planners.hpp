#pragma once

#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "emonav/env.hpp"
#include "emonav/lip.hpp"

namespace emonav {

struct DwaParams {
  int v_samples = 9;
  int dtheta_samples = 11;
  int horizon_steps = 5;
  double w_heading = 1.0;
  double w_clearance = 2.0;
  double w_velocity = 1.5;
  double clearance_cap = 1.0;   // m
  int checks_per_step = 4;      // clearance checks along each walking step
  double goal_tolerance = 0.1;  // m, a rollout reaching the goal stops there

  void validate() const;
};

DwaParams dwa_params_from_json(const nlohmann::json& j, DwaParams base = {});
nlohmann::json to_json(const DwaParams& p);

/// Disk predicted to move at constant velocity.
struct MovingDisk {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.0;
};

struct DwaScene {
  std::vector<MovingDisk> obstacles;
  double robot_radius = 0.3;
};

DwaScene make_dwa_scene(const World& world, double robot_radius);

struct Rollout {
  Action action;
  std::vector<Pose> poses;         // end of each walking step
  double min_clearance = 0.0;      // smallest gap between robot and obstacle disks
  double terminal_goal_dist = 0.0;
  bool reaches_goal = false;
  double cost = 0.0;
  bool admissible = false;
};

/// The sampled action grid, v-major: v in [0, vmax], turn in [-tmax, tmax].
std::vector<Action> dwa_candidates(const DwaParams& params, const LipParams& lip);

/// Holds `action` for the horizon and scores it.
Rollout dwa_rollout(const LipState& state, const Action& action, const DwaScene& scene, Vec2 goal,
                    const DwaParams& params, const LipParams& lip);

/// True if `a` should be preferred to `b` (lower cost, then smaller |turn|,
/// then larger speed, then positive turn).
bool dwa_better(const Rollout& a, const Rollout& b);

/// Best admissible candidate; with none admissible, stop and turn toward the
/// goal at the turn bound.
Action dwa_plan(const LipState& state, const DwaScene& scene, Vec2 goal, const DwaParams& params,
                const LipParams& lip);

/// Single-threaded reference for dwa_plan; results are identical.
Action dwa_plan_serial(const LipState& state, const DwaScene& scene, Vec2 goal,
                       const DwaParams& params, const LipParams& lip);

/// Turn toward the goal (clipped), full speed when within pi/4 of it.
Action greedy_policy(const LipState& state, Vec2 goal, const LipParams& lip);

/// Action source for an episode; called once per walking step.
using Policy = std::function<Action(const Environment& env, const StepResult& last)>;
using PolicyFactory = std::function<Policy()>;

PolicyFactory dwa_policy_factory(DwaParams params);
PolicyFactory greedy_policy_factory();

}  // namespace emonav
