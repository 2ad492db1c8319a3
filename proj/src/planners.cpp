#include "emonav/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "emonav/config.hpp"

namespace emonav {

void DwaParams::validate() const {
  if (v_samples < 2 || dtheta_samples < 2) throw std::invalid_argument("DWA needs >= 2 samples");
  if (horizon_steps < 1) throw std::invalid_argument("DWA horizon must be >= 1");
  if (w_heading < 0.0 || w_clearance < 0.0 || w_velocity < 0.0 ||
      w_heading + w_clearance + w_velocity <= 0.0) {
    throw std::invalid_argument("DWA weights must be >= 0 and not all zero");
  }
  if (!(clearance_cap > 0.0)) throw std::invalid_argument("DWA clearance_cap must be > 0");
  if (checks_per_step < 1) throw std::invalid_argument("DWA checks_per_step must be >= 1");
  if (!(goal_tolerance >= 0.0)) throw std::invalid_argument("DWA goal_tolerance must be >= 0");
}

DwaParams dwa_params_from_json(const nlohmann::json& j, DwaParams p) {
  require_known_keys(j,
                     {"v_samples", "dtheta_samples", "horizon_steps", "w_heading", "w_clearance",
                      "w_velocity", "clearance_cap", "checks_per_step", "goal_tolerance"},
                     "dwa");
  const auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  get("v_samples", p.v_samples);
  get("dtheta_samples", p.dtheta_samples);
  get("horizon_steps", p.horizon_steps);
  get("w_heading", p.w_heading);
  get("w_clearance", p.w_clearance);
  get("w_velocity", p.w_velocity);
  get("clearance_cap", p.clearance_cap);
  get("checks_per_step", p.checks_per_step);
  get("goal_tolerance", p.goal_tolerance);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

nlohmann::json to_json(const DwaParams& p) {
  return {{"v_samples", p.v_samples},         {"dtheta_samples", p.dtheta_samples},
          {"horizon_steps", p.horizon_steps}, {"w_heading", p.w_heading},
          {"w_clearance", p.w_clearance},     {"w_velocity", p.w_velocity},
          {"clearance_cap", p.clearance_cap}, {"checks_per_step", p.checks_per_step},
          {"goal_tolerance", p.goal_tolerance}};
}

DwaScene make_dwa_scene(const World& world, double robot_radius) {
  DwaScene scene;
  scene.robot_radius = robot_radius;
  for (const auto& s : world.statics) scene.obstacles.push_back({s.center, {}, s.radius});
  for (const auto& p : world.pedestrians) {
    scene.obstacles.push_back({p.agent.position, p.agent.velocity, p.agent.radius});
  }
  return scene;
}

std::vector<Action> dwa_candidates(const DwaParams& params, const LipParams& lip) {
  std::vector<Action> out;
  out.reserve(static_cast<std::size_t>(params.v_samples * params.dtheta_samples));
  const int nv = params.v_samples - 1;
  const int nt = params.dtheta_samples - 1;
  for (int i = 0; i <= nv; ++i) {
    const double v = lip.max_speed * i / nv;
    for (int j = 0; j <= nt; ++j) {
      // Symmetric about zero so the middle sample is exactly 0.
      const double turn = lip.max_turn * (2 * j - nt) / nt;
      out.push_back({v, turn});
    }
  }
  return out;
}

namespace {

double clearance_at(Vec2 robot, double t, const DwaScene& scene) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : scene.obstacles) {
    const Vec2 p = o.position + o.velocity * t;
    best = std::min(best, norm(robot - p) - o.radius - scene.robot_radius);
  }
  return best;
}

}  // namespace

Rollout dwa_rollout(const LipState& state, const Action& action, const DwaScene& scene, Vec2 goal,
                    const DwaParams& params, const LipParams& lip) {
  Rollout r;
  r.action = action;
  r.poses.reserve(static_cast<std::size_t>(params.horizon_steps));
  r.min_clearance = std::numeric_limits<double>::infinity();
  LipState s = state;
  for (int k = 0; k < params.horizon_steps && !r.reaches_goal; ++k) {
    const LipState next = propagate_pose(s, action, lip);
    for (int c = 1; c <= params.checks_per_step; ++c) {
      const double frac = static_cast<double>(c) / params.checks_per_step;
      const Vec2 p = s.pose.position + (next.pose.position - s.pose.position) * frac;
      r.min_clearance = std::min(r.min_clearance, clearance_at(p, (k + frac) * lip.step_time, scene));
      if (norm(goal - p) <= params.goal_tolerance) {
        r.reaches_goal = true;
        break;
      }
    }
    s = next;
    r.poses.push_back(s.pose);
  }
  r.terminal_goal_dist = norm(goal - s.pose.position);

  const double heading_error =
      r.reaches_goal ? 0.0 : std::fabs(goal_state(s.pose, goal).bearing);
  const double capped = std::min(r.min_clearance, params.clearance_cap);
  r.cost = params.w_heading * heading_error / std::numbers::pi +
           params.w_clearance * (1.0 - capped / params.clearance_cap) +
           params.w_velocity * (1.0 - action.speed / lip.max_speed);
  r.admissible = r.min_clearance > 0.0;
  return r;
}

bool dwa_better(const Rollout& a, const Rollout& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  const double ta = std::fabs(a.action.turn);
  const double tb = std::fabs(b.action.turn);
  if (ta != tb) return ta < tb;
  if (a.action.speed != b.action.speed) return a.action.speed > b.action.speed;
  return a.action.turn > b.action.turn;
}

namespace {

Action select(const std::vector<Rollout>& rollouts, const LipState& state, Vec2 goal,
              const LipParams& lip) {
  const Rollout* best = nullptr;
  for (const auto& r : rollouts) {
    if (!r.admissible) continue;
    if (best == nullptr || dwa_better(r, *best)) best = &r;
  }
  if (best != nullptr) return best->action;
  const double bearing = goal_state(state.pose, goal).bearing;
  return {0.0, bearing >= 0.0 ? lip.max_turn : -lip.max_turn};
}

}  // namespace

Action dwa_plan(const LipState& state, const DwaScene& scene, Vec2 goal, const DwaParams& params,
                const LipParams& lip) {
  params.validate();
  const auto candidates = dwa_candidates(params, lip);
  std::vector<Rollout> rollouts(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(static) if (n >= 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    rollouts[idx] = dwa_rollout(state, candidates[idx], scene, goal, params, lip);
  }
  return select(rollouts, state, goal, lip);
}

Action dwa_plan_serial(const LipState& state, const DwaScene& scene, Vec2 goal,
                       const DwaParams& params, const LipParams& lip) {
  params.validate();
  std::vector<Rollout> rollouts;
  for (const Action& a : dwa_candidates(params, lip)) {
    rollouts.push_back(dwa_rollout(state, a, scene, goal, params, lip));
  }
  return select(rollouts, state, goal, lip);
}

Action greedy_policy(const LipState& state, Vec2 goal, const LipParams& lip) {
  const double error = goal_state(state.pose, goal).bearing;
  const double turn = std::clamp(error, -lip.max_turn, lip.max_turn);
  const double speed = std::fabs(error) < std::numbers::pi / 4.0 ? lip.max_speed : 0.0;
  return {speed, turn};
}

PolicyFactory dwa_policy_factory(DwaParams params) {
  params.validate();
  return [params]() -> Policy {
    return [params](const Environment& env, const StepResult&) {
      const auto& cfg = env.config();
      const World& world = env.world();
      return dwa_plan(world.robot, make_dwa_scene(world, cfg.r_robot), cfg.robot_goal, params,
                      cfg.lip);
    };
  };
}

PolicyFactory greedy_policy_factory() {
  return []() -> Policy {
    return [](const Environment& env, const StepResult&) {
      return greedy_policy(env.world().robot, env.config().robot_goal, env.config().lip);
    };
  };
}

}  // namespace emonav
