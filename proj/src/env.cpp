#include "emonav/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "emonav/lidar.hpp"

namespace emonav {

std::vector<CircleEntity> World::entities() const {
  std::vector<CircleEntity> out;
  out.reserve(statics.size() + pedestrians.size());
  out.insert(out.end(), statics.begin(), statics.end());
  for (const auto& p : pedestrians) {
    out.push_back({EntityKind::Pedestrian, p.agent.position, p.agent.radius, p.emotion});
  }
  return out;
}

CircleEntity World::robot_disk(double robot_radius) const {
  return {EntityKind::Robot, robot.pose.position, robot_radius, std::nullopt};
}

GoalState goal_state(const Pose& robot, Vec2 goal) {
  const Vec2 d = goal - robot.position;
  GoalState g;
  g.distance = norm(d);
  g.bearing = g.distance > 0.0 ? wrap_angle(std::atan2(d.y, d.x) - robot.heading) : 0.0;
  return g;
}

RewardBreakdown compute_reward(double prev_goal_distance, const CircleEntity& robot,
                               std::span<const CircleEntity> entities, Vec2 goal,
                               const EmotionProfile& profile, const RewardParams& params) {
  const MarginDistances md = min_margin_distances(robot, entities);
  const double r = params.robot_radius;
  RewardBreakdown out;

  const bool collided = md.all_min <= r;
  if (collided) {
    out.collision = params.collision_penalty;
  } else if (md.static_min < profile.static_margin + r) {
    out.collision = params.discomfort_penalty;
  }

  const double d_goal = norm(goal - robot.center);
  out.goal = d_goal <= params.goal_tolerance ? params.goal_reward
                                             : params.progress_gain * (prev_goal_distance - d_goal);

  bool pedestrian_discomfort = false;
  for (const auto& e : entities) {
    if (e.kind != EntityKind::Pedestrian) continue;
    const double d = norm(e.center - robot.center) - e.radius;
    if (d < profile.discomfort_distance(e) + r) {
      pedestrian_discomfort = true;
      break;
    }
  }
  if (pedestrian_discomfort && !collided) {
    if (out.collision == params.discomfort_penalty) {
      out.discomfort_counted_once = true;
    } else {
      out.emotion = params.discomfort_penalty;
    }
  }
  out.total = out.collision + out.goal + out.emotion;
  return out;
}

IdtSlot idt_slot(const CircleEntity& e) {
  if (e.kind != EntityKind::Pedestrian) return IdtSlot::Static;
  switch (e.emotion.value()) {
    case Emotion::Happy:
      return IdtSlot::Happy;
    case Emotion::Neutral:
      return IdtSlot::Neutral;
    case Emotion::Negative:
      return IdtSlot::Negative;
  }
  return IdtSlot::Static;
}

std::optional<IdtSlot> discomfort_intrusion(const CircleEntity& robot,
                                            std::span<const CircleEntity> entities,
                                            const EmotionProfile& profile, double robot_radius) {
  std::optional<IdtSlot> slot;
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& e : entities) {
    if (e.kind == EntityKind::Robot) continue;
    const double d = norm(e.center - robot.center) - e.radius;
    if (d < profile.discomfort_distance(e) + robot_radius && d < nearest) {
      nearest = d;
      slot = idt_slot(e);
    }
  }
  return slot;
}

Emotion scheduled_emotion(Emotion start, double period, double sim_time) {
  // Tolerance keeps boundaries exact when time accumulates from substeps.
  const auto k = static_cast<long long>(std::floor(sim_time / period + 1e-9));
  const long long idx = (static_cast<long long>(start) + k) % 3;
  return static_cast<Emotion>(idx);
}

void advance_emotions(const EmotionSchedule& schedule, double sim_time,
                      std::vector<Pedestrian>& pedestrians) {
  if (schedule.mode != EmotionMode::Alternating) return;
  if (schedule.designated < 0 ||
      static_cast<std::size_t>(schedule.designated) >= pedestrians.size()) {
    return;
  }
  pedestrians[static_cast<std::size_t>(schedule.designated)].emotion =
      scheduled_emotion(schedule.start, schedule.period, sim_time);
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

std::string to_string(DoneState d) {
  switch (d) {
    case DoneState::Running:
      return "running";
    case DoneState::Goal:
      return "goal";
    case DoneState::Collision:
      return "collision";
    case DoneState::Timeout:
      return "timeout";
  }
  return "unknown";
}

DoneState done_from_string(const std::string& s) {
  if (s == "running") return DoneState::Running;
  if (s == "goal") return DoneState::Goal;
  if (s == "collision") return DoneState::Collision;
  if (s == "timeout") return DoneState::Timeout;
  throw std::invalid_argument("unknown done state: " + s);
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  config_hash_ = config_hash(to_json(config_));
}

RewardParams Environment::reward_params() const {
  RewardParams p;
  p.robot_radius = config_.r_robot;
  p.goal_tolerance = config_.d_goal;
  return p;
}

namespace {

constexpr int kMaxAttempts = 10000;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

void Environment::sample_scene(std::uint64_t seed) {
  const EnvConfig& c = config_;
  std::mt19937_64 rng(seed);
  world_ = World{};
  int attempts = 0;
  const auto spend_attempt = [&](const char* what) {
    if (++attempts > kMaxAttempts) {
      throw ConfigError(std::string("scene infeasible: could not place ") + what + " within " +
                        std::to_string(kMaxAttempts) + " attempts");
    }
  };
  const auto near_robot_endpoints = [&](Vec2 p, double radius) {
    const double keep_out = radius + c.r_robot + c.spawn_clearance;
    return norm(p - c.robot_start) < keep_out || norm(p - c.robot_goal) < keep_out;
  };

  while (static_cast<int>(world_.statics.size()) < c.n_statics) {
    spend_attempt("static obstacles");
    const Vec2 center{uniform(rng, c.static_region.x_min, c.static_region.x_max),
                      uniform(rng, c.static_region.y_min, c.static_region.y_max)};
    const double radius = uniform(rng, c.static_radius_range.lo, c.static_radius_range.hi);
    if (near_robot_endpoints(center, radius)) continue;
    const bool overlaps = std::any_of(world_.statics.begin(), world_.statics.end(),
                                      [&](const CircleEntity& s) {
                                        return norm(s.center - center) < s.radius + radius;
                                      });
    if (overlaps) continue;
    world_.statics.push_back(make_static(center, radius));
  }

  attempts = 0;
  const double max_speed = c.ped_pref_speed * c.ped_max_speed_factor;
  while (static_cast<int>(world_.pedestrians.size()) < c.n_pedestrians) {
    spend_attempt("pedestrians");
    const double ring = uniform(rng, c.ped_circle_radius_range.lo, c.ped_circle_radius_range.hi);
    const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const Vec2 start = ring * unit_from_angle(angle);
    const Vec2 goal = -start;
    if (near_robot_endpoints(start, c.r_ped) || near_robot_endpoints(goal, c.r_ped)) continue;
    const bool hits_static = std::any_of(
        world_.statics.begin(), world_.statics.end(), [&](const CircleEntity& s) {
          return norm(s.center - start) < s.radius + c.r_ped + c.ped_spacing;
        });
    if (hits_static) continue;
    const bool crowded = std::any_of(
        world_.pedestrians.begin(), world_.pedestrians.end(), [&](const Pedestrian& p) {
          return norm(p.agent.position - start) < 2.0 * c.r_ped + c.ped_spacing;
        });
    if (crowded) continue;
    Pedestrian p;
    p.agent.position = start;
    p.agent.velocity = {};
    p.agent.radius = c.r_ped;
    p.agent.pref_speed = c.ped_pref_speed;
    p.agent.max_speed = max_speed;
    p.agent.goal = goal;
    p.agent.home = start;
    world_.pedestrians.push_back(p);
  }

  std::uniform_int_distribution<int> pick(0, 2);
  for (auto& p : world_.pedestrians) p.emotion = static_cast<Emotion>(pick(rng));
  if (c.emotion_mode.mode == EmotionMode::Alternating) {
    advance_emotions(c.emotion_mode, 0.0, world_.pedestrians);
  }

  world_.robot.pose.position = c.robot_start;
  const Vec2 to_goal = c.robot_goal - c.robot_start;
  world_.robot.pose.heading = std::atan2(to_goal.y, to_goal.x);
  world_.robot.sagittal_speed = 0.0;
  world_.robot_velocity = {};
  world_.time = 0.0;
}

GridFrame Environment::observe() const {
  const Pose& pose = world_.robot.pose;
  // A disk swallowing the sensor (only possible in a terminal collision state)
  // is dropped from the cast and shows up as a solid innermost ring.
  bool swallowed = false;
  std::vector<CircleEntity> world_entities;
  for (const auto& e : world_.entities()) {
    if (norm(e.center - pose.position) < e.radius) {
      swallowed = true;
    } else {
      world_entities.push_back(e);
    }
  }
  std::vector<CircleEntity> ego;
  ego.reserve(world_entities.size());
  for (const auto& e : world_entities) ego.push_back(to_ego_frame(pose, e));
  GridFrame frame;
  if (config_.observation == GridLayout::Lgm) {
    const LidarScan scan = ray_cast(pose, world_entities, config_.grid.scan_spec());
    frame = build_lgm(scan, ego, config_.discomfort, config_.grid);
    if (swallowed) {
      std::fill_n(frame.cells.begin(), config_.grid.size, CellClass::Collision);
    }
  } else {
    frame = build_ogm(ego, config_.discomfort, config_.grid);
  }
  frame.frame_index = step_count_;
  return frame;
}

StepInfo Environment::measure() const {
  StepInfo info;
  info.step = step_count_;
  info.time = world_.time;
  const CircleEntity robot = world_.robot_disk(config_.r_robot);
  const auto entities = world_.entities();
  const MarginDistances md = min_margin_distances(robot, entities);
  info.d_all_min = md.all_min;
  info.d_static_min = md.static_min;
  info.pedestrian_margins = md.per_pedestrian;
  info.static_intrusion = md.static_min < config_.discomfort.static_margin + config_.r_robot;
  for (std::size_t i = 0; i < world_.pedestrians.size(); ++i) {
    const double limit =
        config_.discomfort.discomfort.at(world_.pedestrians[i].emotion) + config_.r_robot;
    info.pedestrian_intrusions.push_back(md.per_pedestrian[i] < limit);
  }
  info.intrusion = discomfort_intrusion(robot, entities, config_.discomfort, config_.r_robot);
  return info;
}

StepResult Environment::make_result(const RewardBreakdown& reward, const StepInfo& info) {
  StepResult r;
  r.observation = stack_frames(std::vector<GridFrame>(history_.begin(), history_.end()),
                               config_.grid);
  r.goal = goal_state(world_.robot.pose, config_.robot_goal);
  r.last_action = last_action_;
  r.reward = reward;
  r.done = done_;
  r.info = info;
  return r;
}

TraceRow Environment::snapshot(const StepResult& r) const {
  TraceRow row;
  row.step = step_count_;
  row.time = world_.time;
  row.robot = world_.robot.pose;
  row.sagittal_speed = world_.robot.sagittal_speed;
  row.action = last_action_;
  for (const auto& p : world_.pedestrians) {
    row.pedestrian_positions.push_back(p.agent.position);
    row.pedestrian_velocities.push_back(p.agent.velocity);
    row.pedestrian_emotions.push_back(p.emotion);
  }
  row.reward = r.reward;
  row.done = r.done;
  row.intrusion = r.info.intrusion;
  return row;
}

StepResult Environment::reset(std::uint64_t seed) {
  sample_scene(seed);
  perturber_.reset();
  if (config_.perturbation.enabled) {
    PerturbationModel model = config_.perturbation;
    model.seed ^= seed * 0x9E3779B97F4A7C15ULL;
    perturber_.emplace(model);
  }
  last_action_ = {};
  step_count_ = 0;
  substep_count_ = 0;
  done_ = DoneState::Running;
  reset_done_ = true;
  history_.clear();
  history_.push_back(observe());

  trace_ = EpisodeTrace{};
  trace_.seed = seed;
  trace_.config_hash = config_hash_;
  trace_.goal = config_.robot_goal;
  trace_.statics = world_.statics;

  StepResult r = make_result(RewardBreakdown{}, measure());
  trace_.initial = snapshot(r);
  return r;
}

StepResult Environment::step(double speed, double turn) {
  if (!reset_done_) throw EnvError("not_reset");
  if (done_ != DoneState::Running) throw EnvError("episode_done");
  const Action action = clamp_action(speed, turn, config_.lip);

  const LipState before = world_.robot;
  LipState after = propagate_pose(before, action, config_.lip);
  if (perturber_) after = perturber_->apply(before, after);

  const double step_time = config_.lip.step_time;
  const Vec2 displacement = after.pose.position - before.pose.position;
  const Vec2 robot_velocity = displacement / step_time;
  const double prev_goal_distance = norm(config_.robot_goal - before.pose.position);
  const int substeps = static_cast<int>(std::lround(step_time / config_.orca.dt));

  std::vector<OrcaAgent> agents;
  agents.reserve(world_.pedestrians.size());
  for (const auto& p : world_.pedestrians) agents.push_back(p.agent);

  bool collided = false;
  bool arrived = false;
  for (int s = 1; s <= substeps; ++s) {
    OrcaAgent robot_agent;
    robot_agent.position =
        before.pose.position + displacement * (static_cast<double>(s - 1) / substeps);
    robot_agent.velocity = robot_velocity;
    robot_agent.radius = config_.r_robot;
    CrowdSnapshot crowd;
    crowd.pedestrians = agents;
    crowd.robot = &robot_agent;
    crowd.robot_speed = action.speed;
    crowd.statics = world_.statics;
    agents = step_pedestrians(crowd, config_.orca);
    for (std::size_t i = 0; i < agents.size(); ++i) world_.pedestrians[i].agent = agents[i];

    ++substep_count_;
    world_.time = static_cast<double>(substep_count_) * config_.orca.dt;
    advance_emotions(config_.emotion_mode, world_.time, world_.pedestrians);

    if (s == substeps) {
      world_.robot = after;
    } else {
      world_.robot.pose.position =
          before.pose.position + displacement * (static_cast<double>(s) / substeps);
      world_.robot.pose.heading = after.pose.heading;
      world_.robot.sagittal_speed = after.sagittal_speed;
    }
    world_.robot_velocity = robot_velocity;

    const CircleEntity robot = world_.robot_disk(config_.r_robot);
    const auto entities = world_.entities();
    collided = min_margin_distances(robot, entities).all_min <= config_.r_robot;
    arrived = norm(config_.robot_goal - robot.center) <= config_.d_goal;
    if (collided || arrived) break;
  }

  ++step_count_;
  last_action_ = action;
  const CircleEntity robot = world_.robot_disk(config_.r_robot);
  const auto entities = world_.entities();
  const RewardBreakdown reward =
      compute_reward(prev_goal_distance, robot, entities, config_.robot_goal, config_.discomfort,
                     reward_params());

  if (collided) {
    done_ = DoneState::Collision;
  } else if (arrived) {
    done_ = DoneState::Goal;
  } else if (step_count_ >= config_.timeout_steps) {
    done_ = DoneState::Timeout;
  }

  history_.push_back(observe());
  while (history_.size() > static_cast<std::size_t>(config_.grid.stack_depth)) {
    history_.pop_front();
  }
  StepResult r = make_result(reward, measure());
  trace_.rows.push_back(snapshot(r));
  return r;
}

}  // namespace emonav
