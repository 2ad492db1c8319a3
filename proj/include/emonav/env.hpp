#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "emonav/config.hpp"
#include "emonav/geometry.hpp"
#include "emonav/grid.hpp"
#include "emonav/lip.hpp"
#include "emonav/orca.hpp"

namespace emonav {

struct Pedestrian {
  OrcaAgent agent;
  Emotion emotion = Emotion::Neutral;
};

/// Everything that moves or can be hit, at one instant.
struct World {
  LipState robot;
  Vec2 robot_velocity;  // world-frame, averaged over the last walking step
  std::vector<CircleEntity> statics;
  std::vector<Pedestrian> pedestrians;
  double time = 0.0;  // s since reset

  /// Statics followed by pedestrian disks (with emotions), world frame.
  std::vector<CircleEntity> entities() const;
  CircleEntity robot_disk(double robot_radius) const;
};

struct GoalState {
  double distance = 0.0;  // m
  double bearing = 0.0;   // rad, goal direction in the robot frame, (-pi, pi]
};

GoalState goal_state(const Pose& robot, Vec2 goal);

struct RewardBreakdown {
  double collision = 0.0;  // 0, -0.1 (static discomfort) or -0.6
  double goal = 0.0;       // +0.5 on arrival, else progress 0.3 * (d_prev - d)
  double emotion = 0.0;    // 0 or -0.1
  bool discomfort_counted_once = false;
  double total = 0.0;
  bool operator==(const RewardBreakdown&) const = default;
};

struct RewardParams {
  double robot_radius = 0.3;
  double goal_tolerance = 0.1;
  double collision_penalty = -0.6;
  double discomfort_penalty = -0.1;
  double goal_reward = 0.5;
  double progress_gain = 0.3;
};

/// Per-step reward. When the static-discomfort branch and the pedestrian
/// discomfort condition both hold, the -0.1 enters the total once (it stays in
/// `collision`; `emotion` is zeroed). A collision step carries no separate
/// discomfort penalty.
RewardBreakdown compute_reward(double prev_goal_distance, const CircleEntity& robot,
                               std::span<const CircleEntity> entities, Vec2 goal,
                               const EmotionProfile& profile, const RewardParams& params);

/// Slots of the per-entity discomfort tally: static, happy, neutral, negative.
enum class IdtSlot { Static = 0, Happy = 1, Neutral = 2, Negative = 3 };
IdtSlot idt_slot(const CircleEntity& e);

/// The discomfort zone the robot is in, attributed to the nearest intruded
/// entity (smallest margin distance); nullopt when in none.
std::optional<IdtSlot> discomfort_intrusion(const CircleEntity& robot,
                                            std::span<const CircleEntity> entities,
                                            const EmotionProfile& profile, double robot_radius);

/// Emotion of the cycling pedestrian at `sim_time`: starts at `start` and
/// advances Happy -> Neutral -> Negative -> Happy every period.
Emotion scheduled_emotion(Emotion start, double period, double sim_time);

/// Applies the emotion schedule to every pedestrian at `sim_time`. Identity
/// in FixedRandom mode.
void advance_emotions(const EmotionSchedule& schedule, double sim_time,
                      std::vector<Pedestrian>& pedestrians);

/// Sum of gamma^k * r_k.
double discounted_return(std::span<const double> rewards, double gamma = 0.99);

enum class DoneState { Running, Goal, Collision, Timeout };
std::string to_string(DoneState d);
DoneState done_from_string(const std::string& s);

struct StepInfo {
  int step = 0;
  double time = 0.0;
  double d_all_min = 0.0;
  double d_static_min = 0.0;
  std::vector<double> pedestrian_margins;
  std::vector<bool> pedestrian_intrusions;  // robot inside pedestrian i's discomfort zone
  bool static_intrusion = false;
  std::optional<IdtSlot> intrusion;  // nearest-entity attribution
};

struct StepResult {
  GridObservation observation;
  GoalState goal;
  Action last_action;
  RewardBreakdown reward;
  DoneState done = DoneState::Running;
  StepInfo info;
};

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One row of an episode trace: the state after a step.
struct TraceRow {
  int step = 0;
  double time = 0.0;
  Pose robot;
  double sagittal_speed = 0.0;
  Action action;
  std::vector<Vec2> pedestrian_positions;
  std::vector<Vec2> pedestrian_velocities;
  std::vector<Emotion> pedestrian_emotions;
  RewardBreakdown reward;
  DoneState done = DoneState::Running;
  std::optional<IdtSlot> intrusion;
  bool operator==(const TraceRow&) const = default;
};

struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::string config_hash;
  Vec2 goal;
  std::vector<CircleEntity> statics;
  TraceRow initial;  // state at reset, step 0
  std::vector<TraceRow> rows;
  bool operator==(const EpisodeTrace&) const = default;
};

/// Episode state machine: reset, then step until done.
class Environment {
 public:
  explicit Environment(EnvConfig config);

  StepResult reset(std::uint64_t seed);
  StepResult step(double speed, double turn);

  const EnvConfig& config() const { return config_; }
  const World& world() const { return world_; }
  const EpisodeTrace& trace() const { return trace_; }
  bool is_reset() const { return reset_done_; }
  DoneState done() const { return done_; }
  int step_count() const { return step_count_; }
  RewardParams reward_params() const;

 private:
  void sample_scene(std::uint64_t seed);
  GridFrame observe() const;
  StepResult make_result(const RewardBreakdown& reward, const StepInfo& info);
  StepInfo measure() const;
  TraceRow snapshot(const StepResult& r) const;

  EnvConfig config_;
  std::string config_hash_;
  World world_;
  std::optional<Perturber> perturber_;
  std::deque<GridFrame> history_;
  Action last_action_;
  int step_count_ = 0;
  std::int64_t substep_count_ = 0;
  DoneState done_ = DoneState::Running;
  bool reset_done_ = false;
  EpisodeTrace trace_;
};

}  // namespace emonav
