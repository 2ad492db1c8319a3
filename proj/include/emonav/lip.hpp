#pragma once

#include <cstdint>
#include <random>

#include "emonav/geometry.hpp"

namespace emonav {

/// Linear-inverted-pendulum walker parameters. Defaults are the Digit set-up.
struct LipParams {
  double step_time = 0.4;       // T, seconds per walking step
  double com_height = 1.02;     // H, meters
  double gravity = 9.81;        // g, m/s^2
  double max_speed = 0.4;       // sagittal speed bound, m/s
  double max_turn = 0.2;        // per-step heading increment bound, rad

  double omega() const { return std::sqrt(gravity / com_height); }
  void validate() const;
};

struct Action {
  double speed = 0.0;  // commanded sagittal speed at the next switch instant
  double turn = 0.0;   // heading increment, rad
  bool operator==(const Action&) const = default;
};

struct LipState {
  Pose pose;
  double sagittal_speed = 0.0;  // CoM speed at the step-switch instant
  bool operator==(const LipState&) const = default;
};

struct StepOutcome {
  double foot_offset = 0.0;  // sagittal foot distance relative to the CoM
  double com_advance = 0.0;  // sagittal CoM increment over the step
};

/// Clips a raw command into the admissible box [0, vmax] x [-turn, turn].
/// Throws std::invalid_argument on non-finite input.
Action clamp_action(double speed, double turn, const LipParams& params);

/// One sagittal LIP transition between switch instants.
StepOutcome lip_step(double sagittal_speed, double commanded_speed, const LipParams& params);

/// Turns by action.turn, then advances along the new heading by the LIP
/// increment. The successor sagittal speed is the commanded speed.
LipState propagate_pose(const LipState& state, const Action& action, const LipParams& params);

/// Opt-in stand-in for full-body tracking error. Off by default and never
/// part of the benchmark numbers.
struct PerturbationModel {
  bool enabled = false;
  double heading_lag = 0.0;        // fraction of the commanded turn not realized, [0, 1]
  double heading_noise_std = 0.0;  // rad
  double lateral_noise_std = 0.0;  // m
  std::uint64_t seed = 0;

  void validate() const;
};

class Perturber {
 public:
  explicit Perturber(const PerturbationModel& model);

  /// Degrades `commanded` (the ROM successor of `previous`). Identity when the
  /// model is disabled.
  LipState apply(const LipState& previous, const LipState& commanded);

 private:
  PerturbationModel model_;
  std::mt19937_64 rng_;
};

}  // namespace emonav
