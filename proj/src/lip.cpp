#include "emonav/lip.hpp"

#include <algorithm>
#include <stdexcept>

namespace emonav {

void LipParams::validate() const {
  if (!(step_time > 0.0) || !(com_height > 0.0) || !(gravity > 0.0)) {
    throw std::invalid_argument("LIP step_time, com_height and gravity must be positive");
  }
  if (!(max_speed > 0.0) || !(max_turn > 0.0)) {
    throw std::invalid_argument("LIP action bounds must be positive");
  }
}

Action clamp_action(double speed, double turn, const LipParams& params) {
  if (!std::isfinite(speed) || !std::isfinite(turn)) {
    throw std::invalid_argument("action components must be finite");
  }
  return {std::clamp(speed, 0.0, params.max_speed),
          std::clamp(turn, -params.max_turn, params.max_turn)};
}

StepOutcome lip_step(double sagittal_speed, double commanded_speed, const LipParams& params) {
  const double w = params.omega();
  const double ch = std::cosh(w * params.step_time);
  const double sh = std::sinh(w * params.step_time);
  StepOutcome out;
  out.foot_offset = (sagittal_speed * ch - commanded_speed) / (w * sh);
  out.com_advance = sagittal_speed * sh / w + out.foot_offset * (1.0 - ch);
  return out;
}

LipState propagate_pose(const LipState& state, const Action& action, const LipParams& params) {
  const StepOutcome step = lip_step(state.sagittal_speed, action.speed, params);
  LipState next;
  next.pose.heading = wrap_angle(state.pose.heading + action.turn);
  next.pose.position = state.pose.position + step.com_advance * unit_from_angle(next.pose.heading);
  next.sagittal_speed = action.speed;
  return next;
}

void PerturbationModel::validate() const {
  if (heading_lag < 0.0 || heading_lag > 1.0) {
    throw std::invalid_argument("heading_lag must lie in [0, 1]");
  }
  if (heading_noise_std < 0.0 || lateral_noise_std < 0.0) {
    throw std::invalid_argument("perturbation noise std must be >= 0");
  }
}

Perturber::Perturber(const PerturbationModel& model) : model_(model), rng_(model.seed) {
  model_.validate();
}

LipState Perturber::apply(const LipState& previous, const LipState& commanded) {
  if (!model_.enabled) return commanded;
  LipState out = commanded;
  double heading = commanded.pose.heading;
  if (model_.heading_lag > 0.0) {
    const double turn = wrap_angle(commanded.pose.heading - previous.pose.heading);
    heading = previous.pose.heading + (1.0 - model_.heading_lag) * turn;
  }
  if (model_.heading_noise_std > 0.0) {
    heading += std::normal_distribution<double>(0.0, model_.heading_noise_std)(rng_);
  }
  out.pose.heading = wrap_angle(heading);
  if (model_.lateral_noise_std > 0.0) {
    const double lateral = std::normal_distribution<double>(0.0, model_.lateral_noise_std)(rng_);
    const Vec2 left = unit_from_angle(commanded.pose.heading + std::numbers::pi / 2.0);
    out.pose.position += lateral * left;
  }
  return out;
}

}  // namespace emonav
