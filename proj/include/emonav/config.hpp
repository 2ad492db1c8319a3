#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "emonav/geometry.hpp"
#include "emonav/grid.hpp"
#include "emonav/lip.hpp"
#include "emonav/orca.hpp"

namespace emonav {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rect {
  double x_min = -3.0;
  double x_max = 3.0;
  double y_min = -1.5;
  double y_max = 1.5;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

enum class EmotionMode { FixedRandom, Alternating };

struct EmotionSchedule {
  EmotionMode mode = EmotionMode::FixedRandom;
  double period = 2.0;         // s, Alternating only
  int designated = 0;          // pedestrian whose emotion cycles
  Emotion start = Emotion::Happy;
};

struct EnvConfig {
  int n_pedestrians = 5;
  int n_statics = 3;
  Rect static_region;
  Interval static_radius_range{0.2, 0.4};
  Interval ped_circle_radius_range{3.5, 4.5};
  double ped_pref_speed = 1.0;
  double ped_max_speed_factor = 1.2;
  Vec2 robot_start{-4.0, 0.0};
  Vec2 robot_goal{4.0, 0.0};
  double d_goal = 0.1;
  int timeout_steps = 250;
  EmotionSchedule emotion_mode;
  GridSpec grid;
  GridLayout observation = GridLayout::Lgm;
  LipParams lip;
  double r_ped = 0.3;
  double r_robot = 0.3;
  std::uint64_t seed = 0;
  EmotionProfile discomfort;
  OrcaParams orca;
  PerturbationModel perturbation;
  double spawn_clearance = 0.5;  // m, around robot start/goal disks
  double ped_spacing = 0.5;      // m, minimum margin gap between pedestrian spawns

  void validate() const;
};

/// Overlays the keys of `j` onto `base`. Unknown keys throw ConfigError.
EnvConfig apply_overrides(const EnvConfig& base, const nlohmann::json& j);
nlohmann::json to_json(const EnvConfig& cfg);
EnvConfig env_config_from_json(const nlohmann::json& j);
EnvConfig load_env_config(const std::string& path);

/// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
std::string config_hash(const nlohmann::json& canonical);
std::string fnv1a_hex(const std::string& bytes);

/// Rejects any key of `j` not in `allowed`.
void require_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                        const std::string& where);

}  // namespace emonav
