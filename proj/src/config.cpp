#include "emonav/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace emonav {

using nlohmann::json;

void require_known_keys(const json& j, std::initializer_list<const char*> allowed,
                        const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

void EnvConfig::validate() const {
  if (n_pedestrians < 0 || n_statics < 0) throw ConfigError("entity counts must be >= 0");
  if (!(static_region.x_min <= static_region.x_max) ||
      !(static_region.y_min <= static_region.y_max)) {
    throw ConfigError("static_region must be non-empty");
  }
  if (!(static_radius_range.lo > 0.0) || !(static_radius_range.lo <= static_radius_range.hi)) {
    throw ConfigError("static_radius_range must be a non-empty positive interval");
  }
  if (!(ped_circle_radius_range.lo > 0.0) ||
      !(ped_circle_radius_range.lo <= ped_circle_radius_range.hi)) {
    throw ConfigError("ped_circle_radius_range must be a non-empty positive interval");
  }
  if (!(ped_pref_speed > 0.0) || !(ped_max_speed_factor >= 1.0)) {
    throw ConfigError("ped_pref_speed must be > 0 and ped_max_speed_factor >= 1");
  }
  if (!(d_goal > 0.0)) throw ConfigError("d_goal must be > 0");
  if (timeout_steps <= 0) throw ConfigError("timeout_steps must be > 0");
  if (emotion_mode.mode == EmotionMode::Alternating && !(emotion_mode.period > 0.0)) {
    throw ConfigError("emotion period must be > 0");
  }
  if (!(r_ped > 0.0) || !(r_robot > 0.0)) throw ConfigError("radii must be > 0");
  if (!(spawn_clearance >= 0.0) || !(ped_spacing >= 0.0)) {
    throw ConfigError("spawn clearances must be >= 0");
  }
  try {
    grid.validate();
    lip.validate();
    discomfort.validate();
    orca.validate();
    perturbation.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const double substeps = lip.step_time / orca.dt;
  if (std::fabs(substeps - std::round(substeps)) > 1e-9) {
    throw ConfigError("lip.T must be an integer multiple of orca.dt");
  }
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_vec(const json& j, const char* key, Vec2& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw ConfigError(std::string(key) + " must be [x, y]");
  out = {v[0].get<double>(), v[1].get<double>()};
}

void read_interval(const json& j, const char* key, Interval& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw ConfigError(std::string(key) + " must be [lo, hi]");
  out = {v[0].get<double>(), v[1].get<double>()};
}

std::string mode_name(EmotionMode m) {
  return m == EmotionMode::FixedRandom ? "fixed_random" : "alternating";
}

}  // namespace

EnvConfig apply_overrides(const EnvConfig& base, const json& j) {
  require_known_keys(j,
                     {"n_pedestrians", "n_statics", "static_region", "static_radius_range",
                      "ped_circle_radius_range", "ped_pref_speed", "ped_max_speed_factor",
                      "robot_start", "robot_goal", "d_goal", "timeout_steps", "emotion_mode",
                      "grid", "observation", "lip", "radii", "seed", "discomfort", "orca",
                      "perturbation", "spawn_clearance", "ped_spacing"},
                     "config");
  EnvConfig c = base;
  try {
    read(j, "n_pedestrians", c.n_pedestrians);
    read(j, "n_statics", c.n_statics);
    if (j.contains("static_region")) {
      const auto& r = j.at("static_region");
      require_known_keys(r, {"x_min", "x_max", "y_min", "y_max"}, "static_region");
      read(r, "x_min", c.static_region.x_min);
      read(r, "x_max", c.static_region.x_max);
      read(r, "y_min", c.static_region.y_min);
      read(r, "y_max", c.static_region.y_max);
    }
    read_interval(j, "static_radius_range", c.static_radius_range);
    read_interval(j, "ped_circle_radius_range", c.ped_circle_radius_range);
    read(j, "ped_pref_speed", c.ped_pref_speed);
    read(j, "ped_max_speed_factor", c.ped_max_speed_factor);
    read_vec(j, "robot_start", c.robot_start);
    read_vec(j, "robot_goal", c.robot_goal);
    read(j, "d_goal", c.d_goal);
    read(j, "timeout_steps", c.timeout_steps);
    if (j.contains("emotion_mode")) {
      const auto& m = j.at("emotion_mode");
      std::string type;
      if (m.is_string()) {
        type = m.get<std::string>();
      } else {
        require_known_keys(m, {"type", "period", "designated", "start"}, "emotion_mode");
        type = m.value("type", mode_name(c.emotion_mode.mode));
        read(m, "period", c.emotion_mode.period);
        read(m, "designated", c.emotion_mode.designated);
        if (m.contains("start")) c.emotion_mode.start = emotion_from_string(m.at("start").get<std::string>());
      }
      if (type == "fixed_random") {
        c.emotion_mode.mode = EmotionMode::FixedRandom;
      } else if (type == "alternating") {
        c.emotion_mode.mode = EmotionMode::Alternating;
      } else {
        throw ConfigError("unknown emotion_mode type '" + type + "'");
      }
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      require_known_keys(g, {"K", "M", "L", "N"}, "grid");
      read(g, "K", c.grid.beams);
      read(g, "M", c.grid.size);
      read(g, "L", c.grid.radius);
      read(g, "N", c.grid.stack_depth);
    }
    if (j.contains("observation")) {
      const auto name = j.at("observation").get<std::string>();
      if (name == "lgm") {
        c.observation = GridLayout::Lgm;
      } else if (name == "ogm") {
        c.observation = GridLayout::Ogm;
      } else {
        throw ConfigError("observation must be 'lgm' or 'ogm'");
      }
    }
    if (j.contains("lip")) {
      const auto& l = j.at("lip");
      require_known_keys(l, {"T", "H", "g", "u_v_max", "u_dtheta_max"}, "lip");
      read(l, "T", c.lip.step_time);
      read(l, "H", c.lip.com_height);
      read(l, "g", c.lip.gravity);
      read(l, "u_v_max", c.lip.max_speed);
      read(l, "u_dtheta_max", c.lip.max_turn);
    }
    if (j.contains("radii")) {
      const auto& r = j.at("radii");
      require_known_keys(r, {"r_ped", "r_robot"}, "radii");
      read(r, "r_ped", c.r_ped);
      read(r, "r_robot", c.r_robot);
    }
    read(j, "seed", c.seed);
    if (j.contains("discomfort")) {
      const auto& d = j.at("discomfort");
      require_known_keys(d, {"happy", "neutral", "negative", "static"}, "discomfort");
      read(d, "happy", c.discomfort.discomfort[Emotion::Happy]);
      read(d, "neutral", c.discomfort.discomfort[Emotion::Neutral]);
      read(d, "negative", c.discomfort.discomfort[Emotion::Negative]);
      read(d, "static", c.discomfort.static_margin);
    }
    if (j.contains("orca")) {
      const auto& o = j.at("orca");
      require_known_keys(o,
                         {"time_horizon", "time_horizon_obst", "neighbor_dist", "max_neighbors",
                          "dt", "arrival_threshold", "safety_margin"},
                         "orca");
      read(o, "time_horizon", c.orca.time_horizon);
      read(o, "time_horizon_obst", c.orca.time_horizon_obst);
      read(o, "neighbor_dist", c.orca.neighbor_dist);
      read(o, "max_neighbors", c.orca.max_neighbors);
      read(o, "dt", c.orca.dt);
      read(o, "arrival_threshold", c.orca.arrival_threshold);
      read(o, "safety_margin", c.orca.safety_margin);
    }
    if (j.contains("perturbation")) {
      const auto& p = j.at("perturbation");
      require_known_keys(
          p, {"enabled", "heading_lag", "heading_noise_std", "lateral_noise_std", "seed"},
          "perturbation");
      read(p, "enabled", c.perturbation.enabled);
      read(p, "heading_lag", c.perturbation.heading_lag);
      read(p, "heading_noise_std", c.perturbation.heading_noise_std);
      read(p, "lateral_noise_std", c.perturbation.lateral_noise_std);
      read(p, "seed", c.perturbation.seed);
    }
    read(j, "spawn_clearance", c.spawn_clearance);
    read(j, "ped_spacing", c.ped_spacing);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

json to_json(const EnvConfig& c) {
  json j;
  j["n_pedestrians"] = c.n_pedestrians;
  j["n_statics"] = c.n_statics;
  j["static_region"] = {{"x_min", c.static_region.x_min},
                        {"x_max", c.static_region.x_max},
                        {"y_min", c.static_region.y_min},
                        {"y_max", c.static_region.y_max}};
  j["static_radius_range"] = {c.static_radius_range.lo, c.static_radius_range.hi};
  j["ped_circle_radius_range"] = {c.ped_circle_radius_range.lo, c.ped_circle_radius_range.hi};
  j["ped_pref_speed"] = c.ped_pref_speed;
  j["ped_max_speed_factor"] = c.ped_max_speed_factor;
  j["robot_start"] = {c.robot_start.x, c.robot_start.y};
  j["robot_goal"] = {c.robot_goal.x, c.robot_goal.y};
  j["d_goal"] = c.d_goal;
  j["timeout_steps"] = c.timeout_steps;
  j["emotion_mode"] = {{"type", mode_name(c.emotion_mode.mode)},
                       {"period", c.emotion_mode.period},
                       {"designated", c.emotion_mode.designated},
                       {"start", to_string(c.emotion_mode.start)}};
  j["grid"] = {{"K", c.grid.beams},
               {"M", c.grid.size},
               {"L", c.grid.radius},
               {"N", c.grid.stack_depth}};
  j["observation"] = c.observation == GridLayout::Lgm ? "lgm" : "ogm";
  j["lip"] = {{"T", c.lip.step_time},
              {"H", c.lip.com_height},
              {"g", c.lip.gravity},
              {"u_v_max", c.lip.max_speed},
              {"u_dtheta_max", c.lip.max_turn}};
  j["radii"] = {{"r_ped", c.r_ped}, {"r_robot", c.r_robot}};
  j["seed"] = c.seed;
  j["discomfort"] = {{"happy", c.discomfort.discomfort.at(Emotion::Happy)},
                     {"neutral", c.discomfort.discomfort.at(Emotion::Neutral)},
                     {"negative", c.discomfort.discomfort.at(Emotion::Negative)},
                     {"static", c.discomfort.static_margin}};
  j["orca"] = {{"time_horizon", c.orca.time_horizon},
               {"time_horizon_obst", c.orca.time_horizon_obst},
               {"neighbor_dist", c.orca.neighbor_dist},
               {"max_neighbors", c.orca.max_neighbors},
               {"dt", c.orca.dt},
               {"arrival_threshold", c.orca.arrival_threshold},
               {"safety_margin", c.orca.safety_margin}};
  j["perturbation"] = {{"enabled", c.perturbation.enabled},
                       {"heading_lag", c.perturbation.heading_lag},
                       {"heading_noise_std", c.perturbation.heading_noise_std},
                       {"lateral_noise_std", c.perturbation.lateral_noise_std},
                       {"seed", c.perturbation.seed}};
  j["spawn_clearance"] = c.spawn_clearance;
  j["ped_spacing"] = c.ped_spacing;
  return j;
}

EnvConfig env_config_from_json(const json& j) { return apply_overrides(EnvConfig{}, j); }

EnvConfig load_env_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  // A benchmark config may wrap the environment under "env".
  if (j.contains("env")) {
    require_known_keys(j, {"env", "dwa"}, "benchmark config");
    return env_config_from_json(j.at("env"));
  }
  return env_config_from_json(j);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const json& canonical) { return fnv1a_hex(canonical.dump()); }

}  // namespace emonav
