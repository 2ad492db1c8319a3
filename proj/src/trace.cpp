#include "emonav/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace emonav {

using nlohmann::json;

TraceFormat trace_format_from_string(const std::string& name) {
  if (name == "csv") return TraceFormat::Csv;
  if (name == "jsonl") return TraceFormat::Jsonl;
  throw std::invalid_argument("unknown trace format '" + name + "' (expected csv or jsonl)");
}

std::string to_string(IdtSlot slot) {
  switch (slot) {
    case IdtSlot::Static:
      return "static";
    case IdtSlot::Happy:
      return "happy";
    case IdtSlot::Neutral:
      return "neutral";
    case IdtSlot::Negative:
      return "negative";
  }
  return "unknown";
}

IdtSlot idt_slot_from_string(const std::string& s) {
  if (s == "static") return IdtSlot::Static;
  if (s == "happy") return IdtSlot::Happy;
  if (s == "neutral") return IdtSlot::Neutral;
  if (s == "negative") return IdtSlot::Negative;
  throw std::invalid_argument("unknown discomfort slot '" + s + "'");
}

json to_json(const RewardBreakdown& r) {
  return {{"r_col", r.collision},
          {"r_goal", r.goal},
          {"r_emo", r.emotion},
          {"discomfort_counted_once", r.discomfort_counted_once},
          {"total", r.total}};
}

RewardBreakdown reward_from_json(const json& j) {
  RewardBreakdown r;
  r.collision = j.at("r_col").get<double>();
  r.goal = j.at("r_goal").get<double>();
  r.emotion = j.at("r_emo").get<double>();
  r.discomfort_counted_once = j.at("discomfort_counted_once").get<bool>();
  r.total = j.at("total").get<double>();
  return r;
}

namespace {

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }
Vec2 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json row_json(const TraceRow& r);

json header_json(const EpisodeTrace& t) {
  json statics = json::array();
  for (const auto& s : t.statics) {
    statics.push_back({{"center", vec_json(s.center)}, {"radius", s.radius}});
  }
  return {{"type", "header"},
          {"seed", t.seed},
          {"config_hash", t.config_hash},
          {"goal", vec_json(t.goal)},
          {"statics", statics},
          {"initial", row_json(t.initial)}};
}

json row_json(const TraceRow& r) {
  json peds = json::array();
  for (std::size_t i = 0; i < r.pedestrian_positions.size(); ++i) {
    peds.push_back({{"position", vec_json(r.pedestrian_positions[i])},
                    {"velocity", vec_json(r.pedestrian_velocities[i])},
                    {"emotion", to_string(r.pedestrian_emotions[i])}});
  }
  return {{"type", "step"},
          {"step", r.step},
          {"time", r.time},
          {"robot", {{"position", vec_json(r.robot.position)},
                     {"heading", r.robot.heading},
                     {"speed", r.sagittal_speed}}},
          {"action", json::array({r.action.speed, r.action.turn})},
          {"pedestrians", peds},
          {"reward", to_json(r.reward)},
          {"done", to_string(r.done)},
          {"intrusion", r.intrusion ? json(to_string(*r.intrusion)) : json(nullptr)}};
}

std::string csv_header(std::size_t n_peds) {
  std::string h = "step,time,robot_x,robot_y,robot_heading,robot_speed,action_speed,action_turn";
  for (std::size_t i = 0; i < n_peds; ++i) {
    h += fmt::format(",ped{0}_x,ped{0}_y,ped{0}_vx,ped{0}_vy,ped{0}_emotion", i);
  }
  h += ",r_col,r_goal,r_emo,discomfort_counted_once,total,done,intrusion";
  return h;
}

std::string csv_row(const TraceRow& r) {
  std::string line = fmt::format("{},{},{},{},{},{},{},{}", r.step, r.time, r.robot.position.x,
                                 r.robot.position.y, r.robot.heading, r.sagittal_speed,
                                 r.action.speed, r.action.turn);
  for (std::size_t i = 0; i < r.pedestrian_positions.size(); ++i) {
    line += fmt::format(",{},{},{},{},{}", r.pedestrian_positions[i].x,
                        r.pedestrian_positions[i].y, r.pedestrian_velocities[i].x,
                        r.pedestrian_velocities[i].y, to_string(r.pedestrian_emotions[i]));
  }
  line += fmt::format(",{},{},{},{},{},{},{}", r.reward.collision, r.reward.goal,
                      r.reward.emotion, r.reward.discomfort_counted_once ? 1 : 0, r.reward.total,
                      to_string(r.done), r.intrusion ? to_string(*r.intrusion) : "");
  return line;
}

TraceRow row_from_json(const json& j) {
  TraceRow r;
  r.step = j.at("step").get<int>();
  r.time = j.at("time").get<double>();
  r.robot.position = vec_from(j.at("robot").at("position"));
  r.robot.heading = j.at("robot").at("heading").get<double>();
  r.sagittal_speed = j.at("robot").at("speed").get<double>();
  r.action = {j.at("action").at(0).get<double>(), j.at("action").at(1).get<double>()};
  for (const auto& p : j.at("pedestrians")) {
    r.pedestrian_positions.push_back(vec_from(p.at("position")));
    r.pedestrian_velocities.push_back(vec_from(p.at("velocity")));
    r.pedestrian_emotions.push_back(emotion_from_string(p.at("emotion").get<std::string>()));
  }
  r.reward = reward_from_json(j.at("reward"));
  r.done = done_from_string(j.at("done").get<std::string>());
  if (!j.at("intrusion").is_null()) {
    r.intrusion = idt_slot_from_string(j.at("intrusion").get<std::string>());
  }
  return r;
}

}  // namespace

std::string format_trace(const EpisodeTrace& trace, TraceFormat format) {
  std::string out;
  if (format == TraceFormat::Jsonl) {
    out += header_json(trace).dump();
    out += '\n';
    for (const auto& r : trace.rows) {
      out += row_json(r).dump();
      out += '\n';
    }
    return out;
  }
  const std::size_t n_peds = trace.initial.pedestrian_positions.size();
  out += csv_header(n_peds);
  out += '\n';
  for (const auto& r : trace.rows) {
    out += csv_row(r);
    out += '\n';
  }
  return out;
}

EpisodeTrace parse_trace_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  EpisodeTrace t;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const auto type = j.at("type").get<std::string>();
    if (type == "header") {
      t.seed = j.at("seed").get<std::uint64_t>();
      t.config_hash = j.at("config_hash").get<std::string>();
      t.goal = vec_from(j.at("goal"));
      for (const auto& s : j.at("statics")) {
        t.statics.push_back(make_static(vec_from(s.at("center")), s.at("radius").get<double>()));
      }
      t.initial = row_from_json(j.at("initial"));
      have_header = true;
      continue;
    }
    if (type != "step") throw std::runtime_error("unknown trace record type '" + type + "'");
    t.rows.push_back(row_from_json(j));
  }
  if (!have_header) throw std::runtime_error("trace has no header record");
  return t;
}

void export_episode(const EpisodeTrace& trace, TraceFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::string text = format_trace(trace, format);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

EpisodeTrace load_trace_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace_jsonl(ss.str());
}

}  // namespace emonav
