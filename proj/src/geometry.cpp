#include "emonav/geometry.hpp"

#include <algorithm>
#include <limits>

namespace emonav {

std::string to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::Static:
      return "static";
    case EntityKind::Pedestrian:
      return "pedestrian";
    case EntityKind::Robot:
      return "robot";
  }
  return "unknown";
}

std::string to_string(Emotion emotion) {
  switch (emotion) {
    case Emotion::Happy:
      return "happy";
    case Emotion::Neutral:
      return "neutral";
    case Emotion::Negative:
      return "negative";
  }
  return "unknown";
}

Emotion emotion_from_string(const std::string& name) {
  if (name == "happy") return Emotion::Happy;
  if (name == "neutral") return Emotion::Neutral;
  if (name == "negative") return Emotion::Negative;
  throw std::invalid_argument("unknown emotion: " + name);
}

namespace {

void require_valid_disk(Vec2 center, double radius) {
  if (!is_finite(center)) throw std::invalid_argument("entity center must be finite");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("entity radius must be positive");
  }
}

}  // namespace

CircleEntity make_static(Vec2 center, double radius) {
  require_valid_disk(center, radius);
  return {EntityKind::Static, center, radius, std::nullopt};
}

CircleEntity make_pedestrian(Vec2 center, double radius, Emotion emotion) {
  require_valid_disk(center, radius);
  return {EntityKind::Pedestrian, center, radius, emotion};
}

CircleEntity make_robot(Vec2 center, double radius) {
  require_valid_disk(center, radius);
  return {EntityKind::Robot, center, radius, std::nullopt};
}

CircleEntity to_ego_frame(const Pose& pose, const CircleEntity& entity) {
  CircleEntity out = entity;
  out.center = to_ego_frame(pose, entity.center);
  return out;
}

MarginDistances min_margin_distances(const CircleEntity& robot,
                                     std::span<const CircleEntity> entities) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  MarginDistances out{inf, inf, {}};
  for (const auto& e : entities) {
    if (e.kind == EntityKind::Robot) continue;
    const double d = norm(e.center - robot.center) - e.radius;
    out.all_min = std::min(out.all_min, d);
    if (e.kind == EntityKind::Static) {
      out.static_min = std::min(out.static_min, d);
    } else {
      out.per_pedestrian.push_back(d);
    }
  }
  return out;
}

}  // namespace emonav
