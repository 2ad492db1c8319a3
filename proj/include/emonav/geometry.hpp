#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace emonav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3-D cross product.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr double norm_sq(Vec2 v) { return dot(v, v); }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline Vec2 normalized(Vec2 v) { return v / norm(v); }
inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }
inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::remainder(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

struct Pose {
  Vec2 position;
  double heading = 0.0;  // radians, world frame
  constexpr bool operator==(const Pose&) const = default;
};

/// Expresses a world-frame point in the frame of `pose` (x forward, y left).
inline Vec2 to_ego_frame(const Pose& pose, Vec2 world_point) {
  return rotate(world_point - pose.position, -pose.heading);
}

enum class EntityKind { Static, Pedestrian, Robot };
enum class Emotion { Happy, Neutral, Negative };

std::string to_string(EntityKind kind);
std::string to_string(Emotion emotion);
Emotion emotion_from_string(const std::string& name);

struct CircleEntity {
  EntityKind kind = EntityKind::Static;
  Vec2 center;
  double radius = 0.0;
  std::optional<Emotion> emotion;  // present iff kind == Pedestrian

  bool operator==(const CircleEntity&) const = default;
};

// Checked constructors: radius > 0 and the emotion/kind pairing.
CircleEntity make_static(Vec2 center, double radius);
CircleEntity make_pedestrian(Vec2 center, double radius, Emotion emotion);
CircleEntity make_robot(Vec2 center, double radius);

/// Same entity expressed in the frame of `pose`.
CircleEntity to_ego_frame(const Pose& pose, const CircleEntity& entity);

/// Thrown when a ray origin lies strictly inside an entity disk.
class OriginInsideEntity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MarginDistances {
  double all_min = 0.0;
  double static_min = 0.0;
  std::vector<double> per_pedestrian;  // order of pedestrians in the input
};

/// Robot-center to entity-margin distances. Empty categories yield +infinity.
MarginDistances min_margin_distances(const CircleEntity& robot,
                                     std::span<const CircleEntity> entities);

}  // namespace emonav
