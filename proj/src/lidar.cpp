#include "emonav/lidar.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace emonav {

double beam_bearing(int beam, int beam_count) {
  return 2.0 * std::numbers::pi * static_cast<double>(beam) / static_cast<double>(beam_count);
}

double ray_disk_distance(Vec2 origin, Vec2 direction, Vec2 center, double radius) {
  const Vec2 f = center - origin;
  const double b = dot(f, direction);
  const double c = norm_sq(f) - radius * radius;  // >= 0 outside the disk
  if (b < 0.0) return std::numeric_limits<double>::infinity();
  const double disc = b * b - c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  // Near root via the cancellation-free form c / (b + sqrt(disc)).
  const double denom = b + std::sqrt(disc);
  if (denom <= 0.0) return 0.0;
  return std::max(0.0, c / denom);
}

namespace {

struct Disk {
  Vec2 center;
  double radius;
};

std::vector<Disk> collect_disks(const Pose& pose, std::span<const CircleEntity> entities,
                                const ScanSpec& spec) {
  if (spec.beam_count < 1) throw std::invalid_argument("beam_count must be >= 1");
  if (!(spec.max_range > 0.0)) throw std::invalid_argument("max_range must be > 0");
  std::vector<Disk> disks;
  disks.reserve(entities.size());
  for (const auto& e : entities) {
    if (e.kind == EntityKind::Robot) continue;
    const double d = norm(e.center - pose.position);
    if (d < e.radius) {
      throw OriginInsideEntity("scan origin lies inside a " + to_string(e.kind) +
                               " disk (center distance " + std::to_string(d) + ")");
    }
    // Disks entirely out of range never produce a hit.
    if (d - e.radius > spec.max_range) continue;
    disks.push_back({e.center, e.radius});
  }
  return disks;
}

double cast_beam(const Pose& pose, const std::vector<Disk>& disks, const ScanSpec& spec,
                 int beam) {
  const Vec2 dir = unit_from_angle(pose.heading + beam_bearing(beam, spec.beam_count));
  double best = spec.max_range;
  for (const auto& d : disks) {
    best = std::min(best, ray_disk_distance(pose.position, dir, d.center, d.radius));
  }
  return best;
}

LidarScan empty_scan(const Pose& pose, const ScanSpec& spec) {
  LidarScan scan;
  scan.ranges.assign(static_cast<std::size_t>(spec.beam_count), spec.max_range);
  scan.beam_count = spec.beam_count;
  scan.max_range = spec.max_range;
  scan.origin = pose;
  return scan;
}

}  // namespace

LidarScan ray_cast(const Pose& pose, std::span<const CircleEntity> entities,
                   const ScanSpec& spec) {
  const auto disks = collect_disks(pose, entities, spec);
  LidarScan scan = empty_scan(pose, spec);
  if (disks.empty()) return scan;
  double* ranges = scan.ranges.data();
  const int k = spec.beam_count;
#pragma omp parallel for schedule(static) if (k >= 512)
  for (int b = 0; b < k; ++b) {
    ranges[b] = cast_beam(pose, disks, spec, b);
  }
  return scan;
}

LidarScan ray_cast_serial(const Pose& pose, std::span<const CircleEntity> entities,
                          const ScanSpec& spec) {
  const auto disks = collect_disks(pose, entities, spec);
  LidarScan scan = empty_scan(pose, spec);
  for (int b = 0; b < spec.beam_count; ++b) {
    scan.ranges[static_cast<std::size_t>(b)] = cast_beam(pose, disks, spec, b);
  }
  return scan;
}

LidarScan reconstruct_scan(std::span<const Vec2> detections, const ScanSpec& spec,
                           double fixed_radius, const Pose& origin) {
  if (!(fixed_radius > 0.0)) throw std::invalid_argument("fixed_radius must be > 0");
  std::vector<CircleEntity> disks;
  disks.reserve(detections.size());
  for (const Vec2 c : detections) {
    disks.push_back(make_static(c, fixed_radius));
  }
  return ray_cast(origin, disks, spec);
}

}  // namespace emonav
