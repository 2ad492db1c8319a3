#pragma once

#include <span>
#include <vector>

#include "emonav/geometry.hpp"

namespace emonav {

struct ScanSpec {
  int beam_count = 1800;
  double max_range = 6.0;
};

/// Planar range scan. Beam b points at bearing 2*pi*b/K counterclockwise from
/// the origin heading.
struct LidarScan {
  std::vector<double> ranges;
  int beam_count = 0;
  double max_range = 0.0;
  Pose origin;
};

double beam_bearing(int beam, int beam_count);

/// Distance along a unit ray to the first point of the disk boundary, or
/// +infinity on a miss. A tangent ray counts as a hit. Requires the origin to
/// be outside or on the disk.
double ray_disk_distance(Vec2 origin, Vec2 direction, Vec2 center, double radius);

/// Casts all beams against the disks. Robot entities in `entities` are
/// skipped. Throws OriginInsideEntity if the pose lies strictly inside a disk.
LidarScan ray_cast(const Pose& pose, std::span<const CircleEntity> entities,
                   const ScanSpec& spec);

/// Single-threaded reference for ray_cast; results are bit-identical.
LidarScan ray_cast_serial(const Pose& pose, std::span<const CircleEntity> entities,
                          const ScanSpec& spec);

/// Rebuilds a scan from detected centers by approximating every detection
/// as a disk of `fixed_radius`. Centers are in the frame of `origin`
/// (identity by default).
LidarScan reconstruct_scan(std::span<const Vec2> detections, const ScanSpec& spec,
                           double fixed_radius, const Pose& origin = {});

}  // namespace emonav
