#include "emonav/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace emonav {

void GridSpec::validate() const {
  if (beams < 1 || size < 2 || !(radius > 0.0) || stack_depth < 1) {
    throw std::invalid_argument("grid K, M, L and N must be positive (M >= 2)");
  }
  if (beams % size != 0) throw std::invalid_argument("grid K must be a multiple of M");
  if (size % 2 != 0) throw std::invalid_argument("grid M must be even");
}

double intensity(CellClass c) {
  switch (c) {
    case CellClass::Free:
      return 0.0;
    case CellClass::Discomfort:
      return 0.5;
    case CellClass::Collision:
      return 1.0;
  }
  return 0.0;
}

std::size_t GridFrame::count(CellClass c) const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), c));
}

double EmotionProfile::discomfort_distance(const CircleEntity& e) const {
  if (e.kind == EntityKind::Pedestrian) {
    if (!e.emotion) throw std::invalid_argument("pedestrian without emotion");
    return discomfort.at(*e.emotion);
  }
  return static_margin;
}

void EmotionProfile::validate() const {
  for (Emotion e : {Emotion::Happy, Emotion::Neutral, Emotion::Negative}) {
    const auto it = discomfort.find(e);
    if (it == discomfort.end() || !(it->second >= 0.0)) {
      throw std::invalid_argument("discomfort distance missing or negative for " + to_string(e));
    }
  }
  if (!(static_margin >= 0.0)) throw std::invalid_argument("static margin must be >= 0");
}

EmotionProfile EmotionProfile::uniform(double pedestrian_distance, double static_margin) {
  EmotionProfile p;
  for (auto& [emotion, d] : p.discomfort) d = pedestrian_distance;
  p.static_margin = static_margin;
  return p;
}

namespace {

// Absorbs round-off such as 100 * 0.78 / 6 = 13.000000000000002.
constexpr double kIndexSnap = 1e-9;

int ring_of(double range, const GridSpec& spec) {
  const int ring = static_cast<int>(std::ceil(spec.size * range / spec.radius - kIndexSnap));
  return std::clamp(ring, 1, spec.size);
}

}  // namespace

std::optional<PolarCell> polar_index(Vec2 p, const GridSpec& spec) {
  const double r = norm(p);
  if (r <= 0.0 || r > spec.radius) return std::nullopt;
  double bearing = std::atan2(p.y, p.x);
  if (bearing < 0.0) bearing += 2.0 * std::numbers::pi;
  int segment = static_cast<int>(std::floor(spec.size * bearing / (2.0 * std::numbers::pi)));
  segment = std::clamp(segment, 0, spec.size - 1);
  return PolarCell{ring_of(r, spec), segment};
}

Vec2 polar_cell_center(PolarCell cell, const GridSpec& spec) {
  const double r = (cell.ring - 0.5) * spec.ring_width();
  const double a = (cell.segment + 0.5) * 2.0 * std::numbers::pi / spec.size;
  return r * unit_from_angle(a);
}

double grid_resolution(int ring, const GridSpec& spec) {
  if (ring < 1 || ring > spec.size) throw std::out_of_range("ring index out of range");
  const double m = spec.size;
  return spec.beams * m * m / (std::numbers::pi * spec.radius * spec.radius * (2.0 * ring - 1.0));
}

double lgm_cell_density(int ring, const GridSpec& spec) {
  if (ring < 1 || ring > spec.size) throw std::out_of_range("ring index out of range");
  const double w = spec.ring_width();
  const double ring_area = std::numbers::pi * w * w * (2.0 * ring - 1.0);
  return spec.size / ring_area;
}

double ogm_cell_density(const GridSpec& spec) {
  const double v = spec.size / (2.0 * spec.radius);
  return v * v;
}

double lgm_mean_cell_density(const GridSpec& spec) {
  const double v = spec.size / (std::sqrt(std::numbers::pi) * spec.radius);
  return v * v;
}

int density_crossover_ring(const GridSpec& spec) {
  const double ogm = ogm_cell_density(spec);
  for (int i = 1; i <= spec.size; ++i) {
    if (lgm_cell_density(i, spec) < ogm) return i;
  }
  return spec.size + 1;
}

namespace {

GridFrame blank_frame(const GridSpec& spec, GridLayout layout) {
  GridFrame f;
  f.size = spec.size;
  f.layout = layout;
  f.cells.assign(static_cast<std::size_t>(spec.size) * static_cast<std::size_t>(spec.size),
                 CellClass::Free);
  return f;
}

void check_scan(const LidarScan& scan, const GridSpec& spec) {
  spec.validate();
  if (scan.beam_count != spec.beams || scan.ranges.size() != static_cast<std::size_t>(spec.beams)) {
    throw std::invalid_argument("scan beam count does not match grid spec");
  }
}

struct EgoDisk {
  Vec2 center;
  double radius;
  double discomfort_radius;
};

std::vector<EgoDisk> ego_disks(std::span<const CircleEntity> entities,
                               const EmotionProfile& profile) {
  std::vector<EgoDisk> disks;
  disks.reserve(entities.size());
  for (const auto& e : entities) {
    if (e.kind == EntityKind::Robot) continue;
    disks.push_back({e.center, e.radius, e.radius + profile.discomfort_distance(e)});
  }
  return disks;
}

// Column `segment` of the LGM; writes only cells of that column.
void mark_segment(const LidarScan& scan, const std::vector<EgoDisk>& disks,
                  const GridSpec& spec, int segment, GridFrame& frame) {
  const int per_segment = spec.beams_per_segment();
  const auto cell = [&](int ring) -> CellClass& {
    return frame.cells[static_cast<std::size_t>(ring - 1) * static_cast<std::size_t>(spec.size) +
                       static_cast<std::size_t>(segment)];
  };
  const Vec2 origin{};
  std::vector<int> collision_rings;
  collision_rings.reserve(static_cast<std::size_t>(per_segment));
  for (int k = 0; k < per_segment; ++k) {
    const int b = segment * per_segment + k;
    const double hit = scan.ranges[static_cast<std::size_t>(b)];
    if (!(hit < spec.radius)) continue;
    collision_rings.push_back(ring_of(hit, spec));

    // Entity that produced the hit: the first disk along the beam.
    const Vec2 dir = unit_from_angle(beam_bearing(b, spec.beams));
    const EgoDisk* hit_disk = nullptr;
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& d : disks) {
      const double t = ray_disk_distance(origin, dir, d.center, d.radius);
      if (t < nearest) {
        nearest = t;
        hit_disk = &d;
      }
    }
    if (hit_disk == nullptr || !(nearest < spec.radius)) continue;

    double entry = 0.0;
    if (norm(hit_disk->center) > hit_disk->discomfort_radius) {
      entry = ray_disk_distance(origin, dir, hit_disk->center, hit_disk->discomfort_radius);
    }
    const int first = ring_of(entry, spec);
    const int last = ring_of(hit, spec);
    for (int ring = first; ring <= last; ++ring) {
      if (cell(ring) == CellClass::Free) cell(ring) = CellClass::Discomfort;
    }
  }
  for (int ring : collision_rings) cell(ring) = CellClass::Collision;
}

}  // namespace

GridFrame build_lgm(const LidarScan& scan, std::span<const CircleEntity> entities,
                    const EmotionProfile& profile, const GridSpec& spec) {
  check_scan(scan, spec);
  const auto disks = ego_disks(entities, profile);
  GridFrame frame = blank_frame(spec, GridLayout::Lgm);
  if (disks.empty()) return frame;
  const int m = spec.size;
#pragma omp parallel for schedule(static) if (m >= 64)
  for (int j = 0; j < m; ++j) {
    mark_segment(scan, disks, spec, j, frame);
  }
  return frame;
}

GridFrame build_lgm_serial(const LidarScan& scan, std::span<const CircleEntity> entities,
                           const EmotionProfile& profile, const GridSpec& spec) {
  check_scan(scan, spec);
  const auto disks = ego_disks(entities, profile);
  GridFrame frame = blank_frame(spec, GridLayout::Lgm);
  if (disks.empty()) return frame;
  for (int j = 0; j < spec.size; ++j) mark_segment(scan, disks, spec, j, frame);
  return frame;
}

Vec2 ogm_cell_center(int row, int col, const GridSpec& spec) {
  const double side = 2.0 * spec.radius / spec.size;
  return {-spec.radius + (col + 0.5) * side, -spec.radius + (row + 0.5) * side};
}

namespace {

void classify_ogm_row(const std::vector<EgoDisk>& disks, const GridSpec& spec, int row,
                      GridFrame& frame) {
  for (int col = 0; col < spec.size; ++col) {
    const Vec2 c = ogm_cell_center(row, col, spec);
    CellClass cls = CellClass::Free;
    for (const auto& d : disks) {
      const double dist = norm(c - d.center);
      if (dist <= d.radius) {
        cls = CellClass::Collision;
        break;
      }
      if (dist <= d.discomfort_radius) cls = CellClass::Discomfort;
    }
    frame.cells[static_cast<std::size_t>(row) * static_cast<std::size_t>(spec.size) +
                static_cast<std::size_t>(col)] = cls;
  }
}

}  // namespace

GridFrame build_ogm(std::span<const CircleEntity> entities, const EmotionProfile& profile,
                    const GridSpec& spec) {
  spec.validate();
  const auto disks = ego_disks(entities, profile);
  GridFrame frame = blank_frame(spec, GridLayout::Ogm);
  if (disks.empty()) return frame;
  const int m = spec.size;
#pragma omp parallel for schedule(static) if (m >= 64)
  for (int row = 0; row < m; ++row) classify_ogm_row(disks, spec, row, frame);
  return frame;
}

GridFrame build_ogm_serial(std::span<const CircleEntity> entities, const EmotionProfile& profile,
                           const GridSpec& spec) {
  spec.validate();
  const auto disks = ego_disks(entities, profile);
  GridFrame frame = blank_frame(spec, GridLayout::Ogm);
  if (disks.empty()) return frame;
  for (int row = 0; row < spec.size; ++row) classify_ogm_row(disks, spec, row, frame);
  return frame;
}

GridObservation stack_frames(std::span<const GridFrame> history, const GridSpec& spec) {
  if (history.empty()) throw std::invalid_argument("stack_frames needs at least one frame");
  const auto depth = static_cast<std::size_t>(spec.stack_depth);
  GridObservation obs;
  obs.frames.reserve(depth);
  const std::size_t available = std::min(depth, history.size());
  const std::size_t first = history.size() - available;
  for (std::size_t pad = available; pad < depth; ++pad) obs.frames.push_back(history[first]);
  for (std::size_t i = first; i < history.size(); ++i) obs.frames.push_back(history[i]);
  return obs;
}

std::vector<double> flatten(const GridObservation& obs) {
  std::vector<double> out;
  std::size_t total = 0;
  for (const auto& f : obs.frames) total += f.cells.size();
  out.reserve(total);
  for (const auto& f : obs.frames) {
    for (CellClass c : f.cells) out.push_back(intensity(c));
  }
  return out;
}

}  // namespace emonav
