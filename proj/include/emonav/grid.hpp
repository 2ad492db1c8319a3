#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "emonav/geometry.hpp"
#include "emonav/lidar.hpp"

namespace emonav {

struct GridSpec {
  int beams = 1800;      // K
  int size = 100;        // M: rings, angular segments, and image side
  double radius = 6.0;   // L, meters
  int stack_depth = 9;   // N, frames per observation

  void validate() const;
  int beams_per_segment() const { return beams / size; }
  double ring_width() const { return radius / size; }
  ScanSpec scan_spec() const { return {beams, radius}; }
  bool operator==(const GridSpec&) const = default;
};

enum class CellClass : std::uint8_t { Free = 0, Discomfort = 1, Collision = 2 };

/// Pixel intensity of a cell: 0.0, 0.5 or 1.0.
double intensity(CellClass c);

enum class GridLayout { Lgm, Ogm };

/// M x M image, row-major.
///  Lgm: row r is ring r + 1 (row 0 innermost), column j is the angular
///       segment j (segment 0 starts at the ego heading, counterclockwise).
///  Ogm: row r spans ego y in [-L + r*s, -L + (r+1)*s), column c spans ego x
///       likewise, with s = 2L/M.
struct GridFrame {
  int size = 0;
  std::vector<CellClass> cells;
  std::int64_t frame_index = 0;
  GridLayout layout = GridLayout::Lgm;

  CellClass at(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * static_cast<std::size_t>(size) +
                 static_cast<std::size_t>(col)];
  }
  std::size_t count(CellClass c) const;
  bool operator==(const GridFrame&) const = default;
};

/// Per-emotion discomfort distances plus the static-obstacle safety margin.
struct EmotionProfile {
  std::map<Emotion, double> discomfort{
      {Emotion::Happy, 0.2}, {Emotion::Neutral, 0.35}, {Emotion::Negative, 0.5}};
  double static_margin = 0.2;

  double discomfort_distance(const CircleEntity& e) const;
  void validate() const;

  /// Same distance for every emotion; used by sweep experiments.
  static EmotionProfile uniform(double pedestrian_distance, double static_margin = 0.2);
};

struct PolarCell {
  int ring = 0;     // 1..M, 1 innermost
  int segment = 0;  // 0..M-1
  bool operator==(const PolarCell&) const = default;
};

/// Ring ceil(M*r/L) and segment floor(M*bearing/2pi) of an ego-frame point;
/// nullopt at the origin or beyond L.
std::optional<PolarCell> polar_index(Vec2 ego_point, const GridSpec& spec);

/// Ego-frame center of a polar cell (mid radius, mid bearing).
Vec2 polar_cell_center(PolarCell cell, const GridSpec& spec);

/// Beams per square meter in ring i (1-based): K*M^2 / (pi*L^2*(2i-1)).
double grid_resolution(int ring, const GridSpec& spec);

/// Polar cells per square meter in ring i.
double lgm_cell_density(int ring, const GridSpec& spec);
/// Uniform occupancy-grid cells per square meter, (M/2L)^2.
double ogm_cell_density(const GridSpec& spec);
/// Polar cells per square meter averaged over the disk, (M/(sqrt(pi)L))^2.
double lgm_mean_cell_density(const GridSpec& spec);
/// First ring whose polar cell density drops below the occupancy grid's.
int density_crossover_ring(const GridSpec& spec);

/// Pie-shaped grid from an ego-centered scan. `entities` must be in the ego
/// frame. Each beam marks the cell of its hit point Collision and the cells it
/// crosses inside the hit entity's discomfort annulus Discomfort.
GridFrame build_lgm(const LidarScan& scan, std::span<const CircleEntity> entities,
                    const EmotionProfile& profile, const GridSpec& spec);
GridFrame build_lgm_serial(const LidarScan& scan, std::span<const CircleEntity> entities,
                           const EmotionProfile& profile, const GridSpec& spec);

/// Cartesian grid over [-L, L]^2 classified by cell-center membership.
GridFrame build_ogm(std::span<const CircleEntity> entities, const EmotionProfile& profile,
                    const GridSpec& spec);
GridFrame build_ogm_serial(std::span<const CircleEntity> entities,
                           const EmotionProfile& profile, const GridSpec& spec);

/// Ego-frame center of an occupancy-grid cell.
Vec2 ogm_cell_center(int row, int col, const GridSpec& spec);

struct GridObservation {
  std::vector<GridFrame> frames;  // oldest to newest, exactly N
};

/// Newest N frames, oldest first; short histories are padded at the front by
/// replicating the oldest frame.
GridObservation stack_frames(std::span<const GridFrame> history, const GridSpec& spec);

/// Frame-major, row-major intensities (N*M*M values).
std::vector<double> flatten(const GridObservation& obs);

}  // namespace emonav
