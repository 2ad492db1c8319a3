#pragma once

#include <span>
#include <vector>

#include "emonav/geometry.hpp"

namespace emonav {

struct OrcaParams {
  double time_horizon = 5.0;       // s, against moving agents
  double time_horizon_obst = 5.0;  // s, against static disks
  double neighbor_dist = 10.0;     // m
  int max_neighbors = 10;
  double dt = 0.05;                // s, simulation substep
  double arrival_threshold = 0.1;  // m, goal flip distance
  double safety_margin = 0.1;      // m, added to every combined radius

  void validate() const;
};

struct OrcaAgent {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.3;
  double pref_speed = 1.0;
  double max_speed = 1.2;
  Vec2 goal;
  Vec2 home;  // the other endpoint of the ping-pong route
};

/// A disk the agent must avoid. Reciprocating neighbors take half of the
/// avoidance effort; non-reciprocating ones (static disks) leave all of it to
/// the agent.
struct OrcaNeighbor {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.0;
  bool reciprocates = true;
};

/// Velocity-space constraint: feasible velocities v satisfy
/// dot(v - point, normal) >= 0.
struct HalfPlane {
  Vec2 point;
  Vec2 normal;
};

/// Other pedestrians within neighbor_dist (nearest max_neighbors, nearest
/// first), plus the robot iff pedestrian_speed > robot_speed.
std::vector<OrcaNeighbor> visible_neighbors(const OrcaAgent& agent,
                                            std::span<const OrcaAgent> others,
                                            const OrcaAgent& robot, double robot_speed,
                                            double pedestrian_speed, const OrcaParams& params);

std::vector<HalfPlane> orca_halfplanes(const OrcaAgent& agent,
                                       std::span<const OrcaNeighbor> neighbors,
                                       const OrcaParams& params);

/// Velocity within the max_speed disk closest to pref_velocity that satisfies
/// every half-plane; when none exists, the velocity minimizing the largest
/// constraint violation.
Vec2 solve_velocity_lp(std::span<const HalfPlane> halfplanes, Vec2 pref_velocity,
                       double max_speed);

struct CrowdSnapshot {
  std::span<const OrcaAgent> pedestrians;
  const OrcaAgent* robot = nullptr;       // null when there is no robot
  double robot_speed = 0.0;               // sagittal speed used by the visibility rule
  std::span<const CircleEntity> statics;  // zero-velocity, non-reciprocating
};

/// Preferred velocity toward the current goal, capped so the agent does not
/// overshoot within one substep.
Vec2 preferred_velocity(const OrcaAgent& agent, const OrcaParams& params);

/// Advances every pedestrian by one substep of params.dt. All velocities are
/// computed from the pre-step snapshot before any position changes.
std::vector<OrcaAgent> step_pedestrians(const CrowdSnapshot& crowd, const OrcaParams& params);

/// Single-threaded reference for step_pedestrians; results are bit-identical.
std::vector<OrcaAgent> step_pedestrians_serial(const CrowdSnapshot& crowd,
                                               const OrcaParams& params);

}  // namespace emonav
