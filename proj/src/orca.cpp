#include "emonav/orca.hpp"

#include <algorithm>
#include <stdexcept>

namespace emonav {

void OrcaParams::validate() const {
  if (!(time_horizon > 0.0) || !(time_horizon_obst > 0.0) || !(neighbor_dist > 0.0) ||
      max_neighbors <= 0 || !(dt > 0.0) || !(arrival_threshold > 0.0)) {
    throw std::invalid_argument("ORCA parameters must all be positive");
  }
  if (!(safety_margin >= 0.0)) throw std::invalid_argument("ORCA safety_margin must be >= 0");
}

namespace {

constexpr double kEpsilon = 1e-10;

// Directed line; the feasible side is to the left of `direction`.
struct Line {
  Vec2 point;
  Vec2 direction;
};

Line to_line(const HalfPlane& h) { return {h.point, {h.normal.y, -h.normal.x}}; }
HalfPlane to_halfplane(const Line& l) { return {l.point, {-l.direction.y, l.direction.x}}; }

// Optimum on line `line_no` subject to lines [0, line_no) and the speed disk.
bool solve_on_line(const std::vector<Line>& lines, std::size_t line_no, double radius,
                   Vec2 opt_velocity, bool direction_opt, Vec2& result) {
  const Line& line = lines[line_no];
  const double dot_product = dot(line.point, line.direction);
  const double discriminant = dot_product * dot_product + radius * radius - norm_sq(line.point);
  if (discriminant < 0.0) return false;  // speed disk misses the line

  const double sqrt_disc = std::sqrt(discriminant);
  double t_left = -dot_product - sqrt_disc;
  double t_right = -dot_product + sqrt_disc;

  for (std::size_t i = 0; i < line_no; ++i) {
    const double denominator = cross(line.direction, lines[i].direction);
    const double numerator = cross(lines[i].direction, line.point - lines[i].point);
    if (std::fabs(denominator) <= kEpsilon) {
      if (numerator < 0.0) return false;  // parallel and infeasible
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    result = line.point + (dot(opt_velocity, line.direction) > 0.0 ? t_right : t_left) *
                              line.direction;
  } else {
    const double t = std::clamp(dot(line.direction, opt_velocity - line.point), t_left, t_right);
    result = line.point + t * line.direction;
  }
  return true;
}

// Incremental 2-D LP. Returns the index of the first infeasible line, or
// lines.size() on success.
std::size_t solve_lp2(const std::vector<Line>& lines, double radius, Vec2 opt_velocity,
                      bool direction_opt, Vec2& result) {
  if (direction_opt) {
    result = opt_velocity * radius;
  } else if (norm_sq(opt_velocity) > radius * radius) {
    result = normalized(opt_velocity) * radius;
  } else {
    result = opt_velocity;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) > 0.0) {
      const Vec2 previous = result;
      if (!solve_on_line(lines, i, radius, opt_velocity, direction_opt, result)) {
        result = previous;
        return i;
      }
    }
  }
  return lines.size();
}

// Minimizes the maximum violation over lines [begin_line, n) when the 2-D
// program is infeasible, by solving a projected program per violated line.
void solve_lp3(const std::vector<Line>& lines, std::size_t begin_line, double radius,
               Vec2& result) {
  double distance = 0.0;
  for (std::size_t i = begin_line; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) <= distance) continue;

    std::vector<Line> projected;
    projected.reserve(i);
    for (std::size_t j = 0; j < i; ++j) {
      Line line;
      const double determinant = cross(lines[i].direction, lines[j].direction);
      if (std::fabs(determinant) <= kEpsilon) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;  // same direction
        line.point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        line.point = lines[i].point +
                     (cross(lines[j].direction, lines[i].point - lines[j].point) / determinant) *
                         lines[i].direction;
      }
      line.direction = normalized(lines[j].direction - lines[i].direction);
      projected.push_back(line);
    }

    const Vec2 previous = result;
    const Vec2 opt{-lines[i].direction.y, lines[i].direction.x};
    if (solve_lp2(projected, radius, opt, true, result) < projected.size()) {
      // Only reachable through round-off; the previous result is feasible.
      result = previous;
    }
    distance = cross(lines[i].direction, lines[i].point - result);
  }
}

}  // namespace

std::vector<OrcaNeighbor> visible_neighbors(const OrcaAgent& agent,
                                            std::span<const OrcaAgent> others,
                                            const OrcaAgent& robot, double robot_speed,
                                            double pedestrian_speed, const OrcaParams& params) {
  struct Candidate {
    double dist_sq;
    std::size_t order;
    OrcaNeighbor neighbor;
  };
  const double range_sq = params.neighbor_dist * params.neighbor_dist;
  std::vector<Candidate> candidates;
  candidates.reserve(others.size() + 1);
  for (std::size_t i = 0; i < others.size(); ++i) {
    const double d = norm_sq(others[i].position - agent.position);
    if (d < range_sq) {
      candidates.push_back({d, i, {others[i].position, others[i].velocity, others[i].radius, true}});
    }
  }
  if (pedestrian_speed > robot_speed) {
    const double d = norm_sq(robot.position - agent.position);
    if (d < range_sq) {
      candidates.push_back({d, others.size(), {robot.position, robot.velocity, robot.radius, true}});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.dist_sq != b.dist_sq ? a.dist_sq < b.dist_sq : a.order < b.order;
  });
  const auto keep = std::min(candidates.size(), static_cast<std::size_t>(params.max_neighbors));
  std::vector<OrcaNeighbor> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(candidates[i].neighbor);
  return out;
}

std::vector<HalfPlane> orca_halfplanes(const OrcaAgent& agent,
                                       std::span<const OrcaNeighbor> neighbors,
                                       const OrcaParams& params) {
  std::vector<HalfPlane> out;
  out.reserve(neighbors.size());
  for (const auto& other : neighbors) {
    const double horizon = other.reciprocates ? params.time_horizon : params.time_horizon_obst;
    const double share = other.reciprocates ? 0.5 : 1.0;
    const double inv_horizon = 1.0 / horizon;

    const Vec2 rel_pos = other.position - agent.position;
    const Vec2 rel_vel = agent.velocity - other.velocity;
    const double dist_sq = norm_sq(rel_pos);
    const double combined = agent.radius + other.radius + params.safety_margin;
    const double combined_sq = combined * combined;

    Line line;
    Vec2 u;
    if (dist_sq > combined_sq) {
      // Vector from the truncation-circle center to the relative velocity.
      const Vec2 w = rel_vel - inv_horizon * rel_pos;
      const double w_len_sq = norm_sq(w);
      const double dot_product = dot(w, rel_pos);

      if (dot_product < 0.0 && dot_product * dot_product > combined_sq * w_len_sq) {
        // Closest boundary point lies on the truncation circle.
        const double w_len = std::sqrt(w_len_sq);
        const Vec2 unit_w = w / w_len;
        line.direction = {unit_w.y, -unit_w.x};
        u = (combined * inv_horizon - w_len) * unit_w;
      } else {
        const double leg = std::sqrt(dist_sq - combined_sq);
        if (cross(rel_pos, w) > 0.0) {
          line.direction = Vec2{rel_pos.x * leg - rel_pos.y * combined,
                                rel_pos.x * combined + rel_pos.y * leg} /
                           dist_sq;
        } else {
          line.direction = -Vec2{rel_pos.x * leg + rel_pos.y * combined,
                                 -rel_pos.x * combined + rel_pos.y * leg} /
                           dist_sq;
        }
        u = dot(rel_vel, line.direction) * line.direction - rel_vel;
      }
    } else {
      // Already overlapping: resolve within one substep.
      const double inv_dt = 1.0 / params.dt;
      const Vec2 w = rel_vel - inv_dt * rel_pos;
      const double w_len = norm(w);
      const Vec2 unit_w = w_len > kEpsilon ? w / w_len : Vec2{-1.0, 0.0};
      line.direction = {unit_w.y, -unit_w.x};
      u = (combined * inv_dt - w_len) * unit_w;
    }
    line.point = agent.velocity + share * u;
    out.push_back(to_halfplane(line));
  }
  return out;
}

Vec2 solve_velocity_lp(std::span<const HalfPlane> halfplanes, Vec2 pref_velocity,
                       double max_speed) {
  if (!(max_speed > 0.0)) throw std::invalid_argument("max_speed must be > 0");
  std::vector<Line> lines;
  lines.reserve(halfplanes.size());
  for (const auto& h : halfplanes) lines.push_back(to_line(h));
  Vec2 result;
  const std::size_t fail = solve_lp2(lines, max_speed, pref_velocity, false, result);
  if (fail < lines.size()) solve_lp3(lines, fail, max_speed, result);
  return result;
}

Vec2 preferred_velocity(const OrcaAgent& agent, const OrcaParams& params) {
  const Vec2 to_goal = agent.goal - agent.position;
  const double dist = norm(to_goal);
  if (dist <= 0.0) return {};
  const double speed = std::min(agent.pref_speed, dist / params.dt);
  return to_goal * (speed / dist);
}

namespace {

Vec2 solve_agent(const CrowdSnapshot& crowd, std::size_t index, const OrcaParams& params,
                 std::vector<OrcaAgent>& others_scratch) {
  const OrcaAgent& agent = crowd.pedestrians[index];
  others_scratch.clear();
  for (std::size_t j = 0; j < crowd.pedestrians.size(); ++j) {
    if (j != index) others_scratch.push_back(crowd.pedestrians[j]);
  }
  std::vector<OrcaNeighbor> neighbors;
  if (crowd.robot != nullptr) {
    neighbors = visible_neighbors(agent, others_scratch, *crowd.robot, crowd.robot_speed,
                                  agent.pref_speed, params);
  } else {
    OrcaAgent far_robot;
    neighbors = visible_neighbors(agent, others_scratch, far_robot, 0.0, 0.0, params);
  }
  const double range_sq = params.neighbor_dist * params.neighbor_dist;
  for (const auto& s : crowd.statics) {
    if (norm_sq(s.center - agent.position) < range_sq) {
      neighbors.push_back({s.center, {}, s.radius, false});
    }
  }
  const auto planes = orca_halfplanes(agent, neighbors, params);
  return solve_velocity_lp(planes, preferred_velocity(agent, params), agent.max_speed);
}

void commit(std::vector<OrcaAgent>& agents, const std::vector<Vec2>& velocities,
            const OrcaParams& params) {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    OrcaAgent& a = agents[i];
    a.velocity = velocities[i];
    a.position += velocities[i] * params.dt;
    if (norm(a.goal - a.position) < params.arrival_threshold) std::swap(a.goal, a.home);
  }
}

}  // namespace

std::vector<OrcaAgent> step_pedestrians(const CrowdSnapshot& crowd, const OrcaParams& params) {
  const auto n = static_cast<std::ptrdiff_t>(crowd.pedestrians.size());
  std::vector<Vec2> velocities(crowd.pedestrians.size());
#pragma omp parallel if (n >= 32)
  {
    std::vector<OrcaAgent> scratch;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      velocities[static_cast<std::size_t>(i)] =
          solve_agent(crowd, static_cast<std::size_t>(i), params, scratch);
    }
  }
  std::vector<OrcaAgent> next(crowd.pedestrians.begin(), crowd.pedestrians.end());
  commit(next, velocities, params);
  return next;
}

std::vector<OrcaAgent> step_pedestrians_serial(const CrowdSnapshot& crowd,
                                               const OrcaParams& params) {
  std::vector<Vec2> velocities(crowd.pedestrians.size());
  std::vector<OrcaAgent> scratch;
  for (std::size_t i = 0; i < crowd.pedestrians.size(); ++i) {
    velocities[i] = solve_agent(crowd, i, params, scratch);
  }
  std::vector<OrcaAgent> next(crowd.pedestrians.begin(), crowd.pedestrians.end());
  commit(next, velocities, params);
  return next;
}

}  // namespace emonav
