#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lip_oracle.hpp"

namespace oracle {

struct Disk {
  double x, y, vx, vy, r;
};

struct DwaCandidate {
  double v, turn, cost, clearance;
  bool admissible;
};

struct DwaSetup {
  double x, y, heading, speed;  // robot state
  double gx, gy;                // goal
  std::vector<Disk> disks;
  double robot_r = 0.3;
  int nv = 9, nt = 11, horizon = 5, checks = 4;
  double wh = 1.0, wc = 2.0, wv = 1.5, cap = 1.0, goal_tol = 0.1;
  double vmax = 0.4, tmax = 0.2, T = 0.4, H = 1.02, g = 9.81;
};

// Scores one held action with a direct re-derivation of the rollout.
inline DwaCandidate dwa_score(const DwaSetup& s, double v, double turn) {
  constexpr double pi = std::numbers::pi;
  double x = s.x, y = s.y, th = s.heading, vs = s.speed;
  double clear = std::numeric_limits<double>::infinity();
  bool reached = false;
  for (int k = 0; k < s.horizon && !reached; ++k) {
    const double adv = lip_step(vs, v, s.T, s.H, s.g).com_advance;
    th = std::remainder(th + turn, 2 * pi);
    const double nx = x + adv * std::cos(th);
    const double ny = y + adv * std::sin(th);
    for (int c = 1; c <= s.checks; ++c) {
      const double f = static_cast<double>(c) / s.checks;
      const double px = x + (nx - x) * f;
      const double py = y + (ny - y) * f;
      const double t = (k + f) * s.T;
      for (const auto& d : s.disks) {
        clear = std::min(clear, std::hypot(px - (d.x + d.vx * t), py - (d.y + d.vy * t)) - d.r -
                                    s.robot_r);
      }
      if (std::hypot(s.gx - px, s.gy - py) <= s.goal_tol) {
        reached = true;
        break;
      }
    }
    x = nx;
    y = ny;
    vs = v;
  }
  double err = 0.0;
  if (!reached) err = std::fabs(std::remainder(std::atan2(s.gy - y, s.gx - x) - th, 2 * pi));
  const double capped = std::min(clear, s.cap);
  const double cost = s.wh * err / pi + s.wc * (1.0 - capped / s.cap) + s.wv * (1.0 - v / s.vmax);
  return {v, turn, cost, clear, clear > 0.0};
}

inline std::vector<DwaCandidate> dwa_grid(const DwaSetup& s) {
  std::vector<DwaCandidate> out;
  for (int i = 0; i < s.nv; ++i) {
    for (int j = 0; j < s.nt; ++j) {
      const double v = s.vmax * i / (s.nv - 1);
      const double turn = -s.tmax + 2.0 * s.tmax * j / (s.nt - 1);
      out.push_back(dwa_score(s, v, turn));
    }
  }
  return out;
}

inline double dwa_min_cost(const DwaSetup& s) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : dwa_grid(s)) {
    if (c.admissible) best = std::min(best, c.cost);
  }
  return best;
}

}  // namespace oracle
