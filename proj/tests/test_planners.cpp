#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "emonav/planners.hpp"
#include "oracles/dwa_oracle.hpp"
#include "support/gen.hpp"

using namespace emonav;

namespace {

constexpr double kPi = std::numbers::pi;

LipState at(Vec2 p, double heading, double speed = 0.0) {
  LipState s;
  s.pose = {p, heading};
  s.sagittal_speed = speed;
  return s;
}

oracle::DwaSetup setup_for(const LipState& s, Vec2 goal, const DwaScene& scene,
                           const DwaParams& p) {
  oracle::DwaSetup o;
  o.x = s.pose.position.x;
  o.y = s.pose.position.y;
  o.heading = s.pose.heading;
  o.speed = s.sagittal_speed;
  o.gx = goal.x;
  o.gy = goal.y;
  for (const auto& d : scene.obstacles) {
    o.disks.push_back({d.position.x, d.position.y, d.velocity.x, d.velocity.y, d.radius});
  }
  o.robot_r = scene.robot_radius;
  o.nv = p.v_samples;
  o.nt = p.dtheta_samples;
  o.horizon = p.horizon_steps;
  o.checks = p.checks_per_step;
  o.wh = p.w_heading;
  o.wc = p.w_clearance;
  o.wv = p.w_velocity;
  o.cap = p.clearance_cap;
  o.goal_tol = p.goal_tolerance;
  return o;
}

DwaScene random_scene(gen::Rng& rng, int n) {
  DwaScene scene;
  while (static_cast<int>(scene.obstacles.size()) < n) {
    const Vec2 c = rng.point(-3.0, 3.0);
    if (norm(c) < 1.0) continue;
    const bool moving = rng.coin();
    const Vec2 v = moving ? rng.in_disk(1.2) : Vec2{};
    scene.obstacles.push_back({c, v, moving ? 0.3 : rng.uniform(0.2, 0.4)});
  }
  return scene;
}

}  // namespace

TEST(Dwa, CandidateGrid) {
  const auto c = dwa_candidates(DwaParams{}, LipParams{});
  ASSERT_EQ(c.size(), 99u);
  EXPECT_EQ(c.front().speed, 0.0);
  EXPECT_EQ(c.front().turn, -0.2);
  EXPECT_EQ(c.back().speed, 0.4);
  EXPECT_EQ(c.back().turn, 0.2);
  EXPECT_EQ(c[5].turn, 0.0);
}

TEST(Dwa, ParamsValidate) {
  DwaParams p;
  p.v_samples = 1;
  EXPECT_THROW(p.validate(), std::exception);
  p = {};
  p.horizon_steps = 0;
  EXPECT_THROW(p.validate(), std::exception);
  p = {};
  p.w_heading = p.w_clearance = p.w_velocity = 0.0;
  EXPECT_THROW(p.validate(), std::exception);
  p = {};
  p.w_velocity = -1.0;
  EXPECT_THROW(p.validate(), std::exception);
}

TEST(Dwa, ParamsJson) {
  DwaParams p;
  p.w_velocity = 0.7;
  const DwaParams back = dwa_params_from_json(to_json(p));
  EXPECT_EQ(back.w_velocity, 0.7);
  EXPECT_EQ(to_json(back), to_json(p));
  EXPECT_THROW(dwa_params_from_json({{"w_speed", 1.0}}), std::exception);
}

TEST(Dwa, GoalDeadAhead) {
  const DwaScene empty;
  const Action a = dwa_plan(at({-4.0, 0.0}, 0.0), empty, {4.0, 0.0}, DwaParams{}, LipParams{});
  EXPECT_EQ(a.speed, 0.4);
  EXPECT_EQ(a.turn, 0.0);
}

TEST(Dwa, GoalBehindTurnsAtBound) {
  const DwaScene empty;
  const DwaParams p;
  const LipState s = at({0.0, 0.0}, 0.0);
  const Vec2 goal{-4.0, 0.0};
  const Action a = dwa_plan(s, empty, goal, p, LipParams{});
  EXPECT_EQ(std::fabs(a.turn), 0.2);
  const auto o = setup_for(s, goal, empty, p);
  EXPECT_LE(oracle::dwa_score(o, a.speed, a.turn).cost, oracle::dwa_min_cost(o) + 1e-9);
}

TEST(Dwa, GoalBehindOffAxisTurnsTowardGoal) {
  const DwaScene empty;
  const Action a = dwa_plan(at({0.0, 0.0}, 0.0), empty, {-4.0, 0.5}, DwaParams{}, LipParams{});
  EXPECT_EQ(a.turn, 0.2);
  const Action b = dwa_plan(at({0.0, 0.0}, 0.0), empty, {-4.0, -0.5}, DwaParams{}, LipParams{});
  EXPECT_EQ(b.turn, -0.2);
}

TEST(Dwa, WallOfDisksForcesTurn) {
  DwaScene wall;
  for (double y : {-0.6, 0.0, 0.6}) wall.obstacles.push_back({{1.3, y}, {}, 0.3});
  const DwaParams p;
  const LipState s = at({0.0, 0.0}, 0.0, 0.4);
  const Vec2 goal{4.0, 0.0};
  const Action a = dwa_plan(s, wall, goal, p, LipParams{});
  EXPECT_NE(a.turn, 0.0);
  const Rollout r = dwa_rollout(s, a, wall, goal, p, LipParams{});
  EXPECT_GT(r.min_clearance, 0.0);
  const auto o = setup_for(s, goal, wall, p);
  EXPECT_LE(oracle::dwa_score(o, a.speed, a.turn).cost, oracle::dwa_min_cost(o) + 1e-9);
}

TEST(Dwa, RolloutMatchesOracle) {
  gen::Rng rng(17);
  const DwaParams p;
  for (int i = 0; i < 200; ++i) {
    const DwaScene scene = random_scene(rng, rng.integer(0, 6));
    const LipState s = at(rng.point(-0.5, 0.5), rng.uniform(-kPi, kPi), rng.uniform(0.0, 0.4));
    const Vec2 goal = rng.point(-4.0, 4.0);
    const Action a{rng.uniform(0.0, 0.4), rng.uniform(-0.2, 0.2)};
    const Rollout r = dwa_rollout(s, a, scene, goal, p, LipParams{});
    const auto o = oracle::dwa_score(setup_for(s, goal, scene, p), a.speed, a.turn);
    EXPECT_NEAR(r.cost, o.cost, 1e-9);
    if (std::isfinite(o.clearance)) EXPECT_NEAR(r.min_clearance, o.clearance, 1e-9);
    EXPECT_EQ(r.admissible, o.admissible);
  }
}

TEST(Dwa, PlanIsOracleOptimal) {
  gen::Rng rng(23);
  const DwaParams p;
  for (int i = 0; i < 100; ++i) {
    const DwaScene scene = random_scene(rng, rng.integer(1, 8));
    const LipState s = at({0.0, 0.0}, rng.uniform(-kPi, kPi), rng.uniform(0.0, 0.4));
    const Vec2 goal = rng.point(-4.0, 4.0);
    const auto o = setup_for(s, goal, scene, p);
    const double best = oracle::dwa_min_cost(o);
    const Action a = dwa_plan(s, scene, goal, p, LipParams{});
    if (std::isfinite(best)) {
      EXPECT_LE(oracle::dwa_score(o, a.speed, a.turn).cost, best + 1e-9);
    } else {
      EXPECT_EQ(a.speed, 0.0);
      EXPECT_EQ(std::fabs(a.turn), 0.2);
    }
  }
}

TEST(Dwa, WeightScalingInvariance) {
  gen::Rng rng(29);
  for (int i = 0; i < 100; ++i) {
    const DwaScene scene = random_scene(rng, rng.integer(0, 6));
    const LipState s = at({0.0, 0.0}, rng.uniform(-kPi, kPi), rng.uniform(0.0, 0.4));
    const Vec2 goal = rng.point(-4.0, 4.0);
    DwaParams p;
    const Action base = dwa_plan(s, scene, goal, p, LipParams{});
    for (double k : {0.25, 2.0, 8.0}) {
      DwaParams q = p;
      q.w_heading *= k;
      q.w_clearance *= k;
      q.w_velocity *= k;
      EXPECT_EQ(dwa_plan(s, scene, goal, q, LipParams{}), base) << "scale " << k;
    }
  }
}

TEST(Dwa, OutputWithinBounds) {
  gen::Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const DwaScene scene = random_scene(rng, rng.integer(0, 10));
    const LipState s = at(rng.point(-0.3, 0.3), rng.uniform(-kPi, kPi), rng.uniform(0.0, 0.4));
    const Action a = dwa_plan(s, scene, rng.point(-4.0, 4.0), DwaParams{}, LipParams{});
    EXPECT_GE(a.speed, 0.0);
    EXPECT_LE(a.speed, 0.4);
    EXPECT_LE(std::fabs(a.turn), 0.2);
  }
}

TEST(Dwa, AdmissibilitySoundness) {
  gen::Rng rng(37);
  const DwaParams p;
  for (int i = 0; i < 200; ++i) {
    const DwaScene scene = random_scene(rng, rng.integer(2, 10));
    const LipState s = at({0.0, 0.0}, rng.uniform(-kPi, kPi), rng.uniform(0.0, 0.4));
    const Vec2 goal = rng.point(-4.0, 4.0);
    bool any = false;
    for (const auto& c : dwa_candidates(p, LipParams{})) {
      any = any || dwa_rollout(s, c, scene, goal, p, LipParams{}).admissible;
    }
    const Action a = dwa_plan(s, scene, goal, p, LipParams{});
    if (any) EXPECT_GT(dwa_rollout(s, a, scene, goal, p, LipParams{}).min_clearance, 0.0);
  }
}

TEST(Dwa, ParallelMatchesSerial) {
  gen::Rng rng(41);
  for (int i = 0; i < 100; ++i) {
    const DwaScene scene = random_scene(rng, rng.integer(0, 10));
    const LipState s = at({0.0, 0.0}, rng.uniform(-kPi, kPi), rng.uniform(0.0, 0.4));
    const Vec2 goal = rng.point(-4.0, 4.0);
    EXPECT_EQ(dwa_plan(s, scene, goal, DwaParams{}, LipParams{}),
              dwa_plan_serial(s, scene, goal, DwaParams{}, LipParams{}));
  }
}

TEST(Dwa, EmptyWorldReachesGoalInSixtySteps) {
  EnvConfig c;
  c.n_pedestrians = 0;
  c.n_statics = 0;
  Environment env(c);
  const Policy dwa = dwa_policy_factory(DwaParams{})();
  StepResult r = env.reset(0);
  while (r.done == DoneState::Running) {
    const Action a = dwa(env, r);
    r = env.step(a.speed, a.turn);
  }
  EXPECT_EQ(r.done, DoneState::Goal);
  EXPECT_LE(env.step_count(), 60);
}

TEST(Dwa, SceneFromWorld) {
  World w;
  w.statics.push_back(make_static({1.0, 0.0}, 0.3));
  Pedestrian p;
  p.agent.position = {2.0, 0.0};
  p.agent.velocity = {-1.0, 0.0};
  w.pedestrians.push_back(p);
  const DwaScene s = make_dwa_scene(w, 0.3);
  ASSERT_EQ(s.obstacles.size(), 2u);
  EXPECT_EQ(s.obstacles[0].velocity, (Vec2{}));
  EXPECT_EQ(s.obstacles[1].velocity, (Vec2{-1.0, 0.0}));
  EXPECT_EQ(s.robot_radius, 0.3);
}

TEST(Greedy, Examples) {
  const LipParams lip;
  EXPECT_EQ(greedy_policy(at({0.0, 0.0}, 0.0), {4.0, 0.0}, lip), (Action{0.4, 0.0}));
  const Action b = greedy_policy(at({0.0, 0.0}, 0.0), {std::cos(0.1), std::sin(0.1)}, lip);
  EXPECT_EQ(b.speed, 0.4);
  EXPECT_NEAR(b.turn, 0.1, 1e-15);
  EXPECT_EQ(greedy_policy(at({0.0, 0.0}, 0.0), {-4.0, 0.0}, lip), (Action{0.0, 0.2}));
}
