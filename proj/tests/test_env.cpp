#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "emonav/env.hpp"
#include "emonav/planners.hpp"
#include "support/gen.hpp"

using namespace emonav;

namespace {

constexpr double kPi = std::numbers::pi;

RewardBreakdown reward_at(Vec2 robot_center, double prev_goal_distance,
                          const std::vector<CircleEntity>& entities, Vec2 goal = {4.0, 0.0}) {
  return compute_reward(prev_goal_distance, make_robot(robot_center, 0.3), entities, goal,
                        EmotionProfile{}, RewardParams{});
}

EnvConfig empty_config() {
  EnvConfig c;
  c.n_pedestrians = 0;
  c.n_statics = 0;
  return c;
}

// One static of radius 0.4 centered at (-2.7, 0), dead ahead of the start.
EnvConfig wall_ahead_config() {
  EnvConfig c = empty_config();
  c.n_statics = 1;
  c.static_region = {-2.7, -2.7, 0.0, 0.0};
  c.static_radius_range = {0.4, 0.4};
  return c;
}

}  // namespace

TEST(Reward, CollisionBranch) {
  // Pedestrian of radius 0.3 whose edge is 0.25 m from the robot center.
  const std::vector<CircleEntity> e{make_pedestrian({0.55, 0.0}, 0.3, Emotion::Happy)};
  const auto r = reward_at({0.0, 0.0}, 4.0, e);
  EXPECT_EQ(r.collision, -0.6);
  EXPECT_EQ(r.emotion, 0.0);
  EXPECT_DOUBLE_EQ(r.total, r.collision + r.goal);
}

TEST(Reward, CollisionAtExactlyRobotRadius) {
  const std::vector<CircleEntity> e{make_static({0.5, 0.0}, 0.25)};
  EXPECT_EQ(reward_at({0.0, 0.0}, 4.0, e).collision, -0.6);
}

TEST(Reward, StaticDiscomfortBranch) {
  // Margin 0.45 < 0.2 + 0.3.
  const std::vector<CircleEntity> e{make_static({0.75, 0.0}, 0.3)};
  const auto r = reward_at({0.0, 0.0}, 4.0, e);
  EXPECT_EQ(r.collision, -0.1);
  EXPECT_EQ(r.emotion, 0.0);
}

TEST(Reward, StaticOutsideBand) {
  const std::vector<CircleEntity> e{make_static({0.85, 0.0}, 0.3)};
  EXPECT_EQ(reward_at({0.0, 0.0}, 4.0, e).collision, 0.0);
}

TEST(Reward, ProgressTerm) {
  const auto r = reward_at({0.1, 0.0}, 4.0, {});
  EXPECT_NEAR(r.goal, 0.03, 1e-15);
  EXPECT_NEAR(r.total, 0.03, 1e-15);
}

TEST(Reward, ProgressNegativeWhenReceding) {
  const auto r = reward_at({-0.1, 0.0}, 4.0, {});
  EXPECT_NEAR(r.goal, -0.03, 1e-15);
}

TEST(Reward, GoalBranch) {
  EXPECT_EQ(reward_at({3.95, 0.0}, 0.2, {}).goal, 0.5);
  EXPECT_EQ(reward_at({3.905, 0.0}, 0.2, {}).goal, 0.5);
  EXPECT_NE(reward_at({3.85, 0.0}, 0.2, {}).goal, 0.5);
}

TEST(Reward, EmotionBranchPerEmotion) {
  // Margin 0.7: inside Negative (0.8), outside Neutral (0.65) and Happy (0.5).
  for (const auto& [emotion, expect] : std::vector<std::pair<Emotion, double>>{
           {Emotion::Happy, 0.0}, {Emotion::Neutral, 0.0}, {Emotion::Negative, -0.1}}) {
    const std::vector<CircleEntity> e{make_pedestrian({1.0, 0.0}, 0.3, emotion)};
    EXPECT_EQ(reward_at({0.0, 0.0}, 4.0, e).emotion, expect) << to_string(emotion);
  }
  // Margin 0.45: inside Happy's 0.5 band.
  const std::vector<CircleEntity> happy{make_pedestrian({0.75, 0.0}, 0.3, Emotion::Happy)};
  EXPECT_EQ(reward_at({0.0, 0.0}, 4.0, happy).emotion, -0.1);
}

TEST(Reward, SingleCountStaticAndNeutral) {
  const std::vector<CircleEntity> e{make_static({0.0, 0.75}, 0.3),
                                    make_pedestrian({0.0, -0.9}, 0.3, Emotion::Neutral)};
  // Neutral margin 0.6 < 0.65.
  const auto r = reward_at({0.0, 0.0}, 4.0, e);
  EXPECT_EQ(r.collision, -0.1);
  EXPECT_EQ(r.emotion, 0.0);
  EXPECT_TRUE(r.discomfort_counted_once);
  EXPECT_DOUBLE_EQ(r.total - r.goal, -0.1);
}

TEST(Reward, SingleCountAdversarialProperty) {
  gen::Rng rng(41);
  int both_zones = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<CircleEntity> e;
    const Vec2 robot{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    // A static and a pedestrian whose bands both reach near the robot.
    const double rs = rng.uniform(0.2, 0.4);
    const double ds = rng.uniform(0.25, 0.55) + rs;
    e.push_back(make_static(robot + ds * unit_from_angle(rng.uniform(-kPi, kPi)), rs));
    const double dp = rng.uniform(0.25, 0.85) + 0.3;
    e.push_back(make_pedestrian(robot + dp * unit_from_angle(rng.uniform(-kPi, kPi)), 0.3,
                                rng.emotion()));
    // One walking step moves the robot at most 0.4 * 0.4 m.
    const double prev = norm(Vec2{4.0, 0.0} - robot) + rng.uniform(-0.16, 0.16);
    const auto r = compute_reward(prev, make_robot(robot, 0.3), e, {4.0, 0.0}, EmotionProfile{},
                                  RewardParams{});
    const double penalty = r.collision + r.emotion;
    EXPECT_NE(penalty, -0.2);
    EXPECT_FALSE(r.collision == -0.1 && r.emotion == -0.1);
    EXPECT_GE(r.total, -0.7 - 1e-12);
    EXPECT_LE(r.total, 0.5 + 1e-12);
    if (r.discomfort_counted_once) ++both_zones;
  }
  EXPECT_GT(both_zones, 100);
}

TEST(Reward, IntrusionAttributedToNearest) {
  const std::vector<CircleEntity> e{make_static({0.0, 0.75}, 0.3),
                                    make_pedestrian({0.0, -0.85}, 0.3, Emotion::Negative)};
  const auto slot = discomfort_intrusion(make_robot({0.0, 0.0}, 0.3), e, EmotionProfile{}, 0.3);
  ASSERT_TRUE(slot);
  EXPECT_EQ(*slot, IdtSlot::Static);
  const std::vector<CircleEntity> f{make_static({0.0, 0.79}, 0.3),
                                    make_pedestrian({0.0, -0.72}, 0.3, Emotion::Negative)};
  EXPECT_EQ(discomfort_intrusion(make_robot({0.0, 0.0}, 0.3), f, EmotionProfile{}, 0.3),
            IdtSlot::Negative);
  EXPECT_FALSE(discomfort_intrusion(make_robot({0.0, 0.0}, 0.3), {}, EmotionProfile{}, 0.3));
}

TEST(GoalState, Examples) {
  auto g = goal_state(Pose{{-4.0, 0.0}, 0.0}, {4.0, 0.0});
  EXPECT_DOUBLE_EQ(g.distance, 8.0);
  EXPECT_DOUBLE_EQ(g.bearing, 0.0);
  g = goal_state(Pose{{0.0, 0.0}, 0.0}, {-2.0, 0.0});
  EXPECT_DOUBLE_EQ(g.bearing, kPi);
  g = goal_state(Pose{{0.0, 0.0}, kPi / 2}, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(g.distance, 1.0);
  EXPECT_NEAR(g.bearing, 0.0, 1e-15);
}

TEST(GoalState, BearingMatchesRotatedVector) {
  gen::Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Pose p{rng.point(-5.0, 5.0), rng.uniform(-kPi, kPi)};
    const Vec2 goal = rng.point(-5.0, 5.0);
    const auto g = goal_state(p, goal);
    const Vec2 ego = to_ego_frame(p, goal);
    EXPECT_NEAR(g.distance * std::cos(g.bearing), ego.x, 1e-9);
    EXPECT_NEAR(g.distance * std::sin(g.bearing), ego.y, 1e-9);
    EXPECT_GT(g.bearing, -kPi);
    EXPECT_LE(g.bearing, kPi);
  }
}

TEST(Emotion, ScheduleBoundaries) {
  EXPECT_EQ(scheduled_emotion(Emotion::Happy, 2.0, 1.9), Emotion::Happy);
  EXPECT_EQ(scheduled_emotion(Emotion::Happy, 2.0, 2.0), Emotion::Neutral);
  EXPECT_EQ(scheduled_emotion(Emotion::Happy, 2.0, 4.0), Emotion::Negative);
  EXPECT_EQ(scheduled_emotion(Emotion::Happy, 2.0, 6.0), Emotion::Happy);
  EXPECT_EQ(scheduled_emotion(Emotion::Negative, 2.0, 2.0), Emotion::Happy);
}

TEST(Emotion, ScheduleAtSubstepTimes) {
  // Sim time accumulates as k * 0.05; the switch must land on k = 40.
  EXPECT_EQ(scheduled_emotion(Emotion::Happy, 2.0, 39 * 0.05), Emotion::Happy);
  EXPECT_EQ(scheduled_emotion(Emotion::Happy, 2.0, 40 * 0.05), Emotion::Neutral);
  EXPECT_EQ(scheduled_emotion(Emotion::Happy, 2.0, 120 * 0.05), Emotion::Happy);
}

TEST(Emotion, FixedRandomIsIdentity) {
  EmotionSchedule s;
  std::vector<Pedestrian> peds(3);
  peds[0].emotion = Emotion::Negative;
  peds[1].emotion = Emotion::Happy;
  for (double t : {0.0, 1.9, 2.0, 6.0, 100.0}) {
    advance_emotions(s, t, peds);
    EXPECT_EQ(peds[0].emotion, Emotion::Negative);
    EXPECT_EQ(peds[1].emotion, Emotion::Happy);
    EXPECT_EQ(peds[2].emotion, Emotion::Neutral);
  }
}

TEST(Emotion, AlternatingTouchesOnlyDesignated) {
  EmotionSchedule s;
  s.mode = EmotionMode::Alternating;
  s.designated = 1;
  std::vector<Pedestrian> peds(3);
  peds[0].emotion = Emotion::Negative;
  advance_emotions(s, 2.0, peds);
  EXPECT_EQ(peds[0].emotion, Emotion::Negative);
  EXPECT_EQ(peds[1].emotion, Emotion::Neutral);
  EXPECT_EQ(peds[2].emotion, Emotion::Neutral);
}

TEST(DiscountedReturn, Examples) {
  EXPECT_EQ(discounted_return(std::vector<double>{}), 0.0);
  EXPECT_EQ(discounted_return(std::vector<double>{1.0}), 1.0);
  EXPECT_DOUBLE_EQ(discounted_return(std::vector<double>{0.5, 0.5}, 0.99), 0.995);
}

TEST(Env, EmptySceneReset) {
  Environment env(empty_config());
  const auto r = env.reset(3);
  EXPECT_DOUBLE_EQ(r.goal.distance, 8.0);
  EXPECT_DOUBLE_EQ(r.goal.bearing, 0.0);
  ASSERT_EQ(r.observation.frames.size(), 9u);
  for (const auto& f : r.observation.frames) {
    EXPECT_EQ(f.cells.size(), 10000u);
    EXPECT_TRUE(std::all_of(f.cells.begin(), f.cells.end(),
                            [](CellClass c) { return c == CellClass::Free; }));
  }
  EXPECT_EQ(r.done, DoneState::Running);
}

TEST(Env, SameSeedSameResult) {
  Environment a{EnvConfig{}};
  Environment b{EnvConfig{}};
  const auto ra = a.reset(11);
  const auto rb = b.reset(11);
  EXPECT_EQ(flatten(ra.observation), flatten(rb.observation));
  for (int k = 0; k < 10; ++k) {
    const auto sa = a.step(0.4, 0.05);
    const auto sb = b.step(0.4, 0.05);
    EXPECT_EQ(flatten(sa.observation), flatten(sb.observation));
    EXPECT_EQ(sa.reward, sb.reward);
    EXPECT_EQ(sa.info.pedestrian_margins, sb.info.pedestrian_margins);
  }
  EXPECT_EQ(a.trace(), b.trace());
}

TEST(Env, DifferentSeedsDiffer) {
  Environment a{EnvConfig{}};
  a.reset(1);
  const auto w1 = a.world().statics;
  a.reset(2);
  EXPECT_NE(w1, a.world().statics);
}

TEST(Env, DefaultSpawnRanges) {
  Environment env{EnvConfig{}};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    env.reset(seed);
    const World& w = env.world();
    ASSERT_EQ(w.statics.size(), 3u);
    ASSERT_EQ(w.pedestrians.size(), 5u);
    for (const auto& s : w.statics) {
      EXPECT_GE(s.center.x, -3.0);
      EXPECT_LE(s.center.x, 3.0);
      EXPECT_GE(s.center.y, -1.5);
      EXPECT_LE(s.center.y, 1.5);
      EXPECT_GE(s.radius, 0.2);
      EXPECT_LE(s.radius, 0.4);
    }
    for (const auto& p : w.pedestrians) {
      const double r = norm(p.agent.position);
      EXPECT_GE(r, 3.5 - 1e-12);
      EXPECT_LE(r, 4.5 + 1e-12);
      EXPECT_EQ(p.agent.goal, -p.agent.position);
    }
  }
}

TEST(Env, StepBeforeResetThrows) {
  Environment env{EnvConfig{}};
  try {
    env.step(0.4, 0.0);
    FAIL();
  } catch (const EnvError& e) {
    EXPECT_STREQ(e.what(), "not_reset");
  }
}

TEST(Env, CollisionTerminates) {
  Environment env(wall_ahead_config());
  env.reset(0);
  StepResult r;
  int steps = 0;
  do {
    r = env.step(0.4, 0.0);
    ++steps;
  } while (r.done == DoneState::Running && steps < 50);
  EXPECT_EQ(r.done, DoneState::Collision);
  EXPECT_EQ(r.reward.collision, -0.6);
  EXPECT_LE(r.info.d_all_min, 0.3);
  try {
    env.step(0.4, 0.0);
    FAIL();
  } catch (const EnvError& e) {
    EXPECT_STREQ(e.what(), "episode_done");
  }
}

TEST(Env, CollisionIffMarginAtMostRadius) {
  Environment env(wall_ahead_config());
  env.reset(0);
  for (const auto& row : env.trace().rows) EXPECT_EQ(row.done, DoneState::Running);
  while (env.done() == DoneState::Running) {
    const auto r = env.step(0.4, 0.0);
    EXPECT_EQ(r.done == DoneState::Collision, r.info.d_all_min <= 0.3);
  }
}

TEST(Env, GoalTerminates) {
  EnvConfig c = empty_config();
  c.robot_start = {0.0, 0.0};
  c.robot_goal = {1.0, 0.0};
  Environment env(c);
  const Policy greedy = greedy_policy_factory()();
  StepResult r = env.reset(0);
  while (r.done == DoneState::Running) {
    const Action a = greedy(env, r);
    r = env.step(a.speed, a.turn);
  }
  EXPECT_EQ(r.done, DoneState::Goal);
  EXPECT_EQ(r.reward.goal, 0.5);
  EXPECT_LE(r.goal.distance, 0.1);
}

TEST(Env, TimeoutTerminates) {
  EnvConfig c = empty_config();
  c.timeout_steps = 3;
  Environment env(c);
  env.reset(0);
  EXPECT_EQ(env.step(0.0, 0.0).done, DoneState::Running);
  EXPECT_EQ(env.step(0.0, 0.0).done, DoneState::Running);
  EXPECT_EQ(env.step(0.0, 0.0).done, DoneState::Timeout);
}

TEST(Env, ActionsAreClamped) {
  Environment env(empty_config());
  env.reset(0);
  const auto r = env.step(9.0, -9.0);
  EXPECT_EQ(r.last_action.speed, 0.4);
  EXPECT_EQ(r.last_action.turn, -0.2);
}

TEST(Env, StackShiftsAfterStep) {
  Environment env{EnvConfig{}};
  const auto r0 = env.reset(4);
  for (std::size_t i = 1; i < r0.observation.frames.size(); ++i) {
    EXPECT_EQ(r0.observation.frames[i].cells, r0.observation.frames[0].cells);
  }
  const auto r1 = env.step(0.4, 0.0);
  const auto& f = r1.observation.frames;
  EXPECT_EQ(f[f.size() - 2].cells, r0.observation.frames.back().cells);
  EXPECT_EQ(f.back().frame_index, 1);
}

TEST(Env, ProgressTelescopes) {
  EnvConfig c = empty_config();
  Environment env(c);
  const Policy greedy = greedy_policy_factory()();
  StepResult r = env.reset(0);
  const double d0 = r.goal.distance;
  double sum = 0.0;
  double d_last = d0;
  while (r.done == DoneState::Running) {
    const Action a = greedy(env, r);
    r = env.step(a.speed, a.turn);
    if (r.reward.goal == 0.5) break;
    sum += r.reward.goal;
    d_last = r.goal.distance;
  }
  EXPECT_NEAR(sum, 0.3 * (d0 - d_last), 1e-12);
}

TEST(Env, RewardBoundsOverEpisodes) {
  Environment env{EnvConfig{}};
  gen::Rng rng(9);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    env.reset(seed);
    while (env.done() == DoneState::Running) {
      const auto r = env.step(rng.uniform(0.0, 0.4), rng.uniform(-0.2, 0.2));
      EXPECT_GE(r.reward.total, -0.7 - 1e-12);
      EXPECT_LE(r.reward.total, 0.5 + 1e-12);
      EXPECT_NE(r.reward.collision + r.reward.emotion, -0.2);
    }
  }
}

TEST(Env, DiscomfortSetsNest) {
  // Replays the same action stream under growing pedestrian bands.
  const double bands[] = {0.2, 0.35, 0.5};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EnvConfig base;
    Environment ref(base);
    const Policy greedy = greedy_policy_factory()();
    StepResult r = ref.reset(seed);
    std::vector<Action> actions;
    while (r.done == DoneState::Running) {
      actions.push_back(greedy(ref, r));
      r = ref.step(actions.back().speed, actions.back().turn);
    }
    std::vector<std::set<int>> flagged;
    for (double d : bands) {
      EnvConfig c = base;
      c.discomfort = EmotionProfile::uniform(d);
      Environment env(c);
      env.reset(seed);
      std::set<int> steps;
      for (std::size_t k = 0; k < actions.size(); ++k) {
        const auto s = env.step(actions[k].speed, actions[k].turn);
        const bool any = std::any_of(s.info.pedestrian_intrusions.begin(),
                                     s.info.pedestrian_intrusions.end(), [](bool b) { return b; });
        if (any) steps.insert(static_cast<int>(k));
      }
      flagged.push_back(steps);
    }
    EXPECT_TRUE(std::includes(flagged[1].begin(), flagged[1].end(), flagged[0].begin(),
                              flagged[0].end()));
    EXPECT_TRUE(std::includes(flagged[2].begin(), flagged[2].end(), flagged[1].begin(),
                              flagged[1].end()));
  }
}

TEST(Env, AlternatingDesignatedStartsHappy) {
  EnvConfig c;
  c.emotion_mode.mode = EmotionMode::Alternating;
  Environment env(c);
  env.reset(2);
  EXPECT_EQ(env.world().pedestrians[0].emotion, Emotion::Happy);
  for (int k = 0; k < 5; ++k) env.step(0.0, 0.0);
  EXPECT_EQ(env.world().pedestrians[0].emotion, Emotion::Neutral);
}

TEST(Env, InfeasibleSceneRejected) {
  EnvConfig c = empty_config();
  c.n_statics = 1;
  c.static_region = {-4.0, -4.0, 0.0, 0.0};
  Environment env(c);
  EXPECT_THROW(env.reset(0), ConfigError);
}
