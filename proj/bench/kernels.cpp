// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "emonav/bench.hpp"
#include "emonav/grid.hpp"
#include "emonav/lidar.hpp"
#include "emonav/orca.hpp"
#include "emonav/planners.hpp"

using namespace emonav;

namespace {

std::vector<CircleEntity> scene(int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-5.5, 5.5);
  std::vector<CircleEntity> out;
  while (static_cast<int>(out.size()) < n) {
    const Vec2 c{pos(rng), pos(rng)};
    if (norm(c) < 1.0) continue;
    out.push_back(out.size() % 2 ? make_static(c, 0.3)
                                 : make_pedestrian(c, 0.3, static_cast<Emotion>(out.size() % 3)));
  }
  return out;
}

std::vector<OrcaAgent> crowd(int n) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  std::vector<OrcaAgent> out(static_cast<std::size_t>(n));
  for (auto& a : out) {
    a.position = {pos(rng), pos(rng)};
    a.goal = {pos(rng), pos(rng)};
    a.home = a.position;
  }
  return out;
}

void BM_RayCast(benchmark::State& st) {
  const auto es = scene(static_cast<int>(st.range(0)));
  const ScanSpec spec = GridSpec{}.scan_spec();
  for (auto _ : st) benchmark::DoNotOptimize(ray_cast({}, es, spec));
}

void BM_RayCastSerial(benchmark::State& st) {
  const auto es = scene(static_cast<int>(st.range(0)));
  const ScanSpec spec = GridSpec{}.scan_spec();
  for (auto _ : st) benchmark::DoNotOptimize(ray_cast_serial({}, es, spec));
}

void BM_Lgm(benchmark::State& st) {
  const auto es = scene(static_cast<int>(st.range(0)));
  const GridSpec g;
  const auto scan = ray_cast({}, es, g.scan_spec());
  for (auto _ : st) benchmark::DoNotOptimize(build_lgm(scan, es, {}, g));
}

void BM_LgmSerial(benchmark::State& st) {
  const auto es = scene(static_cast<int>(st.range(0)));
  const GridSpec g;
  const auto scan = ray_cast({}, es, g.scan_spec());
  for (auto _ : st) benchmark::DoNotOptimize(build_lgm_serial(scan, es, {}, g));
}

void BM_Ogm(benchmark::State& st) {
  const auto es = scene(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(build_ogm(es, {}, GridSpec{}));
}

void BM_OgmSerial(benchmark::State& st) {
  const auto es = scene(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(build_ogm_serial(es, {}, GridSpec{}));
}

void BM_Orca(benchmark::State& st) {
  const auto peds = crowd(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(step_pedestrians({peds, nullptr, 0.0, {}}, {}));
}

void BM_OrcaSerial(benchmark::State& st) {
  const auto peds = crowd(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    benchmark::DoNotOptimize(step_pedestrians_serial({peds, nullptr, 0.0, {}}, {}));
  }
}

DwaScene dwa_scene() {
  DwaScene s;
  for (const auto& e : scene(8)) s.obstacles.push_back({e.center, {0.5, 0.0}, e.radius});
  return s;
}

void BM_Dwa(benchmark::State& st) {
  const DwaScene s = dwa_scene();
  for (auto _ : st) benchmark::DoNotOptimize(dwa_plan({}, s, {4.0, 0.0}, {}, {}));
}

void BM_DwaSerial(benchmark::State& st) {
  const DwaScene s = dwa_scene();
  for (auto _ : st) benchmark::DoNotOptimize(dwa_plan_serial({}, s, {4.0, 0.0}, {}, {}));
}

void BM_Trials(benchmark::State& st) {
  TrialOptions o;
  o.n = static_cast<int>(st.range(0));
  const auto f = dwa_policy_factory({});
  for (auto _ : st) benchmark::DoNotOptimize(run_trials(f, EnvConfig{}, o));
}

void BM_TrialsSerial(benchmark::State& st) {
  TrialOptions o;
  o.n = static_cast<int>(st.range(0));
  const auto f = dwa_policy_factory({});
  for (auto _ : st) benchmark::DoNotOptimize(run_trials_serial(f, EnvConfig{}, o));
}

}  // namespace

BENCHMARK(BM_RayCast)->Arg(8)->Arg(32);
BENCHMARK(BM_RayCastSerial)->Arg(8)->Arg(32);
BENCHMARK(BM_Lgm)->Arg(8)->Arg(32);
BENCHMARK(BM_LgmSerial)->Arg(8)->Arg(32);
BENCHMARK(BM_Ogm)->Arg(8)->Arg(32);
BENCHMARK(BM_OgmSerial)->Arg(8)->Arg(32);
BENCHMARK(BM_Orca)->Arg(16)->Arg(128);
BENCHMARK(BM_OrcaSerial)->Arg(16)->Arg(128);
BENCHMARK(BM_Dwa);
BENCHMARK(BM_DwaSerial);
BENCHMARK(BM_Trials)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsSerial)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
