#include "emonav/bench.hpp"

#include <cmath>
#include <exception>
#include <filesystem>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "emonav/trace.hpp"

namespace emonav {

using nlohmann::json;

MetricsReport aggregate_metrics(std::span<const EpisodeSummary> episodes, double step_time,
                                const std::string& config_hash) {
  MetricsReport r;
  r.n_trials = static_cast<int>(episodes.size());
  r.config_hash = config_hash;
  int successes = 0;
  double sum = 0.0;
  for (const auto& e : episodes) {
    for (std::size_t k = 0; k < 4; ++k) r.idt[k] += e.idt[k];
    if (e.done == DoneState::Goal) {
      ++successes;
      sum += e.steps * step_time;
    }
  }
  r.dt = r.idt[0] + r.idt[1] + r.idt[2] + r.idt[3];
  if (r.n_trials > 0) r.sr = static_cast<double>(successes) / r.n_trials;
  if (successes > 0) {
    r.nt_mean = sum / successes;
    double ss = 0.0;
    for (const auto& e : episodes) {
      if (e.done != DoneState::Goal) continue;
      const double d = e.steps * step_time - r.nt_mean;
      ss += d * d;
    }
    r.nt_std = std::sqrt(ss / successes);
  }
  return r;
}

json to_json(const MetricsReport& r) {
  return {{"sr", r.sr},
          {"nt_mean", r.nt_mean},
          {"nt_std", r.nt_std},
          {"dt", r.dt},
          {"idt", {{"static", r.idt[0]}, {"happy", r.idt[1]}, {"neutral", r.idt[2]},
                   {"negative", r.idt[3]}}},
          {"n_trials", r.n_trials},
          {"config_hash", r.config_hash}};
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport r;
  r.sr = j.at("sr").get<double>();
  r.nt_mean = j.at("nt_mean").get<double>();
  r.nt_std = j.at("nt_std").get<double>();
  r.dt = j.at("dt").get<int>();
  const auto& idt = j.at("idt");
  r.idt = {idt.at("static").get<int>(), idt.at("happy").get<int>(), idt.at("neutral").get<int>(),
           idt.at("negative").get<int>()};
  r.n_trials = j.at("n_trials").get<int>();
  r.config_hash = j.at("config_hash").get<std::string>();
  return r;
}

std::string format_report(const MetricsReport& r) { return to_json(r).dump(2) + "\n"; }

EpisodeSummary run_episode(Environment& env, const Policy& policy, std::uint64_t seed) {
  EpisodeSummary s;
  s.seed = seed;
  StepResult last = env.reset(seed);
  while (last.done == DoneState::Running) {
    Action a;
    try {
      a = policy(env, last);
    } catch (const std::exception& e) {
      spdlog::warn("policy failed on seed {} at step {}: {}", seed, env.step_count(), e.what());
      s.policy_error = true;
      s.done = DoneState::Collision;
      s.steps = env.step_count();
      return s;
    }
    last = env.step(a.speed, a.turn);
    if (last.info.intrusion) ++s.idt[static_cast<std::size_t>(*last.info.intrusion)];
  }
  s.done = last.done;
  s.steps = env.step_count();
  return s;
}

namespace {

EpisodeSummary run_one(const PolicyFactory& factory, const EnvConfig& config,
                       const TrialOptions& options, int t) {
  const std::uint64_t seed = options.base_seed + static_cast<std::uint64_t>(t);
  Environment env(config);
  EpisodeSummary s;
  try {
    s = run_episode(env, factory(), seed);
  } catch (const std::exception& e) {
    spdlog::error("trial {} (seed {}) aborted: {}", t, seed, e.what());
    s.seed = seed;
    s.done = DoneState::Collision;
    s.policy_error = true;
    return s;
  }
  if (options.trace_dir) {
    const auto path = std::filesystem::path(*options.trace_dir) / fmt::format("trial_{:05d}.jsonl", t);
    export_episode(env.trace(), TraceFormat::Jsonl, path.string());
  }
  return s;
}

void prepare(const EnvConfig& config, const TrialOptions& options) {
  if (options.n < 1) throw std::invalid_argument("run_trials needs n >= 1");
  config.validate();
  if (options.trace_dir) std::filesystem::create_directories(*options.trace_dir);
}

}  // namespace

MetricsReport run_trials(const PolicyFactory& factory, const EnvConfig& config,
                         const TrialOptions& options, std::vector<EpisodeSummary>* episodes) {
  prepare(config, options);
  std::vector<EpisodeSummary> out(static_cast<std::size_t>(options.n));
#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < options.n; ++t) {
    out[static_cast<std::size_t>(t)] = run_one(factory, config, options, t);
  }
  auto report = aggregate_metrics(out, config.lip.step_time, config_hash(to_json(config)));
  if (episodes != nullptr) *episodes = std::move(out);
  return report;
}

MetricsReport run_trials_serial(const PolicyFactory& factory, const EnvConfig& config,
                                const TrialOptions& options, std::vector<EpisodeSummary>* episodes) {
  prepare(config, options);
  std::vector<EpisodeSummary> out;
  for (int t = 0; t < options.n; ++t) out.push_back(run_one(factory, config, options, t));
  auto report = aggregate_metrics(out, config.lip.step_time, config_hash(to_json(config)));
  if (episodes != nullptr) *episodes = std::move(out);
  return report;
}

}  // namespace emonav
