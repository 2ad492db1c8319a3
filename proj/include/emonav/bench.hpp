#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emonav/env.hpp"
#include "emonav/planners.hpp"

namespace emonav {

struct EpisodeSummary {
  std::uint64_t seed = 0;
  DoneState done = DoneState::Running;
  int steps = 0;
  std::array<int, 4> idt{};  // static, happy, neutral, negative
  bool policy_error = false;
};

struct MetricsReport {
  double sr = 0.0;
  double nt_mean = 0.0;  // s, successful episodes only
  double nt_std = 0.0;   // s, population std over successful episodes
  int dt = 0;
  std::array<int, 4> idt{};
  int n_trials = 0;
  std::string config_hash;
  bool operator==(const MetricsReport&) const = default;
};

MetricsReport aggregate_metrics(std::span<const EpisodeSummary> episodes, double step_time,
                                const std::string& config_hash);

nlohmann::json to_json(const MetricsReport& r);
MetricsReport metrics_from_json(const nlohmann::json& j);
/// Canonical serialized form, newline-terminated.
std::string format_report(const MetricsReport& r);

/// Resets `env` with `seed` and steps it with `policy` until done. A policy
/// exception ends the episode as a failure.
EpisodeSummary run_episode(Environment& env, const Policy& policy, std::uint64_t seed);

struct TrialOptions {
  int n = 500;
  std::uint64_t base_seed = 0;
  std::optional<std::string> trace_dir;  // one jsonl per trial when set
};

/// Trial t runs with seed base_seed + t, on its own Environment.
MetricsReport run_trials(const PolicyFactory& factory, const EnvConfig& config,
                         const TrialOptions& options,
                         std::vector<EpisodeSummary>* episodes = nullptr);

/// Single-threaded reference for run_trials; results are identical.
MetricsReport run_trials_serial(const PolicyFactory& factory, const EnvConfig& config,
                                const TrialOptions& options,
                                std::vector<EpisodeSummary>* episodes = nullptr);

}  // namespace emonav
