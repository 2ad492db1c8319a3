// Command-line front end: bench, serve, run, export.
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "emonav/bench.hpp"
#include "emonav/config.hpp"
#include "emonav/planners.hpp"
#include "emonav/protocol.hpp"
#include "emonav/trace.hpp"

using namespace emonav;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

EnvConfig load_config(const std::string& path) {
  return path.empty() ? EnvConfig{} : load_env_config(path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return nlohmann::json::parse(in);
}

// --dwa wins; otherwise a "dwa" block of a wrapped config file.
DwaParams load_dwa(const std::string& dwa_path, const std::string& config_path) {
  if (!dwa_path.empty()) return dwa_params_from_json(read_json(dwa_path));
  if (!config_path.empty()) {
    const auto j = read_json(config_path);
    if (j.contains("env") && j.contains("dwa")) return dwa_params_from_json(j.at("dwa"));
  }
  return {};
}

PolicyFactory make_factory(const std::string& policy, const std::string& dwa_path,
                           const std::string& config_path) {
  if (policy == "dwa") return dwa_policy_factory(load_dwa(dwa_path, config_path));
  return greedy_policy_factory();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<Action> load_actions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open actions '" + path + "'");
  std::vector<Action> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Action a;
    if (!(ss >> a.speed >> a.turn)) throw std::runtime_error("bad action line: " + line);
    out.push_back(a);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emonav: crowd navigation simulator and benchmark harness"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  std::string config_path;
  std::string dwa_path;
  std::string policy = "dwa";
  std::string out_path;

  auto* bench = app.add_subcommand("bench", "run seeded trials and print a metrics report");
  TrialOptions trials;
  std::string trace_dir;
  bool serial = false;
  bench->add_option("--policy", policy)->check(CLI::IsMember({"dwa", "greedy"}));
  bench->add_option("--trials", trials.n)->check(CLI::PositiveNumber);
  bench->add_option("--seed", trials.base_seed, "seed of trial 0");
  bench->add_option("--config", config_path, "environment JSON");
  bench->add_option("--dwa", dwa_path, "DWA parameter JSON");
  bench->add_option("--out", out_path, "report path (stdout when omitted)");
  bench->add_option("--trace-dir", trace_dir, "write one jsonl trace per trial");
  bench->add_flag("--serial", serial, "single-threaded trial loop");
  std::string episodes_path;
  bench->add_option("--episodes", episodes_path, "per-trial csv: seed,done,steps,idt");

  auto* serve = app.add_subcommand("serve", "line-delimited JSON environment server");
  std::string listen;
  bool use_stdio = false;
  serve->add_option("--listen", listen, "host:port");
  serve->add_flag("--stdio", use_stdio, "serve one session on stdin/stdout");
  serve->add_option("--config", config_path, "environment JSON");

  auto* run = app.add_subcommand("run", "run one episode and write its trace");
  std::uint64_t seed = 0;
  std::string actions_path;
  std::string format = "jsonl";
  run->add_option("--seed", seed);
  run->add_option("--policy", policy)->check(CLI::IsMember({"dwa", "greedy"}));
  run->add_option("--actions", actions_path, "replay 'v dtheta' lines instead of a policy");
  run->add_option("--config", config_path, "environment JSON");
  run->add_option("--dwa", dwa_path, "DWA parameter JSON");
  run->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_option("--out", out_path, "trace path (stdout when omitted)");

  auto* exp = app.add_subcommand("export", "convert a jsonl trace");
  std::string trace_path;
  exp->add_option("--trace", trace_path, "input jsonl trace")->required();
  exp->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
  exp->add_option("--out", out_path, "output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*bench) {
      const EnvConfig cfg = load_config(config_path);
      if (!trace_dir.empty()) trials.trace_dir = trace_dir;
      const auto factory = make_factory(policy, dwa_path, config_path);
      std::vector<EpisodeSummary> eps;
      const MetricsReport r = serial ? run_trials_serial(factory, cfg, trials, &eps)
                                     : run_trials(factory, cfg, trials, &eps);
      write_text(out_path, format_report(r));
      if (!episodes_path.empty()) {
        std::string csv = "seed,done,steps,idt_static,idt_happy,idt_neutral,idt_negative\n";
        for (const auto& e : eps) {
          csv += std::to_string(e.seed) + "," + to_string(e.done) + "," + std::to_string(e.steps);
          for (int c : e.idt) csv += "," + std::to_string(c);
          csv += "\n";
        }
        write_text(episodes_path, csv);
      }
    } else if (*serve) {
      const EnvConfig cfg = load_config(config_path);
      if (use_stdio || listen.empty()) {
        serve_stream(std::cin, std::cout, cfg);
      } else {
        const auto colon = listen.rfind(':');
        if (colon == std::string::npos) throw std::runtime_error("--listen expects host:port");
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        serve_tcp(listen.substr(0, colon), std::stoi(listen.substr(colon + 1)), cfg, g_stop,
                  [](int port) { std::cout << "listening " << port << std::endl; });
      }
    } else if (*run) {
      Environment env(load_config(config_path));
      if (actions_path.empty()) {
        const Policy p = make_factory(policy, dwa_path, config_path)();
        run_episode(env, p, seed);
      } else {
        const auto actions = load_actions(actions_path);
        env.reset(seed);
        for (const Action& a : actions) {
          if (env.done() != DoneState::Running) break;
          env.step(a.speed, a.turn);
        }
      }
      write_text(out_path, format_trace(env.trace(), trace_format_from_string(format)));
    } else if (*exp) {
      const EpisodeTrace t = load_trace_jsonl(trace_path);
      write_text(out_path, format_trace(t, trace_format_from_string(format)));
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
