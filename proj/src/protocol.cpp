#include "emonav/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "emonav/trace.hpp"

namespace emonav {

using nlohmann::json;

json grid_spec_json(const EnvConfig& cfg) {
  const GridSpec& g = cfg.grid;
  return {{"K", g.beams},
          {"M", g.size},
          {"L", g.radius},
          {"N", g.stack_depth},
          {"layout", cfg.observation == GridLayout::Lgm ? "lgm" : "ogm"},
          {"shape", json::array({g.stack_depth, g.size, g.size})},
          {"values", json::array({0.0, 0.5, 1.0})}};
}

json step_result_json(const StepResult& r, const GridSpec& spec) {
  json margins = json::array();
  for (double m : r.info.pedestrian_margins) margins.push_back(m);
  json info = {{"step", r.info.step},
               {"time", r.info.time},
               {"d_all_min", r.info.d_all_min},
               {"d_static_min", r.info.d_static_min},
               {"pedestrian_margins", margins},
               {"intrusion", r.info.intrusion ? json(to_string(*r.info.intrusion)) : json(nullptr)}};
  json obs = {{"frames", flatten(r.observation)},
              {"shape", json::array({spec.stack_depth, spec.size, spec.size})},
              {"goal_state", json::array({r.goal.distance, r.goal.bearing})},
              {"last_action", json::array({r.last_action.speed, r.last_action.turn})}};
  return {{"ok", true},
          {"observation", obs},
          {"reward", to_json(r.reward)},
          {"done", to_string(r.done)},
          {"info", info}};
}

json error_json(const std::string& code, const std::string& message) {
  return {{"ok", false}, {"error", {{"code", code}, {"message", message}}}};
}

namespace {

struct ProtocolError : std::runtime_error {
  ProtocolError(std::string c, const std::string& m) : std::runtime_error(m), code(std::move(c)) {}
  std::string code;
};

void only_keys(const json& req, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : req.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ProtocolError(errc::kBadRequest, "unknown field '" + key + "'");
  }
}

}  // namespace

Session::Session(EnvConfig base) : base_(std::move(base)) { base_.validate(); }

std::string Session::handle_line(const std::string& line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::exception& e) {
    return error_json(errc::kBadJson, e.what()).dump();
  }
  try {
    return dispatch(req).dump();
  } catch (const ProtocolError& e) {
    return error_json(e.code, e.what()).dump();
  } catch (const std::exception& e) {
    return error_json(errc::kBadRequest, e.what()).dump();
  }
}

json Session::dispatch(const json& req) {
  if (closed_) throw ProtocolError(errc::kClosed, "session is closed");
  if (!req.is_object()) throw ProtocolError(errc::kBadRequest, "request must be a JSON object");
  if (!req.contains("cmd") || !req.at("cmd").is_string()) {
    throw ProtocolError(errc::kBadRequest, "missing string field 'cmd'");
  }
  const auto cmd = req.at("cmd").get<std::string>();
  if (cmd == "hello") {
    only_keys(req, {"cmd"});
    return {{"ok", true}, {"protocol", kProtocolVersion}, {"grid", grid_spec_json(base_)}};
  }
  if (cmd == "reset") return do_reset(req);
  if (cmd == "step") return do_step(req);
  if (cmd == "close") {
    only_keys(req, {"cmd"});
    closed_ = true;
    env_.reset();
    return {{"ok", true}, {"closed", true}};
  }
  throw ProtocolError(errc::kBadRequest, "unknown cmd '" + cmd + "'");
}

json Session::do_reset(const json& req) {
  only_keys(req, {"cmd", "seed", "config"});
  EnvConfig cfg = base_;
  if (req.contains("config")) {
    if (!req.at("config").is_object()) {
      throw ProtocolError(errc::kBadConfig, "'config' must be an object");
    }
    try {
      cfg = apply_overrides(base_, req.at("config"));
    } catch (const ConfigError& e) {
      throw ProtocolError(errc::kBadConfig, e.what());
    } catch (const json::exception& e) {
      throw ProtocolError(errc::kBadConfig, e.what());
    }
  }
  std::uint64_t seed = cfg.seed;
  if (req.contains("seed")) {
    if (!req.at("seed").is_number_unsigned()) {
      throw ProtocolError(errc::kBadRequest, "'seed' must be a non-negative integer");
    }
    seed = req.at("seed").get<std::uint64_t>();
  }
  try {
    auto env = std::make_unique<Environment>(cfg);
    const StepResult r = env->reset(seed);
    env_ = std::move(env);
    return step_result_json(r, cfg.grid);
  } catch (const ConfigError& e) {
    throw ProtocolError(errc::kBadConfig, e.what());
  }
}

json Session::do_step(const json& req) {
  if (!env_) throw ProtocolError(errc::kNotReset, "step before reset");
  if (env_->done() != DoneState::Running) {
    throw ProtocolError(errc::kEpisodeDone, "episode ended with " + to_string(env_->done()));
  }
  only_keys(req, {"cmd", "action"});
  if (!req.contains("action")) throw ProtocolError(errc::kBadAction, "missing 'action'");
  const json& a = req.at("action");
  if (!a.is_array() || a.size() != 2) {
    throw ProtocolError(errc::kBadAction, "action must be [v, dtheta]");
  }
  if (!a.at(0).is_number() || !a.at(1).is_number()) {
    throw ProtocolError(errc::kBadAction, "action entries must be numbers");
  }
  const double v = a.at(0).get<double>();
  const double w = a.at(1).get<double>();
  if (!std::isfinite(v) || !std::isfinite(w)) {
    throw ProtocolError(errc::kBadAction, "action entries must be finite");
  }
  return step_result_json(env_->step(v, w), env_->config().grid);
}

void serve_stream(std::istream& in, std::ostream& out, const EnvConfig& config) {
  Session session(config);
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << session.handle_line(line) << '\n';
    out.flush();
  }
}

namespace {

constexpr std::size_t kMaxLine = 16u << 20;

bool send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

/// Reads up to the next '\n'. False on EOF or error.
bool read_line(int fd, std::string& buffer, std::string& line) {
  for (;;) {
    const auto pos = buffer.find('\n');
    if (pos != std::string::npos) {
      line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    if (buffer.size() > kMaxLine) return false;
    char chunk[65536];
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

void serve_connection(int fd, const EnvConfig& config) {
  Session session(config);
  std::string buffer;
  std::string line;
  while (!session.closed() && read_line(fd, buffer, line)) {
    if (line.empty()) continue;
    if (!send_all(fd, session.handle_line(line) + "\n")) break;
  }
  ::close(fd);
}

}  // namespace

void serve_tcp(const std::string& host, int port, const EnvConfig& config,
               const std::atomic<bool>& stop, const std::function<void(int)>& on_bound) {
  config.validate();
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listener);
    throw std::runtime_error("bad IPv4 listen address '" + host + "'");
  }
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listener, 16) != 0) {
    const std::string msg = std::strerror(errno);
    ::close(listener);
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port) + ": " + msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  const int bound = ntohs(addr.sin_port);
  spdlog::info("serving on {}:{}", host, bound);
  if (on_bound) on_bound(bound);

  std::vector<std::thread> workers;
  std::vector<int> clients;
  std::mutex mu;
  while (!stop.load()) {
    pollfd p{listener, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready <= 0) continue;
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    {
      std::lock_guard lock(mu);
      clients.push_back(fd);
    }
    workers.emplace_back([fd, &config] { serve_connection(fd, config); });
  }
  {
    std::lock_guard lock(mu);
    for (int fd : clients) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : workers) t.join();
  ::close(listener);
}

LineClient::LineClient(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw std::runtime_error("cannot resolve " + host);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int rc = fd_ < 0 ? -1 : ::connect(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    const std::string msg = std::strerror(errno);
    if (fd_ >= 0) ::close(fd_);
    throw std::runtime_error("cannot connect to " + host + ":" + std::to_string(port) + ": " + msg);
  }
}

LineClient::~LineClient() {
  if (fd_ >= 0) ::close(fd_);
}

std::string LineClient::request(const std::string& line) {
  if (!send_all(fd_, line + "\n")) throw std::runtime_error("send failed");
  std::string reply;
  if (!read_line(fd_, buffer_, reply)) throw std::runtime_error("connection closed");
  return reply;
}

}  // namespace emonav
