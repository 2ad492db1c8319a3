#pragma once

#include <atomic>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "emonav/env.hpp"

namespace emonav {

/// Error codes carried in {"ok":false,"error":{"code","message"}}.
namespace errc {
inline constexpr const char* kNotReset = "not_reset";
inline constexpr const char* kEpisodeDone = "episode_done";
inline constexpr const char* kBadAction = "bad_action";
inline constexpr const char* kBadJson = "bad_json";
inline constexpr const char* kBadRequest = "bad_request";
inline constexpr const char* kBadConfig = "bad_config";
inline constexpr const char* kClosed = "closed";
}  // namespace errc

inline constexpr int kProtocolVersion = 1;

nlohmann::json grid_spec_json(const EnvConfig& cfg);
nlohmann::json step_result_json(const StepResult& r, const GridSpec& spec);
nlohmann::json error_json(const std::string& code, const std::string& message);

/// One client session: a line in, a line out. Errors never end the session;
/// only "close" does.
class Session {
 public:
  explicit Session(EnvConfig base);

  /// Response to one request line, without the trailing newline.
  std::string handle_line(const std::string& line);
  bool closed() const { return closed_; }

 private:
  nlohmann::json dispatch(const nlohmann::json& req);
  nlohmann::json do_reset(const nlohmann::json& req);
  nlohmann::json do_step(const nlohmann::json& req);

  EnvConfig base_;
  std::unique_ptr<Environment> env_;
  bool closed_ = false;
};

/// Serves one session over a stream pair until close or EOF.
void serve_stream(std::istream& in, std::ostream& out, const EnvConfig& config);

/// Listens on host:port (port 0 picks a free one, reported via `on_bound`),
/// one thread per connection, until `stop` becomes true.
void serve_tcp(const std::string& host, int port, const EnvConfig& config,
               const std::atomic<bool>& stop, const std::function<void(int)>& on_bound = {});

/// Minimal blocking line client, used by tests and the CLI.
class LineClient {
 public:
  LineClient(const std::string& host, int port);
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  std::string request(const std::string& line);

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace emonav
