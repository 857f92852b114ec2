#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "json.hpp"
#include "twinbench/metrics.hpp"
#include "twinbench/observation.hpp"
#include "twinbench/policy.hpp"

namespace twinbench {

// Wire format: one JSON object per '\n'-terminated line. The server sends
// hello, obs and done; the client answers each obs with control or waypoints.

enum class BridgeMessageType { hello, obs, done, control, waypoints };
std::string_view to_string(BridgeMessageType t);

inline constexpr int kMaxReplyPoints = 20;

/// Server -> client lines, newline included.
std::string encode_hello(const EpisodeContext& ctx);
std::string encode_obs(const Observation& obs);
std::string encode_done(const EpisodeResult& r);
/// Client -> server lines, newline included.
std::string encode_reply(const PolicyOutput& out);

/// Full schema check of one line (trailing newline optional). Throws
/// ParseError describing the first problem.
BridgeMessageType validate_bridge_message(std::string_view line);

/// Decodes a client reply; server messages are rejected as ParseError.
PolicyOutput decode_reply(std::string_view line);

struct HelloMessage {
  std::string scenario_id;
  int tick_hz = kTickHz;
  Polyline route;
  VehicleParams vehicle;
};
HelloMessage decode_hello(std::string_view line);
/// Signals carry no stop line on the wire; the decoded segment is zero.
Observation decode_obs(std::string_view line);
EpisodeResult decode_done(std::string_view line);

struct Endpoint {
  std::string host;
  int port = 0;
};
/// "host:port"; port 0 asks the OS for a free port.
Endpoint parse_endpoint(std::string_view text);

/// Policy whose decisions come from one external client per episode.
class BridgePolicy final : public Policy {
 public:
  /// Binds and listens immediately; throws Error when the address is unusable.
  BridgePolicy(const Endpoint& ep, double tick_timeout_s);
  ~BridgePolicy() override;

  std::string name() const override;
  PolicyKind kind() const override { return PolicyKind::bridge; }
  /// Kind of the most recent reply (clients may answer either way).
  PolicyMode mode() const override { return mode_; }

  void begin_episode(const EpisodeContext& ctx) override;
  PolicyOutput act(const Observation& obs) override;
  void end_episode(const EpisodeResult& result) override;

  int port() const { return port_; }
  std::size_t observations_sent() const { return sent_; }
  std::size_t replies_received() const { return received_; }

 private:
  struct Connection;

  Endpoint ep_;
  double timeout_s_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::unique_ptr<Connection> conn_;
  PolicyMode mode_ = PolicyMode::waypoints;
  std::size_t sent_ = 0;
  std::size_t received_ = 0;
};

std::unique_ptr<BridgePolicy> serve_bridge_policy(const Endpoint& ep, double tick_timeout_s = 10.0);

/// Minimal in-process client used by tests and the loopback self-check.
class BridgeClient {
 public:
  BridgeClient(const std::string& host, int port, double timeout_s = 10.0);
  ~BridgeClient();
  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  /// Next line without the newline; empty optional on orderly close.
  std::optional<std::string> read_line();
  void send_raw(std::string_view bytes);
  void close();

  /// Reads hello, then answers every obs with `callback` until done.
  EpisodeResult run(const std::function<PolicyOutput(const Observation&)>& callback);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace twinbench
