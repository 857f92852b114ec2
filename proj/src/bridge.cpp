#include "twinbench/bridge.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>

#include "json_util.hpp"
#include "twinbench/vehicle.hpp"

namespace twinbench {

using detail::json;

namespace {

constexpr std::size_t kMaxLineBytes = 16u << 20;

std::string line_of(const json& j) { return j.dump() + "\n"; }

json parse_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) throw ParseError("message: embedded newline");
  json j = detail::parse_json(line, "message");
  if (!j.is_object()) throw ParseError("message: expected object");
  return j;
}

BridgeMessageType parse_type(const json& j) {
  const std::string t = detail::as_string(detail::require(j, "type", "message"), "message.type");
  if (t == "hello") return BridgeMessageType::hello;
  if (t == "obs") return BridgeMessageType::obs;
  if (t == "done") return BridgeMessageType::done;
  if (t == "control") return BridgeMessageType::control;
  if (t == "waypoints") return BridgeMessageType::waypoints;
  throw ParseError("message.type: unknown type '" + t + "'");
}

double in_range(const json& v, double lo, double hi, const std::string& ctx) {
  const double d = detail::as_number(v, ctx);
  if (d < lo || d > hi) throw ParseError(ctx + ": outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return d;
}

PolicyOutput reply_from(const json& j, BridgeMessageType t) {
  if (t == BridgeMessageType::control) {
    detail::reject_unknown_keys(j, {"type", "steer", "throttle", "brake"}, "control");
    return ControlCommand{in_range(detail::require(j, "steer", "control"), -1.0, 1.0, "control.steer"),
                          in_range(detail::require(j, "throttle", "control"), 0.0, 1.0, "control.throttle"),
                          in_range(detail::require(j, "brake", "control"), 0.0, 1.0, "control.brake")};
  }
  detail::reject_unknown_keys(j, {"type", "points"}, "waypoints");
  WaypointPlan plan{detail::as_points(detail::require(j, "points", "waypoints"), "waypoints.points")};
  if (plan.points.empty() || plan.points.size() > static_cast<std::size_t>(kMaxReplyPoints))
    throw ParseError("waypoints.points: expected 1.." + std::to_string(kMaxReplyPoints) + " points");
  return plan;
}

HelloMessage hello_from(const json& j) {
  detail::reject_unknown_keys(j, {"type", "scenario_id", "tick_hz", "route", "vehicle"}, "hello");
  HelloMessage h;
  h.scenario_id = detail::as_string(detail::require(j, "scenario_id", "hello"), "hello.scenario_id");
  h.tick_hz = static_cast<int>(detail::as_integer(detail::require(j, "tick_hz", "hello"), "hello.tick_hz"));
  if (h.tick_hz != kTickHz) throw ParseError("hello.tick_hz: must be 10");
  h.route = detail::as_points(detail::require(j, "route", "hello"), "hello.route");
  try {
    h.vehicle = vehicle_from_json(detail::require(j, "vehicle", "hello"));
  } catch (const InvariantError& e) {
    throw ParseError(std::string("hello.vehicle: ") + e.what());
  }
  return h;
}

Observation obs_from(const json& j) {
  detail::reject_unknown_keys(j, {"type", "tick", "ego", "agents", "signals", "route_remaining"}, "obs");
  Observation o;
  const long long tick = detail::as_integer(detail::require(j, "tick", "obs"), "obs.tick");
  if (tick < 0) throw ParseError("obs.tick: must be >= 0");
  o.tick = static_cast<int>(tick);

  const json& e = detail::require(j, "ego", "obs");
  detail::reject_unknown_keys(e, {"x", "y", "heading", "speed"}, "obs.ego");
  o.ego.pose.x = detail::as_number(detail::require(e, "x", "obs.ego"), "obs.ego.x");
  o.ego.pose.y = detail::as_number(detail::require(e, "y", "obs.ego"), "obs.ego.y");
  o.ego.pose.heading = in_range(detail::require(e, "heading", "obs.ego"), -kPi, kPi, "obs.ego.heading");
  o.ego.speed = in_range(detail::require(e, "speed", "obs.ego"), 0.0, INFINITY, "obs.ego.speed");

  for (const auto& a : detail::as_array(detail::require(j, "agents", "obs"), "obs.agents")) {
    detail::reject_unknown_keys(a, {"id", "cat", "x", "y", "heading", "l", "w", "speed"}, "obs.agents[]");
    AgentView v;
    v.track_id = detail::as_string(detail::require(a, "id", "agent"), "agent.id");
    v.category = parse_category(detail::as_string(detail::require(a, "cat", "agent"), "agent.cat"));
    v.box.center = {detail::as_number(detail::require(a, "x", "agent"), "agent.x"),
                    detail::as_number(detail::require(a, "y", "agent"), "agent.y")};
    v.box.heading = in_range(detail::require(a, "heading", "agent"), -kPi, kPi, "agent.heading");
    v.box.length = detail::as_number(detail::require(a, "l", "agent"), "agent.l");
    v.box.width = detail::as_number(detail::require(a, "w", "agent"), "agent.w");
    if (!(v.box.length > 0.0 && v.box.width > 0.0)) throw ParseError("agent: l and w must be > 0");
    v.speed = in_range(detail::require(a, "speed", "agent"), 0.0, INFINITY, "agent.speed");
    o.agents.push_back(std::move(v));
  }
  for (const auto& s : detail::as_array(detail::require(j, "signals", "obs"), "obs.signals")) {
    detail::reject_unknown_keys(s, {"id", "state"}, "obs.signals[]");
    SignalView v;
    v.group_id = detail::as_string(detail::require(s, "id", "signal"), "signal.id");
    v.state = parse_signal_state(detail::as_string(detail::require(s, "state", "signal"), "signal.state"));
    o.signals.push_back(std::move(v));
  }
  o.route_remaining = detail::as_points(detail::require(j, "route_remaining", "obs"), "obs.route_remaining");
  return o;
}

EpisodeResult done_from(const json& j) {
  detail::reject_unknown_keys(j, {"type", "result"}, "done");
  try {
    return result_from_json(detail::require(j, "result", "done"));
  } catch (const InvariantError& e) {
    throw ParseError(std::string("done.result: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("done.result: ") + e.what());
  }
}

template <class T, class F>
T decode_as(std::string_view line, BridgeMessageType want, F&& f) {
  const json j = parse_line(line);
  const BridgeMessageType t = parse_type(j);
  if (t != want)
    throw ParseError("message: expected '" + std::string(to_string(want)) + "', got '" + std::string(to_string(t)) +
                     "'");
  return f(j);
}

// ---------------------------------------------------------------------------
// Sockets

int remaining_ms(std::chrono::steady_clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
  return static_cast<int>(std::max<long long>(0, left.count()));
}

std::chrono::steady_clock::time_point deadline_after(double seconds) {
  return std::chrono::steady_clock::now() +
         std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
}

enum class WaitResult { ready, timeout, closed };

WaitResult wait_readable(int fd, std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    pollfd p{fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc < 0) {
      if (errno == EINTR) continue;
      return WaitResult::closed;
    }
    if (rc == 0) return WaitResult::timeout;
    if (p.revents & (POLLIN | POLLHUP | POLLERR)) return WaitResult::ready;
  }
}

/// Buffered line reader and writer over one connected socket.
class LineSocket {
 public:
  explicit LineSocket(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~LineSocket() { close(); }
  LineSocket(const LineSocket&) = delete;
  LineSocket& operator=(const LineSocket&) = delete;

  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void write_all(std::string_view bytes) {
    while (!bytes.empty()) {
      const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw PolicyError(PolicyErrorKind::disconnect, std::string("bridge: send failed: ") + std::strerror(errno));
      }
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  /// nullopt on timeout; throws disconnect on EOF before a full line.
  std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline, bool* eof = nullptr) {
    for (;;) {
      if (auto pos = buf_.find('\n'); pos != std::string::npos) {
        std::string line = buf_.substr(0, pos);
        buf_.erase(0, pos + 1);
        return line;
      }
      if (buf_.size() > kMaxLineBytes) throw PolicyError(PolicyErrorKind::protocol, "bridge: line too long");
      const WaitResult w = wait_readable(fd_, deadline);
      if (w == WaitResult::timeout) return std::nullopt;
      if (w == WaitResult::closed || !fill()) {
        if (eof) {
          *eof = true;
          return std::nullopt;
        }
        throw PolicyError(PolicyErrorKind::disconnect, "bridge: peer closed the connection");
      }
    }
  }

  /// True when bytes are buffered or already waiting on the socket.
  bool has_pending() {
    if (!buf_.empty()) return true;
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, 0) <= 0 || !(p.revents & POLLIN)) return false;
    char c;
    const ssize_t n = ::recv(fd_, &c, 1, MSG_PEEK | MSG_DONTWAIT);
    return n > 0;
  }

 private:
  bool fill() {
    char chunk[65536];
    for (;;) {
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      buf_.append(chunk, static_cast<std::size_t>(n));
      return true;
    }
  }

  int fd_;
  std::string buf_;
};

}  // namespace

std::string_view to_string(BridgeMessageType t) {
  switch (t) {
    case BridgeMessageType::hello: return "hello";
    case BridgeMessageType::obs: return "obs";
    case BridgeMessageType::done: return "done";
    case BridgeMessageType::control: return "control";
    case BridgeMessageType::waypoints: return "waypoints";
  }
  return "?";
}

std::string encode_hello(const EpisodeContext& ctx) {
  return line_of({{"type", "hello"},
                  {"scenario_id", ctx.scenario_id},
                  {"tick_hz", ctx.tick_hz},
                  {"route", detail::points_json(ctx.route)},
                  {"vehicle", vehicle_to_json(ctx.vehicle)}});
}

std::string encode_obs(const Observation& obs) {
  json agents = json::array();
  for (const auto& a : obs.agents) {
    agents.push_back({{"id", a.track_id},
                      {"cat", to_string(a.category)},
                      {"x", a.box.center.x},
                      {"y", a.box.center.y},
                      {"heading", a.box.heading},
                      {"l", a.box.length},
                      {"w", a.box.width},
                      {"speed", a.speed}});
  }
  json signals = json::array();
  for (const auto& s : obs.signals) signals.push_back({{"id", s.group_id}, {"state", to_string(s.state)}});
  return line_of({{"type", "obs"},
                  {"tick", obs.tick},
                  {"ego",
                   {{"x", obs.ego.pose.x},
                    {"y", obs.ego.pose.y},
                    {"heading", obs.ego.pose.heading},
                    {"speed", obs.ego.speed}}},
                  {"agents", agents},
                  {"signals", signals},
                  {"route_remaining", detail::points_json(obs.route_remaining)}});
}

std::string encode_done(const EpisodeResult& r) { return line_of({{"type", "done"}, {"result", result_to_json(r)}}); }

std::string encode_reply(const PolicyOutput& out) {
  if (const auto* c = std::get_if<ControlCommand>(&out))
    return line_of({{"type", "control"}, {"steer", c->steer()}, {"throttle", c->throttle()}, {"brake", c->brake()}});
  return line_of({{"type", "waypoints"}, {"points", detail::points_json(std::get<WaypointPlan>(out).points)}});
}

BridgeMessageType validate_bridge_message(std::string_view line) {
  const json j = parse_line(line);
  const BridgeMessageType t = parse_type(j);
  switch (t) {
    case BridgeMessageType::hello: hello_from(j); break;
    case BridgeMessageType::obs: obs_from(j); break;
    case BridgeMessageType::done: done_from(j); break;
    case BridgeMessageType::control:
    case BridgeMessageType::waypoints: reply_from(j, t); break;
  }
  return t;
}

PolicyOutput decode_reply(std::string_view line) {
  const json j = parse_line(line);
  const BridgeMessageType t = parse_type(j);
  if (t != BridgeMessageType::control && t != BridgeMessageType::waypoints)
    throw ParseError("message: '" + std::string(to_string(t)) + "' is not a client reply");
  return reply_from(j, t);
}

HelloMessage decode_hello(std::string_view line) {
  return decode_as<HelloMessage>(line, BridgeMessageType::hello, hello_from);
}
Observation decode_obs(std::string_view line) { return decode_as<Observation>(line, BridgeMessageType::obs, obs_from); }
EpisodeResult decode_done(std::string_view line) {
  return decode_as<EpisodeResult>(line, BridgeMessageType::done, done_from);
}

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) throw ArgumentError("endpoint: expected host:port");
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  const std::string_view port = text.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), ep.port);
  if (ec != std::errc() || ptr != port.data() + port.size() || ep.port < 0 || ep.port > 65535)
    throw ArgumentError("endpoint: bad port '" + std::string(port) + "'");
  return ep;
}

// ---------------------------------------------------------------------------
// Server side

struct BridgePolicy::Connection {
  explicit Connection(int fd) : sock(fd) {}
  LineSocket sock;
};

BridgePolicy::BridgePolicy(const Endpoint& ep, double tick_timeout_s) : ep_(ep), timeout_s_(tick_timeout_s) {
  if (!(tick_timeout_s > 0.0)) throw ArgumentError("bridge: timeout must be > 0");
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw Error("bridge: cannot resolve '" + ep.host + "': " + ::gai_strerror(rc));
  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const bool ok = listen_fd_ >= 0 && ::bind(listen_fd_, res->ai_addr, res->ai_addrlen) == 0 &&
                  ::listen(listen_fd_, 4) == 0;
  ::freeaddrinfo(res);
  if (!ok) {
    const std::string why = std::strerror(errno);
    if (listen_fd_ >= 0) ::close(listen_fd_);
    throw Error("bridge: cannot listen on " + ep.host + ":" + port + ": " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

BridgePolicy::~BridgePolicy() {
  conn_.reset();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::string BridgePolicy::name() const { return "bridge:" + ep_.host + ":" + std::to_string(port_); }

void BridgePolicy::begin_episode(const EpisodeContext& ctx) {
  conn_.reset();
  sent_ = received_ = 0;
  const auto deadline = deadline_after(timeout_s_);
  if (wait_readable(listen_fd_, deadline) != WaitResult::ready)
    throw PolicyError(PolicyErrorKind::timeout, "bridge: no client connected in time");
  const int fd = ::accept(listen_fd_, nullptr, nullptr);
  if (fd < 0) throw PolicyError(PolicyErrorKind::disconnect, "bridge: accept failed");
  conn_ = std::make_unique<Connection>(fd);
  conn_->sock.write_all(encode_hello(ctx));
}

PolicyOutput BridgePolicy::act(const Observation& obs) {
  if (!conn_) throw PolicyError(PolicyErrorKind::disconnect, "bridge: no client");
  if (conn_->sock.has_pending()) throw PolicyError(PolicyErrorKind::protocol, "bridge: unsolicited client message");
  conn_->sock.write_all(encode_obs(obs));
  ++sent_;
  const auto line = conn_->sock.read_line(deadline_after(timeout_s_));
  if (!line) throw PolicyError(PolicyErrorKind::timeout, "bridge: no reply within the tick limit");
  PolicyOutput out;
  try {
    out = decode_reply(*line);
  } catch (const ParseError& e) {
    throw PolicyError(PolicyErrorKind::protocol, std::string("bridge: ") + e.what());
  }
  ++received_;
  if (conn_->sock.has_pending()) throw PolicyError(PolicyErrorKind::protocol, "bridge: more than one reply to an obs");
  mode_ = std::holds_alternative<ControlCommand>(out) ? PolicyMode::control : PolicyMode::waypoints;
  return out;
}

void BridgePolicy::end_episode(const EpisodeResult& result) {
  if (!conn_) return;
  try {
    conn_->sock.write_all(encode_done(result));
  } catch (const PolicyError&) {
  }
  conn_.reset();
}

std::unique_ptr<BridgePolicy> serve_bridge_policy(const Endpoint& ep, double tick_timeout_s) {
  return std::make_unique<BridgePolicy>(ep, tick_timeout_s);
}

// ---------------------------------------------------------------------------
// Client side

struct BridgeClient::Impl {
  std::unique_ptr<LineSocket> sock;
  double timeout_s;
};

BridgeClient::BridgeClient(const std::string& host, int port, double timeout_s)
    : impl_(std::make_unique<Impl>()) {
  impl_->timeout_s = timeout_s;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string p = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), p.c_str(), &hints, &res); rc != 0)
    throw Error("bridge client: cannot resolve '" + host + "': " + ::gai_strerror(rc));
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const bool ok = fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0;
  ::freeaddrinfo(res);
  if (!ok) {
    const std::string why = std::strerror(errno);
    if (fd >= 0) ::close(fd);
    throw Error("bridge client: cannot connect to " + host + ":" + p + ": " + why);
  }
  impl_->sock = std::make_unique<LineSocket>(fd);
}

BridgeClient::~BridgeClient() = default;

std::optional<std::string> BridgeClient::read_line() {
  bool eof = false;
  auto line = impl_->sock->read_line(deadline_after(impl_->timeout_s), &eof);
  if (!line && !eof) throw Error("bridge client: timed out waiting for the server");
  return line;
}

void BridgeClient::send_raw(std::string_view bytes) { impl_->sock->write_all(bytes); }

void BridgeClient::close() { impl_->sock->close(); }

EpisodeResult BridgeClient::run(const std::function<PolicyOutput(const Observation&)>& callback) {
  auto first = read_line();
  if (!first) throw Error("bridge client: server closed before hello");
  decode_hello(*first);
  for (;;) {
    auto line = read_line();
    if (!line) throw Error("bridge client: server closed before done");
    const BridgeMessageType t = validate_bridge_message(*line);
    if (t == BridgeMessageType::done) return decode_done(*line);
    if (t != BridgeMessageType::obs) throw ParseError("bridge client: unexpected '" + std::string(to_string(t)) + "'");
    const std::string reply = encode_reply(callback(decode_obs(*line)));
    validate_bridge_message(reply);
    send_raw(reply);
  }
}

}  // namespace twinbench
