#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <thread>

#include "json.hpp"
#include "twinbench/bridge.hpp"
#include "twinbench/errors.hpp"
#include "twinbench/generator.hpp"
#include "twinbench/replay.hpp"

using namespace twinbench;

namespace {

struct FixtureLine {
  std::string name;
  std::string message;
};

std::vector<FixtureLine> load_fixture(const std::string& file) {
  std::ifstream in(std::string(TWINBENCH_FIXTURE_DIR) + "/" + file);
  EXPECT_TRUE(in) << file;
  std::vector<FixtureLine> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    out.push_back({j.at("name").get<std::string>(), j.at("message").get<std::string>()});
  }
  return out;
}

/// Records what the wrapped bridge was asked, so tests can compare it with
/// what the client decoded.
class Recording final : public Policy {
 public:
  explicit Recording(Policy& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  PolicyKind kind() const override { return inner_.kind(); }
  PolicyMode mode() const override { return inner_.mode(); }
  void begin_episode(const EpisodeContext& ctx) override { inner_.begin_episode(ctx); }
  PolicyOutput act(const Observation& obs) override {
    seen.push_back(obs);
    return inner_.act(obs);
  }
  void end_episode(const EpisodeResult& r) override { inner_.end_episode(r); }

  std::vector<Observation> seen;

 private:
  Policy& inner_;
};

struct Loopback {
  EpisodeResult result;
  std::string client_error;
};

/// Runs one episode against a bridge listener with `client` on its own thread.
Loopback run_loopback(const Scenario& s, const HDMapModel& m, double tick_timeout,
                      const std::function<void(BridgeClient&)>& client, std::vector<Observation>* seen = nullptr) {
  auto bridge = serve_bridge_policy({"127.0.0.1", 0}, tick_timeout);
  Loopback out;
  std::thread th([&] {
    try {
      BridgeClient c("127.0.0.1", bridge->port());
      client(c);
    } catch (const std::exception& e) {
      out.client_error = e.what();
    }
  });
  EvalConfig cfg;
  cfg.policy_timeout_s = tick_timeout;
  Recording rec(*bridge);
  out.result = run_episode(s, m, rec, cfg, 0).first;
  if (seen) *seen = std::move(rec.seen);
  th.join();
  return out;
}

/// Drains the connection until done or close.
void drain(BridgeClient& c) {
  while (auto line = c.read_line()) {
    if (validate_bridge_message(*line) == BridgeMessageType::done) return;
  }
}

std::pair<Scenario, HDMapModel> straight_case() {
  GeneratorSpec g;
  g.behavior = SubBehavior::STR;
  g.seed = 3;
  return generate_synthetic(g);
}

}  // namespace

TEST(BridgeFixtures, ValidCorpusIsAccepted) {
  const auto lines = load_fixture("bridge_valid.jsonl");
  ASSERT_GE(lines.size(), 5u);
  std::set<BridgeMessageType> types;
  for (const auto& f : lines) {
    BridgeMessageType t{};
    EXPECT_NO_THROW(t = validate_bridge_message(f.message)) << f.name;
    types.insert(t);
    switch (t) {
      case BridgeMessageType::hello: EXPECT_NO_THROW(decode_hello(f.message)) << f.name; break;
      case BridgeMessageType::obs: EXPECT_NO_THROW(decode_obs(f.message)) << f.name; break;
      case BridgeMessageType::done: EXPECT_NO_THROW(decode_done(f.message)) << f.name; break;
      default: EXPECT_NO_THROW(decode_reply(f.message)) << f.name;
    }
  }
  EXPECT_EQ(types.size(), 5u);
}

TEST(BridgeFixtures, InvalidCorpusIsRejected) {
  const auto lines = load_fixture("bridge_invalid.jsonl");
  ASSERT_GE(lines.size(), 20u);
  for (const auto& f : lines) EXPECT_THROW(validate_bridge_message(f.message), ParseError) << f.name;
}

TEST(BridgeFixtures, ServerMessagesAreNotReplies) {
  for (const auto& f : load_fixture("bridge_valid.jsonl")) {
    const auto t = validate_bridge_message(f.message);
    if (t == BridgeMessageType::hello || t == BridgeMessageType::obs || t == BridgeMessageType::done)
      EXPECT_THROW(decode_reply(f.message), ParseError) << f.name;
  }
}

TEST(BridgeCodec, RepliesRoundTrip) {
  const PolicyOutput c = ControlCommand{-0.3, 0.25, 0.0};
  EXPECT_EQ(decode_reply(encode_reply(c)), c);
  WaypointPlan plan;
  for (int k = 1; k <= 20; ++k) plan.points.push_back({0.1 * k + 1e-13, -7.0 / 3.0});
  EXPECT_EQ(decode_reply(encode_reply(plan)), PolicyOutput{plan});
  EXPECT_EQ(encode_reply(c).back(), '\n');
  EXPECT_EQ(validate_bridge_message(encode_reply(plan)), BridgeMessageType::waypoints);
}

TEST(BridgeCodec, ServerMessagesRoundTrip) {
  const auto [s, m] = straight_case();
  EpisodeContext ctx{s.scenario_id, s.ego.route_waypoints, VehicleParams{}, kTickHz, 0};
  const HelloMessage h = decode_hello(encode_hello(ctx));
  EXPECT_EQ(h.scenario_id, s.scenario_id);
  EXPECT_EQ(h.route, s.ego.route_waypoints);
  EXPECT_EQ(h.vehicle.wheelbase, ctx.vehicle.wheelbase);

  EgoState ego;
  ego.pose = {3.75, -40.123456789, 1.2345};
  ego.speed = 6.1;
  Observation obs = build_observation(s, 30, ego, s.ego.route_waypoints, 85.0);
  obs.tick = 30;
  Observation back = decode_obs(encode_obs(obs));
  for (auto& sig : obs.signals) sig.stop_line = {};
  EXPECT_EQ(back, obs);

  EpisodeResult r;
  r.scenario_id = "x";
  r.rc = 0.123;
  r.infractions.push_back({InfractionKind::off_road, 7, 0.65, false});
  r.termination = Termination::off_road;
  r.duration_ticks = 9;
  EXPECT_EQ(decode_done(encode_done(r)), r);
}

TEST(BridgeCodec, Endpoints) {
  EXPECT_EQ(parse_endpoint("localhost:8000").port, 8000);
  EXPECT_EQ(parse_endpoint("::1:9").host, "::1");
  EXPECT_THROW(parse_endpoint("nohost"), ArgumentError);
  EXPECT_THROW(parse_endpoint("h:-1"), ArgumentError);
  EXPECT_THROW(parse_endpoint("h:x"), ArgumentError);
}

TEST(BridgeLoopback, ZeroControlEchoTimesOut) {
  auto [s, m] = straight_case();
  for (auto& t : s.tracks)
    if (t.track_id == s.ego.agent_id) t.samples.front().speed = 0.0;
  const auto out = run_loopback(s, m, 5.0, [](BridgeClient& c) {
    c.run([](const Observation&) { return PolicyOutput{ControlCommand{0.0, 0.0, 0.0}}; });
  });
  EXPECT_EQ(out.client_error, "");
  EXPECT_EQ(out.result.termination, Termination::timeout);
  for (const auto& i : out.result.infractions) EXPECT_NE(i.kind, InfractionKind::policy_failure);
}

TEST(BridgeLoopback, MirroredFollowerMatchesBuiltin) {
  const auto [s, m] = straight_case();
  const EvalConfig cfg;
  auto builtin = builtin_pid_follower(8.0);
  const EpisodeResult expected = run_episode(s, m, *builtin, cfg, 0).first;
  const auto out = run_loopback(s, m, 5.0, [](BridgeClient& c) {
    c.run([](const Observation& o) { return PolicyOutput{follow_route_plan(o, 8.0)}; });
  });
  EXPECT_EQ(out.client_error, "");
  EXPECT_EQ(out.result, expected);
}

TEST(BridgeLoopback, ClientSeesWhatTheServerSent) {
  const auto [s, m] = straight_case();
  std::vector<Observation> decoded, sent_log;
  run_loopback(
      s, m, 5.0,
      [&](BridgeClient& c) {
        c.run([&](const Observation& o) {
          decoded.push_back(o);
          return PolicyOutput{ControlCommand{0.0, 0.0, 1.0}};
        });
      },
      &sent_log);
  ASSERT_EQ(decoded.size(), sent_log.size());
  ASSERT_FALSE(decoded.empty());
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    Observation sent = sent_log[i];
    for (auto& sig : sent.signals) sig.stop_line = {};
    sent.ego.steering_angle = sent.ego.acceleration = 0.0;
    EXPECT_EQ(decoded[i], sent) << i;
  }
}

TEST(BridgeLoopback, DoubleReplyIsProtocolViolation) {
  const auto [s, m] = straight_case();
  const auto out = run_loopback(s, m, 5.0, [](BridgeClient& c) {
    c.read_line();
    c.read_line();
    const std::string r = encode_reply(ControlCommand{0.0, 0.5, 0.0});
    c.send_raw(r + r);
    drain(c);
  });
  EXPECT_EQ(out.result.termination, Termination::protocol_violation);
  ASSERT_FALSE(out.result.infractions.empty());
  EXPECT_EQ(out.result.infractions.back().kind, InfractionKind::policy_failure);
}

TEST(BridgeLoopback, MalformedReplyIsProtocolViolation) {
  const auto [s, m] = straight_case();
  const auto out = run_loopback(s, m, 5.0, [](BridgeClient& c) {
    c.read_line();
    c.read_line();
    c.send_raw("{\"type\":\"control\",\"steer\":3,\"throttle\":0,\"brake\":0}\n");
    drain(c);
  });
  EXPECT_EQ(out.result.termination, Termination::protocol_violation);
}

TEST(BridgeLoopback, DisconnectEndsEpisode) {
  const auto [s, m] = straight_case();
  const auto out = run_loopback(s, m, 5.0, [](BridgeClient& c) {
    c.read_line();
    c.read_line();
    c.close();
  });
  EXPECT_EQ(out.result.termination, Termination::policy_disconnect);
}

TEST(BridgeLoopback, SilentClientTimesOut) {
  const auto [s, m] = straight_case();
  const auto out = run_loopback(s, m, 0.2, [](BridgeClient& c) {
    c.read_line();
    c.read_line();
    drain(c);
  });
  EXPECT_EQ(out.result.termination, Termination::policy_timeout);
  EXPECT_EQ(out.result.duration_ticks, 0);
}

TEST(BridgeLoopback, ListenerServesSuccessiveEpisodes) {
  const auto [s, m] = straight_case();
  auto bridge = serve_bridge_policy({"127.0.0.1", 0}, 5.0);
  const EvalConfig cfg;
  for (int k = 0; k < 2; ++k) {
    std::thread th([port = bridge->port()] {
      BridgeClient c("127.0.0.1", port);
      c.run([](const Observation& o) { return PolicyOutput{follow_route_plan(o, 8.0)}; });
    });
    const auto r = run_episode(s, m, *bridge, cfg, 0).first;
    th.join();
    EXPECT_TRUE(r.success) << k;
    EXPECT_EQ(bridge->observations_sent(), bridge->replies_received());
  }
}
