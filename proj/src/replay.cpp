#include "twinbench/replay.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "twinbench/monitor.hpp"

namespace twinbench {

SignalState signal_state_at(const SignalGroup& g, int tick) {
  if (g.schedule.empty() || tick < g.schedule.front().first)
    throw ArgumentError("signal_state_at: tick " + std::to_string(tick) + " precedes the schedule of '" + g.group_id +
                        "'");
  auto it = std::upper_bound(g.schedule.begin(), g.schedule.end(), tick,
                             [](int t, const std::pair<int, SignalState>& e) { return t < e.first; });
  return std::prev(it)->second;
}

namespace {

std::vector<AgentView> agents_at(const Scenario& s, int world_tick, const std::string& skip) {
  std::vector<AgentView> out;
  for (const auto& track : s.tracks) {
    if (track.track_id == skip) continue;
    const auto st = track_state_at_tick(track, world_tick);
    if (!st) continue;
    out.push_back({track.track_id, track.category, track.box_at(st->pose), st->speed});
  }
  return out;
}

std::vector<SignalView> signals_at(const Scenario& s, int world_tick) {
  std::vector<SignalView> out;
  out.reserve(s.signals.size());
  for (const auto& g : s.signals) out.push_back({g.group_id, signal_state_at(g, world_tick), g.stop_line});
  return out;
}

Termination termination_for(PolicyErrorKind k) {
  switch (k) {
    case PolicyErrorKind::timeout: return Termination::policy_timeout;
    case PolicyErrorKind::protocol: return Termination::protocol_violation;
    case PolicyErrorKind::disconnect: return Termination::policy_disconnect;
  }
  return Termination::protocol_violation;
}

}  // namespace

Observation build_observation(const Scenario& s, int world_tick, const EgoState& ego, const Polyline& route_remaining,
                              double sensing_range) {
  Observation obs;
  obs.tick = world_tick;
  obs.ego = ego;
  obs.route_remaining = route_remaining;
  const Vec2 c = ego.pose.position();
  for (auto& a : agents_at(s, world_tick, s.ego.agent_id)) {
    if (distance(a.box.center, c) <= sensing_range) obs.agents.push_back(std::move(a));
  }
  obs.signals = signals_at(s, world_tick);
  return obs;
}

Polyline route_after(std::span<const Vec2> route, double s) {
  Polyline out;
  if (route.empty()) return out;
  const auto cum = cumulative_lengths(route);
  out.push_back(point_at_arclength(route, s));
  for (std::size_t i = 0; i < route.size(); ++i) {
    if (cum[i] > s + kGeomEps) out.push_back(route[i]);
  }
  return out;
}

std::vector<Vec2> EpisodeTrace::positions() const {
  std::vector<Vec2> out;
  out.reserve(ticks.size());
  for (const auto& r : ticks) out.push_back(r.state.pose.position());
  return out;
}

double route_completion(const EpisodeTrace& trace, std::span<const Vec2> route) {
  if (trace.ticks.empty()) throw ArgumentError("route_completion: empty trace");
  const double total = polyline_length(route);
  if (total <= 0.0) return 0.0;
  return std::clamp(trace.ticks.back().route_s / total, 0.0, 1.0);
}

int episode_tick_limit(const Scenario& s, const EvalConfig& cfg) {
  const AgentTrack& ego = s.ego_track();
  const int expert_ticks = ego.last_tick() - ego.first_tick();
  const int scaled = static_cast<int>(std::ceil(cfg.timeout_factor * expert_ticks - 1e-9));
  const int floor_ticks = static_cast<int>(std::lround(cfg.timeout_min_s * kTickHz));
  return std::max(scaled, floor_ticks);
}

std::pair<EpisodeResult, EpisodeTrace> run_episode(const Scenario& s, const HDMapModel& m, Policy& policy,
                                                   const EvalConfig& cfg, std::uint64_t seed) {
  const auto wall_start = std::chrono::steady_clock::now();
  const AgentTrack& ego_track = s.ego_track();
  const Polyline& route = s.ego.route_waypoints;
  const double route_total = polyline_length(route);
  const Vec2 destination = s.ego.destination.position();
  const int t0 = ego_track.first_tick();
  const int limit = episode_tick_limit(s, cfg);

  EgoState ego;
  ego.pose = ego_track.samples.front().pose;
  ego.speed = std::clamp(ego_track.samples.front().speed, 0.0, cfg.vehicle.max_speed);

  std::optional<PolicyErrorKind> setup_failure;
  try {
    policy.begin_episode({s.scenario_id, route, cfg.vehicle, kTickHz, seed});
  } catch (const PolicyError& e) {
    setup_failure = e.kind();
  }

  InfractionMonitor monitor(m, s, cfg);
  WaypointController controller(cfg.vehicle, cfg.tracking, kTickDt);
  EpisodeTrace trace;
  EpisodeResult result;
  result.scenario_id = s.scenario_id;

  double progress = 0.0;
  std::optional<Vec2> prev_center;
  int t = t0;
  for (;; ++t) {
    const int world_tick = std::min(t, s.n_ticks - 1);
    const Vec2 center = ego.pose.position();
    const auto proj = project_onto_polyline(route, center);
    if (std::abs(proj.d) <= cfg.route_deviation_m) progress = std::max(progress, proj.s);

    const auto agents = agents_at(s, world_tick, s.ego.agent_id);
    const auto signals = signals_at(s, world_tick);
    const TickState tick_state{t, ego_track.box_at(ego.pose), prev_center, agents, signals, proj.d};
    const auto raised = monitor.detect(tick_state);

    TickRecord rec{t, ego, ControlCommand{}, progress};
    auto finish = [&](Termination why) {
      trace.ticks.push_back(rec);
      trace.termination = why;
    };

    if (monitor.terminal()) {
      const auto it = std::find_if(raised.begin(), raised.end(), [](const Infraction& i) { return i.terminal; });
      finish(is_collision(it->kind) ? Termination::collision : Termination::off_road);
      break;
    }
    const double rc_now = route_total > 0.0 ? progress / route_total : 0.0;
    if (distance(center, destination) <= cfg.destination_radius && rc_now >= cfg.rc_success_threshold &&
        (progress >= route_total - kGeomEps || ego.speed < 0.1)) {
      finish(Termination::completed);
      break;
    }
    if (t - t0 >= limit) {
      finish(Termination::timeout);
      result.infractions.push_back({InfractionKind::timeout, t, cfg.penalties[InfractionKind::timeout], true});
      break;
    }

    PolicyOutput out;
    try {
      if (setup_failure) throw PolicyError(*setup_failure, "policy failed to start the episode");
      Observation obs = build_observation(s, world_tick, ego, route_after(route, progress), cfg.sensing_range);
      obs.tick = t;
      out = policy.act(obs);
      if (auto* plan = std::get_if<WaypointPlan>(&out); plan && plan->points.empty())
        throw PolicyError(PolicyErrorKind::protocol, "empty waypoint plan");
    } catch (const PolicyError& e) {
      finish(termination_for(e.kind()));
      result.infractions.push_back(
          {InfractionKind::policy_failure, t, cfg.penalties[InfractionKind::policy_failure], true});
      break;
    }
    if (const auto* cmd = std::get_if<ControlCommand>(&out)) {
      rec.command = *cmd;
    } else {
      rec.command = controller.follow_plan(ego, std::get<WaypointPlan>(out).points);
    }
    trace.ticks.push_back(rec);
    prev_center = center;
    ego = integrate_ego(ego, rec.command, kTickDt, cfg.vehicle);
  }

  std::vector<Infraction> all = monitor.infractions();
  all.insert(all.end(), result.infractions.begin(), result.infractions.end());
  result.infractions = std::move(all);
  result.termination = trace.termination;
  result.duration_ticks = t - t0;
  result.rc = route_completion(trace, route);
  result.success = episode_succeeded(result, cfg.rc_success_threshold);
  trace.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  try {
    policy.end_episode(result);
  } catch (const PolicyError&) {
    // The result is already final; a client gone before "done" changes nothing.
  }
  return {std::move(result), std::move(trace)};
}

}  // namespace twinbench
