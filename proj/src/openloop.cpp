#include "twinbench/openloop.hpp"

#include "twinbench/replay.hpp"

namespace twinbench {

namespace {

constexpr int kTicks1s = kTickHz;
constexpr int kTicks2s = 2 * kTickHz;

Vec2 plan_point(const Polyline& pts, int future_ticks) {
  const std::size_t idx = static_cast<std::size_t>(future_ticks - 1);
  return idx < pts.size() ? pts[idx] : pts.back();
}

}  // namespace

L2Report open_loop_l2(Policy& predictor, const Scenario& s, int stride) {
  if (stride < 1) throw ArgumentError("open_loop_l2: stride must be >= 1");
  const AgentTrack& ego = s.ego_track();
  const int first = ego.first_tick() + 1;
  const int last = ego.last_tick() - kTicks2s;
  if (last < first) throw ArgumentError("open_loop_l2: ego track of '" + s.scenario_id + "' is shorter than the horizon");

  const Polyline& route = s.ego.route_waypoints;
  predictor.begin_episode({s.scenario_id, route, VehicleParams{}, kTickHz, 0});
  double sum1 = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (int t = first; t <= last; t += stride) {
    const TrackState st = *track_state_at_tick(ego, t);
    EgoState state;
    state.pose = st.pose;
    state.speed = st.speed;
    const double s_now = project_onto_polyline(route, st.pose.position()).s;
    Observation obs = build_observation(s, std::min(t, s.n_ticks - 1), state, route_after(route, s_now), 85.0);
    obs.tick = t;
    const PolicyOutput out = predictor.act(obs);
    const auto* plan = std::get_if<WaypointPlan>(&out);
    if (!plan || plan->points.empty())
      throw ArgumentError("open_loop_l2: predictor '" + predictor.name() + "' must emit waypoints");
    sum1 += distance(plan_point(plan->points, kTicks1s), track_state_at_tick(ego, t + kTicks1s)->pose.position());
    sum2 += distance(plan_point(plan->points, kTicks2s), track_state_at_tick(ego, t + kTicks2s)->pose.position());
    ++n;
  }
  L2Report r;
  r.anchors = n;
  r.l2_1s = sum1 / static_cast<double>(n);
  r.l2_2s = sum2 / static_cast<double>(n);
  r.avg = 0.5 * (r.l2_1s + r.l2_2s);
  EpisodeResult none;
  none.scenario_id = s.scenario_id;
  predictor.end_episode(none);
  return r;
}

L2Report mean_l2(std::span<const L2Report> reports) {
  if (reports.empty()) throw ArgumentError("mean_l2: no reports");
  L2Report out;
  for (const auto& r : reports) {
    out.l2_1s += r.l2_1s;
    out.l2_2s += r.l2_2s;
    out.anchors += r.anchors;
  }
  const double n = static_cast<double>(reports.size());
  out.l2_1s /= n;
  out.l2_2s /= n;
  out.avg = 0.5 * (out.l2_1s + out.l2_2s);
  return out;
}

}  // namespace twinbench
