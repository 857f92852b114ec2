#include <algorithm>

#include "twinbench/forge.hpp"

namespace twinbench {

namespace {

bool removable(AgentCategory c, OcclusionMode mode) {
  switch (mode) {
    case OcclusionMode::none: return false;
    case OcclusionMode::vehicles: return is_vehicle(c);
    case OcclusionMode::all: return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(OcclusionMode m) {
  switch (m) {
    case OcclusionMode::none: return "none";
    case OcclusionMode::vehicles: return "vehicles";
    case OcclusionMode::all: return "all";
  }
  return "?";
}

OcclusionMode parse_occlusion_mode(std::string_view s) {
  if (s == "none") return OcclusionMode::none;
  if (s == "vehicles") return OcclusionMode::vehicles;
  if (s == "all") return OcclusionMode::all;
  throw ArgumentError("occlusion mode must be none, vehicles or all");
}

std::string_view to_string(RemovalRule r) {
  return r == RemovalRule::drop_never_visible ? "drop-never-visible" : "visible-intervals";
}

RemovalRule parse_removal_rule(std::string_view s) {
  if (s == "drop-never-visible") return RemovalRule::drop_never_visible;
  if (s == "visible-intervals") return RemovalRule::visible_intervals;
  throw ArgumentError("removal rule must be drop-never-visible or visible-intervals");
}

bool agent_visible(const Scenario& s, const AgentTrack& target, int tick, const OcclusionConfig& cfg) {
  const AgentTrack& ego = s.ego_track();
  const auto ego_state = track_state_at_tick(ego, tick);
  const auto target_state = track_state_at_tick(target, tick);
  if (!ego_state || !target_state) return false;
  const Vec2 eye = ego_state->pose.position();

  std::vector<OrientedBox> occluders;
  for (const auto& t : s.tracks) {
    if (t.track_id == ego.track_id || t.track_id == target.track_id) continue;
    if (const auto st = track_state_at_tick(t, tick)) occluders.push_back(t.box_at(st->pose));
  }

  const OrientedBox box = target.box_at(target_state->pose);
  std::vector<Vec2> probes{box.center};
  const auto rim = box.perimeter_samples(cfg.boundary_samples);
  probes.insert(probes.end(), rim.begin(), rim.end());
  for (const Vec2 p : probes) {
    const double d = distance(eye, p);
    if (d > cfg.sensor_range) continue;
    if (d <= kGeomEps || !ray_first_hit(eye, p, occluders)) return true;
  }
  return false;
}

Scenario occlusion_filter(const Scenario& s, const OcclusionConfig& cfg, FilterReport* report) {
  if (cfg.boundary_samples < 4) throw ArgumentError("occlusion: boundary_samples must be >= 4");
  if (!(cfg.visibility_fraction_min >= 0.0 && cfg.visibility_fraction_min <= 1.0))
    throw ArgumentError("occlusion: visibility_fraction_min must lie in [0, 1]");
  const AgentTrack& ego = s.ego_track();
  Scenario out = s;
  out.tracks.clear();
  FilterReport local;

  for (const auto& track : s.tracks) {
    if (track.track_id == ego.track_id || !removable(track.category, cfg.mode)) {
      out.tracks.push_back(track);
      continue;
    }
    std::vector<bool> seen;
    std::size_t judged = 0, visible = 0;
    for (const auto& smp : track.samples) {
      const bool judgeable = ego.alive_at(smp.tick);
      const bool v = judgeable && agent_visible(s, track, smp.tick, cfg);
      seen.push_back(v);
      judged += judgeable ? 1 : 0;
      visible += v ? 1 : 0;
    }
    if (judged == 0) {
      out.tracks.push_back(track);
      continue;
    }

    if (cfg.removal_rule == RemovalRule::drop_never_visible) {
      if (static_cast<double>(visible) < cfg.visibility_fraction_min * static_cast<double>(judged)) {
        local.removed.push_back(track.track_id);
      } else {
        out.tracks.push_back(track);
      }
      continue;
    }

    // Longest run of consecutive visible samples.
    std::size_t best_lo = 0, best_len = 0;
    for (std::size_t i = 0; i < seen.size();) {
      if (!seen[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < seen.size() && seen[j + 1] && track.samples[j + 1].tick == track.samples[j].tick + 1) ++j;
      if (j - i + 1 > best_len) {
        best_lo = i;
        best_len = j - i + 1;
      }
      i = j + 1;
    }
    if (best_len == 0) {
      local.removed.push_back(track.track_id);
    } else if (best_len == track.samples.size()) {
      out.tracks.push_back(track);
    } else {
      AgentTrack cut = track;
      cut.samples.assign(track.samples.begin() + static_cast<std::ptrdiff_t>(best_lo),
                         track.samples.begin() + static_cast<std::ptrdiff_t>(best_lo + best_len));
      out.tracks.push_back(std::move(cut));
      local.trimmed.push_back(track.track_id);
    }
  }
  if (report) *report = std::move(local);
  return out;
}

}  // namespace twinbench
