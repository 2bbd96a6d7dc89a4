#include "cfrisk/scenario.hpp"

#include "cfrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cfrisk
{
namespace
{

bool is_finite(const Vec2 & v)
{
  return std::isfinite(v.x) && std::isfinite(v.y);
}

AgentState lerp_state(const TrackSample & a, const TrackSample & b, double t)
{
  const double span = b.timestamp - a.timestamp;
  const double u = span > 0.0 ? std::clamp((t - a.timestamp) / span, 0.0, 1.0) : 0.0;
  AgentState out = a.state;
  out.position = a.state.position + (b.state.position - a.state.position) * u;
  out.velocity = a.state.velocity + (b.state.velocity - a.state.velocity) * u;
  out.heading = lerp_angle(a.state.heading, b.state.heading, u);
  return out;
}

std::string format_time(double t)
{
  std::ostringstream os;
  os << t;
  return os.str();
}

}  // namespace

const char * to_string(AgentCategory c)
{
  switch (c) {
    case AgentCategory::car: return "car";
    case AgentCategory::truck: return "truck";
    case AgentCategory::motorcycle: return "motorcycle";
    case AgentCategory::cyclist: return "cyclist";
    case AgentCategory::pedestrian: return "pedestrian";
    case AgentCategory::other: return "other";
  }
  return "other";
}

std::optional<AgentCategory> agent_category_from_string(const std::string & s)
{
  if (s == "car") return AgentCategory::car;
  if (s == "truck") return AgentCategory::truck;
  if (s == "motorcycle") return AgentCategory::motorcycle;
  if (s == "cyclist") return AgentCategory::cyclist;
  if (s == "pedestrian") return AgentCategory::pedestrian;
  if (s == "other") return AgentCategory::other;
  return std::nullopt;
}

Footprint default_footprint(AgentCategory c)
{
  switch (c) {
    case AgentCategory::car: return {4.5, 2.0};
    case AgentCategory::truck: return {8.0, 2.6};
    case AgentCategory::motorcycle: return {2.2, 0.9};
    case AgentCategory::cyclist: return {1.8, 0.7};
    case AgentCategory::pedestrian: return {0.6, 0.6};
    case AgentCategory::other: return {4.0, 1.8};
  }
  return {4.0, 1.8};
}

const char * to_string(CameraName c)
{
  switch (c) {
    case CameraName::front: return "front";
    case CameraName::front_left: return "front_left";
    case CameraName::front_right: return "front_right";
  }
  return "front";
}

std::optional<CameraName> camera_name_from_string(const std::string & s)
{
  if (s == "front") return CameraName::front;
  if (s == "front_left") return CameraName::front_left;
  if (s == "front_right") return CameraName::front_right;
  return std::nullopt;
}

AgentState AgentTrack::state_at(double t, double max_gap) const
{
  if (samples.empty()) {
    throw RangeError("track " + agent_id + " is empty");
  }
  const double tol = 1e-9;
  if (t < start_time() - tol || t > end_time() + tol) {
    throw RangeError(
      "time " + format_time(t) + " outside track " + agent_id + " span [" +
      format_time(start_time()) + ", " + format_time(end_time()) + "]");
  }
  auto it = std::lower_bound(
    samples.begin(), samples.end(), t,
    [](const TrackSample & s, double v) { return s.timestamp < v; });
  if (it == samples.end()) {
    return samples.back().state;
  }
  if (it->timestamp - t <= tol) {
    return it->state;
  }
  const auto & next = *it;
  const auto & prev = *(it - 1);
  if (next.timestamp - prev.timestamp > max_gap + tol) {
    throw InsufficientHistoryError(
      "track " + agent_id + " gap of " + format_time(next.timestamp - prev.timestamp) +
      " s around t=" + format_time(t) + " exceeds " + format_time(max_gap) + " s");
  }
  return lerp_state(prev, next, t);
}

double AgentTrack::max_gap_in(double from, double to) const
{
  double worst = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double a = samples[i - 1].timestamp;
    const double b = samples[i].timestamp;
    if (b > from && a < to) {
      worst = std::max(worst, b - a);
    }
  }
  return worst;
}

const AgentTrack * Scenario::find_track(const std::string & agent_id) const
{
  for (const auto & track : tracks) {
    if (track.agent_id == agent_id) {
      return &track;
    }
  }
  return nullptr;
}

const AgentTrack & Scenario::ego_track() const
{
  const AgentTrack * ego = find_track(ego_id);
  if (ego == nullptr) {
    throw StructuralError("ego track '" + ego_id + "' missing from scenario " + scene_id);
  }
  return *ego;
}

void Scenario::validate() const
{
  if (scene_id.empty()) {
    throw ParseError("scenario has empty scene_id");
  }
  const AgentTrack * ego = find_track(ego_id);
  if (ego == nullptr || ego->empty()) {
    throw StructuralError("scenario " + scene_id + ": ego_id '" + ego_id + "' has no track");
  }
  for (const auto & track : tracks) {
    if (track.empty()) {
      throw ParseError("scenario " + scene_id + ": track " + track.agent_id + " has no samples");
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto & sample : track.samples) {
      if (!(sample.timestamp > prev)) {
        throw ParseError(
          "scenario " + scene_id + ": track " + track.agent_id +
          " timestamps not strictly increasing at t=" + format_time(sample.timestamp));
      }
      prev = sample.timestamp;
      const auto & st = sample.state;
      if (st.agent_id != track.agent_id) {
        throw ParseError(
          "scenario " + scene_id + ": track " + track.agent_id + " sample at t=" +
          format_time(sample.timestamp) + " carries agent_id '" + st.agent_id + "'");
      }
      if (!is_finite(st.position) || !is_finite(st.velocity) || !std::isfinite(st.heading)) {
        throw ParseError(
          "scenario " + scene_id + ": track " + track.agent_id + " non-finite state at t=" +
          format_time(sample.timestamp));
      }
      if (!(st.footprint.length > 0.0) || !(st.footprint.width > 0.0)) {
        throw ParseError(
          "scenario " + scene_id + ": track " + track.agent_id + " non-positive footprint");
      }
      if (st.heading <= -kPi - 1e-9 || st.heading > kPi + 1e-9) {
        throw ParseError(
          "scenario " + scene_id + ": track " + track.agent_id + " heading out of (-pi, pi]");
      }
    }
  }
  if (environment.weather.empty() || environment.lighting.empty() ||
      environment.road_layout.empty()) {
    throw ParseError("scenario " + scene_id + ": environment strings must be non-empty");
  }
  for (const auto & frame : camera_frames) {
    if (frame.image_path.empty()) {
      throw ParseError("scenario " + scene_id + ": camera frame with empty image_path");
    }
  }
  if (collision) {
    if (find_track(collision->colliding_agent_id) == nullptr) {
      throw StructuralError(
        "scenario " + scene_id + ": colliding agent '" + collision->colliding_agent_id +
        "' not among tracks");
    }
    if (collision->impact_time < ego->start_time() - 1e-9 ||
        collision->impact_time > ego->end_time() + 1e-9) {
      throw StructuralError(
        "scenario " + scene_id + ": impact_time " + format_time(collision->impact_time) +
        " outside scene span");
    }
  }
}

void PlannerConfig::validate() const
{
  const auto positive = [](double v, const char * name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("planner config: ") + name + " must be positive");
    }
  };
  positive(history_window, "history_window");
  positive(short_horizon, "short_horizon");
  positive(plan_horizon, "plan_horizon");
  positive(rollout_dt, "rollout_dt");
  positive(accel_step, "accel_step");
  positive(ttc_threshold, "ttc_threshold");
  positive(neighbor_radius, "neighbor_radius");
  positive(preimpact_window, "preimpact_window");
  positive(stride, "stride");
  if (!(short_horizon < plan_horizon)) {
    throw ConfigError("planner config: requires 0 < short_horizon < plan_horizon");
  }
  const auto divides = [this](double span, const char * name) {
    const double k = span / rollout_dt;
    if (std::fabs(k - std::round(k)) > 1e-9 * std::max(1.0, std::fabs(k))) {
      throw ConfigError(std::string("planner config: rollout_dt must divide ") + name);
    }
  };
  divides(short_horizon, "short_horizon");
  divides(plan_horizon - short_horizon, "plan_horizon - short_horizon");
}

namespace
{

// Resample one track onto the grid ending at `t`, clipped to the track's
// own span. Grid points inside gaps wider than max_gap are dropped from
// the leading side, keeping the contiguous run that ends at the track's
// latest coverage.
AgentTrack resample_history(
  const AgentTrack & track, double t, const PlannerConfig & cfg)
{
  AgentTrack out;
  out.agent_id = track.agent_id;
  const int n = cfg.window_sample_count();
  const double clip_end = std::min(t, track.end_time());
  std::vector<TrackSample> collected;
  for (int k = n - 1; k >= 0; --k) {
    const double tk = t - static_cast<double>(k) * cfg.rollout_dt;
    if (tk < track.start_time() - 1e-9 || tk > clip_end + 1e-9) {
      continue;
    }
    try {
      TrackSample s;
      s.timestamp = tk;
      s.state = track.state_at(std::clamp(tk, track.start_time(), track.end_time()),
                               cfg.max_interp_gap);
      collected.push_back(std::move(s));
    } catch (const InsufficientHistoryError &) {
      collected.clear();  // keep only the run after the gap
    }
  }
  out.samples = std::move(collected);
  return out;
}

}  // namespace

ObservationWindow build_window(
  const std::string & scene_id, const AgentTrack & ego,
  const std::vector<const AgentTrack *> & others,
  const std::vector<CameraFrame> & camera_frames, double t, const PlannerConfig & cfg)
{
  if (ego.empty()) {
    throw StructuralError("window: ego track is empty");
  }
  if (t > ego.end_time() + 1e-9 || t < ego.start_time() - 1e-9) {
    throw RangeError(
      "analysis time " + std::to_string(t) + " outside scene span [" +
      std::to_string(ego.start_time()) + ", " + std::to_string(ego.end_time()) + "]");
  }
  if (t - cfg.history_window < ego.start_time() - 1e-9) {
    throw RangeError(
      "analysis time " + std::to_string(t) + " leaves no full history window");
  }

  ObservationWindow window;
  window.scene_id = scene_id;
  window.analysis_time = t;
  window.ego_history = resample_history(ego, t, cfg);
  const int expected = cfg.window_sample_count();
  if (static_cast<int>(window.ego_history.samples.size()) != expected ||
      std::fabs(window.ego_history.samples.back().timestamp - t) > 0.5 * cfg.rollout_dt) {
    throw InsufficientHistoryError(
      "ego history around t=" + std::to_string(t) + " has gaps wider than " +
      std::to_string(cfg.max_interp_gap) + " s");
  }

  const Vec2 ego_pos = window.ego_history.samples.back().state.position;
  for (const AgentTrack * other : others) {
    if (other == nullptr || other->empty() || other->agent_id == ego.agent_id) {
      continue;
    }
    if (other->start_time() > t + 1e-9) {
      continue;  // not yet observed
    }
    Vec2 pos_at_t;
    if (other->covers(t)) {
      pos_at_t = other->state_at(t, cfg.max_interp_gap).position;
    } else {
      const double staleness = t - other->end_time();
      if (staleness > cfg.max_neighbor_staleness + 1e-9) {
        continue;
      }
      const AgentState & last = other->samples.back().state;
      pos_at_t = last.position + last.velocity * staleness;
    }
    if ((pos_at_t - ego_pos).norm() > cfg.neighbor_radius) {
      continue;
    }
    AgentTrack history = resample_history(*other, t, cfg);
    if (!history.samples.empty()) {
      window.neighbor_histories.push_back(std::move(history));
    }
  }

  for (const auto & frame : camera_frames) {
    if (frame.timestamp >= t - cfg.history_window - 1e-9 && frame.timestamp <= t + 1e-9) {
      window.camera_refs.push_back(frame);
    }
  }
  return window;
}

ObservationWindow extract_window(const Scenario & s, double t, const PlannerConfig & cfg)
{
  const AgentTrack & ego = s.ego_track();
  std::vector<const AgentTrack *> others;
  others.reserve(s.tracks.size());
  for (const auto & track : s.tracks) {
    if (track.agent_id != s.ego_id) {
      others.push_back(&track);
    }
  }
  return build_window(s.scene_id, ego, others, s.camera_frames, t, cfg);
}

}  // namespace cfrisk
