#include "cfrisk/annotator.hpp"

#include "cfrisk/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace cfrisk
{
namespace
{

using json = nlohmann::json;

double snap6(double x)
{
  return static_cast<double>(std::llround(x * 1e6)) / 1e6;
}

}  // namespace

std::string render_predicted_behavior(const AgentState & ego, const AgentState & neighbor)
{
  if (neighbor.speed() < 0.5) {
    return "stationary";
  }
  const Vec2 v_ego_frame = neighbor.velocity.rotated(-ego.heading);
  if (std::fabs(v_ego_frame.y) > std::fabs(v_ego_frame.x)) {
    return v_ego_frame.y < 0.0 ? "crossing from left" : "crossing from right";
  }
  const Vec2 p_rel = neighbor.position - ego.position;
  const Vec2 v_rel = neighbor.velocity - ego.velocity;
  const double range_rate = p_rel.dot(v_rel) / std::max(p_rel.norm(), 1e-9);
  return range_rate < -0.5 ? "approaching" : "leading";
}

const char * to_string(GtSource s)
{
  return s == GtSource::recorded_future ? "recorded_future" : "post_intervention";
}

std::optional<GtSource> gt_source_from_string(const std::string & s)
{
  if (s == "recorded_future") return GtSource::recorded_future;
  if (s == "post_intervention") return GtSource::post_intervention;
  return std::nullopt;
}

const char * to_string(Split s)
{
  return s == Split::train ? "train" : "val";
}

std::string make_sample_id(const std::string & scene_id, double analysis_time)
{
  return scene_id + "_" + std::to_string(std::llround(analysis_time * 1000.0));
}

namespace
{

// Minimum instantaneous TTC over the window neighbors, taken at the first
// grid sample (the window start). Neighbors without a sample there are
// skipped.
double min_ttc_at_window_start(const ObservationWindow & window, const PlannerConfig & cfg)
{
  const double t0 = window.analysis_time - cfg.history_window;
  const auto & ego_samples = window.ego_history.samples;
  if (ego_samples.empty() || std::fabs(ego_samples.front().timestamp - t0) > 1e-6) {
    return kInfiniteTtc;
  }
  const AgentState & ego = ego_samples.front().state;
  double best = kInfiniteTtc;
  for (const auto & history : window.neighbor_histories) {
    if (history.empty() || std::fabs(history.samples.front().timestamp - t0) > 1e-6) {
      continue;
    }
    best = std::min(best, instantaneous_ttc(ego, history.samples.front().state).ttc);
  }
  return best;
}

}  // namespace

std::vector<double> sample_windows(
  const Scenario & s, const PlannerConfig & cfg, std::vector<std::string> * warnings)
{
  const auto warn = [warnings](const std::string & msg) {
    if (warnings != nullptr) {
      warnings->push_back(msg);
    }
  };

  std::vector<double> times;
  const double start = s.start_time();
  const double end = s.end_time();
  if (end - start < cfg.history_window - 1e-9) {
    warn("scene " + s.scene_id + ": duration shorter than the history window; no samples");
    return times;
  }

  if (s.collision) {
    const double first = s.collision->impact_time - cfg.rollout_dt;
    if (first < start + cfg.history_window - 1e-9) {
      warn("scene " + s.scene_id + ": no full window fits before impact; no samples");
      return times;
    }
    for (int k = 0;; ++k) {
      const double t = first - static_cast<double>(k) * cfg.stride;
      if (t < start + cfg.history_window - 1e-9) {
        break;
      }
      try {
        extract_window(s, t, cfg);
        times.push_back(t);
      } catch (const Error & e) {
        warn("scene " + s.scene_id + ": skipping t=" + std::to_string(t) + ": " + e.what());
      }
    }
    return times;
  }

  for (int k = 0;; ++k) {
    const double t = start + cfg.history_window + static_cast<double>(k) * cfg.stride;
    if (t > end + 1e-9) {
      break;
    }
    ObservationWindow window;
    try {
      window = extract_window(s, t, cfg);
    } catch (const Error & e) {
      warn("scene " + s.scene_id + ": skipping t=" + std::to_string(t) + ": " + e.what());
      continue;
    }
    const RiskLabel risk = label_current_risk(window, s, cfg);
    const bool stable =
      risk.label == SafetyLabel::safe ||
      min_ttc_at_window_start(window, cfg) >= cfg.ttc_threshold;
    if (stable) {
      times.push_back(t);
    }
  }
  return times;
}

namespace
{

// Least-squares slope of speed over one horizon segment, with the
// intercept pinned to the segment's starting speed.
double anchored_slope(const std::vector<double> & offsets, const std::vector<double> & speeds)
{
  const double v0 = speeds.front();
  const double t0 = offsets.front();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double d = offsets[i] - t0;
    num += d * (speeds[i] - v0);
    den += d * d;
  }
  return den > 0.0 ? num / den : 0.0;
}

LonBehavior nearest_behavior(double slope, double step)
{
  // candidate order puts zero first so ties resolve toward maintain
  const std::pair<double, LonBehavior> candidates[3] = {
    {0.0, LonBehavior::maintain},
    {step, LonBehavior::accelerate},
    {-step, LonBehavior::decelerate}};
  double best_dist = std::numeric_limits<double>::infinity();
  LonBehavior best = LonBehavior::maintain;
  for (const auto & [value, behavior] : candidates) {
    const double dist = std::fabs(slope - value);
    if (dist < best_dist) {
      best_dist = dist;
      best = behavior;
    }
  }
  return best;
}

MetaAction infer_meta_action(
  const std::vector<double> & offsets, const std::vector<double> & speeds,
  const PlannerConfig & cfg)
{
  std::vector<double> short_off, short_spd, long_off, long_spd;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (offsets[i] <= cfg.short_horizon + 1e-9) {
      short_off.push_back(offsets[i]);
      short_spd.push_back(speeds[i]);
    }
    if (offsets[i] >= cfg.short_horizon - 1e-9) {
      long_off.push_back(offsets[i]);
      long_spd.push_back(speeds[i]);
    }
  }
  MetaAction action;
  action.short_term = nearest_behavior(anchored_slope(short_off, short_spd), cfg.accel_step);
  action.long_term = nearest_behavior(anchored_slope(long_off, long_spd), cfg.accel_step);
  return action;
}

struct RecordedFuture
{
  std::vector<Waypoint> waypoints;
  std::vector<double> offsets;
  std::vector<double> speeds;
  std::vector<double> headings;
};

std::optional<RecordedFuture> extract_recorded_future(
  const Scenario & s, double t, const PlannerConfig & cfg)
{
  const AgentTrack & ego = s.ego_track();
  if (!ego.covers(t + cfg.plan_horizon) ||
      ego.max_gap_in(t, t + cfg.plan_horizon) > cfg.max_interp_gap + 1e-9) {
    return std::nullopt;
  }
  RecordedFuture future;
  const int n = cfg.rollout_sample_count();
  future.waypoints.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double tau = static_cast<double>(k) * cfg.rollout_dt;
    AgentState state;
    try {
      state = ego.state_at(t + tau, cfg.max_interp_gap);
    } catch (const Error &) {
      return std::nullopt;
    }
    future.waypoints.push_back({tau, state.position});
    future.offsets.push_back(tau);
    future.speeds.push_back(state.speed());
    future.headings.push_back(state.heading);
  }
  return future;
}

// Recorded ego future vs recorded neighbor futures, oriented rectangles on
// the shared grid.
bool recorded_future_contact_free(
  const Scenario & s, double t, const RecordedFuture & future, const PlannerConfig & cfg)
{
  const AgentTrack & ego = s.ego_track();
  PosedTrack ego_track;
  ego_track.footprint = ego.samples.front().state.footprint;
  ego_track.offsets = future.offsets;
  ego_track.headings = future.headings;
  ego_track.positions.reserve(future.waypoints.size());
  for (const auto & wp : future.waypoints) {
    ego_track.positions.push_back(wp.position);
  }

  for (const auto & track : s.tracks) {
    if (track.agent_id == s.ego_id || track.empty()) {
      continue;
    }
    PosedTrack other;
    other.footprint = track.samples.front().state.footprint;
    for (double tau : future.offsets) {
      const double abs_t = t + tau;
      if (!track.covers(abs_t)) {
        continue;
      }
      try {
        const AgentState state = track.state_at(abs_t, cfg.max_interp_gap);
        other.offsets.push_back(tau);
        other.positions.push_back(state.position);
        other.headings.push_back(state.heading);
      } catch (const Error &) {
        continue;
      }
    }
    if (other.offsets.empty()) {
      continue;
    }
    if (trajectories_collide(ego_track, other)) {
      return false;
    }
  }
  return true;
}

}  // namespace

AnnotationRecord build_record(const Scenario & s, double t, const PlannerConfig & cfg)
{
  const ObservationWindow window = extract_window(s, t, cfg);

  AnnotationRecord record;
  record.sample_id = make_sample_id(s.scene_id, t);
  record.scene_id = s.scene_id;
  record.analysis_time = t;
  record.is_collision_scene = s.collision.has_value();
  record.stage1_scene = s.environment;

  const auto critical = identify_critical_object(window, s, cfg);
  if (critical) {
    CriticalAnnotation annotation;
    annotation.agent_id = critical->agent_id;
    annotation.category = critical->category;
    annotation.relative_position = critical->relative_position;
    annotation.distance = critical->distance;

    AgentState neighbor_state;
    bool found = false;
    for (const auto & history : window.neighbor_histories) {
      if (history.agent_id == critical->agent_id && !history.empty()) {
        const TrackSample & anchor = history.samples.back();
        neighbor_state = anchor.state;
        const double stale_by = t - anchor.timestamp;
        if (stale_by > 1e-9) {
          neighbor_state.position = anchor.state.position + anchor.state.velocity * stale_by;
        }
        found = true;
        break;
      }
    }
    if (!found) {
      throw StructuralError(
        "critical object '" + critical->agent_id + "' missing from window neighbors");
    }
    annotation.predicted_behavior = render_predicted_behavior(window.ego_state(), neighbor_state);
    record.stage2_critical = std::move(annotation);
  }

  const RiskLabel risk = label_current_risk(window, s, cfg);
  record.stage3_risk = risk.label;

  const auto outcomes = evaluate_tree(window, cfg);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    record.stage4_counterfactuals[i] = outcomes[i].label;
  }

  std::optional<RecordedFuture> future;
  if (risk.label == SafetyLabel::safe) {
    future = extract_recorded_future(s, t, cfg);
    if (future && !recorded_future_contact_free(s, t, *future, cfg)) {
      future.reset();
    }
  }

  if (future) {
    record.gt_source = GtSource::recorded_future;
    record.stage5_plan.waypoints = std::move(future->waypoints);
    record.stage5_plan.meta_action = infer_meta_action(future->offsets, future->speeds, cfg);
  } else {
    record.gt_source = GtSource::post_intervention;
    std::vector<CounterfactualOutcome> as_vector(outcomes.begin(), outcomes.end());
    const auto [selected, reason] = select_action(as_vector, cfg);
    (void)reason;
    record.stage5_plan.meta_action = selected;
    for (const auto & o : outcomes) {
      if (o.action == selected) {
        record.stage5_plan.waypoints.reserve(o.rollout.samples.size());
        for (const auto & sample : o.rollout.samples) {
          record.stage5_plan.waypoints.push_back({sample.offset, sample.position});
        }
        break;
      }
    }
  }
  return record;
}

void split_scenes(DatasetManifest & manifest, double ratio, std::uint64_t seed)
{
  if (!(ratio > 0.0) || !(ratio <= 1.0)) {
    throw ConfigError("split ratio must lie in (0, 1]");
  }

  std::vector<std::string> collision_scenes;
  std::vector<std::string> normal_scenes;
  std::set<std::string> seen;
  for (const auto & entry : manifest.records) {
    if (!seen.insert(entry.scene_id).second) {
      continue;
    }
    (entry.is_collision_scene ? collision_scenes : normal_scenes).push_back(entry.scene_id);
  }
  if (seen.size() < 2) {
    throw StructuralError("split requires at least two scenes");
  }

  std::mt19937_64 rng(seed);
  // hand-rolled Fisher-Yates: std::shuffle is not pinned across standard
  // library implementations
  const auto shuffle = [&rng](std::vector<std::string> & v) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(v[i - 1], v[j]);
    }
  };
  shuffle(collision_scenes);
  shuffle(normal_scenes);

  manifest.split.clear();
  const auto assign = [&manifest, ratio](const std::vector<std::string> & scenes) {
    const auto n = static_cast<double>(scenes.size());
    auto val_count = static_cast<std::size_t>(std::llround(n * (1.0 - ratio)));
    val_count = std::min(val_count, scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      manifest.split[scenes[i]] = i < val_count ? Split::val : Split::train;
    }
  };
  assign(collision_scenes);
  assign(normal_scenes);
}

namespace
{

json meta_action_to_json(const MetaAction & a)
{
  return json{{"short", to_string(a.short_term)}, {"long", to_string(a.long_term)}};
}

MetaAction meta_action_from_json(const json & j, const std::string & path)
{
  if (!j.is_object() || !j.contains("short") || !j.contains("long")) {
    throw ParseError(path + ": expected {short, long}");
  }
  const auto st = lon_behavior_from_string(j["short"].get<std::string>());
  const auto lt = lon_behavior_from_string(j["long"].get<std::string>());
  if (!st || !lt) {
    throw ParseError(path + ": unknown behavior");
  }
  return MetaAction{*st, *lt};
}

}  // namespace

std::string write_record(const AnnotationRecord & r)
{
  json root;
  root["sample_id"] = r.sample_id;
  root["scene_id"] = r.scene_id;
  root["analysis_time"] = snap6(r.analysis_time);
  root["is_collision_scene"] = r.is_collision_scene;
  root["gt_source"] = to_string(r.gt_source);
  root["stage1_scene"] = {
    {"weather", r.stage1_scene.weather},
    {"lighting", r.stage1_scene.lighting},
    {"road_layout", r.stage1_scene.road_layout}};
  if (r.stage2_critical) {
    const auto & c = *r.stage2_critical;
    root["stage2_critical"] = {
      {"agent_id", c.agent_id},
      {"category", to_string(c.category)},
      {"relative_position", {snap6(c.relative_position.x), snap6(c.relative_position.y)}},
      {"distance", snap6(c.distance)},
      {"predicted_behavior", c.predicted_behavior}};
  } else {
    root["stage2_critical"] = nullptr;
  }
  root["stage3_risk"] = to_string(r.stage3_risk);
  json stage4 = json::object();
  const auto actions = enumerate_meta_actions();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    stage4[actions[i].key()] = to_string(r.stage4_counterfactuals[i]);
  }
  root["stage4_counterfactuals"] = std::move(stage4);
  json waypoints = json::array();
  for (const auto & wp : r.stage5_plan.waypoints) {
    waypoints.push_back({snap6(wp.offset), snap6(wp.position.x), snap6(wp.position.y)});
  }
  root["stage5_plan"] = {
    {"meta_action", meta_action_to_json(r.stage5_plan.meta_action)},
    {"waypoints", std::move(waypoints)}};
  return root.dump(2) + "\n";
}

AnnotationRecord read_record(const std::string & json_text)
{
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error & e) {
    throw ParseError(std::string("record: ") + e.what());
  }
  if (!root.is_object()) {
    throw ParseError("record: expected an object");
  }
  try {
    AnnotationRecord r;
    r.sample_id = root.at("sample_id").get<std::string>();
    r.scene_id = root.at("scene_id").get<std::string>();
    r.analysis_time = root.at("analysis_time").get<double>();
    r.is_collision_scene = root.at("is_collision_scene").get<bool>();
    const auto source = gt_source_from_string(root.at("gt_source").get<std::string>());
    if (!source) {
      throw ParseError("record: unknown gt_source");
    }
    r.gt_source = *source;
    const json & env = root.at("stage1_scene");
    r.stage1_scene.weather = env.at("weather").get<std::string>();
    r.stage1_scene.lighting = env.at("lighting").get<std::string>();
    r.stage1_scene.road_layout = env.at("road_layout").get<std::string>();
    const json & crit = root.at("stage2_critical");
    if (!crit.is_null()) {
      CriticalAnnotation c;
      c.agent_id = crit.at("agent_id").get<std::string>();
      const auto category = agent_category_from_string(crit.at("category").get<std::string>());
      if (!category) {
        throw ParseError("record: unknown stage2 category");
      }
      c.category = *category;
      c.relative_position = {
        crit.at("relative_position").at(0).get<double>(),
        crit.at("relative_position").at(1).get<double>()};
      c.distance = crit.at("distance").get<double>();
      c.predicted_behavior = crit.at("predicted_behavior").get<std::string>();
      r.stage2_critical = std::move(c);
    }
    const auto risk = safety_label_from_string(root.at("stage3_risk").get<std::string>());
    if (!risk) {
      throw ParseError("record: unknown stage3_risk");
    }
    r.stage3_risk = *risk;
    const json & stage4 = root.at("stage4_counterfactuals");
    const auto actions = enumerate_meta_actions();
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const auto label =
        safety_label_from_string(stage4.at(actions[i].key()).get<std::string>());
      if (!label) {
        throw ParseError("record: unknown stage4 label");
      }
      r.stage4_counterfactuals[i] = *label;
    }
    const json & plan = root.at("stage5_plan");
    r.stage5_plan.meta_action =
      meta_action_from_json(plan.at("meta_action"), "record.stage5_plan.meta_action");
    for (const json & wp : plan.at("waypoints")) {
      r.stage5_plan.waypoints.push_back(
        {wp.at(0).get<double>(), {wp.at(1).get<double>(), wp.at(2).get<double>()}});
    }
    return r;
  } catch (const json::exception & e) {
    throw ParseError(std::string("record: ") + e.what());
  }
}

std::string write_manifest(const DatasetManifest & m)
{
  json root;
  root["total_count"] = m.total_count;
  root["collision_count"] = m.collision_count;
  json records = json::array();
  for (const auto & entry : m.records) {
    records.push_back({
      {"sample_id", entry.sample_id},
      {"scene_id", entry.scene_id},
      {"file", entry.file},
      {"is_collision_scene", entry.is_collision_scene}});
  }
  root["records"] = std::move(records);
  json split = json::object();
  for (const auto & [scene_id, side] : m.split) {
    split[scene_id] = to_string(side);
  }
  root["split"] = std::move(split);
  return root.dump(2) + "\n";
}

DatasetManifest read_manifest(const std::string & json_text)
{
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error & e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  try {
    DatasetManifest m;
    m.total_count = root.at("total_count").get<int>();
    m.collision_count = root.at("collision_count").get<int>();
    for (const json & entry : root.at("records")) {
      ManifestEntry e;
      e.sample_id = entry.at("sample_id").get<std::string>();
      e.scene_id = entry.at("scene_id").get<std::string>();
      e.file = entry.at("file").get<std::string>();
      e.is_collision_scene = entry.at("is_collision_scene").get<bool>();
      m.records.push_back(std::move(e));
    }
    if (root.contains("split")) {
      for (const auto & [scene_id, side] : root.at("split").items()) {
        const std::string value = side.get<std::string>();
        if (value == "train") {
          m.split[scene_id] = Split::train;
        } else if (value == "val") {
          m.split[scene_id] = Split::val;
        } else {
          throw ParseError("manifest: unknown split side '" + value + "'");
        }
      }
    }
    return m;
  } catch (const json::exception & e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
}

}  // namespace cfrisk
