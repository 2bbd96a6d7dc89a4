#include "cfrisk/eval.hpp"

#include "cfrisk/errors.hpp"
#include "cfrisk/planner.hpp"
#include "cfrisk/risk.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace cfrisk
{
namespace
{

using json = nlohmann::json;

double snap6(double x)
{
  return static_cast<double>(std::llround(x * 1e6)) / 1e6;
}

std::string canonical_token(const std::string & s)
{
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  std::string out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
  }
  return out;
}

bool tokens_equal(const std::string & a, const std::string & b)
{
  return canonical_token(a) == canonical_token(b);
}

std::string fmt3(double v)
{
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

const char * to_string(ParseStatus s)
{
  switch (s) {
    case ParseStatus::ok: return "ok";
    case ParseStatus::missing: return "missing";
    case ParseStatus::malformed: return "malformed";
  }
  return "missing";
}

const char * to_string(L2Mode m)
{
  return m == L2Mode::mean_over_horizon ? "mean_over_horizon" : "displacement_at_horizon";
}

std::optional<L2Mode> l2_mode_from_string(const std::string & s)
{
  if (s == "mean_over_horizon") return L2Mode::mean_over_horizon;
  if (s == "displacement_at_horizon") return L2Mode::displacement_at_horizon;
  return std::nullopt;
}

std::string assemble_prompt(const ObservationWindow & window, const PlannerConfig & cfg)
{
  std::ostringstream os;
  os << "[system]\n"
     << "You are a driving risk analyst. From the recent motion of the ego vehicle and its\n"
     << "neighbors, reason in five stages and answer with one JSON object:\n"
     << "  stage 1: describe the scene (weather, lighting, road layout).\n"
     << "  stage 2: identify the critical object (category, position relative to the ego in\n"
     << "           meters with x forward and y left, straight-line distance in meters, and\n"
     << "           its expected behavior: one of approaching, leading, stationary,\n"
     << "           crossing from left, crossing from right). Use null when no object\n"
     << "           deserves attention.\n"
     << "  stage 3: label the current situation Safe or Unsafe.\n"
     << "  stage 4: for each of the nine meta-actions below, label the outcome of executing\n"
     << "           it for " << fmt3(cfg.plan_horizon) << " s as Safe or Unsafe.\n"
     << "  stage 5: plan: pick one meta-action (a short-term behavior over the first "
     << fmt3(cfg.short_horizon) << " s\n"
     << "           and a long-term behavior to " << fmt3(cfg.plan_horizon)
     << " s) and emit waypoints [offset, x, y]\n"
     << "           every " << fmt3(cfg.rollout_dt) << " s from offset 0 to "
     << fmt3(cfg.plan_horizon) << ".\n"
     << "\n[scene]\n";
  os << "scene_id: " << window.scene_id << "\n";
  os << "analysis_time: " << fmt3(window.analysis_time) << "\n";

  const auto dump_track = [&os](const AgentTrack & track, const char * indent) {
    const AgentState & last = track.samples.back().state;
    os << indent << "category: " << to_string(last.category) << "\n";
    os << indent << "footprint: " << fmt3(last.footprint.length) << " x "
       << fmt3(last.footprint.width) << "\n";
    os << indent << "history (t, x, y, vx, vy, heading):\n";
    for (const auto & sample : track.samples) {
      os << indent << "  " << fmt3(sample.timestamp) << " " << fmt3(sample.state.position.x)
         << " " << fmt3(sample.state.position.y) << " " << fmt3(sample.state.velocity.x) << " "
         << fmt3(sample.state.velocity.y) << " " << fmt3(sample.state.heading) << "\n";
    }
  };

  os << "ego: " << window.ego_history.agent_id << "\n";
  dump_track(window.ego_history, "  ");
  os << "neighbors: " << window.neighbor_histories.size() << "\n";
  for (const auto & neighbor : window.neighbor_histories) {
    os << "- id: " << neighbor.agent_id << "\n";
    dump_track(neighbor, "    ");
  }
  os << "cameras: " << window.camera_refs.size() << "\n";
  for (const auto & frame : window.camera_refs) {
    os << "- t=" << fmt3(frame.timestamp) << " " << to_string(frame.camera) << " "
       << frame.image_path << "\n";
  }

  os << "\n[task]\n"
     << "meta-action keys, in order: ";
  const auto actions = enumerate_meta_actions();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    os << (i == 0 ? "" : ", ") << actions[i].key();
  }
  os << "\nrespond with exactly this JSON shape:\n"
     << "{\n"
     << "  \"stage1_scene\": {\"weather\": \"...\", \"lighting\": \"...\", \"road_layout\": \"...\"},\n"
     << "  \"stage2_critical\": null or {\"category\": \"...\", \"relative_position\": [x, y],\n"
     << "                     \"distance\": d, \"predicted_behavior\": \"...\"},\n"
     << "  \"stage3_risk\": \"Safe\" or \"Unsafe\",\n"
     << "  \"stage4_counterfactuals\": {\"<meta-action key>\": \"Safe\" or \"Unsafe\", ... all nine},\n"
     << "  \"stage5_plan\": {\"meta_action\": {\"short\": \"...\", \"long\": \"...\"},\n"
     << "                  \"waypoints\": [[offset, x, y], ...]}\n"
     << "}\n";
  return os.str();
}

namespace
{

std::optional<json> extract_json_object(const std::string & text)
{
  {
    json j = json::parse(text, nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
      return j;
    }
  }
  std::size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string::npos) {
    const std::size_t body_start = text.find('\n', pos);
    if (body_start == std::string::npos) {
      break;
    }
    const std::size_t fence_end = text.find("```", body_start);
    if (fence_end == std::string::npos) {
      break;
    }
    json j = json::parse(text.substr(body_start, fence_end - body_start), nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
      return j;
    }
    pos = fence_end + 3;
  }
  const std::size_t first = text.find('{');
  if (first != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = first; i < text.size(); ++i) {
      const char ch = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (ch == '\\') {
          escaped = true;
        } else if (ch == '"') {
          in_string = false;
        }
      } else if (ch == '"') {
        in_string = true;
      } else if (ch == '{') {
        ++depth;
      } else if (ch == '}') {
        if (--depth == 0) {
          json j = json::parse(text.substr(first, i - first + 1), nullptr, false);
          if (!j.is_discarded() && j.is_object()) {
            return j;
          }
          break;
        }
      }
    }
  }
  return std::nullopt;
}

std::string string_or_empty(const json & obj, const char * key)
{
  auto it = obj.find(key);
  return it != obj.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

ResponseRecord parse_response(const std::string & text)
{
  ResponseRecord r;
  r.raw_text = text;
  const auto root_opt = extract_json_object(text);
  if (!root_opt) {
    return r;
  }
  const json & root = *root_opt;

  if (auto it = root.find("stage1_scene"); it != root.end()) {
    if (it->is_object()) {
      Environment env;
      env.weather = string_or_empty(*it, "weather");
      env.lighting = string_or_empty(*it, "lighting");
      env.road_layout = string_or_empty(*it, "road_layout");
      r.stage1_scene = std::move(env);
      r.stage1_status = ParseStatus::ok;
    } else {
      r.stage1_status = ParseStatus::malformed;
    }
  }

  if (auto it = root.find("stage2_critical"); it != root.end()) {
    if (it->is_null()) {
      r.stage2_status = ParseStatus::ok;
      r.stage2_null = true;
    } else if (it->is_object()) {
      const json & obj = *it;
      const auto category =
        agent_category_from_string(canonical_token(string_or_empty(obj, "category")));
      const auto rel = obj.find("relative_position");
      const auto dist = obj.find("distance");
      const bool rel_ok = rel != obj.end() && rel->is_array() && rel->size() >= 2 &&
                          (*rel)[0].is_number() && (*rel)[1].is_number();
      const bool dist_ok = dist != obj.end() && dist->is_number();
      if (category && rel_ok && dist_ok) {
        CriticalAnnotation c;
        c.category = *category;
        c.relative_position = {(*rel)[0].get<double>(), (*rel)[1].get<double>()};
        c.distance = dist->get<double>();
        c.predicted_behavior = string_or_empty(obj, "predicted_behavior");
        r.stage2_critical = std::move(c);
        r.stage2_status = ParseStatus::ok;
      } else {
        r.stage2_status = ParseStatus::malformed;
      }
    } else {
      r.stage2_status = ParseStatus::malformed;
    }
  }

  if (auto it = root.find("stage3_risk"); it != root.end()) {
    if (it->is_string()) {
      r.stage3_risk = safety_label_from_string(it->get<std::string>());
      r.stage3_status = r.stage3_risk ? ParseStatus::ok : ParseStatus::malformed;
    } else {
      r.stage3_status = ParseStatus::malformed;
    }
  }

  if (auto it = root.find("stage4_counterfactuals"); it != root.end()) {
    if (it->is_object()) {
      r.stage4_status = ParseStatus::ok;
      const auto actions = enumerate_meta_actions();
      for (std::size_t i = 0; i < actions.size(); ++i) {
        auto entry = it->find(actions[i].key());
        if (entry != it->end() && entry->is_string()) {
          r.stage4_counterfactuals[i] = safety_label_from_string(entry->get<std::string>());
        }
      }
    } else {
      r.stage4_status = ParseStatus::malformed;
    }
  }

  if (auto it = root.find("stage5_plan"); it != root.end()) {
    if (it->is_object()) {
      r.stage5_status = ParseStatus::ok;
      if (auto meta = it->find("meta_action"); meta != it->end() && meta->is_object()) {
        r.stage5_short = lon_behavior_from_string(canonical_token(string_or_empty(*meta, "short")));
        r.stage5_long = lon_behavior_from_string(canonical_token(string_or_empty(*meta, "long")));
      }
      if (auto wps = it->find("waypoints"); wps != it->end() && wps->is_array()) {
        for (const json & wp : *wps) {
          if (wp.is_array() && wp.size() >= 3 && wp[0].is_number() && wp[1].is_number() &&
              wp[2].is_number()) {
            r.stage5_waypoints.push_back(
              {wp[0].get<double>(), {wp[1].get<double>(), wp[2].get<double>()}});
          }
        }
      }
    } else {
      r.stage5_status = ParseStatus::malformed;
    }
  }
  return r;
}

std::string render_response_text(const AnnotationRecord & record)
{
  json root;
  root["stage1_scene"] = {
    {"weather", record.stage1_scene.weather},
    {"lighting", record.stage1_scene.lighting},
    {"road_layout", record.stage1_scene.road_layout}};
  if (record.stage2_critical) {
    const auto & c = *record.stage2_critical;
    root["stage2_critical"] = {
      {"category", to_string(c.category)},
      {"relative_position", {snap6(c.relative_position.x), snap6(c.relative_position.y)}},
      {"distance", snap6(c.distance)},
      {"predicted_behavior", c.predicted_behavior}};
  } else {
    root["stage2_critical"] = nullptr;
  }
  root["stage3_risk"] = to_string(record.stage3_risk);
  json stage4 = json::object();
  const auto actions = enumerate_meta_actions();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    stage4[actions[i].key()] = to_string(record.stage4_counterfactuals[i]);
  }
  root["stage4_counterfactuals"] = std::move(stage4);
  json waypoints = json::array();
  for (const auto & wp : record.stage5_plan.waypoints) {
    waypoints.push_back({snap6(wp.offset), snap6(wp.position.x), snap6(wp.position.y)});
  }
  root["stage5_plan"] = {
    {"meta_action",
     {{"short", to_string(record.stage5_plan.meta_action.short_term)},
      {"long", to_string(record.stage5_plan.meta_action.long_term)}}},
    {"waypoints", std::move(waypoints)}};
  return root.dump(2) + "\n";
}

ResponseRecord oracle_respond(
  const ObservationWindow & window, const Scenario & scenario, const PlannerConfig & cfg)
{
  const AnnotationRecord record = build_record(scenario, window.analysis_time, cfg);
  return parse_response(render_response_text(record));
}

double score_language(const ResponseRecord & resp, const AnnotationRecord & gt)
{
  int correct = 0;
  constexpr int kFieldCount = 19;

  if (resp.stage1_status == ParseStatus::ok && resp.stage1_scene) {
    if (tokens_equal(resp.stage1_scene->weather, gt.stage1_scene.weather)) ++correct;
    if (tokens_equal(resp.stage1_scene->lighting, gt.stage1_scene.lighting)) ++correct;
    if (tokens_equal(resp.stage1_scene->road_layout, gt.stage1_scene.road_layout)) ++correct;
  }

  if (!gt.stage2_critical) {
    if (resp.stage2_status == ParseStatus::ok && resp.stage2_null) {
      correct += 4;
    }
  } else if (resp.stage2_status == ParseStatus::ok && resp.stage2_critical) {
    const auto & p = *resp.stage2_critical;
    const auto & g = *gt.stage2_critical;
    if (p.category == g.category) ++correct;
    if (std::fabs(p.relative_position.x - g.relative_position.x) <= 1.0 &&
        std::fabs(p.relative_position.y - g.relative_position.y) <= 1.0) {
      ++correct;
    }
    if (std::fabs(p.distance - g.distance) <= 1.0) ++correct;
    if (tokens_equal(p.predicted_behavior, g.predicted_behavior)) ++correct;
  }

  if (resp.stage3_status == ParseStatus::ok && resp.stage3_risk == gt.stage3_risk) {
    ++correct;
  }

  if (resp.stage4_status == ParseStatus::ok) {
    for (std::size_t i = 0; i < resp.stage4_counterfactuals.size(); ++i) {
      if (resp.stage4_counterfactuals[i] &&
          *resp.stage4_counterfactuals[i] == gt.stage4_counterfactuals[i]) {
        ++correct;
      }
    }
  }

  if (resp.stage5_status == ParseStatus::ok) {
    if (resp.stage5_short && *resp.stage5_short == gt.stage5_plan.meta_action.short_term) {
      ++correct;
    }
    if (resp.stage5_long && *resp.stage5_long == gt.stage5_plan.meta_action.long_term) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / kFieldCount;
}

RiskScore score_risk(
  const std::vector<std::pair<std::optional<SafetyLabel>, SafetyLabel>> & pairs)
{
  RiskScore score;
  if (pairs.empty()) {
    return score;
  }
  int correct = 0;
  int unsafe_total = 0;
  int unsafe_hit = 0;
  for (const auto & [pred, gt] : pairs) {
    if (pred && *pred == gt) {
      ++correct;
    }
    if (gt == SafetyLabel::unsafe) {
      ++unsafe_total;
      if (pred && *pred == SafetyLabel::unsafe) {
        ++unsafe_hit;
      }
    }
  }
  score.accuracy_pct = 100.0 * correct / static_cast<double>(pairs.size());
  if (unsafe_total > 0) {
    score.recall_pct = 100.0 * unsafe_hit / static_cast<double>(unsafe_total);
  }
  return score;
}

namespace
{

std::vector<Waypoint> sorted_by_offset(std::vector<Waypoint> wps)
{
  std::stable_sort(wps.begin(), wps.end(), [](const Waypoint & a, const Waypoint & b) {
    return a.offset < b.offset;
  });
  return wps;
}

std::optional<Vec2> position_at(const std::vector<Waypoint> & sorted, double tau)
{
  if (sorted.empty() || tau < sorted.front().offset - 1e-9 ||
      tau > sorted.back().offset + 1e-9) {
    return std::nullopt;
  }
  auto it = std::lower_bound(
    sorted.begin(), sorted.end(), tau,
    [](const Waypoint & wp, double v) { return wp.offset < v; });
  if (it == sorted.end()) {
    return sorted.back().position;
  }
  if (it->offset - tau <= 1e-9) {
    return it->position;
  }
  const auto & next = *it;
  const auto & prev = *(it - 1);
  const double span = next.offset - prev.offset;
  const double u = span > 0.0 ? (tau - prev.offset) / span : 0.0;
  return prev.position + (next.position - prev.position) * u;
}

double horizon_error(
  const std::vector<Waypoint> & pred, const std::vector<Waypoint> & gt, double horizon,
  const PlannerConfig & cfg, L2Mode mode)
{
  if (mode == L2Mode::displacement_at_horizon) {
    const auto p = position_at(pred, horizon);
    const auto g = position_at(gt, horizon);
    if (!p || !g) {
      throw ScoringError(
        "trajectories do not cover the " + std::to_string(horizon) + " s horizon");
    }
    return (*p - *g).norm();
  }
  const int m = static_cast<int>(std::llround(horizon / cfg.rollout_dt));
  double sum = 0.0;
  int count = 0;
  for (int k = 1; k <= m; ++k) {
    const double tau = static_cast<double>(k) * cfg.rollout_dt;
    const auto p = position_at(pred, tau);
    const auto g = position_at(gt, tau);
    if (p && g) {
      sum += (*p - *g).norm();
      ++count;
    }
  }
  if (count == 0) {
    throw ScoringError(
      "trajectories share no offsets within the " + std::to_string(horizon) + " s horizon");
  }
  return sum / count;
}

}  // namespace

std::pair<double, double> l2_error(
  const std::vector<Waypoint> & pred, const std::vector<Waypoint> & gt,
  const PlannerConfig & cfg, L2Mode mode)
{
  const auto pred_sorted = sorted_by_offset(pred);
  const auto gt_sorted = sorted_by_offset(gt);
  return {
    horizon_error(pred_sorted, gt_sorted, cfg.short_horizon, cfg, mode),
    horizon_error(pred_sorted, gt_sorted, cfg.plan_horizon, cfg, mode)};
}

std::optional<bool> check_predicted_collision(
  const std::vector<Waypoint> & pred, const Scenario & scenario, double analysis_time,
  const PlannerConfig & cfg)
{
  if (pred.empty()) {
    return std::nullopt;
  }
  const auto pred_sorted = sorted_by_offset(pred);
  const AgentTrack & ego = scenario.ego_track();

  double heading0 = ego.samples.front().state.heading;
  try {
    heading0 = ego.state_at(analysis_time, cfg.max_interp_gap).heading;
  } catch (const Error &) {
  }

  std::vector<std::array<double, 3>> triples;
  const int n = cfg.rollout_sample_count();
  triples.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double tau = static_cast<double>(k) * cfg.rollout_dt;
    const auto p = position_at(pred_sorted, tau);
    if (p) {
      triples.push_back({tau, p->x, p->y});
    }
  }
  if (triples.empty()) {
    return std::nullopt;
  }
  const PosedTrack ego_track = PosedTrack::from_waypoints(
    triples, ego.samples.front().state.footprint, heading0);

  for (const auto & track : scenario.tracks) {
    if (track.agent_id == scenario.ego_id || track.empty()) {
      continue;
    }
    PosedTrack other;
    other.footprint = track.samples.front().state.footprint;
    for (int k = 0; k < n; ++k) {
      const double tau = static_cast<double>(k) * cfg.rollout_dt;
      const double abs_t = analysis_time + tau;
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
    try {
      if (trajectories_collide(ego_track, other)) {
        return true;
      }
    } catch (const GridMismatchError &) {
      continue;
    }
  }
  return false;
}

MetricsReport build_report(
  std::vector<SampleScore> samples, const std::string & config_hash, L2Mode mode)
{
  MetricsReport report;
  report.config_hash = config_hash;
  report.l2_mode = mode;
  report.n_submitted = static_cast<int>(samples.size());

  double language_sum = 0.0;
  std::vector<std::pair<std::optional<SafetyLabel>, SafetyLabel>> risk_pairs;
  double l2_1_sum = 0.0;
  int l2_1_count = 0;
  double l2_3_sum = 0.0;
  int l2_3_count = 0;
  int collided_known = 0;
  int collided_true = 0;

  for (const auto & sample : samples) {
    if (!sample.scored) {
      continue;
    }
    ++report.n_scored;
    language_sum += sample.language_fraction;
    risk_pairs.emplace_back(sample.risk_pred, sample.risk_gt);
    if (sample.l2_1s) {
      l2_1_sum += *sample.l2_1s;
      ++l2_1_count;
    }
    if (sample.l2_3s) {
      l2_3_sum += *sample.l2_3s;
      ++l2_3_count;
    }
    if (sample.collided) {
      ++collided_known;
      if (*sample.collided) {
        ++collided_true;
      }
    }
  }
  report.n_unscored = report.n_submitted - report.n_scored;
  if (report.n_scored > 0) {
    report.language_acc_pct = 100.0 * language_sum / report.n_scored;
    const RiskScore risk = score_risk(risk_pairs);
    report.risk_acc_pct = risk.accuracy_pct;
    report.risk_recall_pct = risk.recall_pct;
  }
  if (l2_1_count > 0) {
    report.l2_1s = l2_1_sum / l2_1_count;
  }
  if (l2_3_count > 0) {
    report.l2_3s = l2_3_sum / l2_3_count;
  }
  if (collided_known > 0) {
    report.collision_rate_pct = 100.0 * collided_true / collided_known;
  }
  report.per_sample = std::move(samples);
  return report;
}

std::string report_to_json(const MetricsReport & r)
{
  json root;
  root["config_hash"] = r.config_hash;
  root["l2_mode"] = to_string(r.l2_mode);
  root["n_submitted"] = r.n_submitted;
  root["n_scored"] = r.n_scored;
  root["n_unscored"] = r.n_unscored;
  root["language_acc_pct"] = snap6(r.language_acc_pct);
  root["risk_acc_pct"] = snap6(r.risk_acc_pct);
  if (r.risk_recall_pct) {
    root["risk_recall_pct"] = snap6(*r.risk_recall_pct);
  } else {
    root["risk_recall_pct"] = nullptr;
  }
  root["l2_1s"] = snap6(r.l2_1s);
  root["l2_3s"] = snap6(r.l2_3s);
  root["collision_rate_pct"] = snap6(r.collision_rate_pct);
  json per_sample = json::array();
  for (const auto & s : r.per_sample) {
    json row;
    row["sample_id"] = s.sample_id;
    row["scored"] = s.scored;
    row["unscored_reason"] = s.unscored_reason;
    row["language_fraction"] = snap6(s.language_fraction);
    row["risk_pred"] = s.risk_pred ? json(to_string(*s.risk_pred)) : json(nullptr);
    row["risk_gt"] = to_string(s.risk_gt);
    row["l2_1s"] = s.l2_1s ? json(snap6(*s.l2_1s)) : json(nullptr);
    row["l2_3s"] = s.l2_3s ? json(snap6(*s.l2_3s)) : json(nullptr);
    row["collided"] = s.collided ? json(*s.collided) : json(nullptr);
    row["gt_source"] = to_string(s.gt_source);
    per_sample.push_back(std::move(row));
  }
  root["per_sample"] = std::move(per_sample);
  return root.dump(2) + "\n";
}

std::string report_to_text(const MetricsReport & r)
{
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "samples scored:    " << r.n_scored << "/" << r.n_submitted;
  if (r.n_unscored > 0) {
    os << " (" << r.n_unscored << " unscored)";
  }
  os << "\n";
  os << "language accuracy: " << r.language_acc_pct << " %\n";
  os << "risk accuracy:     " << r.risk_acc_pct << " %\n";
  os << "risk recall:       ";
  if (r.risk_recall_pct) {
    os << *r.risk_recall_pct << " %\n";
  } else {
    os << "n/a\n";
  }
  os << "l2 @ 1s:           " << r.l2_1s << " m\n";
  os << "l2 @ 3s:           " << r.l2_3s << " m\n";
  os << "collision rate:    " << r.collision_rate_pct << " %\n";
  os << "l2 mode:           " << to_string(r.l2_mode) << "\n";
  os << "config hash:       " << r.config_hash << "\n";
  return os.str();
}

std::string report_to_csv(const MetricsReport & r)
{
  std::ostringstream os;
  os << std::setprecision(10);
  os << "sample_id,l2_1s,l2_3s,collided,risk_pred,risk_gt\n";
  for (const auto & s : r.per_sample) {
    os << s.sample_id << ",";
    if (s.l2_1s) {
      os << snap6(*s.l2_1s);
    }
    os << ",";
    if (s.l2_3s) {
      os << snap6(*s.l2_3s);
    }
    os << ",";
    if (s.collided) {
      os << (*s.collided ? "1" : "0");
    }
    os << ",";
    if (s.risk_pred) {
      os << to_string(*s.risk_pred);
    }
    os << "," << to_string(s.risk_gt) << "\n";
  }
  return os.str();
}

}  // namespace cfrisk
