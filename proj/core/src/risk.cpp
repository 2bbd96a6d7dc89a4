#include "cfrisk/risk.hpp"

#include "cfrisk/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace cfrisk
{

const char * to_string(SafetyLabel l)
{
  return l == SafetyLabel::safe ? "Safe" : "Unsafe";
}

std::optional<SafetyLabel> safety_label_from_string(const std::string & s)
{
  std::string lowered;
  lowered.reserve(s.size());
  for (char c : s) {
    lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lowered == "safe") return SafetyLabel::safe;
  if (lowered == "unsafe") return SafetyLabel::unsafe;
  return std::nullopt;
}

const char * to_string(RiskReason r)
{
  switch (r) {
    case RiskReason::none: return "none";
    case RiskReason::ttc_below_threshold: return "ttc_below_threshold";
    case RiskReason::preimpact_window: return "preimpact_window";
  }
  return "none";
}

TtcResult instantaneous_ttc(const AgentState & ego, const AgentState & other)
{
  TtcResult result;
  result.agent_id = other.agent_id;

  const double r_sum = ego.footprint.disc_radius() + other.footprint.disc_radius();
  const Vec2 p = other.position - ego.position;
  const Vec2 v = other.velocity - ego.velocity;
  const double c = p.squared_norm() - r_sum * r_sum;

  if (c <= 0.0) {
    result.ttc = 0.0;
    result.closest_approach = 0.0;
    return result;
  }

  const double a = v.squared_norm();
  const double b = 2.0 * p.dot(v);

  if (a < 1e-12) {
    if (b >= 0.0) {
      result.ttc = kInfiniteTtc;
      result.closest_approach = std::max(0.0, p.norm() - r_sum);
    } else {
      result.ttc = -c / b;
      result.closest_approach = 0.0;
    }
    return result;
  }

  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    result.ttc = kInfiniteTtc;
    const double tau_star = std::max(0.0, -b / (2.0 * a));
    result.closest_approach = std::max(0.0, (p + v * tau_star).norm() - r_sum);
    return result;
  }

  const double tau = (-b - std::sqrt(disc)) / (2.0 * a);
  if (tau < 0.0) {
    // closest point already behind us; separation only grows
    result.ttc = kInfiniteTtc;
    result.closest_approach = std::max(0.0, p.norm() - r_sum);
    return result;
  }
  result.ttc = tau;
  result.closest_approach = 0.0;
  return result;
}

RolloutTtc rollout_min_ttc(
  const EgoRollout & ego_roll, const std::vector<NeighborPrediction> & neighbors,
  const PlannerConfig & cfg)
{
  (void)cfg;
  RolloutTtc best;
  if (ego_roll.samples.empty()) {
    return best;
  }
  const std::size_t n = ego_roll.samples.size();
  for (const auto & pred : neighbors) {
    if (pred.track.samples.size() != n) {
      throw GridMismatchError(
        "rollout has " + std::to_string(n) + " samples but prediction for " +
        pred.track.agent_id + " has " + std::to_string(pred.track.samples.size()));
    }
    const double base = pred.track.samples.front().timestamp;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::fabs((pred.track.samples[k].timestamp - base) - ego_roll.samples[k].offset) >
          1e-6) {
        throw GridMismatchError(
          "prediction for " + pred.track.agent_id + " is not on the rollout grid");
      }
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    const RolloutSample & es = ego_roll.samples[k];
    AgentState ego;
    ego.position = es.position;
    ego.velocity = Vec2{std::cos(es.heading), std::sin(es.heading)} * es.speed;
    ego.heading = es.heading;
    ego.footprint = ego_roll.footprint;
    for (const auto & pred : neighbors) {
      const TtcResult ttc = instantaneous_ttc(ego, pred.track.samples[k].state);
      if (ttc.ttc < best.min_ttc) {
        best.min_ttc = ttc.ttc;
        best.agent_id = pred.track.agent_id;
        best.offset = es.offset;
      }
    }
  }
  return best;
}

namespace
{

struct NeighborAtT
{
  const AgentTrack * history{nullptr};
  AgentState state;  // extrapolated to the analysis time when stale
};

std::vector<NeighborAtT> neighbors_at_analysis_time(const ObservationWindow & window)
{
  std::vector<NeighborAtT> out;
  out.reserve(window.neighbor_histories.size());
  for (const auto & history : window.neighbor_histories) {
    if (history.empty()) {
      continue;
    }
    const TrackSample & anchor = history.samples.back();
    NeighborAtT n;
    n.history = &history;
    n.state = anchor.state;
    const double stale_by = window.analysis_time - anchor.timestamp;
    if (stale_by > 1e-9) {
      n.state.position = anchor.state.position + anchor.state.velocity * stale_by;
    }
    out.push_back(std::move(n));
  }
  return out;
}

bool in_preimpact_window(
  const Scenario & scenario, double t, const PlannerConfig & cfg)
{
  if (!scenario.collision) {
    return false;
  }
  const double impact = scenario.collision->impact_time;
  return t >= impact - cfg.preimpact_window - 1e-9 && t <= impact + 1e-9;
}

}  // namespace

RiskLabel label_current_risk(
  const ObservationWindow & window, const Scenario & scenario, const PlannerConfig & cfg)
{
  RiskLabel label;
  const AgentState & ego = window.ego_state();
  for (const auto & neighbor : neighbors_at_analysis_time(window)) {
    const TtcResult ttc = instantaneous_ttc(ego, neighbor.state);
    if (ttc.ttc < label.min_ttc) {
      label.min_ttc = ttc.ttc;
      label.critical_agent = neighbor.state.agent_id;
    }
  }

  if (in_preimpact_window(scenario, window.analysis_time, cfg)) {
    label.label = SafetyLabel::unsafe;
    label.reason = RiskReason::preimpact_window;
    label.critical_agent = scenario.collision->colliding_agent_id;
  } else if (label.min_ttc < cfg.ttc_threshold) {
    label.label = SafetyLabel::unsafe;
    label.reason = RiskReason::ttc_below_threshold;
  } else {
    label.label = SafetyLabel::safe;
    label.reason = RiskReason::none;
    label.critical_agent.reset();
  }
  return label;
}

std::optional<CriticalObject> identify_critical_object(
  const ObservationWindow & window, const Scenario & scenario, const PlannerConfig & cfg)
{
  const auto neighbors = neighbors_at_analysis_time(window);
  if (neighbors.empty()) {
    return std::nullopt;
  }
  const AgentState & ego = window.ego_state();

  const auto finish = [&](const NeighborAtT & n, double ttc, bool low_priority) {
    CriticalObject obj;
    obj.agent_id = n.state.agent_id;
    obj.category = n.state.category;
    obj.relative_position = (n.state.position - ego.position).rotated(-ego.heading);
    obj.distance = (n.state.position - ego.position).norm();
    obj.ttc = ttc;
    obj.low_priority = low_priority;
    return obj;
  };

  if (in_preimpact_window(scenario, window.analysis_time, cfg)) {
    const std::string & partner = scenario.collision->colliding_agent_id;
    for (const auto & n : neighbors) {
      if (n.state.agent_id == partner) {
        return finish(n, instantaneous_ttc(ego, n.state).ttc, false);
      }
    }
    // recorded partner not observable here; fall through to the TTC rule
  }

  const NeighborAtT * best = nullptr;
  double best_ttc = kInfiniteTtc;
  for (const auto & n : neighbors) {
    const double ttc = instantaneous_ttc(ego, n.state).ttc;
    if (ttc < best_ttc) {
      best_ttc = ttc;
      best = &n;
    }
  }
  if (best != nullptr && std::isfinite(best_ttc)) {
    return finish(*best, best_ttc, false);
  }

  const NeighborAtT * nearest = nullptr;
  double nearest_dist = kInfiniteTtc;
  for (const auto & n : neighbors) {
    const double dist = (n.state.position - ego.position).norm();
    if (dist < nearest_dist) {
      nearest_dist = dist;
      nearest = &n;
    }
  }
  return finish(*nearest, kInfiniteTtc, true);
}

PosedTrack PosedTrack::from_rollout(const EgoRollout & roll)
{
  PosedTrack track;
  track.footprint = roll.footprint;
  track.offsets.reserve(roll.samples.size());
  track.positions.reserve(roll.samples.size());
  track.headings.reserve(roll.samples.size());
  for (const auto & sample : roll.samples) {
    track.offsets.push_back(sample.offset);
    track.positions.push_back(sample.position);
    track.headings.push_back(sample.heading);
  }
  return track;
}

PosedTrack PosedTrack::from_prediction(const NeighborPrediction & pred, double analysis_time)
{
  PosedTrack track;
  if (!pred.track.samples.empty()) {
    track.footprint = pred.track.samples.front().state.footprint;
  }
  track.offsets.reserve(pred.track.samples.size());
  track.positions.reserve(pred.track.samples.size());
  track.headings.reserve(pred.track.samples.size());
  for (const auto & sample : pred.track.samples) {
    track.offsets.push_back(sample.timestamp - analysis_time);
    track.positions.push_back(sample.state.position);
    track.headings.push_back(sample.state.heading);
  }
  return track;
}

PosedTrack PosedTrack::from_waypoints(
  const std::vector<std::array<double, 3>> & waypoints, const Footprint & footprint,
  double initial_heading)
{
  PosedTrack track;
  track.footprint = footprint;
  track.offsets.reserve(waypoints.size());
  track.positions.reserve(waypoints.size());
  track.headings.reserve(waypoints.size());
  double heading = initial_heading;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    track.offsets.push_back(waypoints[i][0]);
    track.positions.push_back({waypoints[i][1], waypoints[i][2]});
    if (i + 1 < waypoints.size()) {
      const Vec2 delta{
        waypoints[i + 1][1] - waypoints[i][1], waypoints[i + 1][2] - waypoints[i][2]};
      if (delta.norm() > 1e-6) {
        heading = std::atan2(delta.y, delta.x);
      }
    }
    track.headings.push_back(heading);
  }
  return track;
}

std::optional<double> trajectories_collide(const PosedTrack & a, const PosedTrack & b)
{
  if (a.offsets.size() != a.positions.size() || a.offsets.size() != a.headings.size() ||
      b.offsets.size() != b.positions.size() || b.offsets.size() != b.headings.size()) {
    throw StructuralError("posed track arrays have mismatched lengths");
  }
  if (a.offsets.empty() || b.offsets.empty()) {
    return std::nullopt;
  }

  const double tol = 1e-6;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t shared = 0;
  std::optional<double> hit;
  while (i < a.offsets.size() && j < b.offsets.size()) {
    const double oa = a.offsets[i];
    const double ob = b.offsets[j];
    if (std::fabs(oa - ob) <= tol) {
      ++shared;
      const OrientedBox box_a{a.positions[i], a.headings[i], a.footprint};
      const OrientedBox box_b{b.positions[j], b.headings[j], b.footprint};
      if (boxes_overlap(box_a, box_b)) {
        hit = oa;
        break;
      }
      ++i;
      ++j;
    } else if (oa < ob) {
      ++i;
    } else {
      ++j;
    }
  }
  if (shared == 0) {
    throw GridMismatchError("posed tracks share no sample offsets");
  }
  return hit;
}

}  // namespace cfrisk
