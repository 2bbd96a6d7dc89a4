#include "cfrisk/kinematics.hpp"

#include "cfrisk/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <utility>

namespace cfrisk
{

const char * to_string(LonBehavior b)
{
  switch (b) {
    case LonBehavior::accelerate: return "accelerate";
    case LonBehavior::maintain: return "maintain";
    case LonBehavior::decelerate: return "decelerate";
  }
  return "maintain";
}

std::optional<LonBehavior> lon_behavior_from_string(const std::string & s)
{
  if (s == "accelerate") return LonBehavior::accelerate;
  if (s == "maintain") return LonBehavior::maintain;
  if (s == "decelerate") return LonBehavior::decelerate;
  return std::nullopt;
}

namespace
{

std::string capitalized(const char * word)
{
  std::string out(word);
  if (!out.empty()) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

}  // namespace

std::string MetaAction::key() const
{
  return std::string(to_string(short_term)) + "_" + to_string(long_term);
}

std::string MetaAction::pretty() const
{
  return "(" + capitalized(to_string(short_term)) + ", " + capitalized(to_string(long_term)) + ")";
}

std::optional<MetaAction> meta_action_from_key(const std::string & key)
{
  const auto sep = key.find('_');
  if (sep == std::string::npos) {
    return std::nullopt;
  }
  const auto first = lon_behavior_from_string(key.substr(0, sep));
  const auto second = lon_behavior_from_string(key.substr(sep + 1));
  if (!first || !second) {
    return std::nullopt;
  }
  return MetaAction{*first, *second};
}

std::array<MetaAction, 9> enumerate_meta_actions()
{
  std::array<MetaAction, 9> actions;
  const LonBehavior order[3] = {
    LonBehavior::accelerate, LonBehavior::maintain, LonBehavior::decelerate};
  int i = 0;
  for (LonBehavior st : order) {
    for (LonBehavior lt : order) {
      actions[i++] = MetaAction{st, lt};
    }
  }
  return actions;
}

namespace
{

double behavior_accel(LonBehavior b, double step)
{
  switch (b) {
    case LonBehavior::accelerate: return step;
    case LonBehavior::maintain: return 0.0;
    case LonBehavior::decelerate: return -step;
  }
  return 0.0;
}

}  // namespace

AccelProfile to_accel_profile(const MetaAction & a, const PlannerConfig & cfg)
{
  AccelProfile profile;
  profile.short_accel = behavior_accel(a.short_term, cfg.accel_step);
  profile.long_accel = behavior_accel(a.long_term, cfg.accel_step);
  profile.short_horizon = cfg.short_horizon;
  profile.plan_horizon = cfg.plan_horizon;
  return profile;
}

namespace
{

// One maximal interval on which speed is an affine function of time.
// Deceleration through zero splits a horizon segment into a quadratic
// piece and a clamped flat piece.
struct MotionPiece
{
  double t0{0.0};
  double t1{0.0};
  double v0{0.0};  // speed at t0
  double a{0.0};   // effective acceleration (0 while clamped)
  double s0{0.0};  // arc length at t0
};

std::vector<MotionPiece> build_pieces(double v_init, const AccelProfile & profile)
{
  std::vector<MotionPiece> pieces;
  double t = 0.0;
  double v = std::max(0.0, v_init);
  double s = 0.0;
  const double eps = 1e-12;

  const std::pair<double, double> segments[2] = {
    {profile.short_horizon, profile.short_accel},
    {profile.plan_horizon, profile.long_accel}};

  for (const auto & [seg_end, a] : segments) {
    while (t < seg_end - eps) {
      if (v <= eps && a <= 0.0) {
        pieces.push_back({t, seg_end, 0.0, 0.0, s});
        v = 0.0;
        t = seg_end;
      } else if (a < 0.0 && t + v / -a < seg_end - eps) {
        const double t_stop = t + v / -a;
        pieces.push_back({t, t_stop, v, a, s});
        s += v * (t_stop - t) + 0.5 * a * (t_stop - t) * (t_stop - t);
        v = 0.0;
        t = t_stop;
      } else {
        const double dt = seg_end - t;
        pieces.push_back({t, seg_end, v, a, s});
        s += v * dt + 0.5 * a * dt * dt;
        v = std::max(0.0, v + a * dt);
        t = seg_end;
      }
    }
  }
  return pieces;
}

}  // namespace

EgoRollout rollout(const AgentState & ego, const AccelProfile & profile, const PlannerConfig & cfg)
{
  if (profile.plan_horizon <= profile.short_horizon || profile.short_horizon <= 0.0) {
    throw ConfigError("rollout: requires 0 < short_horizon < plan_horizon");
  }
  const auto divides = [&cfg](double span) {
    const double k = span / cfg.rollout_dt;
    return std::fabs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::fabs(k));
  };
  if (!(cfg.rollout_dt > 0.0) || !divides(profile.short_horizon) ||
      !divides(profile.plan_horizon - profile.short_horizon)) {
    throw ConfigError("rollout: rollout_dt must divide the segment boundaries");
  }

  EgoRollout out;
  out.footprint = ego.footprint;
  const Vec2 dir{std::cos(ego.heading), std::sin(ego.heading)};
  const auto pieces = build_pieces(ego.speed(), profile);

  const int n = cfg.rollout_sample_count();
  out.samples.reserve(n);
  std::size_t pi = 0;
  for (int k = 0; k < n; ++k) {
    const double tau = static_cast<double>(k) * cfg.rollout_dt;
    while (pi + 1 < pieces.size() && tau > pieces[pi].t1 + 1e-12) {
      ++pi;
    }
    const MotionPiece & piece = pieces[pi];
    const double dt = std::clamp(tau - piece.t0, 0.0, piece.t1 - piece.t0);
    RolloutSample sample;
    sample.offset = tau;
    sample.speed = std::max(0.0, piece.v0 + piece.a * dt);
    sample.position = ego.position + dir * (piece.s0 + piece.v0 * dt + 0.5 * piece.a * dt * dt);
    sample.heading = ego.heading;
    out.samples.push_back(sample);
  }
  return out;
}

std::vector<NeighborPrediction> predict_neighbors(
  const ObservationWindow & window, const PlannerConfig & cfg)
{
  std::vector<NeighborPrediction> predictions;
  predictions.reserve(window.neighbor_histories.size());
  const double t = window.analysis_time;
  const int n = cfg.rollout_sample_count();

  for (const auto & history : window.neighbor_histories) {
    if (history.empty()) {
      continue;
    }
    const TrackSample & anchor = history.samples.back();
    NeighborPrediction pred;
    pred.stale_by = std::max(0.0, t - anchor.timestamp);
    pred.track.agent_id = history.agent_id;
    pred.track.samples.reserve(n);
    for (int k = 0; k < n; ++k) {
      const double tau = static_cast<double>(k) * cfg.rollout_dt;
      TrackSample sample;
      sample.timestamp = t + tau;
      sample.state = anchor.state;
      sample.state.position =
        anchor.state.position + anchor.state.velocity * (pred.stale_by + tau);
      pred.track.samples.push_back(std::move(sample));
    }
    predictions.push_back(std::move(pred));
  }
  return predictions;
}

}  // namespace cfrisk
