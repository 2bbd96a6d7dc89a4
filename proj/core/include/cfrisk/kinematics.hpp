#ifndef CFRISK__KINEMATICS_HPP_
#define CFRISK__KINEMATICS_HPP_

#include "cfrisk/scenario.hpp"

#include <array>
#include <string>
#include <vector>

namespace cfrisk
{

/// Longitudinal behavior for one horizon segment.
enum class LonBehavior { accelerate = 0, maintain = 1, decelerate = 2 };

const char * to_string(LonBehavior b);
std::optional<LonBehavior> lon_behavior_from_string(const std::string & s);

/// One root-to-leaf path of the two-layer action tree: a short-term
/// behavior over [0, T_s) and a long-term behavior over [T_s, T_p].
struct MetaAction
{
  LonBehavior short_term{LonBehavior::maintain};
  LonBehavior long_term{LonBehavior::maintain};

  /// Canonical index in [0, 9): lexicographic (short, long) with
  /// accelerate < maintain < decelerate.
  int canonical_index() const
  {
    return static_cast<int>(short_term) * 3 + static_cast<int>(long_term);
  }

  bool operator==(const MetaAction &) const = default;
  bool operator<(const MetaAction & o) const { return canonical_index() < o.canonical_index(); }

  /// Stable identifier, e.g. "maintain_decelerate". Used as the JSON key.
  std::string key() const;
  /// Human rendering, e.g. "(Maintain, Decelerate)".
  std::string pretty() const;
};

std::optional<MetaAction> meta_action_from_key(const std::string & key);

/// All nine meta-actions in canonical order. This is the full action space.
std::array<MetaAction, 9> enumerate_meta_actions();

/// Piecewise-constant longitudinal acceleration over [0, T_p]:
/// a1 on [0, T_s), a2 on [T_s, T_p].
struct AccelProfile
{
  double short_accel{0.0};   // [m/s^2] on [0, T_s)
  double long_accel{0.0};    // [m/s^2] on [T_s, T_p]
  double short_horizon{1.0}; // T_s [s]
  double plan_horizon{3.0};  // T_p [s]
};

/// Map a meta-action onto the acceleration grid: accelerate -> +accel_step,
/// maintain -> 0, decelerate -> -accel_step per segment.
AccelProfile to_accel_profile(const MetaAction & a, const PlannerConfig & cfg);

struct RolloutSample
{
  double offset{0.0};  // [s] from the analysis time
  Vec2 position;
  double speed{0.0};   // [m/s], never negative
  double heading{0.0};
};

/// A counterfactual ego trajectory: straight-line motion along the heading
/// at the analysis time, speed from the closed-form piecewise integration
/// with a sticky clamp at zero.
struct EgoRollout
{
  MetaAction meta_action;
  Footprint footprint;
  std::vector<RolloutSample> samples;  // at rollout_dt spacing over [0, T_p]

  double progress() const
  {
    return samples.empty() ? 0.0 : (samples.back().position - samples.front().position).norm();
  }
};

/// Roll the ego out under `profile`. Samples land on exact multiples of
/// cfg.rollout_dt; speed is clamped at zero and stays there until the
/// acceleration turns positive.
EgoRollout rollout(const AgentState & ego, const AccelProfile & profile, const PlannerConfig & cfg);

/// Constant-velocity prediction of one neighbor over [t, t + T_p].
struct NeighborPrediction
{
  AgentTrack track;     // samples at t + k * rollout_dt, absolute timestamps
  double stale_by{0.0}; // [s] age of the anchor sample at t, 0 if fresh

  bool stale() const { return stale_by > 1e-9; }
};

/// Extrapolate every window neighbor from its state at the analysis time
/// (or from its latest sample, flagged stale) with fixed velocity and
/// heading, sampled on the rollout grid.
std::vector<NeighborPrediction> predict_neighbors(
  const ObservationWindow & window, const PlannerConfig & cfg);

}  // namespace cfrisk

#endif  // CFRISK__KINEMATICS_HPP_
