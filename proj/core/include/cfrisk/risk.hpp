#ifndef CFRISK__RISK_HPP_
#define CFRISK__RISK_HPP_

#include "cfrisk/kinematics.hpp"
#include "cfrisk/scenario.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace cfrisk
{

constexpr double kInfiniteTtc = std::numeric_limits<double>::infinity();

struct TtcResult
{
  std::string agent_id;
  double ttc{kInfiniteTtc};          // [s] >= 0, or +inf if never
  double closest_approach{0.0};      // [m] minimum surface gap over tau >= 0
};

/// Time to collision between two agents under constant-velocity
/// extrapolation, using the circumscribed-disc contact model: smallest
/// tau >= 0 with |p_rel + v_rel*tau| = r_a + r_b. Zero if the discs
/// already overlap, +inf if they never meet.
TtcResult instantaneous_ttc(const AgentState & ego, const AgentState & other);

struct RolloutTtc
{
  double min_ttc{kInfiniteTtc};
  std::optional<std::string> agent_id;  // argmin neighbor
  double offset{0.0};                   // argmin grid offset [s]
};

/// Minimum instantaneous TTC over every rollout sample and neighbor.
/// Contact (TTC = 0 at any sample) dominates. Throws GridMismatchError
/// unless rollout and predictions share the sample grid.
RolloutTtc rollout_min_ttc(
  const EgoRollout & ego_roll, const std::vector<NeighborPrediction> & neighbors,
  const PlannerConfig & cfg);

enum class SafetyLabel { safe, unsafe };

const char * to_string(SafetyLabel l);
std::optional<SafetyLabel> safety_label_from_string(const std::string & s);

enum class RiskReason { none, ttc_below_threshold, preimpact_window };

const char * to_string(RiskReason r);

struct RiskLabel
{
  SafetyLabel label{SafetyLabel::safe};
  double min_ttc{kInfiniteTtc};
  std::optional<std::string> critical_agent;
  RiskReason reason{RiskReason::none};
};

/// Current-frame risk: Unsafe when the minimum instantaneous TTC over the
/// window neighbors is below cfg.ttc_threshold, or when the scene has a
/// collision record and t falls in [impact - preimpact_window, impact].
/// The pre-impact reason takes precedence when both apply.
RiskLabel label_current_risk(
  const ObservationWindow & window, const Scenario & scenario, const PlannerConfig & cfg);

struct CriticalObject
{
  std::string agent_id;
  AgentCategory category{AgentCategory::car};
  Vec2 relative_position;  // [m] ego frame (x forward, y left) at t
  double distance{0.0};    // [m]
  double ttc{kInfiniteTtc};
  bool low_priority{false};  // set for the nearest-neighbor fallback
};

/// The agent the annotation focuses on: the recorded colliding agent when
/// t is inside the pre-impact window, else the neighbor with minimum
/// finite TTC, else the nearest neighbor flagged low-priority, else none.
std::optional<CriticalObject> identify_critical_object(
  const ObservationWindow & window, const Scenario & scenario, const PlannerConfig & cfg);

/// A sampled pose sequence with a footprint, for the oriented-rectangle
/// collision test.
struct PosedTrack
{
  std::vector<double> offsets;    // [s] shared grid
  std::vector<Vec2> positions;
  std::vector<double> headings;
  Footprint footprint;

  static PosedTrack from_rollout(const EgoRollout & roll);
  static PosedTrack from_prediction(const NeighborPrediction & pred, double analysis_time);
  /// From bare waypoints; headings derived from consecutive deltas,
  /// falling back to `initial_heading` while stationary.
  static PosedTrack from_waypoints(
    const std::vector<std::array<double, 3>> & waypoints, const Footprint & footprint,
    double initial_heading);
};

/// Earliest shared offset at which the two oriented rectangles overlap
/// (separating-axis test), or nullopt. Offsets present in only one track
/// are skipped; throws GridMismatchError when shared offsets disagree.
std::optional<double> trajectories_collide(const PosedTrack & a, const PosedTrack & b);

}  // namespace cfrisk

#endif  // CFRISK__RISK_HPP_
