#ifndef CFRISK__SCENARIO_HPP_
#define CFRISK__SCENARIO_HPP_

#include "cfrisk/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cfrisk
{

enum class AgentCategory { car, truck, motorcycle, cyclist, pedestrian, other };

const char * to_string(AgentCategory c);
std::optional<AgentCategory> agent_category_from_string(const std::string & s);

/// Category-typical footprint, used when a source log carries no dimensions.
Footprint default_footprint(AgentCategory c);

struct AgentState
{
  std::string agent_id;
  Vec2 position;   // [m] world frame (East-North ground plane)
  Vec2 velocity;   // [m/s] world frame
  double heading{0.0};  // [rad] in (-pi, pi]
  Footprint footprint;
  AgentCategory category{AgentCategory::car};

  double speed() const { return velocity.norm(); }
};

struct TrackSample
{
  double timestamp{0.0};  // [s]
  AgentState state;
};

/// One agent's trajectory. Timestamps strictly increasing, nominal 10 Hz,
/// gaps permitted.
struct AgentTrack
{
  std::string agent_id;
  std::vector<TrackSample> samples;

  bool empty() const { return samples.empty(); }
  double start_time() const { return samples.front().timestamp; }
  double end_time() const { return samples.back().timestamp; }
  bool covers(double t, double tol = 1e-9) const
  {
    return !empty() && t >= start_time() - tol && t <= end_time() + tol;
  }

  /// State at time t, linearly interpolated (heading on the circle).
  /// Throws RangeError if t lies outside [start, end] beyond tolerance,
  /// InsufficientHistoryError if t falls inside a gap larger than max_gap.
  AgentState state_at(double t, double max_gap) const;

  /// Largest inter-sample gap overlapping [from, to], 0 if fully covered
  /// by a single span.
  double max_gap_in(double from, double to) const;
};

enum class CameraName { front, front_left, front_right };

const char * to_string(CameraName c);
std::optional<CameraName> camera_name_from_string(const std::string & s);

struct CameraFrame
{
  double timestamp{0.0};  // [s], nominal 2 Hz
  CameraName camera{CameraName::front};
  std::string image_path;  // opaque, never decoded
};

struct Environment
{
  std::string weather;
  std::string lighting;
  std::string road_layout;
};

struct CollisionRecord
{
  std::string colliding_agent_id;
  double impact_time{0.0};  // [s], within the scene time span
};

struct Scenario
{
  std::string scene_id;
  std::string ego_id;
  std::vector<AgentTrack> tracks;
  std::vector<CameraFrame> camera_frames;
  Environment environment;
  std::optional<CollisionRecord> collision;

  const AgentTrack * find_track(const std::string & agent_id) const;
  const AgentTrack & ego_track() const;

  /// Scene time span, taken from the ego track.
  double start_time() const { return ego_track().start_time(); }
  double end_time() const { return ego_track().end_time(); }

  /// Checks every type invariant; throws ParseError/StructuralError on the
  /// first violation.
  void validate() const;
};

/// Planner and pipeline constants. Defaults follow the reference setup:
/// 1.5 s history, 1 s short / 3 s long horizon, 10 Hz rollouts, a +/-2 m/s^2
/// acceleration grid and a 3 s TTC threshold.
struct PlannerConfig
{
  double history_window{1.5};     // T_h [s]
  double short_horizon{1.0};      // T_s [s]
  double plan_horizon{3.0};       // T_p [s]
  double rollout_dt{0.1};         // [s]
  double accel_step{2.0};         // [m/s^2]
  double ttc_threshold{3.0};      // [s]
  double neighbor_radius{30.0};   // [m]
  double preimpact_window{3.0};   // [s]
  double stride{0.5};             // [s] sampling stride
  enum class PredictionModel { constant_velocity } prediction_model{
    PredictionModel::constant_velocity};

  /// Interpolation is allowed across gaps up to this long; larger ego gaps
  /// are a hard error.
  double max_interp_gap{0.3};  // [s]
  /// A neighbor missing a sample at the analysis time is still included
  /// (extrapolated, flagged stale) when last seen within this bound.
  double max_neighbor_staleness{0.5};  // [s]

  int rollout_sample_count() const
  {
    return static_cast<int>(std::llround(plan_horizon / rollout_dt)) + 1;
  }
  int window_sample_count() const
  {
    return static_cast<int>(std::llround(history_window / rollout_dt)) + 1;
  }

  /// Throws ConfigError unless all fields are positive, 0 < T_s < T_p and
  /// rollout_dt divides T_s and T_p - T_s exactly.
  void validate() const;
};

/// The analysis-time observation: ego and nearby-agent histories over
/// [t - T_h, t], resampled onto the 10 Hz grid ending at t, plus camera
/// frame references falling in the window.
struct ObservationWindow
{
  std::string scene_id;
  double analysis_time{0.0};
  AgentTrack ego_history;                  // grid-resampled, last sample at t
  std::vector<AgentTrack> neighbor_histories;
  std::vector<CameraFrame> camera_refs;

  const AgentState & ego_state() const { return ego_history.samples.back().state; }
};

/// Cut the observation window at time t. Neighbors are agents within
/// cfg.neighbor_radius of the ego at t; histories are clipped to
/// [t - T_h, t] with interior gaps up to cfg.max_interp_gap interpolated.
ObservationWindow extract_window(const Scenario & s, double t, const PlannerConfig & cfg);

/// extract_window against an explicit ego track (the closed-loop replay
/// substitutes the simulated ego here); `others` must not contain the ego.
ObservationWindow build_window(
  const std::string & scene_id, const AgentTrack & ego,
  const std::vector<const AgentTrack *> & others,
  const std::vector<CameraFrame> & camera_frames, double t, const PlannerConfig & cfg);

}  // namespace cfrisk

#endif  // CFRISK__SCENARIO_HPP_
