#ifndef CFRISK__EVAL_HPP_
#define CFRISK__EVAL_HPP_

#include "cfrisk/annotator.hpp"
#include "cfrisk/scenario.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cfrisk
{

enum class ParseStatus { ok, missing, malformed };

const char * to_string(ParseStatus s);

/// A model response in the five-stage schema, with per-stage parse status.
/// Fields under a stage whose status is not `ok` score zero.
struct ResponseRecord
{
  std::string raw_text;

  ParseStatus stage1_status{ParseStatus::missing};
  std::optional<Environment> stage1_scene;

  ParseStatus stage2_status{ParseStatus::missing};
  bool stage2_null{false};  // stage present and explicitly null
  std::optional<CriticalAnnotation> stage2_critical;

  ParseStatus stage3_status{ParseStatus::missing};
  std::optional<SafetyLabel> stage3_risk;

  ParseStatus stage4_status{ParseStatus::missing};
  std::array<std::optional<SafetyLabel>, 9> stage4_counterfactuals{};

  ParseStatus stage5_status{ParseStatus::missing};
  std::optional<LonBehavior> stage5_short;
  std::optional<LonBehavior> stage5_long;
  std::vector<Waypoint> stage5_waypoints;
};

/// Deterministic five-stage prompt: a system section defining the task, a
/// user section serializing the window (10 Hz histories, 2 Hz camera
/// references) and a task section enumerating the stages, all nine
/// meta-action keys and the output schema. Byte-stable for equal inputs.
std::string assemble_prompt(const ObservationWindow & window, const PlannerConfig & cfg);

/// Tolerant extraction of the structured block from surrounding prose.
/// Never throws: failures become per-stage statuses.
ResponseRecord parse_response(const std::string & text);

/// Render a ground-truth record through the response schema (canonical
/// JSON text). Parsing it back yields an all-ok ResponseRecord.
std::string render_response_text(const AnnotationRecord & record);

/// The rule-based mock model: runs the annotation stage logic on the
/// window and returns it in the response schema. Scoring its output
/// against its own ground truth is perfect by construction.
ResponseRecord oracle_respond(
  const ObservationWindow & window, const Scenario & scenario, const PlannerConfig & cfg);

/// Fraction of the 19 structured fields answered correctly:
/// stage1 weather/lighting/road_layout (3), stage2 category, relative
/// position (+/-1 m per axis), distance (+/-1 m), behavior (4), stage3
/// label (1), stage4 labels (9), stage5 short/long actions (2).
/// Categorical fields compare case-insensitively after trimming.
double score_language(const ResponseRecord & resp, const AnnotationRecord & gt);

struct RiskScore
{
  double accuracy_pct{0.0};
  std::optional<double> recall_pct;  // n/a when ground truth has no Unsafe
};

/// Scene-level safe/unsafe accuracy and Unsafe-class recall. A missing
/// prediction counts as wrong.
RiskScore score_risk(
  const std::vector<std::pair<std::optional<SafetyLabel>, SafetyLabel>> & pairs);

enum class L2Mode { mean_over_horizon, displacement_at_horizon };

const char * to_string(L2Mode m);
std::optional<L2Mode> l2_mode_from_string(const std::string & s);

/// Trajectory displacement error at 1 s and 3 s. mean_over_horizon
/// averages the per-offset Euclidean distance over offsets in (0, h];
/// displacement_at_horizon reads the single offset h. Trajectories are
/// resampled by linear interpolation onto the rollout grid; throws
/// ScoringError when the overlap up to h is empty.
std::pair<double, double> l2_error(
  const std::vector<Waypoint> & pred, const std::vector<Waypoint> & gt,
  const PlannerConfig & cfg, L2Mode mode = L2Mode::mean_over_horizon);

/// Per-sample result assembled by the evaluation loop.
struct SampleScore
{
  std::string sample_id;
  bool scored{false};
  std::string unscored_reason;  // transport/parse failure detail
  double language_fraction{0.0};
  std::optional<SafetyLabel> risk_pred;
  SafetyLabel risk_gt{SafetyLabel::safe};
  std::optional<double> l2_1s;
  std::optional<double> l2_3s;
  std::optional<bool> collided;
  GtSource gt_source{GtSource::recorded_future};
};

struct MetricsReport
{
  std::string config_hash;
  L2Mode l2_mode{L2Mode::mean_over_horizon};
  int n_submitted{0};
  int n_scored{0};
  int n_unscored{0};
  double language_acc_pct{0.0};
  double risk_acc_pct{0.0};
  std::optional<double> risk_recall_pct;
  double l2_1s{0.0};
  double l2_3s{0.0};
  double collision_rate_pct{0.0};
  std::vector<SampleScore> per_sample;
};

/// Aggregate per-sample scores. Unscored samples are excluded from every
/// metric denominator but kept in the breakdown.
MetricsReport build_report(
  std::vector<SampleScore> samples, const std::string & config_hash, L2Mode mode);

/// Collision check for one predicted trajectory against the recorded
/// neighbor futures over [t, t + T_p].
std::optional<bool> check_predicted_collision(
  const std::vector<Waypoint> & pred, const Scenario & scenario, double analysis_time,
  const PlannerConfig & cfg);

std::string report_to_json(const MetricsReport & r);
/// Aligned plain-text summary: scored count, language accuracy, risk
/// accuracy/recall, l2 at both horizons, collision rate, config hash.
std::string report_to_text(const MetricsReport & r);
/// Per-sample CSV: sample_id,l2_1s,l2_3s,collided,risk_pred,risk_gt.
std::string report_to_csv(const MetricsReport & r);

}  // namespace cfrisk

#endif  // CFRISK__EVAL_HPP_
