#ifndef CFRISK__ANNOTATOR_HPP_
#define CFRISK__ANNOTATOR_HPP_

#include "cfrisk/planner.hpp"
#include "cfrisk/risk.hpp"
#include "cfrisk/scenario.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cfrisk
{

/// Fixed vocabulary for the critical object's expected behavior.
/// One of: "approaching", "crossing from left", "crossing from right",
/// "leading", "stationary".
std::string render_predicted_behavior(const AgentState & ego, const AgentState & neighbor);

struct CriticalAnnotation
{
  std::string agent_id;
  AgentCategory category{AgentCategory::car};
  Vec2 relative_position;  // [m] ego frame at t
  double distance{0.0};    // [m]
  std::string predicted_behavior;
};

enum class GtSource { recorded_future, post_intervention };

const char * to_string(GtSource s);
std::optional<GtSource> gt_source_from_string(const std::string & s);

struct Waypoint
{
  double offset{0.0};  // [s] from the analysis time, strictly increasing
  Vec2 position;
};

struct PlanAnnotation
{
  MetaAction meta_action;
  std::vector<Waypoint> waypoints;  // over [0, T_p], first at the ego position at t
};

/// One five-stage training/evaluation record.
struct AnnotationRecord
{
  std::string sample_id;  // "<scene_id>_<millis>"
  std::string scene_id;
  double analysis_time{0.0};
  Environment stage1_scene;
  std::optional<CriticalAnnotation> stage2_critical;
  SafetyLabel stage3_risk{SafetyLabel::safe};
  std::array<SafetyLabel, 9> stage4_counterfactuals{};  // canonical action order
  PlanAnnotation stage5_plan;
  bool is_collision_scene{false};
  GtSource gt_source{GtSource::recorded_future};
};

std::string make_sample_id(const std::string & scene_id, double analysis_time);

enum class Split { train, val };

const char * to_string(Split s);

struct ManifestEntry
{
  std::string sample_id;
  std::string scene_id;
  std::string file;  // record path relative to the manifest
  bool is_collision_scene{false};
};

struct DatasetManifest
{
  std::vector<ManifestEntry> records;  // ordered by (scene_id, analysis_time)
  std::map<std::string, Split> split;  // scene_id -> side, empty until split
  int total_count{0};
  int collision_count{0};
};

/// Analysis times for one scene. Non-collision scenes walk forward from
/// start + T_h in steps of cfg.stride, keeping windows that are currently
/// Safe or whose TTC at the window start clears the threshold. Collision
/// scenes walk backward from impact_time - rollout_dt in steps of
/// cfg.stride while a full history window fits.
std::vector<double> sample_windows(
  const Scenario & s, const PlannerConfig & cfg, std::vector<std::string> * warnings = nullptr);

/// Build the five-stage ground truth at analysis time t. Planning ground
/// truth is the recorded ego future when the frame is Safe and that future
/// is complete and contact-free; otherwise the branch planner's trajectory
/// (post-intervention).
AnnotationRecord build_record(const Scenario & s, double t, const PlannerConfig & cfg);

/// Scene-level stratified split: deterministic seeded shuffle per stratum
/// (collision / non-collision), val share = 1 - ratio rounded per stratum.
/// Throws StructuralError for datasets with fewer than two scenes.
void split_scenes(DatasetManifest & manifest, double ratio, std::uint64_t seed);

/// Record / manifest JSON codecs. Floats are serialized with 6 decimal
/// places so reruns are byte-identical.
std::string write_record(const AnnotationRecord & r);
AnnotationRecord read_record(const std::string & json_text);
std::string write_manifest(const DatasetManifest & m);
DatasetManifest read_manifest(const std::string & json_text);

}  // namespace cfrisk

#endif  // CFRISK__ANNOTATOR_HPP_
