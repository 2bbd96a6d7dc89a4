#ifndef CFRISK__PIPELINE_HPP_
#define CFRISK__PIPELINE_HPP_

#include "cfrisk/annotator.hpp"
#include "cfrisk/eval.hpp"
#include "cfrisk/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace cfrisk
{

/// Resolved run configuration: planner constants, paths, seed and
/// evaluation options. Loaded from a single JSON file; individual keys
/// may be overridden from the command line.
struct RunConfig
{
  PlannerConfig planner;
  std::string scenario_dir;
  std::string output_dir;
  std::string manifest_path;  // defaults to <output_dir>/manifest.json
  std::optional<std::string> endpoint_url;
  std::uint64_t seed{0};
  bool strict_parsing{false};
  double split_ratio{0.8};
  L2Mode l2_mode{L2Mode::mean_over_horizon};
  int max_in_flight{4};
  double request_timeout_s{120.0};
  int request_retries{1};

  std::string resolved_manifest_path() const;
  void validate() const;
};

RunConfig load_run_config(const std::string & path);
/// Apply one "key=value" override (the --set flag). Throws ConfigError
/// for unknown keys or unparseable values.
void apply_config_override(RunConfig & cfg, const std::string & key_value);
/// Canonical JSON rendering of the resolved config.
std::string config_to_json(const RunConfig & cfg);
/// FNV-1a hash of the canonical rendering, as 16 hex digits. Embedded in
/// every report for provenance.
std::string config_hash(const RunConfig & cfg);

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

/// Annotate every canonical scenario under scenario_dir: one record file
/// per sample plus the manifest. Per-scene failures are logged and
/// skipped (exit 1); exit 2 when nothing could be annotated.
int cmd_annotate(const RunConfig & cfg, std::ostream & log);

/// Assign the scene-level train/val split in the manifest.
int cmd_split(const RunConfig & cfg, std::ostream & log);

/// Evaluate the action tree for one scene at analysis time t; prints the
/// nine outcomes and writes the plan JSON when output_dir is set.
int cmd_plan(
  const RunConfig & cfg, const std::string & scene_path, double t, std::ostream & out,
  std::ostream & log);

/// Closed-loop replay: re-plan every cfg.planner.stride seconds with the
/// ego following the planned branch, neighbors replayed from the log.
/// Reports the per-scene and overall collision rate.
int cmd_simulate(const RunConfig & cfg, std::ostream & log);

/// Write one prompt file per validation sample.
int cmd_prompt(const RunConfig & cfg, std::ostream & log);

/// Score a directory of response texts (files named <sample_id>.txt or
/// <sample_id>.json) against the validation ground truth.
int cmd_score(const RunConfig & cfg, const std::string & responses_dir, std::ostream & log);

/// Full evaluation over the validation split: responses come from the
/// remote endpoint when endpoint_url is set, otherwise from the built-in
/// oracle responder. Writes report.json, report.txt and per_sample.csv.
int cmd_evaluate(const RunConfig & cfg, std::ostream & log);

struct SimScenarioResult
{
  std::string scene_id;
  bool collided{false};
  double first_contact_time{0.0};
  int replan_count{0};
};

/// Replay one scenario closed-loop; used by cmd_simulate.
SimScenarioResult simulate_scenario(const Scenario & s, const PlannerConfig & cfg);

}  // namespace cfrisk

#endif  // CFRISK__PIPELINE_HPP_
