#include "support/builders.hpp"

#include <cfrisk/annotator.hpp>
#include <cfrisk/errors.hpp>
#include <cfrisk/eval.hpp>
#include <cfrisk/pipeline.hpp>
#include <cfrisk/scenario_io.hpp>

#include <json.hpp>

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace cfrisk;
using namespace cfrisk::testing;

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

std::string read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string & path, const std::string & content)
{
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

json read_json(const std::string & path)
{
  return json::parse(read_file(path));
}

/// Three identical-motion cruising scenes plus two rear-end collision logs.
/// With the default 0.8 split ratio the validation side is always exactly
/// one cruising scene (per-stratum rounding: 3 * 0.2 -> 1, 2 * 0.2 -> 0).
std::string make_flow_dataset(const TempDir & td)
{
  const fs::path scenes = td.path / "scenes";
  fs::create_directories(scenes);
  write_scenario_file(cruising_scene("cruise_a"), (scenes / "cruise_a.json").string());
  write_scenario_file(cruising_scene("cruise_b"), (scenes / "cruise_b.json").string());
  write_scenario_file(cruising_scene("cruise_c"), (scenes / "cruise_c.json").string());
  write_scenario_file(
    rear_end_collision_scene(8.0, "crash_a"), (scenes / "crash_a.json").string());
  write_scenario_file(
    rear_end_collision_scene(7.0, "crash_b"), (scenes / "crash_b.json").string());
  return scenes.string();
}

std::string val_scene_of(const DatasetManifest & manifest)
{
  std::string id;
  for (const auto & [scene_id, side] : manifest.split) {
    if (side == Split::val) {
      REQUIRE(id.empty());
      id = scene_id;
    }
  }
  REQUIRE(!id.empty());
  return id;
}

std::vector<ManifestEntry> val_entries_of(const DatasetManifest & manifest)
{
  std::vector<ManifestEntry> out;
  for (const auto & entry : manifest.records) {
    auto it = manifest.split.find(entry.scene_id);
    if (it != manifest.split.end() && it->second == Split::val) {
      out.push_back(entry);
    }
  }
  return out;
}

int count_files_with_extension(const fs::path & dir, const std::string & ext)
{
  int n = 0;
  for (const auto & entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      ++n;
    }
  }
  return n;
}

int run_cli(const std::string & args)
{
  const std::string command = std::string(CFRISK_CLI_PATH) + " " + args;
  const int rc = std::system(command.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("run config: load from json file")
{
  TempDir td("config");
  const std::string path = td.file("run.json");
  write_file(path, R"({
    "planner": {"ttc_threshold": 2.5, "stride": 0.25, "prediction_model": "constant_velocity"},
    "scenario_dir": "/data/scenes",
    "output_dir": "/data/out",
    "endpoint_url": null,
    "seed": 9,
    "strict_parsing": true,
    "split_ratio": 0.75,
    "l2_mode": "displacement_at_horizon",
    "max_in_flight": 2,
    "request_timeout_s": 1.5,
    "request_retries": 0
  })");

  const RunConfig cfg = load_run_config(path);
  CHECK(cfg.planner.ttc_threshold == 2.5);
  CHECK(cfg.planner.stride == 0.25);
  CHECK(cfg.planner.history_window == 1.5);
  CHECK(cfg.scenario_dir == "/data/scenes");
  CHECK(cfg.output_dir == "/data/out");
  CHECK(!cfg.endpoint_url.has_value());
  CHECK(cfg.seed == 9);
  CHECK(cfg.strict_parsing);
  CHECK(cfg.split_ratio == 0.75);
  CHECK(cfg.l2_mode == L2Mode::displacement_at_horizon);
  CHECK(cfg.max_in_flight == 2);
  CHECK(cfg.request_timeout_s == 1.5);
  CHECK(cfg.request_retries == 0);
}

TEST_CASE("run config: bad files and bad keys are rejected")
{
  TempDir td("config_bad");
  const auto write_and_load = [&](const std::string & text) {
    const std::string path = td.file("bad.json");
    write_file(path, text);
    return load_run_config(path);
  };

  CHECK_THROWS_AS(write_and_load("{"), ConfigError);
  CHECK_THROWS_AS(write_and_load("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(write_and_load(R"({"bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(write_and_load(R"({"planner": 3})"), ConfigError);
  CHECK_THROWS_AS(write_and_load(R"({"planner": {"bogus": 1}})"), ConfigError);
  CHECK_THROWS_AS(write_and_load(R"({"planner": {"prediction_model": "oracle"}})"), ConfigError);
  CHECK_THROWS_AS(write_and_load(R"({"seed": -3})"), ConfigError);
  CHECK_THROWS_AS(write_and_load(R"({"seed": 1.5})"), ConfigError);
  CHECK_THROWS_AS(write_and_load(R"({"l2_mode": "nearest"})"), ConfigError);
  CHECK_THROWS_AS(write_and_load(R"({"split_ratio": 1.0})"), ConfigError);
  CHECK_THROWS_AS(load_run_config(td.file("missing.json")), Error);
}

TEST_CASE("run config: command line overrides")
{
  RunConfig cfg;
  apply_config_override(cfg, "planner.ttc_threshold=2.5");
  CHECK(cfg.planner.ttc_threshold == 2.5);
  apply_config_override(cfg, "planner.rollout_dt=0.05");
  CHECK(cfg.planner.rollout_dt == 0.05);
  apply_config_override(cfg, "planner.prediction_model=constant_velocity");

  apply_config_override(cfg, "seed=7");
  CHECK(cfg.seed == 7);
  apply_config_override(cfg, "strict_parsing=true");
  CHECK(cfg.strict_parsing);
  apply_config_override(cfg, "strict_parsing=0");
  CHECK(!cfg.strict_parsing);
  apply_config_override(cfg, "split_ratio=0.6");
  CHECK(cfg.split_ratio == 0.6);
  apply_config_override(cfg, "l2_mode=displacement_at_horizon");
  CHECK(cfg.l2_mode == L2Mode::displacement_at_horizon);
  apply_config_override(cfg, "max_in_flight=8");
  CHECK(cfg.max_in_flight == 8);
  apply_config_override(cfg, "request_timeout_s=0.5");
  CHECK(cfg.request_timeout_s == 0.5);
  apply_config_override(cfg, "request_retries=3");
  CHECK(cfg.request_retries == 3);
  apply_config_override(cfg, "scenario_dir=/a");
  apply_config_override(cfg, "output_dir=/b");
  apply_config_override(cfg, "manifest_path=/c/m.json");
  CHECK(cfg.scenario_dir == "/a");
  CHECK(cfg.output_dir == "/b");
  CHECK(cfg.manifest_path == "/c/m.json");
  apply_config_override(cfg, "endpoint_url=http://host:8000/respond");
  REQUIRE(cfg.endpoint_url.has_value());
  CHECK(*cfg.endpoint_url == "http://host:8000/respond");
  apply_config_override(cfg, "endpoint_url=");
  CHECK(!cfg.endpoint_url.has_value());

  CHECK_THROWS_AS(apply_config_override(cfg, "bogus=1"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(cfg, "planner.bogus=1"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(cfg, "planner.prediction_model=oracle"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(cfg, "noequals"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(cfg, "=5"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(cfg, "seed=abc"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(cfg, "seed=12x"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(cfg, "split_ratio=abc"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(cfg, "max_in_flight=1.5"), ConfigError);
  CHECK_THROWS_AS(apply_config_override(cfg, "strict_parsing=maybe"), ConfigError);
}

TEST_CASE("run config: validation bounds")
{
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  RunConfig bad = cfg;
  bad.split_ratio = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.split_ratio = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.max_in_flight = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.request_timeout_s = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.request_retries = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.planner.rollout_dt = 0.07;  // does not divide the horizons
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("run config: manifest path resolution")
{
  RunConfig cfg;
  cfg.output_dir = "/data/out";
  CHECK(cfg.resolved_manifest_path() == "/data/out/manifest.json");
  cfg.manifest_path = "/elsewhere/m.json";
  CHECK(cfg.resolved_manifest_path() == "/elsewhere/m.json");
}

TEST_CASE("run config: canonical rendering and hash")
{
  RunConfig cfg;
  const json rendered = json::parse(config_to_json(cfg));
  CHECK(rendered["planner"]["prediction_model"] == "constant_velocity");
  CHECK(rendered["planner"]["ttc_threshold"] == 3.0);
  CHECK(rendered["l2_mode"] == "mean_over_horizon");
  CHECK(rendered["seed"] == 0);
  CHECK(rendered["endpoint_url"].is_null());

  const std::string hash = config_hash(cfg);
  CHECK(hash.size() == 16);
  CHECK(hash.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(config_hash(RunConfig{}) == hash);

  RunConfig other;
  other.planner.ttc_threshold = 2.5;
  CHECK(config_hash(other) != hash);
  RunConfig pathed;
  pathed.scenario_dir = "/a";
  CHECK(config_hash(pathed) != hash);
}

TEST_CASE("dataset flow: annotate, split, prompt, evaluate, score")
{
  TempDir td("flow");
  RunConfig cfg;
  cfg.scenario_dir = make_flow_dataset(td);
  cfg.output_dir = td.file("out");
  cfg.seed = 7;

  // annotate
  std::ostringstream annotate_log;
  REQUIRE(cmd_annotate(cfg, annotate_log) == kExitOk);
  CHECK(
    annotate_log.str().find("annotated 78 samples (24 from collision scenes) across 5 scenes") !=
    std::string::npos);

  const std::string manifest_path = cfg.resolved_manifest_path();
  CHECK(manifest_path == cfg.output_dir + "/manifest.json");
  DatasetManifest manifest = read_manifest(read_file(manifest_path));
  REQUIRE(manifest.records.size() == 78);
  CHECK(manifest.total_count == 78);
  CHECK(manifest.collision_count == 24);
  CHECK(manifest.split.empty());
  CHECK(manifest.records[0].sample_id == "crash_a_1900");
  CHECK(manifest.records[0].file == "records/crash_a_1900.json");
  CHECK(manifest.records[0].is_collision_scene);
  CHECK(fs::is_regular_file(td.path / "out" / "records" / "cruise_a_1500.json"));

  const AnnotationRecord probe =
    read_record(read_file(td.file("out/records/cruise_a_1500.json")));
  CHECK(probe.sample_id == "cruise_a_1500");
  CHECK(probe.scene_id == "cruise_a");
  CHECK(!probe.is_collision_scene);

  // reruns are byte-identical
  const std::string manifest_bytes = read_file(manifest_path);
  const std::string record_bytes = read_file(td.file("out/records/crash_a_1900.json"));
  std::ostringstream rerun_log;
  REQUIRE(cmd_annotate(cfg, rerun_log) == kExitOk);
  CHECK(read_file(manifest_path) == manifest_bytes);
  CHECK(read_file(td.file("out/records/crash_a_1900.json")) == record_bytes);

  // prompting before the split is a usage error
  std::ostringstream early_prompt_log;
  CHECK(cmd_prompt(cfg, early_prompt_log) == kExitUsage);
  CHECK(early_prompt_log.str().find("manifest has no split") != std::string::npos);

  // split
  std::ostringstream split_log;
  REQUIRE(cmd_split(cfg, split_log) == kExitOk);
  CHECK(split_log.str().find("split 5 scenes: 4 train, 1 val (seed 7)") != std::string::npos);

  manifest = read_manifest(read_file(manifest_path));
  REQUIRE(manifest.split.size() == 5);
  const std::string val_scene = val_scene_of(manifest);
  CHECK(val_scene.rfind("cruise_", 0) == 0);
  const auto val = val_entries_of(manifest);
  REQUIRE(val.size() == 18);
  for (const auto & entry : val) {
    CHECK(entry.scene_id == val_scene);
    CHECK(!entry.is_collision_scene);
  }

  const std::string split_bytes = read_file(manifest_path);
  std::ostringstream split_again_log;
  REQUIRE(cmd_split(cfg, split_again_log) == kExitOk);
  CHECK(read_file(manifest_path) == split_bytes);

  // prompts: one file per validation sample
  std::ostringstream prompt_log;
  REQUIRE(cmd_prompt(cfg, prompt_log) == kExitOk);
  CHECK(prompt_log.str().find("wrote 18 prompts") != std::string::npos);
  const fs::path prompts_dir = td.path / "out" / "prompts";
  CHECK(count_files_with_extension(prompts_dir, ".txt") == 18);
  const std::string prompt = read_file((prompts_dir / (val[0].sample_id + ".txt")).string());
  CHECK(prompt.rfind("[system]\n", 0) == 0);
  CHECK(prompt.find("scene_id: " + val_scene) != std::string::npos);

  // oracle evaluation is perfect by construction
  std::ostringstream eval_log;
  REQUIRE(cmd_evaluate(cfg, eval_log) == kExitOk);
  const json report = read_json(td.file("out/report.json"));
  CHECK(report["n_submitted"] == 18);
  CHECK(report["n_scored"] == 18);
  CHECK(report["n_unscored"] == 0);
  CHECK(report["language_acc_pct"] == 100.0);
  CHECK(report["risk_acc_pct"] == 100.0);
  CHECK(report["risk_recall_pct"].is_null());  // no unsafe frame in a cruising scene
  CHECK(report["l2_1s"] == 0.0);
  CHECK(report["l2_3s"] == 0.0);
  CHECK(report["collision_rate_pct"] == 0.0);
  CHECK(report["l2_mode"] == "mean_over_horizon");
  CHECK(report["config_hash"] == config_hash(cfg));
  REQUIRE(report["per_sample"].size() == 18);
  int recorded = 0;
  int post = 0;
  for (const auto & row : report["per_sample"]) {
    CHECK(row["scored"] == true);
    CHECK(row["language_fraction"] == 1.0);
    CHECK(row["risk_pred"] == "Safe");
    CHECK(row["l2_1s"] == 0.0);
    CHECK(row["collided"] == false);
    if (row["gt_source"] == "recorded_future") {
      ++recorded;
    } else if (row["gt_source"] == "post_intervention") {
      ++post;
    }
  }
  // the log ends at t = 10, so windows after t = 7 lose the recorded future
  CHECK(recorded == 12);
  CHECK(post == 6);

  const std::string text = read_file(td.file("out/report.txt"));
  CHECK(text.find("samples scored:    18/18\n") != std::string::npos);
  CHECK(text.find("language accuracy: 100.00 %\n") != std::string::npos);
  CHECK(text.find("risk recall:       n/a\n") != std::string::npos);
  CHECK(text.find("l2 @ 1s:           0.00 m\n") != std::string::npos);
  CHECK(text.find("collision rate:    0.00 %\n") != std::string::npos);
  CHECK(text.find("config hash:       " + config_hash(cfg) + "\n") != std::string::npos);
  CHECK(eval_log.str().find("samples scored:    18/18\n") != std::string::npos);

  const std::string csv = read_file(td.file("out/per_sample.csv"));
  CHECK(csv.rfind("sample_id,l2_1s,l2_3s,collided,risk_pred,risk_gt\n", 0) == 0);
  CHECK(csv.find(val_scene + "_1500,0,0,0,Safe,Safe\n") != std::string::npos);

  // scoring canned response files reproduces the oracle numbers
  const fs::path responses = td.path / "responses";
  fs::create_directories(responses);
  for (const auto & entry : val) {
    const AnnotationRecord record =
      read_record(read_file((td.path / "out" / entry.file).string()));
    write_file((responses / (entry.sample_id + ".txt")).string(), render_response_text(record));
  }
  std::ostringstream score_log;
  REQUIRE(cmd_score(cfg, responses.string(), score_log) == kExitOk);
  const json scored = read_json(td.file("out/report.json"));
  CHECK(scored["n_scored"] == 18);
  CHECK(scored["language_acc_pct"] == 100.0);
  CHECK(scored["l2_1s"] == 0.0);

  // a missing response file leaves that sample unscored
  const fs::path dropped = responses / (val[0].sample_id + ".txt");
  fs::remove(dropped);
  std::ostringstream missing_log;
  CHECK(cmd_score(cfg, responses.string(), missing_log) == kExitPartial);
  CHECK(
    missing_log.str().find(val[0].sample_id + ": no response file") != std::string::npos);
  const json partial = read_json(td.file("out/report.json"));
  CHECK(partial["n_scored"] == 17);
  CHECK(partial["n_unscored"] == 1);
  CHECK(partial["risk_acc_pct"] == 100.0);
  CHECK(partial["per_sample"][0]["scored"] == false);
  CHECK(partial["per_sample"][0]["unscored_reason"] == "no response file");

  // garbage text still counts as a scored (all-wrong) response
  write_file(dropped.string(), "the weather is nice today\n");
  std::ostringstream garbage_log;
  CHECK(cmd_score(cfg, responses.string(), garbage_log) == kExitOk);
  const json garbage = read_json(td.file("out/report.json"));
  CHECK(garbage["n_scored"] == 18);
  CHECK(garbage["n_unscored"] == 0);
  CHECK(
    garbage["language_acc_pct"].get<double>() ==
    doctest::Approx(100.0 * 17.0 / 18.0).epsilon(1e-6));
  CHECK(garbage["per_sample"][0]["language_fraction"] == 0.0);
  CHECK(garbage["per_sample"][0]["risk_pred"].is_null());
  CHECK(garbage["per_sample"][0]["l2_1s"].is_null());
  CHECK(garbage["per_sample"][0]["collided"].is_null());

  // an unreachable endpoint leaves nothing scored
  RunConfig remote_cfg = cfg;
  remote_cfg.endpoint_url = "http://127.0.0.1:9/respond";
  remote_cfg.request_timeout_s = 0.2;
  remote_cfg.request_retries = 0;
  std::ostringstream remote_log;
  CHECK(cmd_evaluate(remote_cfg, remote_log) == kExitUsage);
  CHECK(remote_log.str().find("transport") != std::string::npos);
  CHECK(remote_log.str().find("no sample could be scored") != std::string::npos);
}

TEST_CASE("cmd_annotate: usage errors and partial datasets")
{
  TempDir td("annotate_edge");

  RunConfig cfg;
  cfg.scenario_dir = td.file("scenes");
  cfg.output_dir = "";
  std::ostringstream no_out_log;
  CHECK(cmd_annotate(cfg, no_out_log) == kExitUsage);
  CHECK(no_out_log.str().find("output_dir is required") != std::string::npos);

  cfg.output_dir = td.file("out");
  std::ostringstream no_dir_log;
  CHECK(cmd_annotate(cfg, no_dir_log) == kExitUsage);
  CHECK(no_dir_log.str().find("not a directory") != std::string::npos);

  fs::create_directories(cfg.scenario_dir);
  std::ostringstream empty_log;
  CHECK(cmd_annotate(cfg, empty_log) == kExitUsage);
  CHECK(empty_log.str().find("no records produced") != std::string::npos);

  write_scenario_file(cruising_scene("cruise_a"), td.file("scenes/cruise_a.json"));
  write_file(td.file("scenes/broken.json"), "{");
  std::ostringstream partial_log;
  CHECK(cmd_annotate(cfg, partial_log) == kExitPartial);
  CHECK(partial_log.str().find("skipping broken.json") != std::string::npos);
  CHECK(
    partial_log.str().find("annotated 18 samples (0 from collision scenes) across 1 scenes") !=
    std::string::npos);
  CHECK(read_manifest(read_file(cfg.resolved_manifest_path())).records.size() == 18);
}

TEST_CASE("cmd_split: missing manifest is a usage error")
{
  TempDir td("split_edge");
  RunConfig cfg;
  cfg.scenario_dir = td.str();
  cfg.output_dir = td.file("out");
  std::ostringstream log;
  CHECK(cmd_split(cfg, log) == kExitUsage);
  CHECK(log.str().find("cannot open file") != std::string::npos);
}

TEST_CASE("cmd_plan: prints the action table and writes the plan file")
{
  TempDir td("plan");
  const std::string scene_path = td.file("lead_fixture.json");
  write_scenario_file(lead_vehicle_scene(), scene_path);

  RunConfig cfg;
  cfg.output_dir = td.file("out");

  std::ostringstream out;
  std::ostringstream log;
  REQUIRE(cmd_plan(cfg, scene_path, 1.5, out, log) == kExitOk);
  const std::string table = out.str();
  CHECK(table.find("scene lead_fixture @ t=1.500") != std::string::npos);
  CHECK(table.find("(Accelerate, Accelerate)") != std::string::npos);
  CHECK(table.find("Unsafe") != std::string::npos);
  CHECK(
    table.find("selected: (Maintain, Decelerate) (max_progress_among_safe)") !=
    std::string::npos);

  const json plan_json = read_json(td.file("out/plan_lead_fixture_1500.json"));
  CHECK(plan_json["scene_id"] == "lead_fixture");
  CHECK(plan_json["analysis_time"] == 1.5);
  CHECK(plan_json["selected"]["short"] == "maintain");
  CHECK(plan_json["selected"]["long"] == "decelerate");
  CHECK(plan_json["selection_reason"] == "max_progress_among_safe");
  REQUIRE(plan_json["outcomes"].size() == 9);
  CHECK(plan_json["outcomes"][0]["action"] == "accelerate_accelerate");
  CHECK(plan_json["waypoints"].size() == 31);

  // too early for a full history window
  std::ostringstream early_out;
  std::ostringstream early_log;
  CHECK(cmd_plan(cfg, scene_path, 0.5, early_out, early_log) == kExitUsage);
  CHECK(early_log.str().find("error: ") != std::string::npos);

  std::ostringstream missing_out;
  std::ostringstream missing_log;
  CHECK(cmd_plan(cfg, td.file("nope.json"), 1.5, missing_out, missing_log) == kExitUsage);
}

TEST_CASE("closed-loop replay: benign scenes stay clean")
{
  const SimScenarioResult solo = simulate_scenario(solo_scene(), PlannerConfig{});
  CHECK(!solo.collided);
  CHECK(solo.replan_count == 9);

  const SimScenarioResult stopped = simulate_scenario(stopped_pair_scene(), PlannerConfig{});
  CHECK(!stopped.collided);
  CHECK(stopped.replan_count == 9);
}

TEST_CASE("closed-loop replay: blind approach past the sensing radius still crashes")
{
  // The stopped car sits 69.5 m out, far beyond the 30 m neighbor radius, so
  // the replanner keeps accelerating until t = 5.0. By then the ego carries
  // 17 m/s into an 18.25 m bumper gap: 2 m/s^2 cannot save it, and the boxes
  // first overlap on the 6.1 s grid sample.
  const SimScenarioResult result =
    simulate_scenario(rear_end_collision_scene(8.0), PlannerConfig{});
  CHECK(result.collided);
  CHECK(result.first_contact_time == doctest::Approx(6.1).epsilon(1e-9));
  CHECK(result.replan_count == 10);
}

TEST_CASE("cmd_simulate: reports per-scene outcomes and the overall rate")
{
  TempDir td("simulate");
  const fs::path scenes = td.path / "scenes";
  fs::create_directories(scenes);
  write_scenario_file(solo_scene(), (scenes / "solo.json").string());
  write_scenario_file(stopped_pair_scene(), (scenes / "stopped_pair.json").string());
  write_scenario_file(
    make_scene("short", {straight_track("ego", 0.0, 1.0, 0.0, 0.0, 5.0, 0.0, 0.0)}),
    (scenes / "short.json").string());

  RunConfig cfg;
  cfg.scenario_dir = scenes.string();

  std::ostringstream log;
  CHECK(cmd_simulate(cfg, log) == kExitPartial);
  const std::string text = log.str();
  CHECK(text.find("scene solo: clean over 9 replans") != std::string::npos);
  CHECK(text.find("scene stopped_pair: clean over 9 replans") != std::string::npos);
  CHECK(text.find("scene short: failed: ") != std::string::npos);
  CHECK(text.find("closed-loop collision rate: 0.00 % (0/2 scenes)") != std::string::npos);
}

TEST_CASE("cli: usage and help exit codes")
{
  TempDir td("cli_usage");
  CHECK(run_cli(">/dev/null 2>&1") == kExitUsage);
  CHECK(run_cli("--help >/dev/null 2>&1") == kExitOk);
  CHECK(run_cli("--config " + td.file("missing.json") + " annotate >/dev/null 2>&1") ==
        kExitUsage);
  CHECK(run_cli("--set bogus=1 annotate >/dev/null 2>&1") == kExitUsage);
}

TEST_CASE("cli: annotate, split and evaluate a small dataset")
{
  TempDir td("cli_flow");
  const fs::path scenes = td.path / "scenes";
  fs::create_directories(scenes);
  write_scenario_file(cruising_scene("cruise_a"), (scenes / "cruise_a.json").string());
  write_scenario_file(cruising_scene("cruise_b"), (scenes / "cruise_b.json").string());
  const std::string out = td.file("out");

  const std::string common =
    "--set scenario_dir=" + scenes.string() + " --set output_dir=" + out +
    " --set split_ratio=0.5 ";
  REQUIRE(run_cli(common + "annotate >/dev/null 2>&1") == kExitOk);
  REQUIRE(run_cli(common + "--seed 3 split >/dev/null 2>&1") == kExitOk);
  REQUIRE(run_cli(common + "evaluate >/dev/null 2>&1") == kExitOk);

  const json report = read_json(out + "/report.json");
  CHECK(report["n_scored"] == 18);
  CHECK(report["language_acc_pct"] == 100.0);

  const std::string scene_path = (scenes / "cruise_a.json").string();
  const std::string stdout_path = td.file("plan_stdout.txt");
  REQUIRE(
    run_cli(
      "--set output_dir=" + out + " plan " + scene_path + " -t 1.5 > " + stdout_path +
      " 2>/dev/null") == kExitOk);
  CHECK(read_file(stdout_path).find("selected: ") != std::string::npos);
  CHECK(fs::is_regular_file(out + "/plan_cruise_a_1500.json"));
}

TEST_SUITE_END();
