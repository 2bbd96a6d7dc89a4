#include "cfrisk/pipeline.hpp"

#include "cfrisk/errors.hpp"
#include "cfrisk/planner.hpp"
#include "cfrisk/remote.hpp"
#include "cfrisk/scenario_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace cfrisk
{
namespace
{

namespace fs = std::filesystem;
using json = nlohmann::json;

double snap6(double x)
{
  return static_cast<double>(std::llround(x * 1e6)) / 1e6;
}

std::string read_text_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string & path, const std::string & content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open file for writing: " + path);
  }
  out << content;
  if (!out) {
    throw Error("failed writing file: " + path);
  }
}

std::vector<fs::path> list_json_files(const std::string & dir)
{
  if (!fs::is_directory(dir)) {
    throw ConfigError("not a directory: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto & entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::string RunConfig::resolved_manifest_path() const
{
  if (!manifest_path.empty()) {
    return manifest_path;
  }
  return (fs::path(output_dir) / "manifest.json").string();
}

void RunConfig::validate() const
{
  planner.validate();
  if (!(split_ratio > 0.0) || !(split_ratio < 1.0)) {
    throw ConfigError("config: split_ratio must lie in (0, 1)");
  }
  if (max_in_flight < 1) {
    throw ConfigError("config: max_in_flight must be at least 1");
  }
  if (!(request_timeout_s > 0.0)) {
    throw ConfigError("config: request_timeout_s must be positive");
  }
  if (request_retries < 0) {
    throw ConfigError("config: request_retries must be non-negative");
  }
}

namespace
{

void apply_planner_key(PlannerConfig & planner, const std::string & key, const json & value)
{
  const auto number = [&value, &key]() {
    if (!value.is_number()) {
      throw ConfigError("config: planner." + key + " must be a number");
    }
    return value.get<double>();
  };
  if (key == "history_window") {
    planner.history_window = number();
  } else if (key == "short_horizon") {
    planner.short_horizon = number();
  } else if (key == "plan_horizon") {
    planner.plan_horizon = number();
  } else if (key == "rollout_dt") {
    planner.rollout_dt = number();
  } else if (key == "accel_step") {
    planner.accel_step = number();
  } else if (key == "ttc_threshold") {
    planner.ttc_threshold = number();
  } else if (key == "neighbor_radius") {
    planner.neighbor_radius = number();
  } else if (key == "preimpact_window") {
    planner.preimpact_window = number();
  } else if (key == "stride") {
    planner.stride = number();
  } else if (key == "max_interp_gap") {
    planner.max_interp_gap = number();
  } else if (key == "max_neighbor_staleness") {
    planner.max_neighbor_staleness = number();
  } else if (key == "prediction_model") {
    if (!value.is_string() || value.get<std::string>() != "constant_velocity") {
      throw ConfigError("config: unknown prediction_model");
    }
  } else {
    throw ConfigError("config: unknown planner key '" + key + "'");
  }
}

}  // namespace

RunConfig load_run_config(const std::string & path)
{
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const json::parse_error & e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config " + path + ": expected an object");
  }

  RunConfig cfg;
  for (const auto & [key, value] : root.items()) {
    if (key == "planner") {
      if (!value.is_object()) {
        throw ConfigError("config: planner must be an object");
      }
      for (const auto & [pkey, pvalue] : value.items()) {
        apply_planner_key(cfg.planner, pkey, pvalue);
      }
    } else if (key == "scenario_dir") {
      cfg.scenario_dir = value.get<std::string>();
    } else if (key == "output_dir") {
      cfg.output_dir = value.get<std::string>();
    } else if (key == "manifest_path") {
      cfg.manifest_path = value.get<std::string>();
    } else if (key == "endpoint_url") {
      if (value.is_null()) {
        cfg.endpoint_url.reset();
      } else {
        cfg.endpoint_url = value.get<std::string>();
      }
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) {
        throw ConfigError("config: seed must be a non-negative integer");
      }
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "strict_parsing") {
      cfg.strict_parsing = value.get<bool>();
    } else if (key == "split_ratio") {
      cfg.split_ratio = value.get<double>();
    } else if (key == "l2_mode") {
      const auto mode = l2_mode_from_string(value.get<std::string>());
      if (!mode) {
        throw ConfigError("config: unknown l2_mode");
      }
      cfg.l2_mode = *mode;
    } else if (key == "max_in_flight") {
      cfg.max_in_flight = value.get<int>();
    } else if (key == "request_timeout_s") {
      cfg.request_timeout_s = value.get<double>();
    } else if (key == "request_retries") {
      cfg.request_retries = value.get<int>();
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void apply_config_override(RunConfig & cfg, const std::string & key_value)
{
  const auto eq = key_value.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must be key=value: '" + key_value + "'");
  }
  const std::string key = key_value.substr(0, eq);
  const std::string value = key_value.substr(eq + 1);

  const auto as_double = [&]() {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) {
        throw std::invalid_argument("trailing");
      }
      return v;
    } catch (const std::exception &) {
      throw ConfigError("override " + key + ": not a number: '" + value + "'");
    }
  };
  const auto as_int = [&]() {
    try {
      std::size_t used = 0;
      const int v = std::stoi(value, &used);
      if (used != value.size()) {
        throw std::invalid_argument("trailing");
      }
      return v;
    } catch (const std::exception &) {
      throw ConfigError("override " + key + ": not an integer: '" + value + "'");
    }
  };
  const auto as_bool = [&]() {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("override " + key + ": not a boolean: '" + value + "'");
  };

  if (key.rfind("planner.", 0) == 0) {
    const std::string pkey = key.substr(8);
    if (pkey == "prediction_model") {
      apply_planner_key(cfg.planner, pkey, json(value));
    } else {
      apply_planner_key(cfg.planner, pkey, json(as_double()));
    }
  } else if (key == "scenario_dir") {
    cfg.scenario_dir = value;
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "manifest_path") {
    cfg.manifest_path = value;
  } else if (key == "endpoint_url") {
    if (value.empty()) {
      cfg.endpoint_url.reset();
    } else {
      cfg.endpoint_url = value;
    }
  } else if (key == "seed") {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(value, &used);
      if (used != value.size()) {
        throw std::invalid_argument("trailing");
      }
    } catch (const std::exception &) {
      throw ConfigError("override seed: not an unsigned integer: '" + value + "'");
    }
  } else if (key == "strict_parsing") {
    cfg.strict_parsing = as_bool();
  } else if (key == "split_ratio") {
    cfg.split_ratio = as_double();
  } else if (key == "l2_mode") {
    const auto mode = l2_mode_from_string(value);
    if (!mode) {
      throw ConfigError("override l2_mode: unknown mode '" + value + "'");
    }
    cfg.l2_mode = *mode;
  } else if (key == "max_in_flight") {
    cfg.max_in_flight = as_int();
  } else if (key == "request_timeout_s") {
    cfg.request_timeout_s = as_double();
  } else if (key == "request_retries") {
    cfg.request_retries = as_int();
  } else {
    throw ConfigError("override: unknown key '" + key + "'");
  }
}

std::string config_to_json(const RunConfig & cfg)
{
  json root;
  root["scenario_dir"] = cfg.scenario_dir;
  root["output_dir"] = cfg.output_dir;
  root["manifest_path"] = cfg.manifest_path;
  root["endpoint_url"] = cfg.endpoint_url ? json(*cfg.endpoint_url) : json(nullptr);
  root["seed"] = cfg.seed;
  root["strict_parsing"] = cfg.strict_parsing;
  root["split_ratio"] = cfg.split_ratio;
  root["l2_mode"] = to_string(cfg.l2_mode);
  root["max_in_flight"] = cfg.max_in_flight;
  root["request_timeout_s"] = cfg.request_timeout_s;
  root["request_retries"] = cfg.request_retries;
  root["planner"] = {
    {"history_window", cfg.planner.history_window},
    {"short_horizon", cfg.planner.short_horizon},
    {"plan_horizon", cfg.planner.plan_horizon},
    {"rollout_dt", cfg.planner.rollout_dt},
    {"accel_step", cfg.planner.accel_step},
    {"ttc_threshold", cfg.planner.ttc_threshold},
    {"neighbor_radius", cfg.planner.neighbor_radius},
    {"preimpact_window", cfg.planner.preimpact_window},
    {"stride", cfg.planner.stride},
    {"prediction_model", "constant_velocity"},
    {"max_interp_gap", cfg.planner.max_interp_gap},
    {"max_neighbor_staleness", cfg.planner.max_neighbor_staleness}};
  return root.dump(2) + "\n";
}

std::string config_hash(const RunConfig & cfg)
{
  const std::string text = config_to_json(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace
{

struct SceneIndex
{
  std::map<std::string, Scenario> by_id;
  bool partial{false};
};

SceneIndex load_scene_index(const RunConfig & cfg, std::ostream & log)
{
  SceneIndex index;
  for (const auto & path : list_json_files(cfg.scenario_dir)) {
    try {
      LoadedScenario loaded =
        load_scenario_file(path.string(), ScenarioFormat::canonical, cfg.strict_parsing);
      for (const auto & warning : loaded.warnings) {
        log << "warning: " << path.filename().string() << ": " << warning << "\n";
        index.partial = true;
      }
      const std::string scene_id = loaded.scenario.scene_id;
      if (!index.by_id.emplace(scene_id, std::move(loaded.scenario)).second) {
        log << "warning: duplicate scene_id '" << scene_id << "' in "
            << path.filename().string() << "; keeping the first\n";
        index.partial = true;
      }
    } catch (const Error & e) {
      log << "warning: skipping " << path.filename().string() << ": " << e.what() << "\n";
      index.partial = true;
    }
  }
  return index;
}

const Scenario & require_scene(const SceneIndex & index, const std::string & scene_id)
{
  auto it = index.by_id.find(scene_id);
  if (it == index.by_id.end()) {
    throw StructuralError("scene '" + scene_id + "' not found under the scenario directory");
  }
  return it->second;
}

DatasetManifest load_manifest_file(const RunConfig & cfg)
{
  return read_manifest(read_text_file(cfg.resolved_manifest_path()));
}

std::vector<ManifestEntry> val_entries(const DatasetManifest & manifest)
{
  if (manifest.split.empty()) {
    throw StructuralError("manifest has no split; run the split command first");
  }
  std::vector<ManifestEntry> out;
  for (const auto & entry : manifest.records) {
    auto it = manifest.split.find(entry.scene_id);
    if (it == manifest.split.end()) {
      throw StructuralError("scene '" + entry.scene_id + "' missing from the split");
    }
    if (it->second == Split::val) {
      out.push_back(entry);
    }
  }
  return out;
}

AnnotationRecord load_record_file(const RunConfig & cfg, const ManifestEntry & entry)
{
  const fs::path base = fs::path(cfg.resolved_manifest_path()).parent_path();
  return read_record(read_text_file((base / entry.file).string()));
}

}  // namespace

int cmd_annotate(const RunConfig & cfg, std::ostream & log)
{
  try {
    cfg.validate();
    if (cfg.output_dir.empty()) {
      throw ConfigError("annotate: output_dir is required");
    }

    const SceneIndex index = load_scene_index(cfg, log);
    bool partial = index.partial;

    const fs::path records_dir = fs::path(cfg.output_dir) / "records";
    fs::create_directories(records_dir);

    struct Keyed
    {
      std::string scene_id;
      double time;
      ManifestEntry entry;
    };
    std::vector<Keyed> keyed;
    int collision_scenes_with_records = 0;

    for (const auto & [scene_id, scenario] : index.by_id) {
      std::vector<std::string> warnings;
      const auto times = sample_windows(scenario, cfg.planner, &warnings);
      for (const auto & warning : warnings) {
        log << "warning: " << warning << "\n";
        partial = true;
      }
      bool produced = false;
      for (double t : times) {
        try {
          const AnnotationRecord record = build_record(scenario, t, cfg.planner);
          const std::string filename = record.sample_id + ".json";
          write_text_file((records_dir / filename).string(), write_record(record));
          ManifestEntry entry;
          entry.sample_id = record.sample_id;
          entry.scene_id = scene_id;
          entry.file = "records/" + filename;
          entry.is_collision_scene = record.is_collision_scene;
          keyed.push_back({scene_id, t, std::move(entry)});
          produced = true;
        } catch (const Error & e) {
          log << "warning: " << scene_id << " @ t=" << t << ": " << e.what() << "\n";
          partial = true;
        }
      }
      if (produced && scenario.collision) {
        ++collision_scenes_with_records;
      }
    }

    if (keyed.empty()) {
      log << "error: no records produced\n";
      return kExitUsage;
    }
    (void)collision_scenes_with_records;

    std::sort(keyed.begin(), keyed.end(), [](const Keyed & a, const Keyed & b) {
      if (a.scene_id != b.scene_id) {
        return a.scene_id < b.scene_id;
      }
      return a.time < b.time;
    });

    DatasetManifest manifest;
    manifest.records.reserve(keyed.size());
    for (auto & k : keyed) {
      manifest.records.push_back(std::move(k.entry));
    }
    manifest.total_count = static_cast<int>(manifest.records.size());
    manifest.collision_count = static_cast<int>(std::count_if(
      manifest.records.begin(), manifest.records.end(),
      [](const ManifestEntry & e) { return e.is_collision_scene; }));

    write_text_file(cfg.resolved_manifest_path(), write_manifest(manifest));
    log << "annotated " << manifest.total_count << " samples ("
        << manifest.collision_count << " from collision scenes) across "
        << index.by_id.size() << " scenes\n";
    return partial ? kExitPartial : kExitOk;
  } catch (const ConfigError & e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error & e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_split(const RunConfig & cfg, std::ostream & log)
{
  try {
    cfg.validate();
    DatasetManifest manifest = load_manifest_file(cfg);
    split_scenes(manifest, cfg.split_ratio, cfg.seed);
    write_text_file(cfg.resolved_manifest_path(), write_manifest(manifest));
    int train = 0;
    int val = 0;
    for (const auto & [scene_id, side] : manifest.split) {
      (side == Split::train ? train : val) += 1;
    }
    log << "split " << manifest.split.size() << " scenes: " << train << " train, " << val
        << " val (seed " << cfg.seed << ")\n";
    return kExitOk;
  } catch (const Error & e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_plan(
  const RunConfig & cfg, const std::string & scene_path, double t, std::ostream & out,
  std::ostream & log)
{
  try {
    cfg.validate();
    LoadedScenario loaded =
      load_scenario_file(scene_path, ScenarioFormat::canonical, cfg.strict_parsing);
    for (const auto & warning : loaded.warnings) {
      log << "warning: " << warning << "\n";
    }
    const Scenario & scenario = loaded.scenario;
    const ObservationWindow window = extract_window(scenario, t, cfg.planner);
    const PlanResult result = plan(window, cfg.planner);

    out << "scene " << scenario.scene_id << " @ t=" << std::fixed << std::setprecision(3) << t
        << "\n";
    out << std::left << std::setw(28) << "action" << std::setw(8) << "label" << std::setw(11)
        << "min_ttc" << std::setw(10) << "contact" << "progress\n";
    for (const auto & o : result.outcomes) {
      out << std::setw(28) << o.action.pretty() << std::setw(8) << to_string(o.label);
      std::ostringstream ttc;
      if (std::isfinite(o.min_ttc)) {
        ttc << std::fixed << std::setprecision(3) << o.min_ttc;
      } else {
        ttc << "inf";
      }
      out << std::setw(11) << ttc.str();
      std::ostringstream contact;
      if (o.contact_offset) {
        contact << std::fixed << std::setprecision(1) << *o.contact_offset;
      } else {
        contact << "-";
      }
      out << std::setw(10) << contact.str();
      out << std::fixed << std::setprecision(3) << o.progress << "\n";
    }
    out << "selected: " << result.selected.pretty() << " ("
        << to_string(result.selection_reason) << ")\n";

    if (!cfg.output_dir.empty()) {
      fs::create_directories(cfg.output_dir);
      json root;
      root["scene_id"] = scenario.scene_id;
      root["analysis_time"] = snap6(t);
      root["selected"] = {
        {"short", to_string(result.selected.short_term)},
        {"long", to_string(result.selected.long_term)}};
      root["selection_reason"] = to_string(result.selection_reason);
      json outcomes = json::array();
      for (const auto & o : result.outcomes) {
        json row;
        row["action"] = o.action.key();
        row["label"] = to_string(o.label);
        row["min_ttc"] = std::isfinite(o.min_ttc) ? json(snap6(o.min_ttc)) : json(nullptr);
        row["contact_offset"] = o.contact_offset ? json(snap6(*o.contact_offset)) : json(nullptr);
        row["progress"] = snap6(o.progress);
        outcomes.push_back(std::move(row));
      }
      root["outcomes"] = std::move(outcomes);
      json waypoints = json::array();
      for (const auto & sample : result.planned_trajectory.samples) {
        waypoints.push_back(
          {snap6(sample.offset), snap6(sample.position.x), snap6(sample.position.y)});
      }
      root["waypoints"] = std::move(waypoints);
      const std::string name = "plan_" + make_sample_id(scenario.scene_id, t) + ".json";
      write_text_file((fs::path(cfg.output_dir) / name).string(), root.dump(2) + "\n");
    }
    return kExitOk;
  } catch (const Error & e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

SimScenarioResult simulate_scenario(const Scenario & s, const PlannerConfig & cfg)
{
  SimScenarioResult result;
  result.scene_id = s.scene_id;

  const AgentTrack & ego = s.ego_track();
  const double t0 = ego.start_time() + cfg.history_window;
  const double end = ego.end_time();
  if (t0 > end + 1e-9) {
    throw InsufficientHistoryError("scene " + s.scene_id + " is shorter than the history window");
  }

  AgentTrack sim_ego;
  sim_ego.agent_id = ego.agent_id;
  for (const auto & sample : ego.samples) {
    if (sample.timestamp <= t0 + 1e-9) {
      sim_ego.samples.push_back(sample);
    }
  }
  if (sim_ego.empty() || sim_ego.end_time() < t0 - 1e-9) {
    TrackSample boot;
    boot.timestamp = t0;
    boot.state = ego.state_at(t0, cfg.max_interp_gap);
    sim_ego.samples.push_back(std::move(boot));
  }

  std::vector<const AgentTrack *> others;
  for (const auto & track : s.tracks) {
    if (track.agent_id != s.ego_id) {
      others.push_back(&track);
    }
  }

  // initial overlap: the bootstrap pose against every neighbor at t0
  {
    const AgentState ego_now = sim_ego.state_at(t0, cfg.max_interp_gap);
    const OrientedBox ego_box{ego_now.position, ego_now.heading, ego_now.footprint};
    for (const AgentTrack * track : others) {
      if (!track->covers(t0)) {
        continue;
      }
      AgentState other;
      try {
        other = track->state_at(t0, cfg.max_interp_gap);
      } catch (const Error &) {
        continue;
      }
      if (boxes_overlap(ego_box, {other.position, other.heading, other.footprint})) {
        result.collided = true;
        result.first_contact_time = t0;
        return result;
      }
    }
  }

  for (int k = 0;; ++k) {
    const double t_k = t0 + static_cast<double>(k) * cfg.stride;
    if (t_k + cfg.stride > end + 1e-9) {
      break;
    }
    const ObservationWindow window =
      build_window(s.scene_id, sim_ego, others, s.camera_frames, t_k, cfg);
    const PlanResult planned = plan(window, cfg);
    ++result.replan_count;

    const AgentState ego_now = window.ego_state();
    PosedTrack segment;
    segment.footprint = ego_now.footprint;
    for (const auto & sample : planned.planned_trajectory.samples) {
      if (sample.offset < 1e-9 || sample.offset > cfg.stride + 1e-9) {
        continue;
      }
      TrackSample ts;
      ts.timestamp = t_k + sample.offset;
      ts.state.agent_id = sim_ego.agent_id;
      ts.state.position = sample.position;
      ts.state.velocity = Vec2{std::cos(sample.heading), std::sin(sample.heading)} * sample.speed;
      ts.state.heading = sample.heading;
      ts.state.footprint = ego_now.footprint;
      ts.state.category = ego_now.category;
      sim_ego.samples.push_back(std::move(ts));
      segment.offsets.push_back(sample.offset);
      segment.positions.push_back(sample.position);
      segment.headings.push_back(sample.heading);
    }

    std::optional<double> earliest;
    for (const AgentTrack * track : others) {
      PosedTrack other;
      other.footprint = track->samples.front().state.footprint;
      for (double tau : segment.offsets) {
        const double abs_t = t_k + tau;
        if (!track->covers(abs_t)) {
          continue;
        }
        try {
          const AgentState state = track->state_at(abs_t, cfg.max_interp_gap);
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
        const auto hit = trajectories_collide(segment, other);
        if (hit && (!earliest || *hit < *earliest)) {
          earliest = hit;
        }
      } catch (const GridMismatchError &) {
        continue;
      }
    }
    if (earliest) {
      result.collided = true;
      result.first_contact_time = t_k + *earliest;
      return result;
    }
  }
  return result;
}

int cmd_simulate(const RunConfig & cfg, std::ostream & log)
{
  try {
    cfg.validate();
    const SceneIndex index = load_scene_index(cfg, log);
    bool partial = index.partial;
    if (index.by_id.empty()) {
      log << "error: no scenarios found under " << cfg.scenario_dir << "\n";
      return kExitUsage;
    }

    int simulated = 0;
    int collided = 0;
    std::ostringstream body;
    body << std::fixed << std::setprecision(3);
    for (const auto & [scene_id, scenario] : index.by_id) {
      try {
        const SimScenarioResult result = simulate_scenario(scenario, cfg.planner);
        ++simulated;
        if (result.collided) {
          ++collided;
          body << "scene " << scene_id << ": contact at t=" << result.first_contact_time
               << " after " << result.replan_count << " replans\n";
        } else {
          body << "scene " << scene_id << ": clean over " << result.replan_count
               << " replans\n";
        }
      } catch (const Error & e) {
        body << "scene " << scene_id << ": failed: " << e.what() << "\n";
        partial = true;
      }
    }
    log << body.str();
    if (simulated == 0) {
      log << "error: no scene could be simulated\n";
      return kExitUsage;
    }
    std::ostringstream rate;
    rate << std::fixed << std::setprecision(2)
         << (100.0 * collided / static_cast<double>(simulated));
    log << "closed-loop collision rate: " << rate.str() << " % (" << collided << "/" << simulated
        << " scenes)\n";
    return partial ? kExitPartial : kExitOk;
  } catch (const Error & e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_prompt(const RunConfig & cfg, std::ostream & log)
{
  try {
    cfg.validate();
    if (cfg.output_dir.empty()) {
      throw ConfigError("prompt: output_dir is required");
    }
    const DatasetManifest manifest = load_manifest_file(cfg);
    const auto entries = val_entries(manifest);
    if (entries.empty()) {
      log << "error: validation split is empty\n";
      return kExitUsage;
    }
    const SceneIndex index = load_scene_index(cfg, log);
    bool partial = index.partial;

    const fs::path prompts_dir = fs::path(cfg.output_dir) / "prompts";
    fs::create_directories(prompts_dir);

    int written = 0;
    for (const auto & entry : entries) {
      try {
        const AnnotationRecord record = load_record_file(cfg, entry);
        const Scenario & scenario = require_scene(index, entry.scene_id);
        const ObservationWindow window =
          extract_window(scenario, record.analysis_time, cfg.planner);
        const std::string prompt = assemble_prompt(window, cfg.planner);
        write_text_file((prompts_dir / (entry.sample_id + ".txt")).string(), prompt);
        ++written;
      } catch (const Error & e) {
        log << "warning: " << entry.sample_id << ": " << e.what() << "\n";
        partial = true;
      }
    }
    if (written == 0) {
      log << "error: no prompts written\n";
      return kExitUsage;
    }
    log << "wrote " << written << " prompts to " << prompts_dir.string() << "\n";
    return partial ? kExitPartial : kExitOk;
  } catch (const Error & e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

namespace
{

// Everything needed to score one validation sample once its response text
// is available.
struct EvalItem
{
  ManifestEntry entry;
  AnnotationRecord record;
  const Scenario * scenario{nullptr};
};

SampleScore score_item(
  const EvalItem & item, const ResponseRecord & response, const RunConfig & cfg)
{
  SampleScore score;
  score.sample_id = item.entry.sample_id;
  score.scored = true;
  score.gt_source = item.record.gt_source;
  score.language_fraction = score_language(response, item.record);
  score.risk_pred = response.stage3_status == ParseStatus::ok ? response.stage3_risk
                                                              : std::optional<SafetyLabel>();
  score.risk_gt = item.record.stage3_risk;

  if (response.stage5_status == ParseStatus::ok && !response.stage5_waypoints.empty()) {
    try {
      const auto [l2_short, l2_long] = l2_error(
        response.stage5_waypoints, item.record.stage5_plan.waypoints, cfg.planner, cfg.l2_mode);
      score.l2_1s = l2_short;
      score.l2_3s = l2_long;
    } catch (const ScoringError &) {
      // leaves the trajectory metrics empty for this sample
    }
    score.collided = check_predicted_collision(
      response.stage5_waypoints, *item.scenario, item.record.analysis_time, cfg.planner);
  }
  return score;
}

int write_report_files(
  const RunConfig & cfg, const MetricsReport & report, std::ostream & log)
{
  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    write_text_file(
      (fs::path(cfg.output_dir) / "report.json").string(), report_to_json(report));
    write_text_file((fs::path(cfg.output_dir) / "report.txt").string(), report_to_text(report));
    write_text_file(
      (fs::path(cfg.output_dir) / "per_sample.csv").string(), report_to_csv(report));
  }
  log << report_to_text(report);
  if (report.n_scored == 0) {
    log << "error: no sample could be scored\n";
    return kExitUsage;
  }
  return report.n_unscored > 0 ? kExitPartial : kExitOk;
}

std::vector<EvalItem> collect_eval_items(
  const RunConfig & cfg, const SceneIndex & index, std::ostream & log, bool & partial)
{
  const DatasetManifest manifest = load_manifest_file(cfg);
  const auto entries = val_entries(manifest);
  std::vector<EvalItem> items;
  items.reserve(entries.size());
  for (const auto & entry : entries) {
    try {
      EvalItem item;
      item.entry = entry;
      item.record = load_record_file(cfg, entry);
      item.scenario = &require_scene(index, entry.scene_id);
      items.push_back(std::move(item));
    } catch (const Error & e) {
      log << "warning: " << entry.sample_id << ": " << e.what() << "\n";
      partial = true;
    }
  }
  return items;
}

}  // namespace

int cmd_evaluate(const RunConfig & cfg, std::ostream & log)
{
  try {
    cfg.validate();
    const SceneIndex index = load_scene_index(cfg, log);
    bool partial = index.partial;
    const auto items = collect_eval_items(cfg, index, log, partial);
    if (items.empty()) {
      log << "error: nothing to evaluate\n";
      return kExitUsage;
    }

    std::vector<SampleScore> scores(items.size());

    if (cfg.endpoint_url) {
      EndpointDescriptor endpoint;
      endpoint.url = *cfg.endpoint_url;
      endpoint.timeout_s = cfg.request_timeout_s;
      endpoint.retries = cfg.request_retries;

      std::vector<std::string> prompts(items.size());
      for (std::size_t i = 0; i < items.size(); ++i) {
        const ObservationWindow window =
          extract_window(*items[i].scenario, items[i].record.analysis_time, cfg.planner);
        prompts[i] = assemble_prompt(window, cfg.planner);
      }

      const std::size_t stride = static_cast<std::size_t>(cfg.max_in_flight);
      for (std::size_t base = 0; base < items.size(); base += stride) {
        const std::size_t chunk_end = std::min(base + stride, items.size());
        std::vector<std::future<RemoteResult>> futures;
        futures.reserve(chunk_end - base);
        for (std::size_t i = base; i < chunk_end; ++i) {
          futures.push_back(std::async(std::launch::async, [&, i]() {
            return query_remote_model(items[i].entry.sample_id, prompts[i], endpoint);
          }));
        }
        for (std::size_t i = base; i < chunk_end; ++i) {
          const RemoteResult result = futures[i - base].get();
          if (result.ok()) {
            scores[i] = score_item(items[i], parse_response(*result.text), cfg);
          } else {
            scores[i].sample_id = items[i].entry.sample_id;
            scores[i].scored = false;
            scores[i].risk_gt = items[i].record.stage3_risk;
            scores[i].gt_source = items[i].record.gt_source;
            scores[i].unscored_reason =
              std::string(to_string(result.error->kind)) + ": " + result.error->detail;
            log << "warning: " << items[i].entry.sample_id << ": "
                << scores[i].unscored_reason << "\n";
            partial = true;
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < items.size(); ++i) {
        const ObservationWindow window =
          extract_window(*items[i].scenario, items[i].record.analysis_time, cfg.planner);
        const ResponseRecord response =
          oracle_respond(window, *items[i].scenario, cfg.planner);
        scores[i] = score_item(items[i], response, cfg);
      }
    }

    const MetricsReport report =
      build_report(std::move(scores), config_hash(cfg), cfg.l2_mode);
    const int code = write_report_files(cfg, report, log);
    if (code == kExitOk && partial) {
      return kExitPartial;
    }
    return code;
  } catch (const Error & e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_score(const RunConfig & cfg, const std::string & responses_dir, std::ostream & log)
{
  try {
    cfg.validate();
    if (!fs::is_directory(responses_dir)) {
      throw ConfigError("score: not a directory: " + responses_dir);
    }
    const SceneIndex index = load_scene_index(cfg, log);
    bool partial = index.partial;
    const auto items = collect_eval_items(cfg, index, log, partial);
    if (items.empty()) {
      log << "error: nothing to score\n";
      return kExitUsage;
    }

    std::vector<SampleScore> scores(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      const fs::path txt = fs::path(responses_dir) / (items[i].entry.sample_id + ".txt");
      const fs::path js = fs::path(responses_dir) / (items[i].entry.sample_id + ".json");
      std::string text;
      if (fs::is_regular_file(txt)) {
        text = read_text_file(txt.string());
      } else if (fs::is_regular_file(js)) {
        text = read_text_file(js.string());
      } else {
        scores[i].sample_id = items[i].entry.sample_id;
        scores[i].scored = false;
        scores[i].risk_gt = items[i].record.stage3_risk;
        scores[i].gt_source = items[i].record.gt_source;
        scores[i].unscored_reason = "no response file";
        log << "warning: " << items[i].entry.sample_id << ": no response file\n";
        partial = true;
        continue;
      }
      scores[i] = score_item(items[i], parse_response(text), cfg);
    }

    const MetricsReport report =
      build_report(std::move(scores), config_hash(cfg), cfg.l2_mode);
    const int code = write_report_files(cfg, report, log);
    if (code == kExitOk && partial) {
      return kExitPartial;
    }
    return code;
  } catch (const Error & e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace cfrisk
