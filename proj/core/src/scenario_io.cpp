#include "cfrisk/scenario_io.hpp"

#include "cfrisk/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>

namespace cfrisk
{
namespace
{

using json = nlohmann::json;

void scan_keys(
  const json & obj, std::initializer_list<const char *> allowed, const std::string & path,
  bool strict, std::vector<std::string> & warnings)
{
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(
      allowed.begin(), allowed.end(), [&](const char * k) { return it.key() == k; });
    if (!known) {
      if (strict) {
        throw ParseError(path + ": unknown key '" + it.key() + "'");
      }
      warnings.push_back(path + ": ignoring unknown key '" + it.key() + "'");
    }
  }
}

const json & require(const json & obj, const char * key, const std::string & path)
{
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(path + ": missing key '" + key + "'");
  }
  return *it;
}

double as_number(const json & v, const std::string & path)
{
  if (!v.is_number()) {
    throw ParseError(path + ": expected a number");
  }
  return v.get<double>();
}

std::string as_string(const json & v, const std::string & path)
{
  if (!v.is_string()) {
    throw ParseError(path + ": expected a string");
  }
  return v.get<std::string>();
}

const json & as_object(const json & v, const std::string & path)
{
  if (!v.is_object()) {
    throw ParseError(path + ": expected an object");
  }
  return v;
}

const json & as_array(const json & v, const std::string & path)
{
  if (!v.is_array()) {
    throw ParseError(path + ": expected an array");
  }
  return v;
}

double in_range_heading(double heading)
{
  if (heading <= -kPi || heading > kPi) {
    return normalize_angle(heading);
  }
  return heading;
}

Scenario parse_canonical(const json & root, bool strict, std::vector<std::string> & warnings)
{
  const std::string path = "scenario";
  as_object(root, path);
  scan_keys(
    root, {"scene_id", "ego_id", "tracks", "camera_frames", "environment", "collision"}, path,
    strict, warnings);

  Scenario s;
  s.scene_id = as_string(require(root, "scene_id", path), path + ".scene_id");
  s.ego_id = as_string(require(root, "ego_id", path), path + ".ego_id");

  const json & env = as_object(require(root, "environment", path), path + ".environment");
  scan_keys(env, {"weather", "lighting", "road_layout"}, path + ".environment", strict, warnings);
  s.environment.weather = as_string(require(env, "weather", path), path + ".weather");
  s.environment.lighting = as_string(require(env, "lighting", path), path + ".lighting");
  s.environment.road_layout =
    as_string(require(env, "road_layout", path), path + ".road_layout");

  const json & tracks = as_array(require(root, "tracks", path), path + ".tracks");
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const std::string tpath = path + ".tracks[" + std::to_string(i) + "]";
    const json & jt = as_object(tracks[i], tpath);
    scan_keys(jt, {"agent_id", "category", "length", "width", "samples"}, tpath, strict, warnings);

    AgentTrack track;
    track.agent_id = as_string(require(jt, "agent_id", tpath), tpath + ".agent_id");
    const std::string cat_str =
      as_string(require(jt, "category", tpath), tpath + ".category");
    const auto category = agent_category_from_string(cat_str);
    if (!category) {
      if (track.agent_id == s.ego_id) {
        throw StructuralError(tpath + ": ego has unknown category '" + cat_str + "'");
      }
      if (strict) {
        throw ParseError(tpath + ": unknown category '" + cat_str + "'");
      }
      warnings.push_back(tpath + ": dropping track with unknown category '" + cat_str + "'");
      continue;
    }
    Footprint fp;
    fp.length = as_number(require(jt, "length", tpath), tpath + ".length");
    fp.width = as_number(require(jt, "width", tpath), tpath + ".width");

    const json & samples = as_array(require(jt, "samples", tpath), tpath + ".samples");
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const std::string spath = tpath + ".samples[" + std::to_string(k) + "]";
      const json & js = as_object(samples[k], spath);
      scan_keys(js, {"t", "x", "y", "vx", "vy", "heading"}, spath, strict, warnings);
      TrackSample sample;
      sample.timestamp = as_number(require(js, "t", spath), spath + ".t");
      sample.state.agent_id = track.agent_id;
      sample.state.position = {
        as_number(require(js, "x", spath), spath + ".x"),
        as_number(require(js, "y", spath), spath + ".y")};
      sample.state.velocity = {
        as_number(require(js, "vx", spath), spath + ".vx"),
        as_number(require(js, "vy", spath), spath + ".vy")};
      sample.state.heading =
        in_range_heading(as_number(require(js, "heading", spath), spath + ".heading"));
      sample.state.footprint = fp;
      sample.state.category = *category;
      track.samples.push_back(std::move(sample));
    }
    s.tracks.push_back(std::move(track));
  }

  if (auto it = root.find("camera_frames"); it != root.end()) {
    const json & frames = as_array(*it, path + ".camera_frames");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const std::string fpath = path + ".camera_frames[" + std::to_string(i) + "]";
      const json & jf = as_object(frames[i], fpath);
      scan_keys(jf, {"t", "camera", "image_path"}, fpath, strict, warnings);
      CameraFrame frame;
      frame.timestamp = as_number(require(jf, "t", fpath), fpath + ".t");
      const std::string cam = as_string(require(jf, "camera", fpath), fpath + ".camera");
      const auto camera = camera_name_from_string(cam);
      if (!camera) {
        if (strict) {
          throw ParseError(fpath + ": unknown camera '" + cam + "'");
        }
        warnings.push_back(fpath + ": dropping frame from unknown camera '" + cam + "'");
        continue;
      }
      frame.camera = *camera;
      frame.image_path = as_string(require(jf, "image_path", fpath), fpath + ".image_path");
      s.camera_frames.push_back(std::move(frame));
    }
  }

  if (auto it = root.find("collision"); it != root.end() && !it->is_null()) {
    const std::string cpath = path + ".collision";
    const json & jc = as_object(*it, cpath);
    scan_keys(jc, {"agent_id", "impact_time"}, cpath, strict, warnings);
    CollisionRecord rec;
    rec.colliding_agent_id = as_string(require(jc, "agent_id", cpath), cpath + ".agent_id");
    rec.impact_time = as_number(require(jc, "impact_time", cpath), cpath + ".impact_time");
    s.collision = rec;
  }
  return s;
}

Scenario parse_deepaccident_log(
  std::istream & in, bool strict, std::vector<std::string> & warnings)
{
  std::string line;
  json header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
      continue;
    }
    try {
      header = json::parse(line);
    } catch (const json::parse_error & e) {
      throw ParseError("log line " + std::to_string(line_no) + ": " + e.what());
    }
    break;
  }
  if (!header.is_object() || !header.contains("meta")) {
    throw ParseError("log: first record must be a meta header");
  }

  const json & meta = as_object(header["meta"], "meta");
  scan_keys(
    meta,
    {"scene_id", "ego_id", "weather", "lighting", "road_layout", "collision", "cameras"},
    "meta", strict, warnings);

  Scenario s;
  s.scene_id = as_string(require(meta, "scene_id", "meta"), "meta.scene_id");
  s.ego_id = as_string(require(meta, "ego_id", "meta"), "meta.ego_id");
  s.environment.weather = as_string(require(meta, "weather", "meta"), "meta.weather");
  s.environment.lighting = as_string(require(meta, "lighting", "meta"), "meta.lighting");
  s.environment.road_layout =
    as_string(require(meta, "road_layout", "meta"), "meta.road_layout");

  if (auto it = meta.find("collision"); it != meta.end() && !it->is_null()) {
    const json & jc = as_object(*it, "meta.collision");
    scan_keys(jc, {"agent_id", "frame"}, "meta.collision", strict, warnings);
    CollisionRecord rec;
    rec.colliding_agent_id =
      as_string(require(jc, "agent_id", "meta.collision"), "meta.collision.agent_id");
    rec.impact_time =
      as_number(require(jc, "frame", "meta.collision"), "meta.collision.frame") / 10.0;
    s.collision = rec;
  }

  if (auto it = meta.find("cameras"); it != meta.end()) {
    const json & cams = as_array(*it, "meta.cameras");
    for (std::size_t i = 0; i < cams.size(); ++i) {
      const std::string cpath = "meta.cameras[" + std::to_string(i) + "]";
      const json & jf = as_object(cams[i], cpath);
      scan_keys(jf, {"frame", "camera", "path"}, cpath, strict, warnings);
      CameraFrame frame;
      frame.timestamp = as_number(require(jf, "frame", cpath), cpath + ".frame") / 10.0;
      const std::string cam = as_string(require(jf, "camera", cpath), cpath + ".camera");
      const auto camera = camera_name_from_string(cam);
      if (!camera) {
        if (strict) {
          throw ParseError(cpath + ": unknown camera '" + cam + "'");
        }
        warnings.push_back(cpath + ": dropping frame from unknown camera '" + cam + "'");
        continue;
      }
      frame.camera = *camera;
      frame.image_path = as_string(require(jf, "path", cpath), cpath + ".path");
      s.camera_frames.push_back(std::move(frame));
    }
  }

  struct PendingTrack
  {
    AgentCategory category{AgentCategory::other};
    std::optional<Footprint> footprint;
    std::map<long long, TrackSample> by_frame;
    bool dropped{false};
  };
  std::map<std::string, PendingTrack> pending;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
      continue;
    }
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error & e) {
      if (strict) {
        throw ParseError("log line " + std::to_string(line_no) + ": " + e.what());
      }
      warnings.push_back("log line " + std::to_string(line_no) + ": skipping unparsable row");
      continue;
    }
    const std::string rpath = "log line " + std::to_string(line_no);
    as_object(row, rpath);
    scan_keys(
      row, {"frame", "agent_id", "type", "x", "y", "vx", "vy", "yaw", "length", "width"}, rpath,
      strict, warnings);

    const std::string agent_id = as_string(require(row, "agent_id", rpath), rpath + ".agent_id");
    const std::string type_str = as_string(require(row, "type", rpath), rpath + ".type");
    const auto category = agent_category_from_string(type_str);
    auto & slot = pending[agent_id];
    if (slot.by_frame.empty() && !slot.dropped) {
      if (!category) {
        if (agent_id == s.ego_id) {
          throw StructuralError(rpath + ": ego has unknown type '" + type_str + "'");
        }
        if (strict) {
          throw ParseError(rpath + ": unknown type '" + type_str + "'");
        }
        warnings.push_back(
          rpath + ": dropping agent '" + agent_id + "' with unknown type '" + type_str + "'");
        slot.dropped = true;
        continue;
      }
      slot.category = *category;
    } else if (slot.dropped) {
      continue;
    } else if (category && *category != slot.category) {
      if (strict) {
        throw ParseError(rpath + ": agent '" + agent_id + "' changes type mid-log");
      }
      warnings.push_back(rpath + ": agent '" + agent_id + "' changes type mid-log; keeping first");
    }

    const double frame = as_number(require(row, "frame", rpath), rpath + ".frame");
    const long long frame_idx = std::llround(frame);
    if (std::fabs(frame - static_cast<double>(frame_idx)) > 1e-9 || frame_idx < 0) {
      throw ParseError(rpath + ": frame must be a non-negative integer");
    }
    if (slot.by_frame.count(frame_idx) != 0) {
      if (strict) {
        throw ParseError(rpath + ": duplicate frame " + std::to_string(frame_idx) +
                         " for agent '" + agent_id + "'");
      }
      warnings.push_back(rpath + ": duplicate frame for agent '" + agent_id + "'; keeping first");
      continue;
    }

    const bool has_len = row.contains("length");
    const bool has_wid = row.contains("width");
    if (has_len != has_wid) {
      throw ParseError(rpath + ": length and width must be given together");
    }
    if (!slot.footprint && has_len) {
      slot.footprint = Footprint{
        as_number(row["length"], rpath + ".length"), as_number(row["width"], rpath + ".width")};
    }

    TrackSample sample;
    sample.timestamp = static_cast<double>(frame_idx) / 10.0;
    sample.state.agent_id = agent_id;
    sample.state.position = {
      as_number(require(row, "x", rpath), rpath + ".x"),
      as_number(require(row, "y", rpath), rpath + ".y")};
    sample.state.velocity = {
      as_number(require(row, "vx", rpath), rpath + ".vx"),
      as_number(require(row, "vy", rpath), rpath + ".vy")};
    sample.state.heading = normalize_angle(as_number(require(row, "yaw", rpath), rpath + ".yaw"));
    sample.state.category = slot.category;
    slot.by_frame.emplace(frame_idx, std::move(sample));
  }

  for (auto & [agent_id, slot] : pending) {
    if (slot.dropped || slot.by_frame.empty()) {
      continue;
    }
    AgentTrack track;
    track.agent_id = agent_id;
    const Footprint fp = slot.footprint.value_or(default_footprint(slot.category));
    track.samples.reserve(slot.by_frame.size());
    for (auto & [frame_idx, sample] : slot.by_frame) {
      sample.state.footprint = fp;
      track.samples.push_back(std::move(sample));
    }
    s.tracks.push_back(std::move(track));
  }
  return s;
}

json scenario_to_json(const Scenario & s)
{
  json root;
  root["scene_id"] = s.scene_id;
  root["ego_id"] = s.ego_id;
  root["environment"] = {
    {"weather", s.environment.weather},
    {"lighting", s.environment.lighting},
    {"road_layout", s.environment.road_layout}};
  if (s.collision) {
    root["collision"] = {
      {"agent_id", s.collision->colliding_agent_id},
      {"impact_time", s.collision->impact_time}};
  } else {
    root["collision"] = nullptr;
  }
  root["camera_frames"] = json::array();
  for (const auto & frame : s.camera_frames) {
    root["camera_frames"].push_back({
      {"t", frame.timestamp},
      {"camera", to_string(frame.camera)},
      {"image_path", frame.image_path}});
  }
  root["tracks"] = json::array();
  for (const auto & track : s.tracks) {
    json jt;
    jt["agent_id"] = track.agent_id;
    jt["category"] = to_string(track.samples.front().state.category);
    jt["length"] = track.samples.front().state.footprint.length;
    jt["width"] = track.samples.front().state.footprint.width;
    jt["samples"] = json::array();
    for (const auto & sample : track.samples) {
      jt["samples"].push_back({
        {"t", sample.timestamp},
        {"x", sample.state.position.x},
        {"y", sample.state.position.y},
        {"vx", sample.state.velocity.x},
        {"vy", sample.state.velocity.y},
        {"heading", sample.state.heading}});
    }
    root["tracks"].push_back(std::move(jt));
  }
  return root;
}

}  // namespace

LoadedScenario load_scenario(std::istream & in, ScenarioFormat format, bool strict)
{
  LoadedScenario result;
  if (format == ScenarioFormat::canonical) {
    json root;
    try {
      root = json::parse(in);
    } catch (const json::parse_error & e) {
      throw ParseError(std::string("scenario: ") + e.what());
    }
    result.scenario = parse_canonical(root, strict, result.warnings);
  } else {
    result.scenario = parse_deepaccident_log(in, strict, result.warnings);
  }
  result.scenario.validate();
  return result;
}

LoadedScenario load_scenario_file(const std::string & path, ScenarioFormat format, bool strict)
{
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open scenario file: " + path);
  }
  return load_scenario(in, format, strict);
}

std::string write_scenario(const Scenario & s)
{
  return scenario_to_json(s).dump(2) + "\n";
}

void write_scenario_file(const Scenario & s, const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot open scenario file for writing: " + path);
  }
  out << write_scenario(s);
  if (!out) {
    throw ParseError("failed writing scenario file: " + path);
  }
}

}  // namespace cfrisk
