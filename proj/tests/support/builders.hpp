#ifndef CFRISK_TESTS_SUPPORT_BUILDERS_HPP_
#define CFRISK_TESTS_SUPPORT_BUILDERS_HPP_

// Shared scenario fixtures. The numeric layouts here are load-bearing:
// several tests freeze values derived from these geometries by hand, so
// changing a position or speed means re-deriving the expected numbers.

#include <cfrisk/scenario.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace cfrisk::testing
{

/// 4 m x 2 m car: disc radius is exactly sqrt(20)/2, which keeps the
/// hand-derived TTC constants short.
inline Footprint test_car()
{
  return Footprint{4.0, 2.0};
}

inline AgentState make_state(
  const std::string & id, double x, double y, double vx, double vy, double heading,
  Footprint fp = test_car(), AgentCategory cat = AgentCategory::car)
{
  AgentState s;
  s.agent_id = id;
  s.position = {x, y};
  s.velocity = {vx, vy};
  s.heading = heading;
  s.footprint = fp;
  s.category = cat;
  return s;
}

/// Track sampled on the 10 Hz grid from a position/velocity function of t.
inline AgentTrack sampled_track(
  const std::string & id, double t0, double t1,
  const std::function<void(double, Vec2 &, Vec2 &)> & motion, double heading,
  Footprint fp = test_car(), AgentCategory cat = AgentCategory::car, double dt = 0.1)
{
  AgentTrack track;
  track.agent_id = id;
  const int n = static_cast<int>(std::llround((t1 - t0) / dt));
  for (int k = 0; k <= n; ++k) {
    const double t = t0 + k * dt;
    Vec2 pos;
    Vec2 vel;
    motion(t, pos, vel);
    TrackSample sample;
    sample.timestamp = t;
    sample.state = make_state(id, pos.x, pos.y, vel.x, vel.y, heading, fp, cat);
    track.samples.push_back(sample);
  }
  return track;
}

/// Constant-velocity track: position = (x0, y0) + (vx, vy) * t.
inline AgentTrack straight_track(
  const std::string & id, double t0, double t1, double x0, double y0, double vx, double vy,
  double heading, Footprint fp = test_car(), AgentCategory cat = AgentCategory::car)
{
  return sampled_track(
    id, t0, t1,
    [=](double t, Vec2 & pos, Vec2 & vel) {
      pos = {x0 + vx * t, y0 + vy * t};
      vel = {vx, vy};
    },
    heading, fp, cat);
}

inline std::vector<CameraFrame> front_cameras(double t0, double t1)
{
  std::vector<CameraFrame> frames;
  for (double t = t0; t <= t1 + 1e-9; t += 0.5) {
    frames.push_back({t, CameraName::front, "frames/front_" + std::to_string(frames.size()) + ".jpg"});
  }
  return frames;
}

inline Scenario make_scene(
  const std::string & scene_id, std::vector<AgentTrack> tracks,
  std::optional<CollisionRecord> collision = std::nullopt)
{
  Scenario s;
  s.scene_id = scene_id;
  s.ego_id = tracks.front().agent_id;
  s.camera_frames = front_cameras(tracks.front().start_time(), tracks.front().end_time());
  s.tracks = std::move(tracks);
  s.environment = {"clear", "day", "four-way intersection"};
  s.collision = collision;
  return s;
}

/// Ego reaches x = 0 at t = 1.5 doing 10 m/s; a slower lead (5 m/s) rolls
/// 27.5 m ahead at that moment, inside the 30 m sensing radius. Closing at
/// 5 m/s, only the gentle branches keep every TTC above the 3 s threshold,
/// and (Maintain, Decelerate) wins on progress.
inline Scenario lead_vehicle_scene(const std::string & scene_id = "lead_fixture")
{
  auto ego = straight_track("ego", 0.0, 5.0, -15.0, 0.0, 10.0, 0.0, 0.0);
  auto lead = straight_track("lead", 0.0, 5.0, 20.0, 0.0, 5.0, 0.0, 0.0);
  return make_scene(scene_id, {ego, lead});
}

/// Two cars closing head on at 10 m/s each; center gap = `gap` at t = 1.5.
inline Scenario head_on_scene(double gap, const std::string & scene_id = "head_on")
{
  auto ego = straight_track("ego", 0.0, 6.0, -15.0, 0.0, 10.0, 0.0, 0.0);
  auto other =
    straight_track("other", 0.0, 6.0, gap + 15.0, 0.0, -10.0, 0.0, kPi);
  return make_scene(scene_id, {ego, other});
}

/// Ego stopped at the origin, another stopped car 10 m ahead.
inline Scenario stopped_pair_scene(const std::string & scene_id = "stopped_pair")
{
  auto ego = straight_track("ego", 0.0, 6.0, 0.0, 0.0, 0.0, 0.0, 0.0);
  auto other = straight_track("other", 0.0, 6.0, 10.0, 0.0, 0.0, 0.0, 0.0);
  return make_scene(scene_id, {ego, other});
}

/// Ego alone at 10 m/s.
inline Scenario solo_scene(const std::string & scene_id = "solo")
{
  return make_scene(scene_id, {straight_track("ego", 0.0, 6.0, 0.0, 0.0, 10.0, 0.0, 0.0)});
}

/// Ego runs at 10 m/s into a car stopped at x = 10 * impact_time + 4.5, so
/// the bumpers meet exactly at impact_time; the log ends at the impact.
inline Scenario rear_end_collision_scene(
  double impact_time, const std::string & scene_id = "rear_end")
{
  auto ego = straight_track("ego", 0.0, impact_time, 0.0, 0.0, 10.0, 0.0, 0.0);
  auto obstacle = straight_track(
    "obstacle", 0.0, impact_time, 10.0 * impact_time + 4.5, 0.0, 0.0, 0.0, 0.0);
  return make_scene(scene_id, {ego, obstacle}, CollisionRecord{"obstacle", impact_time});
}

/// Ego cruises at 10 m/s; a lead 25 m ahead cruises at the same speed. No
/// approach, every frame Safe.
inline Scenario cruising_scene(const std::string & scene_id = "cruise")
{
  auto ego = straight_track("ego", 0.0, 10.0, 0.0, 0.0, 10.0, 0.0, 0.0);
  auto lead = straight_track("lead", 0.0, 10.0, 25.0, 0.0, 10.0, 0.0, 0.0);
  return make_scene(scene_id, {ego, lead});
}

/// Ego cruises at 10 m/s while the lead, 50 m ahead at equal speed, brakes
/// at 2.5 m/s^2 from t = 4 until it stops at t = 8 (at x = 110). The log
/// ends at t = 8.2 with a 28 m center gap, before anything touches: late
/// frames turn Unsafe but every kept frame remains recoverable.
inline Scenario braking_lead_scene(const std::string & scene_id = "braking_lead")
{
  auto ego = straight_track("ego", 0.0, 8.2, 0.0, 0.0, 10.0, 0.0, 0.0);
  auto lead = sampled_track(
    "lead", 0.0, 8.2,
    [](double t, Vec2 & pos, Vec2 & vel) {
      if (t <= 4.0) {
        pos = {50.0 + 10.0 * t, 0.0};
        vel = {10.0, 0.0};
      } else if (t <= 8.0) {
        const double u = t - 4.0;
        pos = {90.0 + 10.0 * u - 1.25 * u * u, 0.0};
        vel = {10.0 - 2.5 * u, 0.0};
      } else {
        pos = {110.0, 0.0};
        vel = {0.0, 0.0};
      }
    },
    0.0);
  return make_scene(scene_id, {ego, lead});
}

/// Unique scratch directory, removed on destruction.
struct TempDir
{
  std::filesystem::path path;

  explicit TempDir(const std::string & tag)
  {
    static std::mt19937_64 rng{std::random_device{}()};
    path = std::filesystem::temp_directory_path() /
           ("cfrisk_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;

  std::string str() const { return path.string(); }
  std::string file(const std::string & name) const { return (path / name).string(); }
};

}  // namespace cfrisk::testing

#endif  // CFRISK_TESTS_SUPPORT_BUILDERS_HPP_
