// Copyright 2026 The hrc_safety Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HRC_SAFETY__SCENE_SIM_HPP_
#define HRC_SAFETY__SCENE_SIM_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hrc_safety/frame_sample.hpp"
#include "hrc_safety/geometry.hpp"
#include "hrc_safety/kinematics.hpp"
#include "hrc_safety/recording.hpp"
#include "hrc_safety/safety_monitor.hpp"
#include "hrc_safety/scene_frame.hpp"

namespace hrc::sim
{

using Rng = std::mt19937_64;

struct NoiseModel
{
  double px_sigma{0.0};
  double depth_sigma{0.0};
  double dropout_prob{0.0};

  bool operator==(const NoiseModel &) const = default;
};

struct Waypoint
{
  std::string name;
  std::vector<double> joints_rad;

  bool operator==(const Waypoint &) const = default;
};

/// Piecewise-linear wrist path in the base frame, clamped at both ends.
class WristScript
{
public:
  WristScript() = default;
  /// Throws InvalidArgument for empty scripts or non-increasing knot times.
  explicit WristScript(std::vector<std::pair<double, geometry::BasePoint>> knots);

  geometry::BasePoint position(double t) const;
  const std::vector<std::pair<double, geometry::BasePoint>> & knots() const {return knots_;}

  bool operator==(const WristScript & o) const {return knots_ == o.knots_;}

private:
  std::vector<std::pair<double, geometry::BasePoint>> knots_;
};

struct SceneConfig
{
  double rate_hz{20.0};
  std::uint64_t rng_seed{42};
  kinematics::KinematicChain chain;
  std::optional<std::string> chain_name;
  geometry::CameraIntrinsics camera;
  geometry::RigidTransform extrinsic;
  safety::SafetyZone zone;
  geometry::TablePlane table;
  safety::MonitorConfig monitor;
  NoiseModel noise;
  std::vector<Waypoint> waypoints;
  /// durations_s[i] is the time from waypoint i to waypoint i+1 (cyclic).
  std::vector<double> durations_s;
  WristScript wrist_script;

  /// Throws InvalidArgument.
  void validate() const;

  safety::HandProjector projector() const
  {
    return {camera, extrinsic, table, monitor.projection_mode};
  }

  /// Session header for a recording of this scene.
  recording::SessionMeta session_meta(std::int64_t created_unix) const;

  bool operator==(const SceneConfig &) const = default;
};

/// Built-in demo: reference arm cycling three waypoints, top-down camera 2 m
/// above the table, and a wrist that enters the shared workspace once.
SceneConfig default_scene_config();

/// Throws ParseError, SchemaError or ValidationError.
SceneConfig parse_scene_config(std::string_view text);
/// Throws IoFailure, then as parse_scene_config.
SceneConfig load_scene_config(const std::filesystem::path & path);

/// Cyclic joint-space waypoint task: Idle -> Running -> Stopped.
class TaskFsm
{
public:
  enum class Phase { Idle, Running, Stopped };

  /// Throws InvalidArgument on empty waypoints, mismatched lengths or
  /// non-positive durations.
  TaskFsm(std::vector<Waypoint> waypoints, std::vector<double> durations_s);

  /// Idle or Stopped -> Running. Resumes where a stopped task left off.
  void start();
  /// Running -> Stopped, holding the current joint state.
  void stop();

  /// Advances by dt seconds and returns the joint state. Throws InvalidArgument for dt < 0.
  const std::vector<double> & step(double dt);

  Phase phase() const {return phase_;}
  size_t segment() const {return segment_;}
  double progress() const {return progress_;}
  const std::vector<double> & joints() const {return current_;}
  double cycle_duration() const;

private:
  void interpolate();

  std::vector<Waypoint> waypoints_;
  std::vector<double> durations_;
  Phase phase_{Phase::Idle};
  size_t segment_{0};
  double progress_{0.0};
  std::vector<double> current_;
};

/// Value-style wrapper over TaskFsm::step.
std::pair<TaskFsm, std::vector<double>> fsm_step(TaskFsm fsm, double dt);

/// Synthetic wrist detection at time t: scripted position projected through
/// the camera with Gaussian pixel/depth noise and random dropout. Always
/// consumes the same number of random draws.
WristObservation wrist_observe(
  const WristScript & script, double t, const SceneConfig & cfg, Rng & rng);

/// Output of one live tick.
struct LiveTick
{
  std::uint64_t tick{0};
  FrameSample sample;
  SceneFrame frame;
  safety::FlagEvent event{safety::FlagEvent::None};
  std::optional<safety::SafetyPeriod> closed_period;
  bool monitor_on{true};
};

/// Pipeline stages toggled from the operator panel.
struct Stages
{
  bool camera{true};
  bool pose{true};
  bool monitor{true};
};

/// Single-owner state of the live scene: task FSM, wrist script, RNG and
/// monitor. Tick k is stamped t = k / rate_hz.
class SceneRuntime
{
public:
  explicit SceneRuntime(SceneConfig cfg);

  LiveTick tick();

  const SceneConfig & config() const {return cfg_;}
  TaskFsm & fsm() {return fsm_;}
  const TaskFsm & fsm() const {return fsm_;}
  Stages & stages() {return stages_;}
  const Stages & stages() const {return stages_;}
  const safety::MonitorState & monitor() const {return monitor_;}
  std::uint64_t ticks() const {return ticks_;}
  double period() const {return 1.0 / cfg_.rate_hz;}

private:
  SceneConfig cfg_;
  TaskFsm fsm_;
  Rng rng_;
  Stages stages_;
  safety::MonitorState monitor_;
  std::uint64_t ticks_{0};
};

}  // namespace hrc::sim

#endif  // HRC_SAFETY__SCENE_SIM_HPP_
