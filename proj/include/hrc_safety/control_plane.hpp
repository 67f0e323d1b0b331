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

#ifndef HRC_SAFETY__CONTROL_PLANE_HPP_
#define HRC_SAFETY__CONTROL_PLANE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hrc_safety/live_loop.hpp"
#include "hrc_safety/replay.hpp"
#include "hrc_safety/scene_sim.hpp"
#include "hrc_safety/telemetry.hpp"

namespace hrc::service
{

using telemetry::Mode;
using telemetry::SystemState;

struct ApiResult
{
  /// False for an idempotent no-op acknowledgment.
  bool changed{false};
  SystemState state;
  /// Session file opened or finalized by this call.
  std::optional<std::string> path;
  /// Frame presented by a replay seek.
  std::optional<SceneFrame> frame;
};

enum class ReplayAction { Play, Pause, Seek, Speed };

/// Throws InvalidArgument for unknown action names.
ReplayAction replay_action_from_string(std::string_view s);

struct SessionInfo
{
  std::string path;
  std::int64_t created_unix{0};
  double duration{0.0};
  size_t sample_count{0};
  size_t period_count{0};
  std::vector<safety::SafetyPeriod> periods;
  /// Set when the file failed to load.
  std::optional<std::string> error;
};

/**
 * The operator control plane. Every panel button maps to one method; all of
 * them serialize on one mutex, so transitions are totally ordered. Calls
 * either change state, return a no-op acknowledgment, or throw a typed
 * hrc::Error (InvalidTransition, DependencyNotRunning, ...).
 *
 * Time is injected through advance(): the live scene ticks at its configured
 * rate on the accumulated wall time, and an open replay receives the same
 * wall delta.
 */
class ControlPlane
{
public:
  struct Options
  {
    sim::SceneConfig scene;
    std::filesystem::path data_dir{"data"};
    /// Source for session created_unix stamps.
    std::function<std::int64_t()> unix_now;
  };

  ControlPlane(Options options, std::shared_ptr<telemetry::Broadcaster> telemetry);
  ~ControlPlane();

  ApiResult start_running();
  ApiResult stop_running();
  ApiResult start_fsm();
  ApiResult stop_fsm();
  ApiResult start_camera();
  ApiResult start_pose_estimate();
  ApiResult start_safety_monitoring();
  ApiResult set_recording(bool on);
  ApiResult replay_open(const std::optional<std::filesystem::path> & path);
  ApiResult replay_control(ReplayAction action, std::optional<double> value = std::nullopt);
  ApiResult replay_close();

  SystemState get_state() const;
  std::vector<SessionInfo> list_sessions() const;

  /// Throws InvalidArgument for negative or non-finite wall_dt.
  void advance(double wall_dt);

  const std::filesystem::path & data_dir() const {return opts_.data_dir;}
  std::shared_ptr<telemetry::Broadcaster> telemetry() const {return telemetry_;}

private:
  SystemState state_locked() const;
  ApiResult ack_locked(bool changed);
  void require_mode_locked(Mode mode, std::string_view action) const;
  void close_recording_locked();
  std::filesystem::path most_recent_session_locked() const;
  std::filesystem::path next_session_path_locked(std::int64_t created_unix) const;

  mutable std::mutex mutex_;
  Options opts_;
  std::shared_ptr<telemetry::Broadcaster> telemetry_;
  Mode mode_{Mode::Idle};
  sim::Stages stages_{false, false, false};
  std::optional<sim::SceneRuntime> runtime_;
  double live_wall_{0.0};
  std::unique_ptr<sim::SessionRecorder> recorder_;
  std::optional<std::filesystem::path> last_recording_;
  std::optional<replay::ReplaySession> replay_;
  std::string replay_path_;
  std::optional<bool> replay_flag_;
};

}  // namespace hrc::service

#endif  // HRC_SAFETY__CONTROL_PLANE_HPP_
