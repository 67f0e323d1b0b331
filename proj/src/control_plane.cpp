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

#include "hrc_safety/control_plane.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <regex>
#include <tuple>
#include <utility>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hrc_safety/errors.hpp"

namespace hrc::service
{

namespace fs = std::filesystem;

namespace
{

// Upper bound on live ticks processed by one advance() call; a larger backlog
// is skipped with a warning instead of stalling the caller.
constexpr std::uint64_t kMaxCatchUpTicks = 200;

// session-<created_unix>[-<n>].yaml
std::optional<std::pair<std::int64_t, int>> parse_session_name(const std::string & name)
{
  static const std::regex re(R"(session-(-?\d+)(?:-(\d+))?\.yaml)");
  std::smatch m;
  if (!std::regex_match(name, m, re)) {
    return std::nullopt;
  }
  try {
    return std::make_pair(
      static_cast<std::int64_t>(std::stoll(m[1].str())), m[2].matched ? std::stoi(m[2].str()) : 0);
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

}  // namespace

ReplayAction replay_action_from_string(std::string_view s)
{
  if (s == "play") {
    return ReplayAction::Play;
  }
  if (s == "pause") {
    return ReplayAction::Pause;
  }
  if (s == "seek") {
    return ReplayAction::Seek;
  }
  if (s == "speed") {
    return ReplayAction::Speed;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown replay action '{}'", s));
}

ControlPlane::ControlPlane(Options options, std::shared_ptr<telemetry::Broadcaster> telemetry)
: opts_(std::move(options)), telemetry_(std::move(telemetry))
{
  opts_.scene.validate();
  if (!opts_.unix_now) {
    opts_.unix_now = [] {
        return static_cast<std::int64_t>(
          std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch()).count());
      };
  }
  if (!telemetry_) {
    telemetry_ = std::make_shared<telemetry::Broadcaster>();
  }
}

ControlPlane::~ControlPlane()
{
  std::lock_guard<std::mutex> lock(mutex_);
  try {
    close_recording_locked();
  } catch (const std::exception & e) {
    spdlog::error("finalizing recording on shutdown failed: {}", e.what());
  }
}

SystemState ControlPlane::state_locked() const
{
  SystemState s;
  s.mode = mode_;
  s.fsm_running = runtime_ && runtime_->fsm().phase() == sim::TaskFsm::Phase::Running;
  s.camera_on = stages_.camera;
  s.pose_on = stages_.pose;
  s.monitor_on = stages_.monitor;
  s.recording = recorder_ != nullptr;
  if (recorder_) {
    s.active_session_path = recorder_->path().string();
  }
  if (replay_) {
    telemetry::ReplaySummary r;
    r.path = replay_path_;
    r.duration = replay_->recording().duration();
    r.sample_count = replay_->recording().samples.size();
    r.cursor = replay_->cursor();
    r.next_index = replay_->next_index();
    r.logical_t = replay_->logical_t();
    r.speed = replay_->speed();
    r.playing = replay_->playing();
    s.replay = r;
  }
  return s;
}

ApiResult ControlPlane::ack_locked(bool changed)
{
  ApiResult r;
  r.changed = changed;
  r.state = state_locked();
  if (changed) {
    telemetry_->publish(telemetry::StateChanged{r.state});
  }
  return r;
}

void ControlPlane::require_mode_locked(Mode mode, std::string_view action) const
{
  if (mode_ != mode) {
    throw Error(
            ErrorCode::InvalidTransition,
            fmt::format("{} requires {}, system is {}", action, telemetry::to_string(mode),
            telemetry::to_string(mode_)));
  }
}

SystemState ControlPlane::get_state() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return state_locked();
}

ApiResult ControlPlane::start_running()
{
  std::lock_guard<std::mutex> lock(mutex_);
  if (mode_ == Mode::LiveRunning) {
    return ack_locked(false);
  }
  require_mode_locked(Mode::Idle, "start_running");
  runtime_.emplace(opts_.scene);
  stages_ = {false, false, false};
  runtime_->stages() = stages_;
  live_wall_ = 0.0;
  mode_ = Mode::LiveRunning;
  return ack_locked(true);
}

ApiResult ControlPlane::stop_running()
{
  std::lock_guard<std::mutex> lock(mutex_);
  if (mode_ != Mode::LiveRunning) {
    if (mode_ == Mode::Idle) {
      return ack_locked(false);
    }
    require_mode_locked(Mode::LiveRunning, "stop_running");
  }
  std::optional<std::string> path;
  if (recorder_) {
    path = recorder_->path().string();
  }
  close_recording_locked();
  runtime_.reset();
  stages_ = {false, false, false};
  mode_ = Mode::Idle;
  ApiResult r = ack_locked(true);
  r.path = path;
  return r;
}

ApiResult ControlPlane::start_fsm()
{
  std::lock_guard<std::mutex> lock(mutex_);
  require_mode_locked(Mode::LiveRunning, "start_fsm");
  if (runtime_->fsm().phase() == sim::TaskFsm::Phase::Running) {
    return ack_locked(false);
  }
  runtime_->fsm().start();
  return ack_locked(true);
}

ApiResult ControlPlane::stop_fsm()
{
  std::lock_guard<std::mutex> lock(mutex_);
  require_mode_locked(Mode::LiveRunning, "stop_fsm");
  if (runtime_->fsm().phase() != sim::TaskFsm::Phase::Running) {
    return ack_locked(false);
  }
  runtime_->fsm().stop();
  return ack_locked(true);
}

ApiResult ControlPlane::start_camera()
{
  std::lock_guard<std::mutex> lock(mutex_);
  require_mode_locked(Mode::LiveRunning, "start_camera");
  if (stages_.camera) {
    return ack_locked(false);
  }
  stages_.camera = true;
  runtime_->stages() = stages_;
  return ack_locked(true);
}

ApiResult ControlPlane::start_pose_estimate()
{
  std::lock_guard<std::mutex> lock(mutex_);
  require_mode_locked(Mode::LiveRunning, "start_pose_estimate");
  if (stages_.pose) {
    return ack_locked(false);
  }
  if (!stages_.camera) {
    throw Error(ErrorCode::DependencyNotRunning, "pose estimation requires the camera");
  }
  stages_.pose = true;
  runtime_->stages() = stages_;
  return ack_locked(true);
}

ApiResult ControlPlane::start_safety_monitoring()
{
  std::lock_guard<std::mutex> lock(mutex_);
  require_mode_locked(Mode::LiveRunning, "start_safety_monitoring");
  if (stages_.monitor) {
    return ack_locked(false);
  }
  if (!stages_.pose) {
    throw Error(ErrorCode::DependencyNotRunning, "safety monitoring requires pose estimation");
  }
  stages_.monitor = true;
  runtime_->stages() = stages_;
  return ack_locked(true);
}

fs::path ControlPlane::next_session_path_locked(std::int64_t created_unix) const
{
  fs::path p = opts_.data_dir / recording::session_filename(created_unix);
  for (int n = 1; fs::exists(p); ++n) {
    p = opts_.data_dir / fmt::format("session-{}-{}.yaml", created_unix, n);
  }
  return p;
}

void ControlPlane::close_recording_locked()
{
  if (!recorder_) {
    return;
  }
  auto rec = std::move(recorder_);
  last_recording_ = rec->path();
  rec->finalize();
}

ApiResult ControlPlane::set_recording(bool on)
{
  std::lock_guard<std::mutex> lock(mutex_);
  if (!on) {
    if (!recorder_) {
      return ack_locked(false);
    }
    const std::string path = recorder_->path().string();
    close_recording_locked();
    ApiResult r = ack_locked(true);
    r.path = path;
    return r;
  }
  require_mode_locked(Mode::LiveRunning, "set_recording(on)");
  if (recorder_) {
    ApiResult r = ack_locked(false);
    r.path = recorder_->path().string();
    return r;
  }
  std::error_code ec;
  fs::create_directories(opts_.data_dir, ec);
  if (ec) {
    throw Error(
            ErrorCode::IoFailure,
            fmt::format("cannot create data dir '{}': {}", opts_.data_dir.string(), ec.message()));
  }
  const std::int64_t created = opts_.unix_now();
  const fs::path path = next_session_path_locked(created);
  recorder_ = std::make_unique<sim::SessionRecorder>(path, opts_.scene.session_meta(created));
  ApiResult r = ack_locked(true);
  r.path = path.string();
  return r;
}

fs::path ControlPlane::most_recent_session_locked() const
{
  if (last_recording_ && fs::exists(*last_recording_)) {
    return *last_recording_;
  }
  std::optional<std::tuple<std::int64_t, int, fs::path>> best;
  std::error_code ec;
  if (fs::is_directory(opts_.data_dir, ec)) {
    for (const auto & entry : fs::directory_iterator(opts_.data_dir, ec)) {
      const auto key = parse_session_name(entry.path().filename().string());
      if (!key) {
        continue;
      }
      std::tuple<std::int64_t, int, fs::path> cand{key->first, key->second, entry.path()};
      if (!best || cand > *best) {
        best = cand;
      }
    }
  }
  if (!best) {
    throw Error(
            ErrorCode::NotFound,
            fmt::format("no recorded sessions in '{}'", opts_.data_dir.string()));
  }
  return std::get<2>(*best);
}

ApiResult ControlPlane::replay_open(const std::optional<fs::path> & path)
{
  std::lock_guard<std::mutex> lock(mutex_);
  if (mode_ == Mode::LiveRunning) {
    throw Error(ErrorCode::InvalidTransition, "replay_open while LiveRunning; stop running first");
  }
  fs::path target;
  if (path && !path->empty()) {
    target = path->is_relative() && !fs::exists(*path) ? opts_.data_dir / *path : *path;
    if (!fs::exists(target)) {
      throw Error(ErrorCode::NotFound, fmt::format("session '{}' does not exist", target.string()));
    }
  } else {
    target = most_recent_session_locked();
  }
  auto rec = std::make_shared<const recording::SessionRecording>(recording::load(target));
  replay_.emplace(std::move(rec));
  replay_->play();
  replay_path_ = target.string();
  replay_flag_.reset();
  mode_ = Mode::Replaying;
  ApiResult r = ack_locked(true);
  r.path = replay_path_;
  return r;
}

ApiResult ControlPlane::replay_control(ReplayAction action, std::optional<double> value)
{
  std::lock_guard<std::mutex> lock(mutex_);
  require_mode_locked(Mode::Replaying, "replay_control");
  switch (action) {
    case ReplayAction::Play:
      if (replay_->playing() || replay_->exhausted()) {
        return ack_locked(false);
      }
      replay_->play();
      return ack_locked(true);
    case ReplayAction::Pause:
      if (!replay_->playing()) {
        return ack_locked(false);
      }
      replay_->pause();
      return ack_locked(true);
    case ReplayAction::Speed:
      if (!value) {
        throw Error(ErrorCode::InvalidArgument, "speed requires a value");
      }
      if (*value == replay_->speed()) {
        return ack_locked(false);
      }
      replay_->set_speed(*value);
      return ack_locked(true);
    case ReplayAction::Seek: {
        if (!value) {
          throw Error(ErrorCode::InvalidArgument, "seek requires a value");
        }
        auto frame = replay_->seek(*value);
        replay_flag_.reset();
        if (frame) {
          telemetry_->publish(telemetry::FrameEvent{telemetry::Origin::Replay, *frame, true});
          replay_flag_ = frame->recorded_flag;
        }
        ApiResult r = ack_locked(true);
        r.frame = std::move(frame);
        return r;
      }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown replay action");
}

ApiResult ControlPlane::replay_close()
{
  std::lock_guard<std::mutex> lock(mutex_);
  if (mode_ != Mode::Replaying) {
    return ack_locked(false);
  }
  replay_.reset();
  replay_path_.clear();
  replay_flag_.reset();
  mode_ = Mode::Idle;
  return ack_locked(true);
}

std::vector<SessionInfo> ControlPlane::list_sessions() const
{
  fs::path dir;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    dir = opts_.data_dir;
  }
  std::vector<SessionInfo> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    return out;
  }
  for (const auto & entry : fs::directory_iterator(dir, ec)) {
    const auto key = parse_session_name(entry.path().filename().string());
    if (!key) {
      continue;
    }
    SessionInfo info;
    info.path = entry.path().string();
    info.created_unix = key->first;
    try {
      const auto rec = recording::load(entry.path());
      info.duration = rec.duration();
      info.sample_count = rec.samples.size();
      info.periods = safety::segment_periods(
        std::span<const FrameSample>(rec.samples), rec.meta.zone, rec.meta.projector(),
        rec.meta.monitor);
      info.period_count = info.periods.size();
    } catch (const Error & e) {
      info.error = e.what();
    }
    out.push_back(std::move(info));
  }
  std::sort(
    out.begin(), out.end(), [](const SessionInfo & a, const SessionInfo & b) {
      return std::tie(a.created_unix, a.path) < std::tie(b.created_unix, b.path);
    });
  return out;
}

void ControlPlane::advance(double wall_dt)
{
  if (!(wall_dt >= 0.0) || !std::isfinite(wall_dt)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("wall_dt {} must be >= 0", wall_dt));
  }
  std::lock_guard<std::mutex> lock(mutex_);
  if (mode_ == Mode::LiveRunning) {
    live_wall_ += wall_dt;
    const double rate = opts_.scene.rate_hz;
    auto due = static_cast<std::uint64_t>(std::floor(live_wall_ * rate + 1e-9));
    if (due > runtime_->ticks() + kMaxCatchUpTicks) {
      telemetry_->publish(
        telemetry::Warning{
          fmt::format("ClockStall: skipping {} live ticks", due - runtime_->ticks() - kMaxCatchUpTicks)});
      live_wall_ = static_cast<double>(runtime_->ticks() + kMaxCatchUpTicks) / rate;
      due = runtime_->ticks() + kMaxCatchUpTicks;
    }
    while (runtime_->ticks() < due) {
      const sim::LiveTick tick = runtime_->tick();
      if (recorder_) {
        try {
          recorder_->consume(tick);
        } catch (const std::exception & e) {
          telemetry_->publish(telemetry::Warning{fmt::format("SinkFailure (recorder): {}", e.what())});
        }
      }
      sim::publish_tick(*telemetry_, tick, telemetry::Origin::Live);
    }
  } else if (mode_ == Mode::Replaying) {
    const bool was_playing = replay_->playing();
    for (const SceneFrame & f : replay_->tick(wall_dt)) {
      if (replay_flag_ ? *replay_flag_ != f.recorded_flag : f.recorded_flag) {
        telemetry_->publish(
          telemetry::FlagChanged{telemetry::Origin::Replay, f.t, f.recorded_flag, f.failsafe});
      }
      replay_flag_ = f.recorded_flag;
      telemetry_->publish(telemetry::FrameEvent{telemetry::Origin::Replay, f, true});
    }
    if (was_playing && !replay_->playing()) {
      telemetry_->publish(telemetry::StateChanged{state_locked()});
    }
  }
}

}  // namespace hrc::service
