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

#include "hrc_safety/telemetry.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

namespace hrc::telemetry
{

using nlohmann::json;

std::string_view to_string(Mode mode)
{
  switch (mode) {
    case Mode::Idle: return "Idle";
    case Mode::LiveRunning: return "LiveRunning";
    case Mode::Replaying: return "Replaying";
  }
  return "Unknown";
}

std::optional<std::string> invariant_violation(const SystemState & s)
{
  if (s.recording && s.mode != Mode::LiveRunning) {
    return "recording outside LiveRunning";
  }
  if (s.recording != s.active_session_path.has_value()) {
    return "recording flag and active session path disagree";
  }
  if (s.pose_on && !s.camera_on) {
    return "pose estimation running without camera";
  }
  if (s.monitor_on && !s.pose_on) {
    return "safety monitoring running without pose estimation";
  }
  if (s.mode != Mode::LiveRunning && (s.camera_on || s.fsm_running)) {
    return "live pipeline stage active outside LiveRunning";
  }
  if ((s.mode == Mode::Replaying) != s.replay.has_value()) {
    return "replay summary present outside Replaying";
  }
  return std::nullopt;
}

namespace
{

std::string_view origin_name(Origin o)
{
  return o == Origin::Live ? "live" : "replay";
}

json point_json(const geometry::BasePoint & p)
{
  return json::array({p.x(), p.y(), p.z()});
}

json sample_json(const FrameSample & s)
{
  json j;
  j["t"] = s.t;
  j["joints_rad"] = s.joints_rad;
  j["wrist_px"] = s.wrist_px ? json::array({s.wrist_px->u, s.wrist_px->v}) : json(nullptr);
  j["wrist_depth_m"] = s.wrist_depth_m ? json(*s.wrist_depth_m) : json(nullptr);
  j["wrist_conf"] = s.wrist_conf;
  j["safety_flag"] = s.safety_flag;
  return j;
}

}  // namespace

json to_json(const SystemState & s)
{
  json j;
  j["mode"] = to_string(s.mode);
  j["fsm_running"] = s.fsm_running;
  j["camera_on"] = s.camera_on;
  j["pose_on"] = s.pose_on;
  j["monitor_on"] = s.monitor_on;
  j["recording"] = s.recording;
  j["active_session_path"] = s.active_session_path ? json(*s.active_session_path) : json(nullptr);
  if (s.replay) {
    const auto & r = *s.replay;
    j["replay"] = {
      {"path", r.path},
      {"duration", r.duration},
      {"sample_count", r.sample_count},
      {"cursor", r.cursor},
      {"next_index", r.next_index},
      {"logical_t", r.logical_t},
      {"speed", r.speed},
      {"playing", r.playing},
    };
  } else {
    j["replay"] = nullptr;
  }
  return j;
}

json to_json(const SceneFrame & f, bool flag_visible)
{
  json j;
  j["t"] = f.t;
  j["sample_index"] = f.sample_index;
  json poses = json::array();
  for (const auto & p : f.link_poses) {
    poses.push_back(
      {{"rotation_rowmajor", p.rotation_rowmajor()}, {"translation_m", point_json(p.translation())}});
  }
  j["link_poses"] = std::move(poses);
  j["wrist_base_m"] = f.wrist_base ? point_json(*f.wrist_base) : json(nullptr);
  if (flag_visible) {
    j["recorded_flag"] = f.recorded_flag;
    j["recomputed_flag"] = f.recomputed_flag;
    j["failsafe"] = f.failsafe;
  } else {
    j["recorded_flag"] = nullptr;
    j["recomputed_flag"] = nullptr;
    j["failsafe"] = nullptr;
  }
  j["consistency"] = f.consistency;
  j["warming_up"] = f.warming_up;
  j["sample"] = sample_json(f.sample);
  if (!flag_visible) {
    j["sample"]["safety_flag"] = nullptr;
  }
  return j;
}

json to_json(const TelemetryEvent & e)
{
  json j = std::visit(
    [](const auto & p) -> json {
      using T = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<T, FrameEvent>) {
        return {{"type", "frame"}, {"origin", origin_name(p.origin)},
          {"frame", to_json(p.frame, p.flag_visible)}};
      } else if constexpr (std::is_same_v<T, FlagChanged>) {
        return {{"type", "flag_changed"}, {"origin", origin_name(p.origin)}, {"t", p.t},
          {"flag", p.flag}, {"failsafe", p.failsafe}};
      } else if constexpr (std::is_same_v<T, PeriodClosed>) {
        return {{"type", "period_closed"}, {"origin", origin_name(p.origin)},
          {"t_enter", p.period.t_enter}, {"t_exit", p.period.t_exit}};
      } else if constexpr (std::is_same_v<T, StateChanged>) {
        return {{"type", "state_changed"}, {"state", to_json(p.state)}};
      } else {
        return {{"type", "warning"}, {"text", p.text}};
      }
    },
    e.payload);
  j["seq"] = e.seq;
  return j;
}

Subscription::Subscription(size_t capacity)
: capacity_(std::max<size_t>(capacity, 1))
{}

void Subscription::push(const TelemetryEvent & e)
{
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (closed_) {
      return;
    }
    if (queue_.size() >= capacity_) {
      last_dropped_seq_ = queue_.front().seq;
      queue_.pop_front();
      ++pending_drops_;
      ++dropped_total_;
    }
    queue_.push_back(e);
  }
  cv_.notify_one();
}

std::optional<TelemetryEvent> Subscription::take_locked()
{
  if (pending_drops_ > 0) {
    TelemetryEvent w{
      last_dropped_seq_,
      Warning{fmt::format("slow consumer: dropped {} telemetry events", pending_drops_)}};
    pending_drops_ = 0;
    return w;
  }
  if (queue_.empty()) {
    return std::nullopt;
  }
  TelemetryEvent e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

std::optional<TelemetryEvent> Subscription::try_pop()
{
  std::lock_guard<std::mutex> lock(mutex_);
  return take_locked();
}

std::optional<TelemetryEvent> Subscription::pop(std::chrono::milliseconds timeout)
{
  std::unique_lock<std::mutex> lock(mutex_);
  cv_.wait_for(
    lock, timeout, [this] {return closed_ || pending_drops_ > 0 || !queue_.empty();});
  return take_locked();
}

void Subscription::close()
{
  {
    std::lock_guard<std::mutex> lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::closed() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return closed_;
}

std::uint64_t Subscription::dropped_total() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return dropped_total_;
}

std::shared_ptr<Subscription> Broadcaster::subscribe(size_t capacity)
{
  auto sub = std::make_shared<Subscription>(capacity);
  std::lock_guard<std::mutex> lock(mutex_);
  subs_.push_back(sub);
  return sub;
}

void Broadcaster::publish(Payload payload)
{
  std::lock_guard<std::mutex> lock(mutex_);
  const TelemetryEvent e{++seq_, std::move(payload)};
  subs_.erase(
    std::remove_if(
      subs_.begin(), subs_.end(), [](const std::weak_ptr<Subscription> & w) {return w.expired();}),
    subs_.end());
  for (const auto & w : subs_) {
    if (auto s = w.lock()) {
      s->push(e);
    }
  }
}

size_t Broadcaster::subscriber_count()
{
  std::lock_guard<std::mutex> lock(mutex_);
  return static_cast<size_t>(
    std::count_if(
      subs_.begin(), subs_.end(), [](const std::weak_ptr<Subscription> & w) {return !w.expired();}));
}

std::uint64_t Broadcaster::published() const
{
  std::lock_guard<std::mutex> lock(mutex_);
  return seq_;
}

void Broadcaster::close_all()
{
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto & w : subs_) {
    if (auto s = w.lock()) {
      s->close();
    }
  }
}

}  // namespace hrc::telemetry
