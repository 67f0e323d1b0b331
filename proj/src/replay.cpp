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

#include "hrc_safety/replay.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hrc_safety/errors.hpp"
#include "hrc_safety/kinematics.hpp"

namespace hrc::replay
{

namespace
{

void check_index(const recording::SessionRecording & rec, size_t i)
{
  if (i >= rec.samples.size()) {
    throw Error(
            ErrorCode::IndexOutOfRange,
            fmt::format("sample {} requested, recording has {}", i, rec.samples.size()));
  }
}

}  // namespace

std::vector<geometry::RigidTransform> joint_frame(
  const recording::SessionRecording & rec, size_t i)
{
  check_index(rec, i);
  const auto & chain = rec.meta.chain;
  return kinematics::forward_kinematics(
    chain, kinematics::clamp_to_limits(chain, rec.samples[i].joints_rad));
}

std::optional<geometry::BasePoint> hand_frame(const recording::SessionRecording & rec, size_t i)
{
  check_index(rec, i);
  const FrameSample & s = rec.samples[i];
  if (s.wrist_conf < rec.meta.monitor.confidence_min) {
    return std::nullopt;
  }
  return safety::resolve_wrist(s.observation(), rec.meta.projector());
}

std::pair<SceneFrame, RecomputeState> scene_frame(
  const recording::SessionRecording & rec, size_t i, const RecomputeState & state)
{
  check_index(rec, i);
  if (state.next_index && i != *state.next_index) {
    throw Error(
            ErrorCode::NonSequentialReplay,
            fmt::format("expected sample {}, got {}; seek to reset", *state.next_index, i));
  }
  const FrameSample & s = rec.samples[i];

  RecomputeState next = state;
  if (!state.next_index && i != 0 && next.warmup_remaining == 0) {
    next.warmup_remaining = rec.meta.monitor.exit_debounce_frames;
  }

  const safety::StepResult r = safety::step(
    state.monitor, rec.meta.zone, s.observation(), rec.meta.projector(), rec.meta.monitor);

  SceneFrame frame;
  frame.t = s.t;
  frame.sample_index = i;
  frame.link_poses = joint_frame(rec, i);
  frame.wrist_base = r.point;
  frame.recorded_flag = s.safety_flag;
  frame.recomputed_flag = r.state.flag;
  frame.consistency = frame.recorded_flag == frame.recomputed_flag;
  frame.warming_up = next.warmup_remaining > 0;
  frame.failsafe = r.state.failsafe;
  frame.sample = s;

  next.monitor = r.state;
  next.next_index = i + 1;
  if (next.warmup_remaining > 0) {
    --next.warmup_remaining;
  }
  return {std::move(frame), std::move(next)};
}

ReplaySession::ReplaySession(std::shared_ptr<const recording::SessionRecording> rec)
: rec_(std::move(rec))
{
  if (!rec_) {
    throw Error(ErrorCode::InvalidArgument, "replay needs a recording");
  }
}

void ReplaySession::play()
{
  playing_ = !exhausted();
}

void ReplaySession::set_speed(double speed)
{
  if (!(std::isfinite(speed) && speed > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("speed {} must be positive", speed));
  }
  anchor_logical_ = logical_t();
  wall_since_anchor_ = 0.0;
  speed_ = speed;
}

SceneFrame ReplaySession::present(size_t i)
{
  auto [frame, state] = scene_frame(*rec_, i, recompute_);
  recompute_ = std::move(state);
  cursor_ = i;
  next_ = i + 1;
  return frame;
}

std::optional<SceneFrame> ReplaySession::seek(double target)
{
  if (!(target >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("seek target {} must be >= 0", target));
  }
  const auto & samples = rec_->samples;
  if (samples.empty()) {
    return std::nullopt;
  }
  auto it = std::upper_bound(
    samples.begin(), samples.end(), target,
    [](double t, const FrameSample & s) {return t < s.t;});
  const size_t idx = it == samples.begin() ? 0 : static_cast<size_t>(it - samples.begin()) - 1;

  recompute_ = RecomputeState{};
  if (idx > 0) {
    recompute_.warmup_remaining = rec_->meta.monitor.exit_debounce_frames;
  }
  anchor_logical_ = samples[idx].t;
  wall_since_anchor_ = 0.0;
  SceneFrame frame = present(idx);
  if (exhausted()) {
    playing_ = false;
  }
  return frame;
}

std::vector<SceneFrame> ReplaySession::tick(double wall_dt)
{
  if (!(wall_dt >= 0.0) || !std::isfinite(wall_dt)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("wall_dt {} must be >= 0", wall_dt));
  }
  std::vector<SceneFrame> out;
  if (!playing_) {
    return out;
  }
  wall_since_anchor_ += wall_dt;
  const double now = logical_t();
  const auto & samples = rec_->samples;
  while (next_ < samples.size() && samples[next_].t + kClockEpsilon < now) {
    out.push_back(present(next_));
  }
  if (exhausted()) {
    playing_ = false;
  }
  return out;
}

}  // namespace hrc::replay
