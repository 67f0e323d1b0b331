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

#ifndef HRC_SAFETY__REPLAY_HPP_
#define HRC_SAFETY__REPLAY_HPP_

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "hrc_safety/recording.hpp"
#include "hrc_safety/safety_monitor.hpp"
#include "hrc_safety/scene_frame.hpp"

namespace hrc::replay
{

/// Link poses for sample i, with out-of-limit angles clamped for display.
/// Throws IndexOutOfRange.
std::vector<geometry::RigidTransform> joint_frame(
  const recording::SessionRecording & rec, size_t i);

/// Back-projected wrist for sample i; nullopt when the pixel is null, the
/// confidence is below the session threshold, or back-projection fails.
/// Throws IndexOutOfRange.
std::optional<geometry::BasePoint> hand_frame(const recording::SessionRecording & rec, size_t i);

/// Flag recomputation state carried across scene_frame calls.
struct RecomputeState
{
  safety::MonitorState monitor;
  /// Index the next call must use; empty for a fresh state.
  std::optional<size_t> next_index;
  int warmup_remaining{0};
};

/// Joint + hand replay plus a monitor step that recomputes the safety flag
/// and checks it against the recorded one.
/// Throws IndexOutOfRange, or NonSequentialReplay if i skips ahead of an
/// active recomputation.
std::pair<SceneFrame, RecomputeState> scene_frame(
  const recording::SessionRecording & rec, size_t i, const RecomputeState & state);

/// Cursor over a recording driven by an injected wall clock.
class ReplaySession
{
public:
  /// Samples are emitted once the logical clock has moved past their time by
  /// more than this.
  static constexpr double kClockEpsilon = 1e-9;

  explicit ReplaySession(std::shared_ptr<const recording::SessionRecording> rec);

  const recording::SessionRecording & recording() const {return *rec_;}
  std::shared_ptr<const recording::SessionRecording> recording_ptr() const {return rec_;}

  /// Most recently presented sample (0 before anything was presented).
  size_t cursor() const {return cursor_;}
  /// Next sample tick() will emit; equals the sample count when exhausted.
  size_t next_index() const {return next_;}
  bool exhausted() const {return next_ >= rec_->samples.size();}
  bool playing() const {return playing_;}
  double speed() const {return speed_;}
  double logical_t() const {return anchor_logical_ + wall_since_anchor_ * speed_;}

  void play();
  void pause() {playing_ = false;}
  /// Throws InvalidArgument unless speed > 0.
  void set_speed(double speed);

  /// Snap-before seek: moves to the last sample with t <= target (clamped to
  /// the final sample), resets flag recomputation with a warmup window and
  /// returns that sample's frame. Throws InvalidArgument for negative targets.
  std::optional<SceneFrame> seek(double target);

  /// Advances the logical clock by wall_dt * speed and returns every sample
  /// it passes, in order. Stops playback at the end. Throws InvalidArgument
  /// for negative wall_dt.
  std::vector<SceneFrame> tick(double wall_dt);

private:
  SceneFrame present(size_t i);

  std::shared_ptr<const recording::SessionRecording> rec_;
  size_t cursor_{0};
  size_t next_{0};
  double speed_{1.0};
  bool playing_{false};
  double anchor_logical_{0.0};
  double wall_since_anchor_{0.0};
  RecomputeState recompute_;
};

}  // namespace hrc::replay

#endif  // HRC_SAFETY__REPLAY_HPP_
