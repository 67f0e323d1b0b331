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

#ifndef HRC_SAFETY__SAFETY_MONITOR_HPP_
#define HRC_SAFETY__SAFETY_MONITOR_HPP_

#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "hrc_safety/frame_sample.hpp"
#include "hrc_safety/geometry.hpp"

namespace hrc::safety
{

using geometry::BasePoint;

/// Closed axis-aligned box in the base frame. Boundary points are inside.
class SafetyZone
{
public:
  SafetyZone();
  /// Throws InvalidArgument unless min < max componentwise.
  SafetyZone(const BasePoint & min_corner, const BasePoint & max_corner);

  const BasePoint & min_corner() const {return min_;}
  const BasePoint & max_corner() const {return max_;}
  BasePoint center() const {return 0.5 * (min_ + max_);}

  bool operator==(const SafetyZone & o) const {return min_ == o.min_ && max_ == o.max_;}

private:
  BasePoint min_;
  BasePoint max_;
};

bool contains(const SafetyZone & zone, const BasePoint & p);

enum class ProjectionMode { Depth, Plane };

std::string_view to_string(ProjectionMode mode);
/// Throws InvalidArgument for anything other than "depth" or "plane".
ProjectionMode projection_mode_from_string(std::string_view s);

struct MonitorConfig
{
  int exit_debounce_frames{3};
  int missing_failsafe_frames{10};
  double confidence_min{0.3};
  ProjectionMode projection_mode{ProjectionMode::Depth};

  void validate() const;

  bool operator==(const MonitorConfig &) const = default;
};

/// Everything needed to turn a wrist pixel into a base-frame point.
struct HandProjector
{
  geometry::CameraIntrinsics camera;
  geometry::RigidTransform extrinsic;
  geometry::TablePlane table;
  ProjectionMode mode{ProjectionMode::Depth};
};

/// Back-projects a detection. Depth mode falls back to the table plane when
/// the observation carries no depth. Geometric failures yield nullopt, as
/// does a missing pixel. Confidence is not consulted here.
std::optional<BasePoint> resolve_wrist(const WristObservation & obs, const HandProjector & proj);

enum class Resolution { Inside, Outside, Missing };

enum class FlagEvent { None, Raised, Cleared };

struct SafetyPeriod
{
  double t_enter{0.0};
  double t_exit{0.0};

  bool operator==(const SafetyPeriod &) const = default;
};

struct MonitorState
{
  bool flag{false};
  int consecutive_outside{0};
  int consecutive_missing{0};
  std::optional<BasePoint> last_point;
  std::optional<double> open_period_start;
  /// Timestamp of the first frame of the current outside streak.
  std::optional<double> outside_streak_start;
  std::optional<double> last_t;
  /// True while the flag is held on by missing data rather than an observation.
  bool failsafe{false};

  bool operator==(const MonitorState &) const = default;
};

struct StepResult
{
  MonitorState state;
  std::optional<SafetyPeriod> period;
  FlagEvent event{FlagEvent::None};
  Resolution resolution{Resolution::Missing};
  std::optional<BasePoint> point;
};

/**
 * Debounce/fail-safe transition on an already classified frame.
 *
 * Entry raises the flag on the same frame. The flag clears only after
 * `exit_debounce_frames` consecutive outside frames, and the emitted period
 * ends at the first of those frames. `missing_failsafe_frames` consecutive
 * missing frames force the flag on. A missing frame breaks an outside streak.
 *
 * Throws NonMonotonicTimestamp if t does not exceed the previous step.
 */
StepResult transition(
  const MonitorState & state, double t, Resolution resolution,
  const std::optional<BasePoint> & point, const MonitorConfig & cfg);

/// Classifies `obs` against the zone and applies transition().
StepResult step(
  const MonitorState & state, const SafetyZone & zone, const WristObservation & obs,
  const HandProjector & proj, const MonitorConfig & cfg);

/// Batch fold of step(). A period still open at the end is closed at the
/// final timestamp (dropped if it would have zero length).
std::vector<SafetyPeriod> segment_periods(
  std::span<const WristObservation> observations, const SafetyZone & zone,
  const HandProjector & proj, const MonitorConfig & cfg);

std::vector<SafetyPeriod> segment_periods(
  std::span<const FrameSample> samples, const SafetyZone & zone,
  const HandProjector & proj, const MonitorConfig & cfg);

/// Bounded history of recent wrist positions with strictly increasing times.
class WristTrack
{
public:
  explicit WristTrack(size_t capacity = 8);

  /// Throws NonMonotonicTimestamp. Oldest entries are evicted at capacity.
  void push(double t, const BasePoint & p);
  void clear() {points_.clear();}
  size_t size() const {return points_.size();}
  size_t capacity() const {return capacity_;}
  const std::deque<std::pair<double, BasePoint>> & points() const {return points_;}

private:
  size_t capacity_;
  std::deque<std::pair<double, BasePoint>> points_;
};

/// Constant-velocity extrapolation from the two most recent points.
/// Throws InsufficientHistory with fewer than two points.
BasePoint predict(const WristTrack & track, double horizon);

}  // namespace hrc::safety

#endif  // HRC_SAFETY__SAFETY_MONITOR_HPP_
