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

#include "hrc_safety/safety_monitor.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "hrc_safety/errors.hpp"

namespace hrc::safety
{

SafetyZone::SafetyZone()
: min_(BasePoint::Zero()), max_(BasePoint::Ones())
{}

SafetyZone::SafetyZone(const BasePoint & min_corner, const BasePoint & max_corner)
: min_(min_corner), max_(max_corner)
{
  if (!min_.allFinite() || !max_.allFinite() || !(min_.array() < max_.array()).all()) {
    throw Error(ErrorCode::InvalidArgument, "safety zone requires min < max componentwise");
  }
}

bool contains(const SafetyZone & zone, const BasePoint & p)
{
  return (p.array() >= zone.min_corner().array()).all() &&
         (p.array() <= zone.max_corner().array()).all();
}

std::string_view to_string(ProjectionMode mode)
{
  return mode == ProjectionMode::Depth ? "depth" : "plane";
}

ProjectionMode projection_mode_from_string(std::string_view s)
{
  if (s == "depth") {
    return ProjectionMode::Depth;
  }
  if (s == "plane") {
    return ProjectionMode::Plane;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown projection mode '{}'", s));
}

void MonitorConfig::validate() const
{
  if (exit_debounce_frames < 1 || missing_failsafe_frames < 1) {
    throw Error(ErrorCode::InvalidArgument, "monitor frame thresholds must be >= 1");
  }
  if (!(confidence_min >= 0.0 && confidence_min <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence_min must lie in [0, 1]");
  }
}

std::optional<BasePoint> resolve_wrist(const WristObservation & obs, const HandProjector & proj)
{
  if (!obs.px) {
    return std::nullopt;
  }
  try {
    if (proj.mode == ProjectionMode::Depth && obs.depth) {
      return geometry::back_project_depth(*obs.px, *obs.depth, proj.camera, proj.extrinsic);
    }
    return geometry::back_project_plane(*obs.px, proj.table, proj.camera, proj.extrinsic);
  } catch (const Error &) {
    return std::nullopt;
  }
}

StepResult transition(
  const MonitorState & state, double t, Resolution resolution,
  const std::optional<BasePoint> & point, const MonitorConfig & cfg)
{
  if (!std::isfinite(t) || (state.last_t && !(t > *state.last_t))) {
    throw Error(
            ErrorCode::NonMonotonicTimestamp,
            fmt::format(
              "observation at t={} does not follow t={}", t, state.last_t.value_or(-1.0)));
  }

  StepResult out;
  out.state = state;
  out.resolution = resolution;
  out.point = point;
  MonitorState & s = out.state;
  s.last_t = t;

  switch (resolution) {
    case Resolution::Inside:
      s.consecutive_outside = 0;
      s.consecutive_missing = 0;
      s.outside_streak_start.reset();
      s.failsafe = false;
      s.last_point = point;
      if (!s.flag) {
        s.flag = true;
        s.open_period_start = t;
        out.event = FlagEvent::Raised;
      }
      break;

    case Resolution::Outside:
      s.consecutive_missing = 0;
      s.failsafe = false;
      s.last_point = point;
      if (s.consecutive_outside == 0) {
        s.outside_streak_start = t;
      }
      ++s.consecutive_outside;
      if (s.flag && s.consecutive_outside >= cfg.exit_debounce_frames) {
        out.period = SafetyPeriod{*s.open_period_start, *s.outside_streak_start};
        s.flag = false;
        s.open_period_start.reset();
        out.event = FlagEvent::Cleared;
      }
      break;

    case Resolution::Missing:
      s.consecutive_outside = 0;
      s.outside_streak_start.reset();
      ++s.consecutive_missing;
      if (s.consecutive_missing >= cfg.missing_failsafe_frames) {
        s.failsafe = true;
        if (!s.flag) {
          s.flag = true;
          s.open_period_start = t;
          out.event = FlagEvent::Raised;
        }
      }
      break;
  }
  return out;
}

StepResult step(
  const MonitorState & state, const SafetyZone & zone, const WristObservation & obs,
  const HandProjector & proj, const MonitorConfig & cfg)
{
  std::optional<BasePoint> point;
  if (obs.confidence >= cfg.confidence_min) {
    point = resolve_wrist(obs, proj);
  }
  Resolution r = Resolution::Missing;
  if (point) {
    r = contains(zone, *point) ? Resolution::Inside : Resolution::Outside;
  }
  return transition(state, obs.t, r, point, cfg);
}

namespace
{

template<typename Range, typename ToObs>
std::vector<SafetyPeriod> fold_periods(
  const Range & items, ToObs to_obs, const SafetyZone & zone, const HandProjector & proj,
  const MonitorConfig & cfg)
{
  std::vector<SafetyPeriod> periods;
  MonitorState state;
  for (const auto & item : items) {
    StepResult r = step(state, zone, to_obs(item), proj, cfg);
    if (r.period) {
      periods.push_back(*r.period);
    }
    state = std::move(r.state);
  }
  if (state.flag && state.last_t && *state.open_period_start < *state.last_t) {
    periods.push_back({*state.open_period_start, *state.last_t});
  }
  return periods;
}

}  // namespace

std::vector<SafetyPeriod> segment_periods(
  std::span<const WristObservation> observations, const SafetyZone & zone,
  const HandProjector & proj, const MonitorConfig & cfg)
{
  return fold_periods(
    observations, [](const WristObservation & o) -> const WristObservation & {return o;},
    zone, proj, cfg);
}

std::vector<SafetyPeriod> segment_periods(
  std::span<const FrameSample> samples, const SafetyZone & zone,
  const HandProjector & proj, const MonitorConfig & cfg)
{
  return fold_periods(
    samples, [](const FrameSample & s) {return s.observation();}, zone, proj, cfg);
}

WristTrack::WristTrack(size_t capacity)
: capacity_(capacity)
{
  if (capacity_ < 2) {
    throw Error(ErrorCode::InvalidArgument, "wrist track capacity must be at least 2");
  }
}

void WristTrack::push(double t, const BasePoint & p)
{
  if (!points_.empty() && !(t > points_.back().first)) {
    throw Error(
            ErrorCode::NonMonotonicTimestamp,
            fmt::format("track point at t={} does not follow t={}", t, points_.back().first));
  }
  if (points_.size() == capacity_) {
    points_.pop_front();
  }
  points_.emplace_back(t, p);
}

BasePoint predict(const WristTrack & track, double horizon)
{
  if (track.size() < 2) {
    throw Error(
            ErrorCode::InsufficientHistory,
            fmt::format("prediction needs 2 points, track has {}", track.size()));
  }
  const auto & pts = track.points();
  const auto & [t_last, p_last] = pts[pts.size() - 1];
  const auto & [t_prev, p_prev] = pts[pts.size() - 2];
  const BasePoint velocity = (p_last - p_prev) / (t_last - t_prev);
  return p_last + velocity * horizon;
}

}  // namespace hrc::safety
