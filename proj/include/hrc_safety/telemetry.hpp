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

#ifndef HRC_SAFETY__TELEMETRY_HPP_
#define HRC_SAFETY__TELEMETRY_HPP_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hrc_safety/safety_monitor.hpp"
#include "hrc_safety/scene_frame.hpp"

namespace hrc::telemetry
{

enum class Mode { Idle, LiveRunning, Replaying };

std::string_view to_string(Mode mode);

struct ReplaySummary
{
  std::string path;
  double duration{0.0};
  size_t sample_count{0};
  size_t cursor{0};
  size_t next_index{0};
  double logical_t{0.0};
  double speed{1.0};
  bool playing{false};

  bool operator==(const ReplaySummary &) const = default;
};

struct SystemState
{
  Mode mode{Mode::Idle};
  bool fsm_running{false};
  bool camera_on{false};
  bool pose_on{false};
  bool monitor_on{false};
  bool recording{false};
  std::optional<std::string> active_session_path;
  std::optional<ReplaySummary> replay;

  bool operator==(const SystemState &) const = default;
};

/// Describes the first broken SystemState invariant, if any.
std::optional<std::string> invariant_violation(const SystemState & s);

enum class Origin { Live, Replay };

struct FrameEvent
{
  Origin origin{Origin::Live};
  SceneFrame frame;
  /// False while safety monitoring is off; the flag is then omitted.
  bool flag_visible{true};
};

struct FlagChanged
{
  Origin origin{Origin::Live};
  double t{0.0};
  bool flag{false};
  bool failsafe{false};
};

struct PeriodClosed
{
  Origin origin{Origin::Live};
  safety::SafetyPeriod period;
};

struct StateChanged
{
  SystemState state;
};

struct Warning
{
  std::string text;
};

using Payload = std::variant<FrameEvent, FlagChanged, PeriodClosed, StateChanged, Warning>;

struct TelemetryEvent
{
  std::uint64_t seq{0};
  Payload payload;
};

nlohmann::json to_json(const SystemState & s);
nlohmann::json to_json(const SceneFrame & f, bool flag_visible);
nlohmann::json to_json(const TelemetryEvent & e);

class Broadcaster;

/// Per-consumer bounded queue. When full, the oldest event is dropped and the
/// consumer is told how many were lost by a Warning before its next event.
class Subscription
{
public:
  explicit Subscription(size_t capacity);

  std::optional<TelemetryEvent> try_pop();
  std::optional<TelemetryEvent> pop(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;
  std::uint64_t dropped_total() const;
  size_t capacity() const {return capacity_;}

private:
  friend class Broadcaster;
  void push(const TelemetryEvent & e);
  std::optional<TelemetryEvent> take_locked();

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<TelemetryEvent> queue_;
  size_t capacity_;
  std::uint64_t pending_drops_{0};
  std::uint64_t last_dropped_seq_{0};
  std::uint64_t dropped_total_{0};
  bool closed_{false};
};

/// One producer, many consumers. publish never blocks on a consumer.
class Broadcaster
{
public:
  std::shared_ptr<Subscription> subscribe(size_t capacity = 256);
  void publish(Payload payload);
  size_t subscriber_count();
  std::uint64_t published() const;
  /// Closes every subscription, waking blocked consumers.
  void close_all();

private:
  mutable std::mutex mutex_;
  std::vector<std::weak_ptr<Subscription>> subs_;
  std::uint64_t seq_{0};
};

}  // namespace hrc::telemetry

#endif  // HRC_SAFETY__TELEMETRY_HPP_
