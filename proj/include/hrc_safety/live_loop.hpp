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

#ifndef HRC_SAFETY__LIVE_LOOP_HPP_
#define HRC_SAFETY__LIVE_LOOP_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "hrc_safety/recording.hpp"
#include "hrc_safety/scene_sim.hpp"
#include "hrc_safety/telemetry.hpp"

namespace hrc::sim
{

/// Seconds since an arbitrary epoch.
class Clock
{
public:
  virtual ~Clock() = default;
  virtual double now() = 0;
  virtual void sleep_until(double t) = 0;
};

class SteadyClock : public Clock
{
public:
  SteadyClock();
  double now() override;
  void sleep_until(double t) override;

private:
  std::chrono::steady_clock::time_point start_;
};

/// Time only moves when someone sleeps on it or advances it.
class SimulatedClock : public Clock
{
public:
  double now() override {return t_;}
  void sleep_until(double t) override;
  void advance(double dt) {t_ += dt;}

private:
  double t_{0.0};
};

class FrameSink
{
public:
  virtual ~FrameSink() = default;
  virtual void consume(const LiveTick & tick) = 0;
};

/**
 * Records live ticks to a session file. The first consumed tick becomes t=0;
 * later samples are stamped from the tick count so the file stays on the
 * nominal grid. Flags are recomputed by a monitor that starts with the
 * recording, which keeps every file self-consistent under replay.
 */
class SessionRecorder : public FrameSink
{
public:
  SessionRecorder(const std::filesystem::path & path, recording::SessionMeta meta);

  void consume(const LiveTick & tick) override;
  void finalize();

  const std::filesystem::path & path() const {return writer_.path();}
  std::uint64_t count() const {return writer_.count();}

private:
  recording::SessionMeta meta_;
  recording::SessionWriter writer_;
  safety::HandProjector projector_;
  safety::MonitorState monitor_;
  std::optional<std::uint64_t> base_tick_;
};

/// Publishes live ticks as telemetry: FlagChanged and PeriodClosed precede
/// the Frame of the same tick. Flag events are suppressed while monitoring is off.
void publish_tick(telemetry::Broadcaster & out, const LiveTick & tick, telemetry::Origin origin);

class TelemetrySink : public FrameSink
{
public:
  explicit TelemetrySink(std::shared_ptr<telemetry::Broadcaster> out)
  : out_(std::move(out)) {}
  void consume(const LiveTick & tick) override
  {
    publish_tick(*out_, tick, telemetry::Origin::Live);
  }

private:
  std::shared_ptr<telemetry::Broadcaster> out_;
};

struct LoopStats
{
  std::vector<double> compute_s;
  std::uint64_t overruns{0};
  std::uint64_t sink_failures{0};

  double mean() const;
  /// Nearest-rank percentile, p in [0, 100].
  double percentile(double p) const;
};

/**
 * Fixed-rate live loop around a SceneRuntime. Each tick waits for its
 * deadline on the injected clock, applies queued commands, advances the
 * scene and fans the result out to every sink. Sink exceptions are logged
 * and counted; a tick whose compute exceeds the frame period logs a stall.
 */
class LiveLoop
{
public:
  using Command = std::function<void(SceneRuntime &, std::vector<std::shared_ptr<FrameSink>> &)>;

  LiveLoop(SceneRuntime runtime, std::vector<std::shared_ptr<FrameSink>> sinks, Clock & clock);
  ~LiveLoop();

  LiveLoop(const LiveLoop &) = delete;
  LiveLoop & operator=(const LiveLoop &) = delete;

  /// Queued and applied at the start of the next tick.
  void post(Command cmd);

  /// Runs n ticks on the calling thread.
  void run_ticks(std::uint64_t n);
  /// Runs on a background thread until stop().
  void start();
  void stop();
  bool running() const {return running_;}

  const LoopStats & stats() const {return stats_;}
  const SceneRuntime & runtime() const {return runtime_;}

private:
  void tick_once();

  SceneRuntime runtime_;
  std::vector<std::shared_ptr<FrameSink>> sinks_;
  Clock & clock_;
  std::mutex cmd_mutex_;
  std::vector<Command> commands_;
  LoopStats stats_;
  std::optional<double> epoch_;
  std::uint64_t loop_ticks_{0};
  std::atomic<bool> running_{false};
  std::thread thread_;
};

/// Builds a LiveLoop for the scene (the FSM is started immediately).
std::unique_ptr<LiveLoop> run_live(
  const SceneConfig & cfg, std::vector<std::shared_ptr<FrameSink>> sinks, Clock & clock);

}  // namespace hrc::sim

#endif  // HRC_SAFETY__LIVE_LOOP_HPP_
