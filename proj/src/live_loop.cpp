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

#include "hrc_safety/live_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <spdlog/spdlog.h>

namespace hrc::sim
{

SteadyClock::SteadyClock()
: start_(std::chrono::steady_clock::now())
{}

double SteadyClock::now()
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void SteadyClock::sleep_until(double t)
{
  const auto target = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
    std::chrono::duration<double>(t));
  std::this_thread::sleep_until(target);
}

void SimulatedClock::sleep_until(double t)
{
  t_ = std::max(t_, t);
}

SessionRecorder::SessionRecorder(const std::filesystem::path & path, recording::SessionMeta meta)
: meta_(std::move(meta)), writer_(path, meta_), projector_(meta_.projector())
{}

void SessionRecorder::consume(const LiveTick & tick)
{
  if (!base_tick_) {
    base_tick_ = tick.tick;
  }
  FrameSample s = tick.sample;
  s.t = static_cast<double>(tick.tick - *base_tick_) / meta_.rate_hz;
  const safety::StepResult r =
    safety::step(monitor_, meta_.zone, s.observation(), projector_, meta_.monitor);
  monitor_ = r.state;
  s.safety_flag = monitor_.flag;
  writer_.append(s);
}

void SessionRecorder::finalize()
{
  writer_.finalize();
}

void publish_tick(telemetry::Broadcaster & out, const LiveTick & tick, telemetry::Origin origin)
{
  if (tick.monitor_on) {
    if (tick.event != safety::FlagEvent::None) {
      out.publish(
        telemetry::FlagChanged{
          origin, tick.frame.t, tick.event == safety::FlagEvent::Raised, tick.frame.failsafe});
    }
    if (tick.closed_period) {
      out.publish(telemetry::PeriodClosed{origin, *tick.closed_period});
    }
  }
  out.publish(telemetry::FrameEvent{origin, tick.frame, tick.monitor_on});
}

double LoopStats::mean() const
{
  if (compute_s.empty()) {
    return 0.0;
  }
  return std::accumulate(compute_s.begin(), compute_s.end(), 0.0) /
         static_cast<double>(compute_s.size());
}

double LoopStats::percentile(double p) const
{
  if (compute_s.empty()) {
    return 0.0;
  }
  std::vector<double> sorted = compute_s;
  std::sort(sorted.begin(), sorted.end());
  const double rank = std::ceil(p / 100.0 * static_cast<double>(sorted.size()));
  const size_t idx = static_cast<size_t>(std::clamp(rank, 1.0, static_cast<double>(sorted.size())));
  return sorted[idx - 1];
}

LiveLoop::LiveLoop(
  SceneRuntime runtime, std::vector<std::shared_ptr<FrameSink>> sinks, Clock & clock)
: runtime_(std::move(runtime)), sinks_(std::move(sinks)), clock_(clock)
{}

LiveLoop::~LiveLoop()
{
  stop();
}

void LiveLoop::post(Command cmd)
{
  std::lock_guard<std::mutex> lock(cmd_mutex_);
  commands_.push_back(std::move(cmd));
}

void LiveLoop::tick_once()
{
  const double period = runtime_.period();
  if (!epoch_) {
    epoch_ = clock_.now();
  }
  clock_.sleep_until(*epoch_ + static_cast<double>(loop_ticks_) * period);

  std::vector<Command> pending;
  {
    std::lock_guard<std::mutex> lock(cmd_mutex_);
    pending.swap(commands_);
  }
  for (auto & cmd : pending) {
    cmd(runtime_, sinks_);
  }

  const auto c0 = std::chrono::steady_clock::now();
  const LiveTick tick = runtime_.tick();
  for (const auto & sink : sinks_) {
    try {
      sink->consume(tick);
    } catch (const std::exception & e) {
      ++stats_.sink_failures;
      spdlog::warn("SinkFailure at t={:.3f}: {}", tick.frame.t, e.what());
    }
  }
  const double compute = std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
  stats_.compute_s.push_back(compute);
  if (compute > period) {
    ++stats_.overruns;
    spdlog::warn("ClockStall: tick {} took {:.1f} ms (period {:.1f} ms)", tick.tick,
      compute * 1e3, period * 1e3);
  }
  ++loop_ticks_;
}

void LiveLoop::run_ticks(std::uint64_t n)
{
  for (std::uint64_t i = 0; i < n; ++i) {
    tick_once();
  }
}

void LiveLoop::start()
{
  if (running_.exchange(true)) {
    return;
  }
  thread_ = std::thread(
    [this] {
      while (running_) {
        tick_once();
      }
    });
}

void LiveLoop::stop()
{
  running_ = false;
  if (thread_.joinable()) {
    thread_.join();
  }
}

std::unique_ptr<LiveLoop> run_live(
  const SceneConfig & cfg, std::vector<std::shared_ptr<FrameSink>> sinks, Clock & clock)
{
  SceneRuntime runtime(cfg);
  runtime.fsm().start();
  return std::make_unique<LiveLoop>(std::move(runtime), std::move(sinks), clock);
}

}  // namespace hrc::sim
