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

#include <csignal>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hrc_safety/control_plane.hpp"
#include "hrc_safety/errors.hpp"
#include "hrc_safety/http_server.hpp"
#include "hrc_safety/live_loop.hpp"
#include "hrc_safety/recording.hpp"
#include "hrc_safety/replay.hpp"
#include "hrc_safety/safety_monitor.hpp"
#include "hrc_safety/scene_sim.hpp"

namespace fs = std::filesystem;
using namespace hrc;

namespace
{

hrc::service::HttpServer * g_server = nullptr;

void on_signal(int)
{
  if (g_server) {
    g_server->stop();
  }
}

sim::SceneConfig scene_from(const std::string & path)
{
  return path.empty() ? sim::default_scene_config() : sim::load_scene_config(path);
}

int run_serve(
  const std::string & config, int port, const std::string & data_dir, const std::string & static_dir)
{
  service::ControlPlane::Options opts;
  opts.scene = scene_from(config);
  opts.data_dir = data_dir;
  auto plane = std::make_shared<service::ControlPlane>(
    std::move(opts), std::make_shared<telemetry::Broadcaster>());

  service::HttpServer::Options http;
  http.port = port;
  if (!static_dir.empty()) {
    http.static_dir = static_dir;
  }
  service::HttpServer server(plane, http);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.start();
  server.wait();
  server.stop();
  g_server = nullptr;
  return 0;
}

int run_simulate(
  const std::string & config, double duration, std::optional<std::uint64_t> seed,
  const std::string & out, std::int64_t epoch)
{
  sim::SceneConfig cfg = scene_from(config);
  if (seed) {
    cfg.rng_seed = *seed;
  }
  if (!(duration > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "--duration must be positive");
  }
  const auto ticks = static_cast<std::uint64_t>(std::llround(duration * cfg.rate_hz));
  auto recorder = std::make_shared<sim::SessionRecorder>(out, cfg.session_meta(epoch));
  sim::SimulatedClock clock;
  auto loop = sim::run_live(cfg, {recorder}, clock);
  // Offline generation runs every pipeline stage from the first frame.
  loop->post([](sim::SceneRuntime & rt, auto &) {rt.stages() = {true, true, true};});
  loop->run_ticks(ticks);
  recorder->finalize();
  fmt::print("wrote {} samples to {}\n", recorder->count(), out);
  return 0;
}

int run_inspect(const std::string & path)
{
  const recording::SessionRecording rec =
    recording::parse_session_unvalidated(recording::read_file(path));
  const recording::ValidationReport report = recording::validate(rec);

  fmt::print("session:  {}\n", path);
  fmt::print("samples:  {}\n", rec.samples.size());
  fmt::print("duration: {:.3f} s at {} Hz\n", rec.duration(), rec.meta.rate_hz);
  for (const auto & e : report.errors) {
    fmt::print("error:    {}\n", recording::format_issue(e));
  }
  for (const auto & w : report.warnings) {
    fmt::print("warning:  {}\n", recording::format_issue(w));
  }
  if (!report.ok()) {
    return 2;
  }

  const auto periods = safety::segment_periods(
    std::span<const FrameSample>(rec.samples), rec.meta.zone, rec.meta.projector(),
    rec.meta.monitor);
  fmt::print("safety periods: {}\n", periods.size());
  for (const auto & p : periods) {
    fmt::print("  enter {:.3f}  exit {:.3f}  ({:.3f} s)\n", p.t_enter, p.t_exit,
      p.t_exit - p.t_enter);
  }

  replay::RecomputeState state;
  size_t consistent = 0;
  for (size_t i = 0; i < rec.samples.size(); ++i) {
    auto [frame, next] = replay::scene_frame(rec, i, state);
    state = std::move(next);
    consistent += frame.consistency ? 1 : 0;
  }
  fmt::print("flag consistency: {}/{}\n", consistent, rec.samples.size());
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Human-robot collaboration safety monitor"};
  app.require_subcommand(1);

  std::string config;
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error");

  auto * serve = app.add_subcommand("serve", "Run the HTTP control plane and telemetry stream");
  int port = 8080;
  std::string data_dir = "data";
  std::string static_dir;
  serve->add_option("--config", config, "Scene configuration YAML")->check(CLI::ExistingFile);
  serve->add_option("--port", port, "Listen port (env PORT)")->envname("PORT");
  serve->add_option("--data-dir", data_dir, "Session directory (env DATA_DIR)")->envname("DATA_DIR");
  serve->add_option("--static-dir", static_dir, "Serve console assets from this directory")
  ->check(CLI::ExistingDirectory);

  auto * simulate = app.add_subcommand("simulate", "Generate a session file offline");
  double duration = 10.0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::int64_t epoch = 0;
  simulate->add_option("--config", config, "Scene configuration YAML")->check(CLI::ExistingFile);
  simulate->add_option("--duration", duration, "Seconds to simulate");
  simulate->add_option("--seed", seed, "Noise seed (overrides config)");
  simulate->add_option("--record", out, "Output session file")->required();
  simulate->add_option("--epoch", epoch, "created_unix stamp written to the header");

  auto * inspect = app.add_subcommand("inspect", "Validate a session and list its safety periods");
  std::string session;
  inspect->add_option("session", session, "Session file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*serve) {
      return run_serve(config, port, data_dir, static_dir);
    }
    if (*simulate) {
      return run_simulate(config, duration, seed, out, epoch);
    }
    return run_inspect(session);
  } catch (const Error & e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
