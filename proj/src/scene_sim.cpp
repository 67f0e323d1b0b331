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

#include "hrc_safety/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "hrc_safety/errors.hpp"
#include "yaml_fields.hpp"

namespace hrc::sim
{

namespace yf = yaml_fields;

WristScript::WristScript(std::vector<std::pair<double, geometry::BasePoint>> knots)
: knots_(std::move(knots))
{
  if (knots_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "wrist script needs at least one knot");
  }
  for (size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i].first) || !knots_[i].second.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "wrist script knot is not finite");
    }
    if (i > 0 && !(knots_[i].first > knots_[i - 1].first)) {
      throw Error(
              ErrorCode::InvalidArgument,
              fmt::format("wrist script knot {} time does not increase", i));
    }
  }
}

geometry::BasePoint WristScript::position(double t) const
{
  if (knots_.empty()) {
    return geometry::BasePoint::Zero();
  }
  if (t <= knots_.front().first) {
    return knots_.front().second;
  }
  if (t >= knots_.back().first) {
    return knots_.back().second;
  }
  auto hi = std::upper_bound(
    knots_.begin(), knots_.end(), t,
    [](double v, const auto & k) {return v < k.first;});
  auto lo = hi - 1;
  const double a = (t - lo->first) / (hi->first - lo->first);
  return lo->second + a * (hi->second - lo->second);
}

void SceneConfig::validate() const
{
  auto bad = [](const std::string & what) {throw Error(ErrorCode::InvalidArgument, what);};
  if (!(std::isfinite(rate_hz) && rate_hz > 0.0)) {
    bad("rate_hz must be positive");
  }
  chain.validate();
  camera.validate();
  monitor.validate();
  if (!std::isfinite(table.z0)) {
    bad("table z0 must be finite");
  }
  if (!(noise.px_sigma >= 0.0) || !(noise.depth_sigma >= 0.0) ||
    !std::isfinite(noise.px_sigma) || !std::isfinite(noise.depth_sigma))
  {
    bad("noise sigmas must be finite and >= 0");
  }
  if (!(noise.dropout_prob >= 0.0 && noise.dropout_prob <= 1.0)) {
    bad("dropout_prob must lie in [0, 1]");
  }
  if (wrist_script.knots().empty()) {
    bad("wrist script is empty");
  }
  TaskFsm check(waypoints, durations_s);
  if (!waypoints.empty() && waypoints.front().joints_rad.size() != chain.dof()) {
    bad(
      fmt::format(
        "waypoints have {} joints, chain has {}", waypoints.front().joints_rad.size(),
        chain.dof()));
  }
}

recording::SessionMeta SceneConfig::session_meta(std::int64_t created_unix) const
{
  recording::SessionMeta meta;
  meta.rate_hz = rate_hz;
  meta.created_unix = created_unix;
  meta.camera = camera;
  meta.extrinsic = extrinsic;
  meta.zone = zone;
  meta.table = table;
  meta.monitor = monitor;
  meta.chain = chain;
  meta.chain_name = chain_name;
  return meta;
}

SceneConfig default_scene_config()
{
  SceneConfig cfg;
  cfg.rate_hz = 20.0;
  cfg.rng_seed = 42;
  cfg.chain = kinematics::reference_chain();
  cfg.chain_name = kinematics::kReferenceChainName;
  cfg.camera = {525.0, 525.0, 319.5, 239.5, 640.0, 480.0};
  // Camera 2 m above the table centre, optical axis pointing straight down.
  Eigen::Matrix3d down;
  down << 1.0, 0.0, 0.0,
    0.0, -1.0, 0.0,
    0.0, 0.0, -1.0;
  cfg.extrinsic = geometry::RigidTransform(down, {0.5, 0.0, 2.0});
  cfg.zone = safety::SafetyZone({0.3, -0.3, 0.0}, {0.7, 0.3, 0.6});
  cfg.table = {0.0};
  cfg.noise = {2.0, 0.005, 0.02};
  cfg.waypoints = {
    {"home", {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}},
    {"pick", {0.8, 0.4, 0.6, 0.0, 0.5, 0.0}},
    {"place", {-0.8, 0.4, 0.6, 0.0, 0.5, 0.0}},
  };
  cfg.durations_s = {2.0, 3.0, 3.0};
  // Enters the zone's y = -0.3 face at t = 4.0, dwells at the centre for
  // 2 s, leaves through y = +0.3 at t = 7.2.
  cfg.wrist_script = WristScript(
  {
    {0.0, {0.5, -0.8, 0.1}},
    {3.0, {0.5, -0.8, 0.1}},
    {4.6, {0.5, 0.0, 0.1}},
    {6.6, {0.5, 0.0, 0.1}},
    {8.2, {0.5, 0.8, 0.1}},
  });
  return cfg;
}

namespace
{

NoiseModel parse_noise(const YAML::Node & node, const std::string & path)
{
  yf::expect_keys(node, path, {"px_sigma", "depth_sigma", "dropout_prob"});
  return {
    yf::as_double(node["px_sigma"], path + ".px_sigma"),
    yf::as_double(node["depth_sigma"], path + ".depth_sigma"),
    yf::as_double(node["dropout_prob"], path + ".dropout_prob")};
}

void parse_task(const YAML::Node & node, SceneConfig & cfg)
{
  yf::expect_keys(node, "task", {"waypoints", "durations_s"});
  const YAML::Node wps = node["waypoints"];
  if (!wps.IsSequence()) {
    yf::schema_error("task.waypoints", "expected a sequence");
  }
  size_t i = 0;
  for (const auto & w : wps) {
    const std::string p = fmt::format("task.waypoints[{}]", i++);
    yf::expect_keys(w, p, {"name", "joints_rad"});
    cfg.waypoints.push_back(
      {yf::as_string(w["name"], p + ".name"), yf::as_doubles(w["joints_rad"], p + ".joints_rad")});
  }
  cfg.durations_s = yf::as_doubles(node["durations_s"], "task.durations_s");
}

WristScript parse_script(const YAML::Node & node)
{
  if (!node.IsSequence()) {
    yf::schema_error("wrist_script", "expected a sequence of knots");
  }
  std::vector<std::pair<double, geometry::BasePoint>> knots;
  size_t i = 0;
  for (const auto & k : node) {
    const std::string p = fmt::format("wrist_script[{}]", i++);
    yf::expect_keys(k, p, {"t", "position_m"});
    const auto pos = yf::as_fixed<3>(k["position_m"], p + ".position_m");
    knots.emplace_back(yf::as_double(k["t"], p + ".t"), geometry::BasePoint(pos[0], pos[1], pos[2]));
  }
  return WristScript(std::move(knots));
}

}  // namespace

SceneConfig parse_scene_config(std::string_view text)
{
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const std::exception & e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  SceneConfig cfg;
  try {
    yf::expect_keys(
      root, "", {"camera", "extrinsic", "zone", "table", "chain", "task", "wrist_script"},
      {"rate_hz", "rng_seed", "monitor", "noise"});
    if (root["rate_hz"]) {
      cfg.rate_hz = yf::as_double(root["rate_hz"], "rate_hz");
    }
    if (root["rng_seed"]) {
      const auto seed = yf::as_int(root["rng_seed"], "rng_seed");
      if (seed < 0) {
        yf::schema_error("rng_seed", "must be >= 0");
      }
      cfg.rng_seed = static_cast<std::uint64_t>(seed);
    }
    cfg.camera = yf::camera(root["camera"], "camera");
    cfg.extrinsic = yf::transform(root["extrinsic"], "extrinsic");
    cfg.zone = yf::zone(root["zone"], "zone");
    cfg.table = yf::table(root["table"], "table");
    if (root["monitor"]) {
      cfg.monitor = yf::monitor(root["monitor"], "monitor");
    }
    if (root["noise"]) {
      cfg.noise = parse_noise(root["noise"], "noise");
    }
    const YAML::Node chain = root["chain"];
    if (chain.IsScalar()) {
      cfg.chain_name = chain.Scalar();
      cfg.chain = recording::named_chain(*cfg.chain_name);
    } else {
      cfg.chain = yf::chain(chain, "chain");
    }
    parse_task(root["task"], cfg);
    cfg.wrist_script = parse_script(root["wrist_script"]);
    cfg.validate();
  } catch (const YAML::Exception & e) {
    throw Error(ErrorCode::SchemaError, e.what());
  } catch (const Error & e) {
    if (e.code() == ErrorCode::InvalidArgument) {
      throw Error(ErrorCode::ValidationError, e.detail());
    }
    throw;
  }
  return cfg;
}

SceneConfig load_scene_config(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, fmt::format("cannot open '{}'", path.string()));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene_config(buf.str());
}

TaskFsm::TaskFsm(std::vector<Waypoint> waypoints, std::vector<double> durations_s)
: waypoints_(std::move(waypoints)), durations_(std::move(durations_s))
{
  if (waypoints_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "task needs at least one waypoint");
  }
  if (durations_.size() != waypoints_.size()) {
    throw Error(
            ErrorCode::InvalidArgument,
            fmt::format(
              "task has {} waypoints but {} durations", waypoints_.size(), durations_.size()));
  }
  const size_t dof = waypoints_.front().joints_rad.size();
  for (const auto & w : waypoints_) {
    if (w.joints_rad.size() != dof) {
      throw Error(
              ErrorCode::InvalidArgument,
              fmt::format("waypoint '{}' has {} joints, expected {}", w.name,
              w.joints_rad.size(), dof));
    }
  }
  for (double d : durations_) {
    if (!(std::isfinite(d) && d > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "segment durations must be positive");
    }
  }
  current_ = waypoints_.front().joints_rad;
}

void TaskFsm::start()
{
  phase_ = Phase::Running;
}

void TaskFsm::stop()
{
  if (phase_ == Phase::Running) {
    phase_ = Phase::Stopped;
  }
}

double TaskFsm::cycle_duration() const
{
  double total = 0.0;
  for (double d : durations_) {
    total += d;
  }
  return total;
}

void TaskFsm::interpolate()
{
  const auto & a = waypoints_[segment_].joints_rad;
  const auto & b = waypoints_[(segment_ + 1) % waypoints_.size()].joints_rad;
  const double s = progress_ / durations_[segment_];
  for (size_t i = 0; i < current_.size(); ++i) {
    current_[i] = a[i] + s * (b[i] - a[i]);
  }
}

const std::vector<double> & TaskFsm::step(double dt)
{
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("fsm step dt {} must be >= 0", dt));
  }
  if (phase_ != Phase::Running) {
    return current_;
  }
  // Long steps are reduced modulo the cycle before walking segments.
  const double cycle = cycle_duration();
  progress_ += dt >= cycle ? std::fmod(dt, cycle) : dt;
  while (progress_ >= durations_[segment_]) {
    progress_ -= durations_[segment_];
    segment_ = (segment_ + 1) % waypoints_.size();
  }
  interpolate();
  return current_;
}

std::pair<TaskFsm, std::vector<double>> fsm_step(TaskFsm fsm, double dt)
{
  std::vector<double> q = fsm.step(dt);
  return {std::move(fsm), std::move(q)};
}

WristObservation wrist_observe(
  const WristScript & script, double t, const SceneConfig & cfg, Rng & rng)
{
  if (!(t >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("observation time {} must be >= 0", t));
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double drop = unit(rng);
  const double nu = gauss(rng);
  const double nv = gauss(rng);
  const double nd = gauss(rng);
  const double conf = 0.7 + 0.3 * unit(rng);

  WristObservation obs;
  obs.t = t;
  if (drop < cfg.noise.dropout_prob) {
    return obs;
  }
  const geometry::BasePoint p = script.position(t);
  geometry::PixelPoint px;
  try {
    px = geometry::project(p, cfg.camera, cfg.extrinsic);
  } catch (const Error &) {
    return obs;
  }
  px.u += cfg.noise.px_sigma * nu;
  px.v += cfg.noise.px_sigma * nv;
  obs.px = px;
  const double depth = geometry::camera_depth(p, cfg.extrinsic) + cfg.noise.depth_sigma * nd;
  if (depth > 0.0) {
    obs.depth = depth;
  }
  obs.confidence = conf;
  return obs;
}

SceneRuntime::SceneRuntime(SceneConfig cfg)
: cfg_(std::move(cfg)),
  fsm_(cfg_.waypoints, cfg_.durations_s),
  rng_(cfg_.rng_seed)
{
  cfg_.validate();
}

LiveTick SceneRuntime::tick()
{
  const double t = static_cast<double>(ticks_) / cfg_.rate_hz;
  const std::vector<double> q = fsm_.step(ticks_ == 0 ? 0.0 : period());

  WristObservation obs{t, std::nullopt, std::nullopt, 0.0};
  if (stages_.camera && stages_.pose) {
    obs = wrist_observe(cfg_.wrist_script, t, cfg_, rng_);
  }
  const safety::StepResult r = safety::step(monitor_, cfg_.zone, obs, cfg_.projector(), cfg_.monitor);
  monitor_ = r.state;

  LiveTick out;
  out.tick = ticks_;
  out.sample = FrameSample{t, q, obs.px, obs.depth, obs.confidence, monitor_.flag};
  out.event = r.event;
  out.closed_period = r.period;
  out.monitor_on = stages_.monitor;

  SceneFrame & f = out.frame;
  f.t = t;
  f.sample_index = ticks_;
  f.link_poses = kinematics::forward_kinematics(cfg_.chain, kinematics::clamp_to_limits(cfg_.chain, q));
  f.wrist_base = r.point;
  f.recorded_flag = monitor_.flag;
  f.recomputed_flag = monitor_.flag;
  f.consistency = true;
  f.failsafe = monitor_.failsafe;
  f.sample = out.sample;

  ++ticks_;
  return out;
}

}  // namespace hrc::sim
