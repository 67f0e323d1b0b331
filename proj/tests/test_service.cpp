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

#include <gtest/gtest.h>

#include <memory>
#include <random>
#include <variant>
#include <vector>

#include "api_model.hpp"
#include "hrc_safety/control_plane.hpp"
#include "hrc_safety/recording.hpp"
#include "support.hpp"

using namespace hrc;
using namespace hrc::service;
using namespace hrc::telemetry;
using test::expect_error;

namespace
{

class ControlPlaneTest : public ::testing::Test
{
protected:
  ControlPlaneTest()
  {
    telemetry_ = std::make_shared<Broadcaster>();
    plane_ = make_plane();
  }

  std::unique_ptr<ControlPlane> make_plane()
  {
    ControlPlane::Options o;
    o.scene = sim::default_scene_config();
    o.data_dir = dir_.path();
    o.unix_now = [this] {return now_;};
    return std::make_unique<ControlPlane>(std::move(o), telemetry_);
  }

  void all_stages_on()
  {
    plane_->start_running();
    plane_->start_fsm();
    plane_->start_camera();
    plane_->start_pose_estimate();
    plane_->start_safety_monitoring();
  }

  void advance_seconds(double s, double dt = 0.05)
  {
    for (int i = 0, n = static_cast<int>(std::lround(s / dt)); i < n; ++i) {
      plane_->advance(dt);
    }
  }

  std::filesystem::path copy_golden(const std::string & name)
  {
    const auto dst = dir_ / name;
    std::filesystem::copy_file(test::golden_path(), dst);
    return dst;
  }

  static std::vector<TelemetryEvent> drain(Subscription & sub)
  {
    std::vector<TelemetryEvent> out;
    while (auto e = sub.try_pop()) {
      out.push_back(std::move(*e));
    }
    return out;
  }

  test::TempDir dir_;
  std::int64_t now_{1700000000};
  std::shared_ptr<Broadcaster> telemetry_;
  std::unique_ptr<ControlPlane> plane_;
};

}  // namespace

TEST_F(ControlPlaneTest, fresh_boot_is_idle)
{
  const auto s = plane_->get_state();
  EXPECT_EQ(s.mode, Mode::Idle);
  EXPECT_FALSE(s.fsm_running || s.camera_on || s.pose_on || s.monitor_on || s.recording);
  EXPECT_FALSE(s.active_session_path);
  EXPECT_FALSE(s.replay);
  EXPECT_FALSE(invariant_violation(s));
}

TEST_F(ControlPlaneTest, start_running_and_idempotency)
{
  auto r = plane_->start_running();
  EXPECT_TRUE(r.changed);
  EXPECT_EQ(r.state.mode, Mode::LiveRunning);
  r = plane_->start_running();
  EXPECT_FALSE(r.changed);
  EXPECT_EQ(r.state.mode, Mode::LiveRunning);
  EXPECT_TRUE(plane_->start_fsm().changed);
  EXPECT_FALSE(plane_->start_fsm().changed);
  EXPECT_TRUE(plane_->start_camera().changed);
  EXPECT_FALSE(plane_->start_camera().changed);
  EXPECT_TRUE(plane_->stop_fsm().changed);
  EXPECT_FALSE(plane_->stop_fsm().changed);
}

TEST_F(ControlPlaneTest, fsm_requires_live_running)
{
  expect_error(ErrorCode::InvalidTransition, [&] {plane_->start_fsm();});
  copy_golden("session-1.yaml");
  plane_->replay_open(std::nullopt);
  expect_error(ErrorCode::InvalidTransition, [&] {plane_->start_fsm();});
  expect_error(ErrorCode::InvalidTransition, [&] {plane_->stop_fsm();});
  expect_error(ErrorCode::InvalidTransition, [&] {plane_->start_running();});
  expect_error(ErrorCode::InvalidTransition, [&] {plane_->start_camera();});
}

TEST_F(ControlPlaneTest, stage_dependencies)
{
  plane_->start_running();
  expect_error(ErrorCode::DependencyNotRunning, [&] {plane_->start_pose_estimate();});
  expect_error(ErrorCode::DependencyNotRunning, [&] {plane_->start_safety_monitoring();});
  plane_->start_camera();
  expect_error(ErrorCode::DependencyNotRunning, [&] {plane_->start_safety_monitoring();});
  plane_->start_pose_estimate();
  EXPECT_TRUE(plane_->start_safety_monitoring().state.monitor_on);
}

TEST_F(ControlPlaneTest, monitor_off_streams_wrist_without_flag)
{
  auto sub = telemetry_->subscribe(4096);
  plane_->start_running();
  plane_->start_fsm();
  plane_->start_camera();
  plane_->start_pose_estimate();
  advance_seconds(6.0);
  int frames = 0, with_wrist = 0;
  for (const auto & e : drain(*sub)) {
    ASSERT_FALSE(std::holds_alternative<FlagChanged>(e.payload));
    if (const auto * f = std::get_if<FrameEvent>(&e.payload)) {
      ++frames;
      EXPECT_FALSE(f->flag_visible);
      const auto j = to_json(e);
      EXPECT_TRUE(j["frame"]["recorded_flag"].is_null());
      EXPECT_TRUE(j["frame"]["sample"]["safety_flag"].is_null());
      with_wrist += f->frame.wrist_base ? 1 : 0;
    }
  }
  EXPECT_EQ(frames, 120);
  EXPECT_GT(with_wrist, 100);

  plane_->start_safety_monitoring();
  advance_seconds(1.0);
  for (const auto & e : drain(*sub)) {
    if (const auto * f = std::get_if<FrameEvent>(&e.payload)) {
      EXPECT_TRUE(f->flag_visible);
      EXPECT_TRUE(to_json(e)["frame"]["recorded_flag"].is_boolean());
    }
  }
}

TEST_F(ControlPlaneTest, camera_off_streams_no_wrist)
{
  auto sub = telemetry_->subscribe(4096);
  plane_->start_running();
  advance_seconds(1.0);
  for (const auto & e : drain(*sub)) {
    if (const auto * f = std::get_if<FrameEvent>(&e.payload)) {
      EXPECT_FALSE(f->frame.wrist_base);
      EXPECT_FALSE(f->frame.sample.wrist_px);
    }
  }
}

TEST_F(ControlPlaneTest, recording_five_seconds)
{
  all_stages_on();
  advance_seconds(1.0);
  const auto on = plane_->set_recording(true);
  ASSERT_TRUE(on.path);
  EXPECT_TRUE(on.state.recording);
  EXPECT_EQ(on.state.active_session_path, on.path);
  EXPECT_EQ(std::filesystem::path(*on.path).filename(), "session-1700000000.yaml");
  advance_seconds(5.0);
  const auto off = plane_->set_recording(false);
  EXPECT_EQ(off.path, on.path);
  EXPECT_FALSE(off.state.recording);
  const auto rec = recording::load(*off.path);
  EXPECT_GE(rec.samples.size(), 99u);
  EXPECT_LE(rec.samples.size(), 101u);
  EXPECT_EQ(rec.samples.front().t, 0.0);
  EXPECT_FALSE(plane_->set_recording(false).changed);
}

TEST_F(ControlPlaneTest, recording_requires_live_running)
{
  expect_error(ErrorCode::InvalidTransition, [&] {plane_->set_recording(true);});
  copy_golden("session-5.yaml");
  plane_->replay_open(std::nullopt);
  expect_error(ErrorCode::InvalidTransition, [&] {plane_->set_recording(true);});
  EXPECT_FALSE(plane_->set_recording(false).changed);
}

TEST_F(ControlPlaneTest, stop_running_finalizes_recording)
{
  all_stages_on();
  plane_->set_recording(true);
  advance_seconds(1.0);
  const auto r = plane_->stop_running();
  EXPECT_EQ(r.state.mode, Mode::Idle);
  EXPECT_FALSE(r.state.camera_on);
  ASSERT_TRUE(r.path);
  EXPECT_EQ(recording::load(*r.path).samples.size(), 20u);
}

TEST_F(ControlPlaneTest, filename_collisions_get_suffix)
{
  all_stages_on();
  const auto a = plane_->set_recording(true).path;
  plane_->set_recording(false);
  const auto b = plane_->set_recording(true).path;
  plane_->set_recording(false);
  ASSERT_TRUE(a && b);
  EXPECT_NE(*a, *b);
  EXPECT_EQ(std::filesystem::path(*b).filename(), "session-1700000000-1.yaml");
}

TEST_F(ControlPlaneTest, replay_defaults_to_last_recording)
{
  all_stages_on();
  now_ = 100;
  plane_->set_recording(true);
  advance_seconds(1.0);
  plane_->set_recording(false);
  now_ = 50;
  const auto last = plane_->set_recording(true).path;
  advance_seconds(0.5);
  plane_->set_recording(false);
  plane_->stop_running();

  auto r = plane_->replay_open(std::nullopt);
  EXPECT_EQ(r.path, last);
  EXPECT_EQ(r.state.mode, Mode::Replaying);
  ASSERT_TRUE(r.state.replay);
  EXPECT_EQ(r.state.replay->sample_count, 10u);
  EXPECT_TRUE(r.state.replay->playing);

  // A fresh process has no memory of its own recordings and picks the newest name.
  plane_->replay_close();
  plane_ = make_plane();
  r = plane_->replay_open(std::nullopt);
  EXPECT_EQ(std::filesystem::path(*r.path).filename(), "session-100.yaml");
}

TEST_F(ControlPlaneTest, replay_errors_are_typed)
{
  expect_error(ErrorCode::NotFound, [&] {plane_->replay_open(std::nullopt);});
  expect_error(ErrorCode::NotFound, [&] {plane_->replay_open("nope.yaml");});
  test::spit(dir_ / "broken.yaml", "meta: [");
  expect_error(ErrorCode::ParseError, [&] {plane_->replay_open("broken.yaml");});
  auto text = test::slurp(test::golden_path());
  text.replace(text.find("version: 1"), 10, "version: 2");
  test::spit(dir_ / "v2.yaml", text);
  expect_error(ErrorCode::SchemaError, [&] {plane_->replay_open(dir_ / "v2.yaml");});
  text = test::slurp(test::golden_path());
  text.replace(text.find("sample_count: 200"), 17, "sample_count: 300");
  test::spit(dir_ / "count.yaml", text);
  expect_error(ErrorCode::ValidationError, [&] {plane_->replay_open("count.yaml");});
  EXPECT_EQ(plane_->get_state().mode, Mode::Idle);

  plane_->start_running();
  copy_golden("session-1.yaml");
  expect_error(ErrorCode::InvalidTransition, [&] {plane_->replay_open(std::nullopt);});
  plane_->stop_running();
  expect_error(ErrorCode::InvalidTransition, [&] {plane_->replay_control(ReplayAction::Play);});
  plane_->replay_open(std::nullopt);
  expect_error(
    ErrorCode::InvalidArgument, [&] {plane_->replay_control(ReplayAction::Speed, -1.0);});
  expect_error(ErrorCode::InvalidArgument, [&] {plane_->replay_control(ReplayAction::Seek);});
  expect_error(ErrorCode::InvalidArgument, [] {replay_action_from_string("rewind");});
}

TEST_F(ControlPlaneTest, replay_at_double_speed_takes_five_seconds)
{
  copy_golden("session-1.yaml");
  auto sub = telemetry_->subscribe(4096);
  plane_->replay_open(std::nullopt);
  plane_->replay_control(ReplayAction::Speed, 2.0);
  double wall = 0.0;
  while (plane_->get_state().replay->playing) {
    plane_->advance(0.05);
    wall += 0.05;
    ASSERT_LT(wall, 30.0);
  }
  EXPECT_NEAR(wall, 5.0, 0.05);
  std::vector<double> ts;
  bool saw_end_state = false;
  for (const auto & e : drain(*sub)) {
    if (const auto * f = std::get_if<FrameEvent>(&e.payload)) {
      EXPECT_EQ(f->origin, Origin::Replay);
      EXPECT_EQ(to_json(e)["origin"], "replay");
      ts.push_back(f->frame.t);
    }
    if (const auto * s = std::get_if<StateChanged>(&e.payload)) {
      saw_end_state = s->state.replay && !s->state.replay->playing;
    }
  }
  ASSERT_EQ(ts.size(), 200u);
  EXPECT_TRUE(std::is_sorted(ts.begin(), ts.end()));
  EXPECT_TRUE(saw_end_state);
}

TEST_F(ControlPlaneTest, seek_presents_snap_before_sample)
{
  copy_golden("session-1.yaml");
  plane_->replay_open(std::nullopt);
  plane_->replay_control(ReplayAction::Pause);
  auto sub = telemetry_->subscribe(64);
  const auto r = plane_->replay_control(ReplayAction::Seek, 0.07);
  ASSERT_TRUE(r.frame);
  EXPECT_DOUBLE_EQ(r.frame->t, 0.05);
  EXPECT_EQ(r.state.replay->cursor, 1u);
  const auto events = drain(*sub);
  ASSERT_FALSE(events.empty());
  const auto * f = std::get_if<FrameEvent>(&events.front().payload);
  ASSERT_TRUE(f);
  EXPECT_DOUBLE_EQ(f->frame.t, 0.05);
}

TEST_F(ControlPlaneTest, flag_change_precedes_frame)
{
  all_stages_on();
  auto sub = telemetry_->subscribe(4096);
  advance_seconds(8.0);
  const auto events = drain(*sub);
  int rises = 0;
  for (size_t i = 0; i < events.size(); ++i) {
    if (const auto * fc = std::get_if<FlagChanged>(&events[i].payload)) {
      ASSERT_LT(i + 1, events.size());
      size_t j = i + 1;
      while (j < events.size() && !std::holds_alternative<FrameEvent>(events[j].payload)) {
        ++j;
      }
      ASSERT_LT(j, events.size());
      const auto & frame = std::get<FrameEvent>(events[j].payload).frame;
      EXPECT_EQ(frame.t, fc->t);
      EXPECT_EQ(frame.recorded_flag, fc->flag);
      rises += fc->flag ? 1 : 0;
    }
    if (i > 0) {
      EXPECT_EQ(events[i].seq, events[i - 1].seq + 1);
    }
  }
  EXPECT_GE(rises, 1);
}

TEST_F(ControlPlaneTest, slow_subscriber_gets_warning_and_loop_keeps_pace)
{
  all_stages_on();
  auto slow = telemetry_->subscribe(8);
  auto fast = telemetry_->subscribe(4096);
  advance_seconds(5.0);
  // The live loop produced every frame regardless of the stalled consumer.
  int frames = 0;
  for (const auto & e : drain(*fast)) {
    frames += std::holds_alternative<FrameEvent>(e.payload) ? 1 : 0;
  }
  EXPECT_EQ(frames, 100);
  const auto first = slow->try_pop();
  ASSERT_TRUE(first);
  const auto * w = std::get_if<Warning>(&first->payload);
  ASSERT_TRUE(w);
  EXPECT_NE(w->text.find("dropped"), std::string::npos);
  EXPECT_GT(slow->dropped_total(), 0u);
  std::uint64_t prev = first->seq;
  while (auto e = slow->try_pop()) {
    EXPECT_GT(e->seq, prev);
    prev = e->seq;
  }
}

TEST_F(ControlPlaneTest, clock_stall_skips_backlog)
{
  auto sub = telemetry_->subscribe(4096);
  plane_->start_running();
  plane_->advance(3600.0);
  bool warned = false;
  int frames = 0;
  for (const auto & e : drain(*sub)) {
    if (const auto * w = std::get_if<Warning>(&e.payload)) {
      warned = warned || w->text.find("ClockStall") != std::string::npos;
    }
    frames += std::holds_alternative<FrameEvent>(e.payload) ? 1 : 0;
  }
  EXPECT_TRUE(warned);
  EXPECT_EQ(frames, 200);
  expect_error(ErrorCode::InvalidArgument, [&] {plane_->advance(-0.1);});
}

TEST_F(ControlPlaneTest, list_sessions_reports_duration_and_periods)
{
  copy_golden("session-42.yaml");
  test::spit(dir_ / "session-43.yaml", "garbage: [");
  test::spit(dir_ / "notes.txt", "ignored");
  const auto list = plane_->list_sessions();
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0].created_unix, 42);
  EXPECT_DOUBLE_EQ(list[0].duration, 9.95);
  EXPECT_EQ(list[0].sample_count, 200u);
  EXPECT_EQ(list[0].period_count, 1u);
  EXPECT_FALSE(list[0].error);
  EXPECT_TRUE(list[1].error);
}

TEST_F(ControlPlaneTest, every_change_publishes_state)
{
  auto sub = telemetry_->subscribe(64);
  plane_->start_running();
  plane_->start_running();
  plane_->start_camera();
  int changes = 0;
  for (const auto & e : drain(*sub)) {
    changes += std::holds_alternative<StateChanged>(e.payload) ? 1 : 0;
  }
  EXPECT_EQ(changes, 2);
}

TEST_F(ControlPlaneTest, random_call_sequences_keep_invariants)
{
  const auto golden = copy_golden("golden.yaml");
  const auto garbage = dir_ / "garbage.yaml";
  test::spit(garbage, "meta: {version: 1}\nsamples: 7\n");
  std::mt19937_64 rng(40);
  for (int n = 0; n < 200; ++n) {
    test::TempDir data;
    ControlPlane::Options o;
    o.scene = sim::default_scene_config();
    o.data_dir = data.path();
    std::int64_t clock = 0;
    o.unix_now = [&clock] {return clock++;};
    ControlPlane plane(std::move(o), telemetry_);
    const auto out = api_model::run_sequence(rng, plane, golden, garbage, 40);
    ASSERT_TRUE(out.failure.empty()) << "sequence " << n << ": " << out.failure;
  }
}
