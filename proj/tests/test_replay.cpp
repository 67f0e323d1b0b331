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

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "hrc_safety/kinematics.hpp"
#include "hrc_safety/replay.hpp"
#include "hrc_safety/scene_sim.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hrc;
using namespace hrc::replay;
using recording::SessionRecording;
using test::expect_error;

namespace
{

std::shared_ptr<const SessionRecording> golden()
{
  static const auto rec =
    std::make_shared<const SessionRecording>(recording::load(test::golden_path()));
  return rec;
}

SessionRecording three_samples()
{
  SessionRecording rec;
  rec.meta = sim::default_scene_config().session_meta(0);
  for (double t : {0.0, 0.05, 0.10}) {
    FrameSample s;
    s.t = t;
    s.joints_rad.assign(6, 0.0);
    rec.samples.push_back(s);
  }
  rec.meta.sample_count = 3;
  return rec;
}

std::vector<SceneFrame> play_to_end(ReplaySession & r, double wall_dt, double * wall = nullptr)
{
  std::vector<SceneFrame> out;
  double w = 0.0;
  r.play();
  while (r.playing()) {
    for (auto & f : r.tick(wall_dt)) {
      out.push_back(std::move(f));
    }
    w += wall_dt;
  }
  if (wall) {
    *wall = w;
  }
  return out;
}

}  // namespace

TEST(JointFrame, zero_angles_give_zero_configuration)
{
  const auto rec = three_samples();
  const auto poses = joint_frame(rec, 0);
  const std::vector<double> zero(6, 0.0);
  EXPECT_EQ(poses, kinematics::forward_kinematics(rec.meta.chain, zero));
  // Reference chain stacks its links along z at zero configuration.
  EXPECT_LE((poses.back().translation() - Eigen::Vector3d(0, 0, 1.8)).norm(), 1e-12);
}

TEST(JointFrame, golden_sample_matches_fk_oracle)
{
  const auto rec = golden();
  for (size_t i : {size_t{0}, size_t{57}, size_t{199}}) {
    const auto & q = rec->samples[i].joints_rad;
    // Reference chain: axes z,y,y,z,y,z; 0.3 m links along z; 0.3 m tool.
    const std::vector<oracle::Vec3> axes{{0, 0, 1}, {0, 1, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 0},
      {0, 0, 1}};
    oracle::Mat4 m = oracle::homogeneous({1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0});
    for (size_t j = 0; j < 6; ++j) {
      if (j > 0) {
        m = oracle::matmul(m, oracle::homogeneous({1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0.3}));
      }
      m = oracle::matmul(m, oracle::rot(axes[j], q[j]));
    }
    m = oracle::matmul(m, oracle::homogeneous({1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0.3}));
    const auto tool = joint_frame(*rec, i).back().translation();
    EXPECT_LE((tool - Eigen::Vector3d(m[0][3], m[1][3], m[2][3])).norm(), 1e-12) << i;
  }
}

TEST(JointFrame, index_out_of_range)
{
  const auto rec = three_samples();
  expect_error(ErrorCode::IndexOutOfRange, [&] {joint_frame(rec, 3);});
  expect_error(ErrorCode::IndexOutOfRange, [&] {hand_frame(rec, 3);});
  expect_error(ErrorCode::IndexOutOfRange, [&] {scene_frame(rec, 3, {});});
}

TEST(JointFrame, out_of_limit_angles_are_clamped_for_display)
{
  auto rec = three_samples();
  rec.samples[1].joints_rad[0] = 4.0;
  std::vector<double> clamped(6, 0.0);
  clamped[0] = rec.meta.chain.joints[0].max_rad;
  EXPECT_EQ(joint_frame(rec, 1), kinematics::forward_kinematics(rec.meta.chain, clamped));
}

TEST(HandFrame, examples)
{
  auto rec = three_samples();
  EXPECT_FALSE(hand_frame(rec, 0));

  rec.meta.extrinsic = geometry::RigidTransform::identity();
  rec.samples[1].wrist_px = geometry::PixelPoint{rec.meta.camera.cx, rec.meta.camera.cy};
  rec.samples[1].wrist_depth_m = 1.0;
  rec.samples[1].wrist_conf = 0.9;
  const auto p = hand_frame(rec, 1);
  ASSERT_TRUE(p);
  EXPECT_LE((*p - Eigen::Vector3d(0, 0, 1.0)).norm(), 1e-12);

  rec.samples[1].wrist_conf = 0.1;
  EXPECT_FALSE(hand_frame(rec, 1));
}

TEST(HandFrame, golden_crossing_sample_is_inside_zone)
{
  const auto rec = golden();
  // Script dwells at the zone centre from t=4.6 to t=6.6.
  const size_t i = 112;
  ASSERT_DOUBLE_EQ(rec->samples[i].t, 5.6);
  const auto p = hand_frame(*rec, i);
  ASSERT_TRUE(p);
  EXPECT_TRUE(safety::contains(rec->meta.zone, *p));
  EXPECT_LE((*p - Eigen::Vector3d(0.5, 0.0, 0.1)).norm(), 0.05);
  EXPECT_TRUE(rec->samples[i].safety_flag);
}

TEST(SceneFrame, golden_replay_is_fully_consistent)
{
  const auto rec = golden();
  RecomputeState state;
  for (size_t i = 0; i < rec->samples.size(); ++i) {
    auto [frame, next] = scene_frame(*rec, i, state);
    state = next;
    ASSERT_TRUE(frame.consistency) << i;
    ASSERT_FALSE(frame.warming_up);
    ASSERT_EQ(frame.sample, rec->samples[i]);
    ASSERT_EQ(frame.t, rec->samples[i].t);
  }
}

TEST(SceneFrame, tampered_flag_gives_exactly_one_inconsistency)
{
  auto rec = *golden();
  rec.samples[150].safety_flag = !rec.samples[150].safety_flag;
  RecomputeState state;
  int bad = 0;
  for (size_t i = 0; i < rec.samples.size(); ++i) {
    auto [frame, next] = scene_frame(rec, i, state);
    state = next;
    if (!frame.consistency) {
      ++bad;
      EXPECT_EQ(i, 150u);
    }
  }
  EXPECT_EQ(bad, 1);
}

TEST(SceneFrame, skipping_ahead_is_non_sequential)
{
  const auto rec = golden();
  auto [f0, s1] = scene_frame(*rec, 0, {});
  (void)f0;
  expect_error(ErrorCode::NonSequentialReplay, [&] {scene_frame(*rec, 2, s1);});
  EXPECT_NO_THROW(scene_frame(*rec, 1, s1));
}

TEST(Seek, snap_before_rule)
{
  ReplaySession r(std::make_shared<const SessionRecording>(three_samples()));
  auto f = r.seek(0.07);
  ASSERT_TRUE(f);
  EXPECT_DOUBLE_EQ(f->t, 0.05);
  EXPECT_EQ(r.cursor(), 1u);
  f = r.seek(0.0);
  EXPECT_EQ(r.cursor(), 0u);
  EXPECT_FALSE(f->warming_up);
  expect_error(ErrorCode::InvalidArgument, [&] {r.seek(-0.1);});
}

TEST(Seek, clamps_to_last_sample)
{
  ReplaySession r(golden());
  const auto f = r.seek(1e9);
  ASSERT_TRUE(f);
  EXPECT_EQ(r.cursor(), 199u);
  EXPECT_DOUBLE_EQ(f->t, 9.95);
  EXPECT_TRUE(r.exhausted());
  r.play();
  EXPECT_FALSE(r.playing());
}

TEST(Seek, warmup_after_seek)
{
  ReplaySession r(golden());
  r.seek(5.0);
  r.play();
  std::vector<SceneFrame> frames;
  while (frames.size() < 6) {
    for (auto & f : r.tick(0.05)) {
      frames.push_back(f);
    }
  }
  EXPECT_TRUE(frames[0].warming_up);
  EXPECT_TRUE(frames[1].warming_up);
  EXPECT_FALSE(frames[2].warming_up);
  for (const auto & f : frames) {
    EXPECT_TRUE(f.consistency);
  }
}

TEST(Seek, tick_to_end_visits_samples_after_snap)
{
  const auto rec = golden();
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> target(0.0, 11.0);
  for (int n = 0; n < 50; ++n) {
    ReplaySession r(rec);
    const double t = target(rng);
    const auto snap = r.seek(t);
    ASSERT_TRUE(snap);
    ASSERT_LE(snap->t, t);
    std::vector<double> want;
    for (const auto & s : rec->samples) {
      if (s.t > snap->t) {
        want.push_back(s.t);
      }
    }
    std::vector<double> got;
    for (const auto & f : play_to_end(r, 0.07)) {
      got.push_back(f.t);
    }
    ASSERT_EQ(got, want) << "seek " << t;
  }
}

TEST(Tick, frames_per_tick)
{
  ReplaySession r(golden());
  r.play();
  EXPECT_EQ(r.tick(0.05).size(), 1u);
  EXPECT_EQ(r.tick(0.05).size(), 1u);
  r.set_speed(2.0);
  EXPECT_EQ(r.tick(0.05).size(), 2u);
  r.pause();
  EXPECT_TRUE(r.tick(0.05).empty());
  expect_error(ErrorCode::InvalidArgument, [&] {r.set_speed(0.0);});
  expect_error(ErrorCode::InvalidArgument, [&] {r.tick(-1.0);});
}

TEST(Tick, half_speed_takes_twenty_seconds)
{
  ReplaySession r(golden());
  r.set_speed(0.5);
  double wall = 0.0;
  const auto frames = play_to_end(r, 0.05, &wall);
  EXPECT_EQ(frames.size(), 200u);
  EXPECT_NEAR(wall, 20.0, 0.05);
  EXPECT_FALSE(r.playing());
  EXPECT_TRUE(r.exhausted());
}

TEST(Tick, fidelity_across_speeds_and_tick_sizes)
{
  const auto rec = golden();
  for (double speed : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    for (double dt : {0.01, 0.05, 0.13, 1.0}) {
      ReplaySession r(rec);
      r.set_speed(speed);
      const auto frames = play_to_end(r, dt);
      ASSERT_EQ(frames.size(), rec->samples.size());
      for (size_t i = 0; i < frames.size(); ++i) {
        ASSERT_EQ(frames[i].sample, rec->samples[i]);
        ASSERT_EQ(frames[i].sample_index, i);
        ASSERT_TRUE(frames[i].consistency);
      }
    }
  }
}

TEST(Tick, logical_clock_law)
{
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dt(0.0, 0.08);
  for (double s : {0.5, 1.0, 2.0, 3.7}) {
    ReplaySession r(golden());
    r.set_speed(s);
    r.play();
    const double t0 = r.logical_t();
    double wall = 0.0;
    // 30 ticks stay well short of the end of the 10 s session at every speed.
    for (int k = 0; k < 30; ++k) {
      const double d = dt(rng);
      r.tick(d);
      wall += d;
      ASSERT_EQ(r.logical_t() - t0, wall * s);
    }
  }
}
