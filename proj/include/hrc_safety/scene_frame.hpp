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

#ifndef HRC_SAFETY__SCENE_FRAME_HPP_
#define HRC_SAFETY__SCENE_FRAME_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "hrc_safety/frame_sample.hpp"
#include "hrc_safety/geometry.hpp"

namespace hrc
{

/// Integrated robot + hand state for one frame. Live and replayed frames share
/// this type so consumers render both the same way.
struct SceneFrame
{
  double t{0.0};
  std::uint64_t sample_index{0};
  std::vector<geometry::RigidTransform> link_poses;
  std::optional<geometry::BasePoint> wrist_base;
  bool recorded_flag{false};
  bool recomputed_flag{false};
  /// recorded_flag == recomputed_flag
  bool consistency{true};
  /// Set for the first few frames after a replay seek, while the recomputed
  /// monitor state has not yet caught up with the recording.
  bool warming_up{false};
  bool failsafe{false};
  FrameSample sample;
};

}  // namespace hrc

#endif  // HRC_SAFETY__SCENE_FRAME_HPP_
