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

#ifndef HRC_SAFETY__FRAME_SAMPLE_HPP_
#define HRC_SAFETY__FRAME_SAMPLE_HPP_

#include <optional>
#include <vector>

#include "hrc_safety/geometry.hpp"

namespace hrc
{

/// A single wrist keypoint detection on the session clock.
struct WristObservation
{
  double t{0.0};
  std::optional<geometry::PixelPoint> px;
  std::optional<double> depth;
  double confidence{0.0};

  bool operator==(const WristObservation &) const = default;
};

/// One tick of the live loop, as recorded to disk.
struct FrameSample
{
  double t{0.0};
  std::vector<double> joints_rad;
  std::optional<geometry::PixelPoint> wrist_px;
  std::optional<double> wrist_depth_m;
  double wrist_conf{0.0};
  bool safety_flag{false};

  WristObservation observation() const {return {t, wrist_px, wrist_depth_m, wrist_conf};}

  bool operator==(const FrameSample &) const = default;
};

}  // namespace hrc

#endif  // HRC_SAFETY__FRAME_SAMPLE_HPP_
