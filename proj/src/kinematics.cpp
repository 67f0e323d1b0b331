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

#include "hrc_safety/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "hrc_safety/errors.hpp"

namespace hrc::kinematics
{

void KinematicChain::validate() const
{
  if (joints.empty()) {
    throw Error(ErrorCode::InvalidArgument, "kinematic chain has no joints");
  }
  std::set<std::string> names;
  for (const auto & j : joints) {
    if (!names.insert(j.name).second) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("duplicate joint name '{}'", j.name));
    }
    if (!j.axis.allFinite() || std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw Error(
              ErrorCode::InvalidArgument, fmt::format("joint '{}' axis is not unit length", j.name));
    }
    if (!(j.min_rad < j.max_rad)) {
      throw Error(
              ErrorCode::InvalidArgument, fmt::format("joint '{}' has min >= max limit", j.name));
    }
  }
}

double KinematicChain::total_length() const
{
  double len = tool_offset.translation().norm();
  for (const auto & j : joints) {
    len += j.origin.translation().norm();
  }
  return len;
}

KinematicChain reference_chain()
{
  constexpr double kLink = 0.3;
  constexpr double kLimit = 3.14159265358979;
  const Eigen::Vector3d up(0.0, 0.0, kLink);
  const char * axes = "zyyzyz";

  KinematicChain chain;
  chain.base_name = "base_link";
  for (int i = 0; i < 6; ++i) {
    JointSpec j;
    j.name = fmt::format("joint_{}", i + 1);
    j.axis = axes[i] == 'z' ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitY();
    j.origin = i == 0 ? RigidTransform::identity() : RigidTransform::from_translation(up);
    j.min_rad = -kLimit;
    j.max_rad = kLimit;
    chain.joints.push_back(j);
  }
  chain.tool_offset = RigidTransform::from_translation(up);
  return chain;
}

std::vector<RigidTransform> forward_kinematics(
  const KinematicChain & chain, std::span<const double> q)
{
  if (q.size() != chain.dof()) {
    throw Error(
            ErrorCode::LengthMismatch,
            fmt::format("joint state has {} angles, chain has {} joints", q.size(), chain.dof()));
  }
  std::vector<RigidTransform> poses;
  poses.reserve(chain.dof() + 1);
  RigidTransform pose;
  for (size_t i = 0; i < chain.dof(); ++i) {
    const auto & j = chain.joints[i];
    const Eigen::Matrix3d turn = Eigen::AngleAxisd(q[i], j.axis).toRotationMatrix();
    pose = compose(compose(pose, j.origin), RigidTransform(turn, Eigen::Vector3d::Zero()));
    poses.push_back(pose);
  }
  poses.push_back(compose(pose, chain.tool_offset));
  return poses;
}

geometry::BasePoint tool_position(const KinematicChain & chain, std::span<const double> q)
{
  return forward_kinematics(chain, q).back().translation();
}

std::vector<LimitViolation> limit_violations(
  const KinematicChain & chain, std::span<const double> q)
{
  std::vector<LimitViolation> out;
  const size_t n = std::min(q.size(), chain.dof());
  for (size_t i = 0; i < n; ++i) {
    if (q[i] < chain.joints[i].min_rad || q[i] > chain.joints[i].max_rad) {
      out.push_back({i, q[i]});
    }
  }
  return out;
}

std::vector<double> clamp_to_limits(const KinematicChain & chain, std::span<const double> q)
{
  std::vector<double> out(q.begin(), q.end());
  const size_t n = std::min(q.size(), chain.dof());
  for (size_t i = 0; i < n; ++i) {
    out[i] = std::clamp(out[i], chain.joints[i].min_rad, chain.joints[i].max_rad);
  }
  return out;
}

}  // namespace hrc::kinematics
