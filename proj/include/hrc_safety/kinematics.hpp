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

#ifndef HRC_SAFETY__KINEMATICS_HPP_
#define HRC_SAFETY__KINEMATICS_HPP_

#include <span>
#include <string>
#include <vector>

#include "hrc_safety/geometry.hpp"

namespace hrc::kinematics
{

using geometry::RigidTransform;

/// Revolute joint. `origin` is the fixed transform from the parent link
/// frame to this joint's frame; the joint then rotates about `axis`.
struct JointSpec
{
  std::string name;
  Eigen::Vector3d axis{Eigen::Vector3d::UnitZ()};
  RigidTransform origin;
  double min_rad{-3.14159265358979};
  double max_rad{3.14159265358979};

  bool operator==(const JointSpec &) const = default;
};

struct KinematicChain
{
  std::string base_name{"base_link"};
  std::vector<JointSpec> joints;
  RigidTransform tool_offset;

  size_t dof() const {return joints.size();}

  /// Throws InvalidArgument on empty chains, duplicate names, non-unit axes
  /// or inverted limits.
  void validate() const;

  /// Sum of fixed origin and tool offset translation norms.
  double total_length() const;

  bool operator==(const KinematicChain &) const = default;
};

/// Name used in session files for the built-in reference robot.
inline constexpr const char * kReferenceChainName = "reference_6dof";

/// 6-DOF reference arm with 0.3 m links (z, y, y, z, y, z axes).
KinematicChain reference_chain();

/// Base-frame pose of each joint frame followed by the tool frame
/// (dof() + 1 entries). Throws LengthMismatch.
std::vector<RigidTransform> forward_kinematics(
  const KinematicChain & chain, std::span<const double> q);

/// Throws LengthMismatch.
geometry::BasePoint tool_position(const KinematicChain & chain, std::span<const double> q);

struct LimitViolation
{
  size_t joint{0};
  double value{0.0};
};

std::vector<LimitViolation> limit_violations(
  const KinematicChain & chain, std::span<const double> q);

/// Clamps each angle into its joint limits for display.
std::vector<double> clamp_to_limits(const KinematicChain & chain, std::span<const double> q);

}  // namespace hrc::kinematics

#endif  // HRC_SAFETY__KINEMATICS_HPP_
