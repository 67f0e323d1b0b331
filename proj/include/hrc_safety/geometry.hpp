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

#ifndef HRC_SAFETY__GEOMETRY_HPP_
#define HRC_SAFETY__GEOMETRY_HPP_

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hrc::geometry
{

/// A point in the robot base frame, meters.
using BasePoint = Eigen::Vector3d;

/// Image coordinates in pixels. Sub-pixel values and points outside the
/// image bounds are both allowed.
struct PixelPoint
{
  double u{0.0};
  double v{0.0};

  bool operator==(const PixelPoint &) const = default;
};

/// Zero-distortion pinhole intrinsics.
struct CameraIntrinsics
{
  double fx{1.0};
  double fy{1.0};
  double cx{0.0};
  double cy{0.0};
  double width{1.0};
  double height{1.0};

  /// Throws Error(InvalidArgument) unless fx, fy > 0 and the principal point
  /// lies inside the image.
  void validate() const;

  bool operator==(const CameraIntrinsics &) const = default;
};

/// Horizontal plane z = z0 in the base frame (the table surface).
struct TablePlane
{
  double z0{0.0};

  bool operator==(const TablePlane &) const = default;
};

/**
 * Proper rigid motion. When used as the camera extrinsic it maps camera-frame
 * points to base-frame points (base_from_camera); the inverse is always derived.
 *
 * Construction projects rotations with a small orthonormality residual back
 * onto SO(3) and rejects anything with residual above kMaxOrthoResidual.
 */
class RigidTransform
{
public:
  static constexpr double kMaxOrthoResidual = 1e-6;

  RigidTransform();
  RigidTransform(const Eigen::Matrix3d & rotation, const Eigen::Vector3d & translation);

  static RigidTransform identity() {return {};}
  static RigidTransform from_translation(const Eigen::Vector3d & translation);
  static RigidTransform from_axis_angle(
    const Eigen::Vector3d & axis, double angle,
    const Eigen::Vector3d & translation = Eigen::Vector3d::Zero());
  /// Row-major rotation as stored in calibration files.
  static RigidTransform from_rowmajor(
    const std::array<double, 9> & rotation, const std::array<double, 3> & translation);

  const Eigen::Matrix3d & rotation() const {return rotation_;}
  const Eigen::Vector3d & translation() const {return translation_;}
  std::array<double, 9> rotation_rowmajor() const;
  Eigen::Matrix4d matrix() const;

  Eigen::Vector3d apply(const Eigen::Vector3d & p) const {return rotation_ * p + translation_;}

  bool operator==(const RigidTransform & other) const
  {
    return rotation_ == other.rotation_ && translation_ == other.translation_;
  }

private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Frobenius norm of RᵀR − I.
double orthonormality_residual(const Eigen::Matrix3d & rotation);

/// compose(a, b) maps p to a(b(p)).
RigidTransform compose(const RigidTransform & a, const RigidTransform & b);
RigidTransform invert(const RigidTransform & a);

/// Back-projects a pixel using a metric depth along the optical axis.
/// Throws NonPositiveDepth when depth <= 0.
BasePoint back_project_depth(
  const PixelPoint & px, double depth, const CameraIntrinsics & cam, const RigidTransform & ext);

/// Intersects the pixel's viewing ray with the table plane.
/// Throws RayParallelToPlane or IntersectionBehindCamera.
BasePoint back_project_plane(
  const PixelPoint & px, const TablePlane & plane, const CameraIntrinsics & cam,
  const RigidTransform & ext);

/// Throws PointBehindCamera when the camera-frame depth is <= 1e-12.
PixelPoint project(const BasePoint & p, const CameraIntrinsics & cam, const RigidTransform & ext);

/// Depth of a base-frame point along the camera's optical axis.
double camera_depth(const BasePoint & p, const RigidTransform & ext);

}  // namespace hrc::geometry

#endif  // HRC_SAFETY__GEOMETRY_HPP_
