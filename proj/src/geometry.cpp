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

#include "hrc_safety/geometry.hpp"

#include <cmath>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "hrc_safety/errors.hpp"

namespace hrc::geometry
{

namespace
{

// Residuals below this are left untouched so stored matrices round-trip exactly.
constexpr double kSnapResidual = 1e-12;

bool all_finite(const Eigen::Matrix3d & m) {return m.allFinite();}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d & m)
{
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

Eigen::Vector3d camera_ray(const PixelPoint & px, const CameraIntrinsics & cam)
{
  return {(px.u - cam.cx) / cam.fx, (px.v - cam.cy) / cam.fy, 1.0};
}

}  // namespace

void CameraIntrinsics::validate() const
{
  const bool finite = std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) &&
    std::isfinite(cy) && std::isfinite(width) && std::isfinite(height);
  if (!finite || fx <= 0.0 || fy <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "camera focal lengths must be finite and positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(
            ErrorCode::InvalidArgument,
            fmt::format(
              "principal point ({}, {}) outside {}x{} image", cx, cy, width, height));
  }
}

double orthonormality_residual(const Eigen::Matrix3d & rotation)
{
  return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
}

RigidTransform::RigidTransform()
: rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero())
{}

RigidTransform::RigidTransform(const Eigen::Matrix3d & rotation, const Eigen::Vector3d & translation)
: rotation_(rotation), translation_(translation)
{
  if (!all_finite(rotation) || !translation.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "rigid transform has non-finite entries");
  }
  const double residual = orthonormality_residual(rotation);
  if (residual > kMaxOrthoResidual) {
    throw Error(
            ErrorCode::InvalidArgument,
            fmt::format("rotation is not orthonormal (residual {:.3g})", residual));
  }
  if (rotation.determinant() <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "rotation is a reflection (det < 0)");
  }
  if (residual > kSnapResidual) {
    rotation_ = nearest_rotation(rotation);
  }
}

RigidTransform RigidTransform::from_translation(const Eigen::Vector3d & translation)
{
  return {Eigen::Matrix3d::Identity(), translation};
}

RigidTransform RigidTransform::from_axis_angle(
  const Eigen::Vector3d & axis, double angle, const Eigen::Vector3d & translation)
{
  return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), translation};
}

RigidTransform RigidTransform::from_rowmajor(
  const std::array<double, 9> & rotation, const std::array<double, 3> & translation)
{
  Eigen::Matrix3d r;
  r << rotation[0], rotation[1], rotation[2],
    rotation[3], rotation[4], rotation[5],
    rotation[6], rotation[7], rotation[8];
  return {r, Eigen::Vector3d(translation[0], translation[1], translation[2])};
}

std::array<double, 9> RigidTransform::rotation_rowmajor() const
{
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out[static_cast<size_t>(r * 3 + c)] = rotation_(r, c);
    }
  }
  return out;
}

Eigen::Matrix4d RigidTransform::matrix() const
{
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform compose(const RigidTransform & a, const RigidTransform & b)
{
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

RigidTransform invert(const RigidTransform & a)
{
  const Eigen::Matrix3d rt = a.rotation().transpose();
  return {rt, -(rt * a.translation())};
}

BasePoint back_project_depth(
  const PixelPoint & px, double depth, const CameraIntrinsics & cam, const RigidTransform & ext)
{
  if (!(depth > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, fmt::format("depth {} is not positive", depth));
  }
  return ext.apply(camera_ray(px, cam) * depth);
}

BasePoint back_project_plane(
  const PixelPoint & px, const TablePlane & plane, const CameraIntrinsics & cam,
  const RigidTransform & ext)
{
  const Eigen::Vector3d origin = ext.translation();
  const Eigen::Vector3d dir = ext.rotation() * camera_ray(px, cam);
  if (!(std::abs(dir.z()) >= 1e-12)) {
    throw Error(ErrorCode::RayParallelToPlane, "viewing ray is parallel to the table plane");
  }
  const double s = (plane.z0 - origin.z()) / dir.z();
  if (!(s > 0.0)) {
    throw Error(
            ErrorCode::IntersectionBehindCamera,
            fmt::format("table plane z={} intersects behind the camera", plane.z0));
  }
  BasePoint hit = origin + s * dir;
  hit.z() = plane.z0;
  return hit;
}

double camera_depth(const BasePoint & p, const RigidTransform & ext)
{
  return ext.rotation().col(2).dot(p - ext.translation());
}

PixelPoint project(const BasePoint & p, const CameraIntrinsics & cam, const RigidTransform & ext)
{
  const Eigen::Vector3d pc = ext.rotation().transpose() * (p - ext.translation());
  if (!(pc.z() > 1e-12)) {
    throw Error(ErrorCode::PointBehindCamera, fmt::format("camera-frame depth {}", pc.z()));
  }
  return {cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy};
}

}  // namespace hrc::geometry
