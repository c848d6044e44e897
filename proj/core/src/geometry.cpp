// SPDX-License-Identifier: Apache-2.0

#include "anchornav/geometry.hpp"

namespace anchornav {

double wrap_angle(double angle) {
  double a = std::fmod(angle + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

Mat3 Mat3::rotation_z(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Mat3 r;
  r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  return r;
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
          m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += at(i, k) * o.at(k, j);
      r.at(i, j) = acc;
    }
  }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.at(i, j) = at(j, i);
  return r;
}

bool Pose::finite() const {
  return std::isfinite(position.x) && std::isfinite(position.y) &&
         std::isfinite(position.z) && std::isfinite(yaw);
}

RigidTransform RigidTransform::from_pose(const Pose& pose) {
  return {Mat3::rotation_z(pose.yaw), pose.position};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation.transposed();
  return {rt, (rt * translation) * -1.0};
}

RigidTransform RigidTransform::compose(const RigidTransform& o) const {
  return {rotation * o.rotation, rotation * o.translation + translation};
}

bool RigidTransform::is_rigid(double tol) const {
  const Mat3 rtr = rotation.transposed() * rotation;
  const Mat3 id = Mat3::identity();
  for (size_t i = 0; i < 9; ++i) {
    if (std::abs(rtr.m[i] - id.m[i]) > tol) return false;
  }
  const auto& m = rotation.m;
  const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                     m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
  return std::abs(det - 1.0) <= 10.0 * tol;
}

Vec3 global_to_camera(const Vec3& p_global, const RigidTransform& body_pose,
                      const RigidTransform& cam_extrinsic) {
  const Vec3 p_body = body_pose.inverse().apply(p_global);
  return cam_extrinsic.inverse().apply(p_body);
}

PixelPoint project_to_pixel(const Vec3& p_cam, const Intrinsics& k) {
  if (p_cam.z <= 0.0) {
    throw NonPositiveDepth("project_to_pixel: Z = " + std::to_string(p_cam.z));
  }
  return {k.fx * p_cam.x / p_cam.z + k.cx, k.fy * p_cam.y / p_cam.z + k.cy,
          p_cam.z};
}

Vec3 back_project(double u, double v, double depth, const Intrinsics& k) {
  return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

bool fov_contains(const Pose& viewer, const Vec3& point, const FovCap& cap) {
  const Vec3 d = point - viewer.position;
  const double dist = d.norm();
  if (dist > cap.radius) return false;
  if (dist < 1e-12) return true;  // angle defined as 0 at the apex
  double c = d.dot(viewer.heading()) / dist;
  c = std::max(-1.0, std::min(1.0, c));
  return std::acos(c) <= cap.half_angle;
}

double yaw_from(const Vec3& from, const Vec3& to) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  if (std::hypot(dx, dy) < 1e-9) {
    throw DegenerateDirection("yaw_from: vertical-only displacement");
  }
  return wrap_angle(std::atan2(dy, dx));
}

RigidTransform camera_extrinsic_forward() {
  // Columns are the camera axes expressed in the body frame.
  Mat3 r;
  r.m = {0, 0, 1,    // body x <- cam z
         -1, 0, 0,   // body y <- -cam x
         0, -1, 0};  // body z <- -cam y
  return {r, Vec3{}};
}

Vec3 camera_point(const Pose& viewer, const Vec3& p_global) {
  return global_to_camera(p_global, RigidTransform::from_pose(viewer),
                          camera_extrinsic_forward());
}

}  // namespace anchornav
