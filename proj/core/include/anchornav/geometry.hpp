// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>

#include "anchornav/errors.hpp"

namespace anchornav {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

constexpr double deg2rad(double degrees) { return degrees * (kPi / 180.0); }
constexpr double rad2deg(double radians) { return radians * (180.0 / kPi); }

/// Normalize an angle to (-pi, pi].
double wrap_angle(double angle);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec2 xy() const { return {x, y}; }
};

/// Row-major 3x3 matrix, just enough for rigid-body work.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  static Mat3 rotation_z(double yaw);

  double at(int r, int c) const { return m[static_cast<size_t>(r * 3 + c)]; }
  double& at(int r, int c) { return m[static_cast<size_t>(r * 3 + c)]; }

  Vec3 operator*(const Vec3& v) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
};

/// Drone pose: global position plus heading. Flight is level, so yaw is the
/// only orientation degree of freedom.
struct Pose {
  Vec3 position;
  double yaw = 0.0;  // radians, (-pi, pi]

  /// Unit viewing direction (cos yaw, sin yaw, 0).
  Vec3 heading() const { return {std::cos(yaw), std::sin(yaw), 0.0}; }
  bool finite() const;
};

struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  static RigidTransform identity() { return {}; }
  static RigidTransform from_pose(const Pose& pose);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;
  RigidTransform compose(const RigidTransform& o) const;
  /// R orthonormal with det +1, within tol.
  bool is_rigid(double tol = 1e-9) const;
};

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0 && fy > 0 && cx >= 0 && cx < width && cy >= 0 && cy < height;
  }
};

/// Spherical field-of-view cap: everything within `radius` of the viewer and
/// within `half_angle` of the viewing direction.
struct FovCap {
  double radius = 0.0;      // meters, > 0
  double half_angle = 0.0;  // radians, (0, pi]
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;

  bool inside(const Intrinsics& k) const {
    return u >= 0.0 && u < k.width && v >= 0.0 && v < k.height;
  }
};

/// Transform a global point into the camera frame through the body frame:
/// p_cam = (B_T_C)^-1 (G_T_B)^-1 p_global.
Vec3 global_to_camera(const Vec3& p_global, const RigidTransform& body_pose,
                      const RigidTransform& cam_extrinsic);

/// Pinhole projection. Throws NonPositiveDepth when Z <= 0.
PixelPoint project_to_pixel(const Vec3& p_cam, const Intrinsics& k);

/// Inverse of project_to_pixel for a known depth (test support).
Vec3 back_project(double u, double v, double depth, const Intrinsics& k);

/// Closed-cap membership test. The viewer's own position counts as inside.
bool fov_contains(const Pose& viewer, const Vec3& point, const FovCap& cap);

/// Heading of the horizontal displacement from -> to, in (-pi, pi].
/// Throws DegenerateDirection when the horizontal displacement is < 1e-9 m.
double yaw_from(const Vec3& from, const Vec3& to);

/// Fixed body->camera extrinsic: camera optical axis along body +X,
/// image u to body -Y (right), image v to body -Z (down).
RigidTransform camera_extrinsic_forward();

/// Camera-frame coordinates of a global point seen from a level pose.
Vec3 camera_point(const Pose& viewer, const Vec3& p_global);

}  // namespace anchornav
