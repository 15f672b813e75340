#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

namespace aw4re {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Pinhole intrinsics. Pixel origin is the top-left image corner and pixel
// (u, v) has its center at (u + 0.5, v + 0.5).
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  double near = 0.1;
  double far = 100.0;

  // Throws InvalidArgument when an invariant is broken.
  void validate() const;
  bool operator==(const CameraIntrinsics&) const = default;
};

// Square-pixel intrinsics with the principal point at the image center.
CameraIntrinsics make_intrinsics(int width, int height, double hfov_deg,
                                 double near = 0.1, double far = 100.0);

// Rigid camera-from-world transform: x_cam = rotation * x_world + translation.
// +z is the viewing direction, +y points down the image.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  // Camera at `eye` looking at `target`; `up` is the world up direction.
  static Pose look_at(const Vec3& eye, const Vec3& target,
                      const Vec3& up = Vec3::UnitZ());

  Vec3 to_camera(const Vec3& world) const {
    return rotation * world + translation;
  }
  Vec3 to_world(const Vec3& camera) const {
    return rotation.transpose() * (camera - translation);
  }
  Vec3 center() const { return -(rotation.transpose() * translation); }

  // Pose of the same camera after the world is moved by `world_motion`
  // (a world-from-world rigid transform).
  Pose after_world_motion(const Pose& world_motion) const;

  void validate() const;
  bool operator==(const Pose& o) const {
    return rotation == o.rotation && translation == o.translation;
  }
};

struct CameraAction {
  CameraIntrinsics intrinsics;
  Pose pose;
  int time = 1;

  bool operator==(const CameraAction&) const = default;
};

// True when the two actions describe the same camera (time ignored).
bool same_camera(const CameraAction& a, const CameraAction& b,
                 double tol = 1e-12);

struct ActionSequence {
  std::vector<CameraAction> actions;

  int horizon() const { return static_cast<int>(actions.size()); }
  const CameraAction& at_time(int t) const { return actions.at(t - 1); }
  // Throws InvalidArgument unless actions[t-1].time == t for all t and
  // every camera is valid.
  void validate() const;
  bool operator==(const ActionSequence&) const = default;
};

struct Projection {
  Vec2 pixel;
  double depth = 0.0;
};

// Throws BehindCamera when z <= near and InvalidArgument on non-finite
// input. The pixel may fall outside the image.
Projection project(const Vec3& point, const CameraAction& action);

// Throws DepthOutOfRange unless depth is in (near, far].
Vec3 unproject(const Vec2& pixel, double depth, const CameraAction& action);

// Non-throwing projection; returns false for points at or behind near.
bool try_project(const Vec3& point, const CameraAction& action,
                 Projection& out);

inline constexpr std::uint64_t kDefaultFrustumSeed = 0x5eedf00dULL;

// Deterministic stratified samples of a query frustum: pixels uniform over
// the image, depth log-uniform over `depth_range` clipped to (near, far].
// Points are in world coordinates.
std::vector<Vec3> sample_frustum(const CameraAction& query, int samples,
                                 std::pair<double, double> depth_range,
                                 std::uint64_t seed = kDefaultFrustumSeed);

// True when `point` projects inside the candidate image with a depth in
// (near, far].
bool sees_point(const CameraAction& candidate, const Vec3& point);

// Fraction of the query frustum samples seen by `candidate`.
double frustum_overlap(const CameraAction& candidate, const CameraAction& query,
                       int samples, std::pair<double, double> depth_range,
                       std::uint64_t seed = kDefaultFrustumSeed);

// Rotation about world +z by `yaw_rad` and translation by `t`.
Pose make_world_motion(double yaw_rad, const Vec3& t);

// Geodesic angle between two rotations, radians.
double rotation_angle(const Mat3& a, const Mat3& b);

}  // namespace aw4re
