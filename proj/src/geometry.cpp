#include "aw4re/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <random>

#include "aw4re/error.hpp"

namespace aw4re {

namespace {

constexpr double kPixelSlack = 1e-9;

bool finite(const Vec3& v) { return v.allFinite(); }

// Radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, int base) {
  double inv_base = 1.0 / base;
  double factor = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * factor;
    index /= base;
    factor *= inv_base;
  }
  return result;
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    throw InvalidArgument("image size must be at least 1x1");
  }
  if (!(near > 0.0) || !(far > near)) {
    throw InvalidArgument("depth clip must satisfy 0 < near < far");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(far)) {
    throw InvalidArgument("non-finite intrinsics");
  }
}

CameraIntrinsics make_intrinsics(int width, int height, double hfov_deg,
                                 double near, double far) {
  CameraIntrinsics k;
  const double half = hfov_deg * M_PI / 360.0;
  k.fx = k.fy = 0.5 * width / std::tan(half);
  k.cx = 0.5 * width;
  k.cy = 0.5 * height;
  k.width = width;
  k.height = height;
  k.near = near;
  k.far = far;
  k.validate();
  return k;
}

Pose Pose::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) {
    // Looking along `up`; any perpendicular right vector will do.
    right = forward.cross(Vec3::UnitX());
    if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitY());
  }
  right.normalize();
  Vec3 down = forward.cross(right);
  Pose pose;
  pose.rotation.row(0) = right.transpose();
  pose.rotation.row(1) = down.transpose();
  pose.rotation.row(2) = forward.transpose();
  pose.translation = -(pose.rotation * eye);
  return pose;
}

Pose Pose::after_world_motion(const Pose& world_motion) const {
  // x_cam = R (W^-1 x') + t
  Pose out;
  out.rotation = rotation * world_motion.rotation.transpose();
  out.translation = translation - out.rotation * world_motion.translation;
  return out;
}

void Pose::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidArgument("non-finite pose");
  }
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InvalidArgument("pose rotation is not a proper rotation");
  }
}

bool same_camera(const CameraAction& a, const CameraAction& b, double tol) {
  const auto& ka = a.intrinsics;
  const auto& kb = b.intrinsics;
  if (ka.width != kb.width || ka.height != kb.height) return false;
  auto close = [tol](double x, double y) { return std::abs(x - y) <= tol; };
  if (!close(ka.fx, kb.fx) || !close(ka.fy, kb.fy) || !close(ka.cx, kb.cx) ||
      !close(ka.cy, kb.cy) || !close(ka.near, kb.near) ||
      !close(ka.far, kb.far)) {
    return false;
  }
  return (a.pose.rotation - b.pose.rotation).cwiseAbs().maxCoeff() <= tol &&
         (a.pose.translation - b.pose.translation).cwiseAbs().maxCoeff() <= tol;
}

void ActionSequence::validate() const {
  for (std::size_t k = 0; k < actions.size(); ++k) {
    if (actions[k].time != static_cast<int>(k) + 1) {
      throw InvalidArgument("action " + std::to_string(k) + " has time " +
                            std::to_string(actions[k].time) + ", expected " +
                            std::to_string(k + 1));
    }
    actions[k].intrinsics.validate();
    actions[k].pose.validate();
  }
}

bool try_project(const Vec3& point, const CameraAction& action,
                 Projection& out) {
  const Vec3 c = action.pose.to_camera(point);
  const auto& k = action.intrinsics;
  if (!(c.z() > k.near)) return false;
  out.pixel = Vec2(k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy);
  out.depth = c.z();
  return true;
}

Projection project(const Vec3& point, const CameraAction& action) {
  if (!finite(point)) throw InvalidArgument("non-finite point");
  Projection out;
  if (!try_project(point, action, out)) throw BehindCamera();
  return out;
}

Vec3 unproject(const Vec2& pixel, double depth, const CameraAction& action) {
  const auto& k = action.intrinsics;
  if (!pixel.allFinite()) throw InvalidArgument("non-finite pixel");
  if (!(depth > k.near) || !(depth <= k.far)) throw DepthOutOfRange(depth);
  const Vec3 c((pixel.x() - k.cx) / k.fx * depth,
               (pixel.y() - k.cy) / k.fy * depth, depth);
  return action.pose.to_world(c);
}

std::vector<Vec3> sample_frustum(const CameraAction& query, int samples,
                                 std::pair<double, double> depth_range,
                                 std::uint64_t seed) {
  std::vector<Vec3> points;
  const auto& k = query.intrinsics;
  const double lo = std::max(depth_range.first, k.near);
  const double hi = std::min(depth_range.second, k.far);
  if (samples < 1 || !(hi > lo) || !(lo > 0.0)) return points;

  // Halton (2, 3, 5) with a seeded Cranley-Patterson rotation.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double shift[3] = {unit(rng), unit(rng), unit(rng)};
  const double log_ratio = std::log(hi / lo);

  points.reserve(samples);
  for (int n = 0; n < samples; ++n) {
    double h[3] = {radical_inverse(n + 1, 2), radical_inverse(n + 1, 3),
                   radical_inverse(n + 1, 5)};
    for (int d = 0; d < 3; ++d) {
      h[d] += shift[d];
      if (h[d] >= 1.0) h[d] -= 1.0;
    }
    const double u = h[0] * k.width;
    const double v = h[1] * k.height;
    // Keep strictly inside (near, far].
    const double depth = std::clamp(lo * std::exp(h[2] * log_ratio),
                                    std::nextafter(k.near, k.far), hi);
    points.push_back(unproject(Vec2(u, v), depth, query));
  }
  return points;
}

bool sees_point(const CameraAction& candidate, const Vec3& point) {
  const auto& k = candidate.intrinsics;
  const Vec3 c = candidate.pose.to_camera(point);
  if (!(c.z() > k.near - kPixelSlack) || !(c.z() <= k.far + kPixelSlack)) {
    return false;
  }
  const double u = k.fx * c.x() / c.z() + k.cx;
  const double v = k.fy * c.y() / c.z() + k.cy;
  return u >= -kPixelSlack && u < k.width + kPixelSlack && v >= -kPixelSlack &&
         v < k.height + kPixelSlack;
}

double frustum_overlap(const CameraAction& candidate, const CameraAction& query,
                       int samples, std::pair<double, double> depth_range,
                       std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("frustum_overlap needs samples >= 1");
  const auto points = sample_frustum(query, samples, depth_range, seed);
  if (points.empty()) return 0.0;
  std::size_t inside = 0;
  for (const auto& p : points) inside += sees_point(candidate, p);
  return static_cast<double>(inside) / static_cast<double>(points.size());
}

Pose make_world_motion(double yaw_rad, const Vec3& t) {
  Pose m;
  m.rotation = Eigen::AngleAxisd(yaw_rad, Vec3::UnitZ()).toRotationMatrix();
  m.translation = t;
  return m;
}

double rotation_angle(const Mat3& a, const Mat3& b) {
  if (a == b) return 0.0;
  const Mat3 rel = a.transpose() * b;
  const Vec3 axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                  rel(1, 0) - rel(0, 1));
  // atan2 stays accurate near 0 and pi, unlike acos of the trace.
  return std::atan2(0.5 * axis.norm(), 0.5 * (rel.trace() - 1.0));
}

}  // namespace aw4re
