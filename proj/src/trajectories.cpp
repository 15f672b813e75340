#include "aw4re/trajectories.hpp"

#include <cmath>

#include "aw4re/error.hpp"

namespace aw4re {

namespace {

void check_horizon(int horizon) {
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
}

CameraAction retimed(CameraAction a, int t) {
  a.time = t;
  return a;
}

}  // namespace

CameraIntrinsics CameraRig::intrinsics() const {
  return make_intrinsics(width, height, hfov_deg, near, far);
}

CameraAction default_camera(const CameraRig& rig, int time) {
  CameraAction a;
  a.intrinsics = rig.intrinsics();
  a.pose = Pose::look_at(Vec3(0.0, -8.0, 5.0), Vec3(0.0, 0.0, 0.5));
  a.time = time;
  return a;
}

ActionSequence static_sequence(int horizon, const CameraAction& camera) {
  check_horizon(horizon);
  ActionSequence seq;
  for (int t = 1; t <= horizon; ++t) seq.actions.push_back(retimed(camera, t));
  return seq;
}

ActionSequence orbit(int horizon, const CameraRig& rig, double radius, double height,
                     double start_deg, double sweep_deg, double look_height) {
  check_horizon(horizon);
  ActionSequence seq;
  const auto k = rig.intrinsics();
  for (int t = 1; t <= horizon; ++t) {
    const double f = horizon > 1 ? double(t - 1) / (horizon - 1) : 0.0;
    const double az = (start_deg + f * sweep_deg) * M_PI / 180.0;
    CameraAction a;
    a.intrinsics = k;
    a.pose = Pose::look_at(Vec3(radius * std::cos(az), radius * std::sin(az), height),
                           Vec3(0.0, 0.0, look_height));
    a.time = t;
    seq.actions.push_back(a);
  }
  return seq;
}

ActionSequence zoom(const ActionSequence& base, double start_factor, double end_factor) {
  if (!(start_factor > 0.0) || !(end_factor > 0.0)) {
    throw InvalidArgument("zoom factors must be > 0");
  }
  ActionSequence seq = base;
  const int n = base.horizon();
  for (int t = 1; t <= n; ++t) {
    const double f = n > 1 ? double(t - 1) / (n - 1) : 0.0;
    const double s = start_factor + f * (end_factor - start_factor);
    seq.actions[t - 1].intrinsics.fx *= s;
    seq.actions[t - 1].intrinsics.fy *= s;
  }
  return seq;
}

ActionSequence corner(const ActionSequence& base, const Vec3& target, double factor) {
  if (!(factor > 0.0)) throw InvalidArgument("zoom factor must be > 0");
  ActionSequence seq = base;
  const int n = base.horizon();
  for (int t = 1; t <= n; ++t) {
    const double f = n > 1 ? double(t - 1) / (n - 1) : 0.0;
    auto& a = seq.actions[t - 1];
    const Vec3 eye = a.pose.center();
    const Vec3 start = eye + a.pose.rotation.row(2).transpose();
    const Vec3 look = eye + ((1.0 - f) * (start - eye).normalized() +
                             f * (target - eye).normalized());
    a.pose = Pose::look_at(eye, look);
    const double s = 1.0 + f * (factor - 1.0);
    a.intrinsics.fx *= s;
    a.intrinsics.fy *= s;
  }
  return seq;
}

ActionSequence hold(const ActionSequence& base, int freeze_at) {
  if (freeze_at < 1 || freeze_at > base.horizon()) {
    throw InvalidArgument("freeze time outside the horizon");
  }
  ActionSequence seq = base;
  for (int t = freeze_at + 1; t <= base.horizon(); ++t) {
    seq.actions[t - 1] = retimed(base.at_time(freeze_at), t);
  }
  return seq;
}

ActionSequence rewind(const ActionSequence& base, int from) {
  if (from < 1 || from > base.horizon()) throw InvalidArgument("rewind time outside the horizon");
  ActionSequence seq = base;
  for (int t = 1; t < from; ++t) seq.actions[t - 1] = retimed(base.at_time(from), t);
  return seq;
}

}  // namespace aw4re
