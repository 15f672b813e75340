#pragma once

#include "aw4re/geometry.hpp"

namespace aw4re {

struct CameraRig {
  int width = 160;
  int height = 120;
  double hfov_deg = 60.0;
  double near = 0.1;
  double far = 100.0;

  CameraIntrinsics intrinsics() const;
};

// Camera at (0, -8, 5) looking at (0, 0, 0.5).
CameraAction default_camera(const CameraRig& rig = {}, int time = 1);

// The same camera at every t.
ActionSequence static_sequence(int horizon, const CameraAction& camera);

// Circle of `radius` at `height` around the origin, looking at
// (0, 0, look_height); the azimuth sweeps linearly from start to start + sweep.
ActionSequence orbit(int horizon, const CameraRig& rig, double radius, double height,
                     double start_deg, double sweep_deg, double look_height = 0.5);

// Same poses, focal lengths scaled linearly from `start_factor` at t = 1 to
// `end_factor` at t = T about the principal point.
ActionSequence zoom(const ActionSequence& base, double start_factor, double end_factor);

// Keeps the base eye and turns toward `corner` while zooming to `factor`,
// both linearly over the horizon.
ActionSequence corner(const ActionSequence& base, const Vec3& corner, double factor);

// a_t = base_t for t <= freeze_at, base_{freeze_at} afterwards.
ActionSequence hold(const ActionSequence& base, int freeze_at);

// a_t = base_{from} for t < from, base_t afterwards.
ActionSequence rewind(const ActionSequence& base, int from);

}  // namespace aw4re
