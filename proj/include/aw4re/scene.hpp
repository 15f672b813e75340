#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aw4re/geometry.hpp"
#include "aw4re/image.hpp"

namespace aw4re {

using Rgb = std::array<std::uint8_t, 3>;

// Seeded two-octave value noise blended between two colors, evaluated on
// surface coordinates (world space for statics, object space for dynamics).
struct Texture {
  std::uint64_t seed = 0;
  Rgb color_a{200, 200, 200};
  Rgb color_b{60, 60, 60};
  double frequency = 2.0;  // lattice cells per meter, base octave
};

enum class ShapeKind { kPlane, kBox, kSphere };

struct Primitive {
  ShapeKind kind = ShapeKind::kSphere;
  // Sphere/box center; for the plane, any point on it.
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.5);  // box
  double radius = 0.5;                      // sphere
  Vec3 normal = Vec3::UnitZ();              // plane
  Texture texture;
};

enum class MotionKind { kLinear, kCircular };

// Closed-form motion law. Linear: center(t) = start + (t - 1) * velocity.
// Circular: center(t) = pivot + radius * (cos a, sin a, 0) with
// a = phase + angular_rate * (t - 1).
struct Motion {
  MotionKind kind = MotionKind::kLinear;
  Vec3 velocity = Vec3::Zero();  // meters per frame
  Vec3 pivot = Vec3::Zero();
  double orbit_radius = 1.0;
  double angular_rate = 0.0;  // radians per frame
  double phase = 0.0;
};

struct DynamicObject {
  Primitive shape;  // shape.center is the position at t = 1
  Motion motion;
};

struct Lighting {
  double ambient = 0.35;
  double diffuse = 0.65;
  Vec3 direction = Vec3(0.4, 0.3, 0.866).normalized();  // toward the light
};

struct SceneConfig {
  // Primitives besides the ground plane, which is always present.
  int n_static = 6;
  int n_dynamic = 3;
  int horizon = 121;
  double extent = 4.0;  // statics are placed in [-extent, extent]^2
  // "linear", "circular" or "mixed".
  std::string motion = "mixed";
  double min_speed = 0.03;  // meters per frame
  double max_speed = 0.08;

  void validate() const;
  bool operator==(const SceneConfig&) const = default;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  SceneConfig config;
  int horizon = 1;
  std::vector<Primitive> statics;  // statics[0] is the ground plane
  std::vector<DynamicObject> dynamics;
  Lighting light;
  Rgb sky{150, 190, 230};
  Vec3 bounds_min = Vec3::Zero();
  Vec3 bounds_max = Vec3::Zero();
};

struct ObjectState {
  int id = 0;  // statics first, then dynamics
  bool dynamic = false;
  Vec3 center = Vec3::Zero();
  bool operator==(const ObjectState&) const = default;
};

// Throws InvalidArgument for a zero horizon or negative counts.
SceneSpec generate_scene(std::uint64_t seed, const SceneConfig& config);

Vec3 object_center(const DynamicObject& object, int t);

// Throws InvalidArgument when t is outside {1..T}.
std::vector<ObjectState> scene_state(const SceneSpec& scene, int t);

struct RayHit {
  double distance = 0.0;  // ray parameter; z-depth for camera rays
  Vec3 point = Vec3::Zero();
  Rgb color{0, 0, 0};
  bool dynamic = false;
  int object = -1;
};

// Nearest hit with ray parameter in (min_param, max_param].
std::optional<RayHit> trace_ray(const SceneSpec& scene, int t, const Vec3& origin,
                                const Vec3& direction, double min_param,
                                double max_param);

// Exact analytic render at action.time. Pixels with no hit in (near, far]
// get the sky color, depth 0 and mask 0.
Frame render_oracle(const SceneSpec& scene, const CameraAction& action);

}  // namespace aw4re
