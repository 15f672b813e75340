#include "aw4re/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "aw4re/error.hpp"
#include "aw4re/parallel.hpp"

namespace aw4re {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t seed, std::int64_t x, std::int64_t y,
               std::int64_t z) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(x));
  h = splitmix64(h ^ static_cast<std::uint64_t>(y));
  h = splitmix64(h ^ static_cast<std::uint64_t>(z));
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(std::uint64_t seed, const Vec3& p) {
  const double fx = std::floor(p.x()), fy = std::floor(p.y()),
               fz = std::floor(p.z());
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double tx = smooth(p.x() - fx), ty = smooth(p.y() - fy),
               tz = smooth(p.z() - fz);
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) *
                         (dz ? tz : 1.0 - tz);
        acc += w * lattice(seed, ix + dx, iy + dy, iz + dz);
      }
    }
  }
  return acc;
}

Rgb shade(const Texture& tex, const Vec3& surface_coord, const Vec3& normal,
          const Lighting& light) {
  const double n = 0.65 * value_noise(tex.seed, surface_coord * tex.frequency) +
                   0.35 * value_noise(tex.seed ^ 0xabcdefULL,
                                      surface_coord * (tex.frequency * 3.0));
  const double lambert =
      light.ambient + light.diffuse * std::max(0.0, normal.dot(light.direction));
  Rgb out{};
  for (int c = 0; c < 3; ++c) {
    const double albedo = tex.color_a[c] + n * (tex.color_b[c] - tex.color_a[c]);
    out[c] = static_cast<std::uint8_t>(
        std::clamp(std::lround(albedo * lambert), 0L, 255L));
  }
  return out;
}

// Smallest ray parameter in (lo, hi] hitting the primitive centered at
// `center`; writes the outward normal.
std::optional<double> intersect(const Primitive& prim, const Vec3& center,
                                const Vec3& o, const Vec3& d, double lo,
                                double hi, Vec3& normal) {
  switch (prim.kind) {
    case ShapeKind::kPlane: {
      const double denom = prim.normal.dot(d);
      if (std::abs(denom) < 1e-15) return std::nullopt;
      const double s = prim.normal.dot(center - o) / denom;
      if (!(s > lo) || !(s <= hi)) return std::nullopt;
      normal = denom < 0 ? prim.normal : Vec3(-prim.normal);
      return s;
    }
    case ShapeKind::kSphere: {
      const Vec3 oc = o - center;
      const double a = d.squaredNorm();
      const double b = oc.dot(d);
      const double c = oc.squaredNorm() - prim.radius * prim.radius;
      const double disc = b * b - a * c;
      if (disc < 0.0) return std::nullopt;
      const double root = std::sqrt(disc);
      for (double s : {(-b - root) / a, (-b + root) / a}) {
        if (s > lo && s <= hi) {
          normal = (o + s * d - center) / prim.radius;
          return s;
        }
      }
      return std::nullopt;
    }
    case ShapeKind::kBox: {
      double t_enter = -std::numeric_limits<double>::infinity();
      double t_exit = std::numeric_limits<double>::infinity();
      int enter_axis = 0, exit_axis = 0;
      for (int ax = 0; ax < 3; ++ax) {
        const double mn = center[ax] - prim.half_extents[ax];
        const double mx = center[ax] + prim.half_extents[ax];
        if (std::abs(d[ax]) < 1e-15) {
          if (o[ax] < mn || o[ax] > mx) return std::nullopt;
          continue;
        }
        double t0 = (mn - o[ax]) / d[ax];
        double t1 = (mx - o[ax]) / d[ax];
        if (t0 > t1) std::swap(t0, t1);
        if (t0 > t_enter) {
          t_enter = t0;
          enter_axis = ax;
        }
        if (t1 < t_exit) {
          t_exit = t1;
          exit_axis = ax;
        }
      }
      if (t_enter > t_exit) return std::nullopt;
      double s;
      int axis;
      if (t_enter > lo && t_enter <= hi) {
        s = t_enter;
        axis = enter_axis;
      } else if (t_exit > lo && t_exit <= hi) {
        s = t_exit;
        axis = exit_axis;
      } else {
        return std::nullopt;
      }
      normal = Vec3::Zero();
      normal[axis] = (o[axis] + s * d[axis] - center[axis]) >= 0 ? 1.0 : -1.0;
      return s;
    }
  }
  return std::nullopt;
}

Rgb random_color(std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  return {static_cast<std::uint8_t>(dist(rng)),
          static_cast<std::uint8_t>(dist(rng)),
          static_cast<std::uint8_t>(dist(rng))};
}

Texture random_texture(std::mt19937_64& rng, double freq_lo, double freq_hi) {
  Texture tex;
  tex.seed = rng();
  tex.color_a = random_color(rng, 120, 250);
  tex.color_b = random_color(rng, 10, 120);
  tex.frequency = std::uniform_real_distribution<double>(freq_lo, freq_hi)(rng);
  return tex;
}

Primitive random_solid(std::mt19937_64& rng, double extent, bool small) {
  std::uniform_real_distribution<double> pos(-extent, extent);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Primitive p;
  const bool sphere = unit(rng) < 0.5;
  const double scale = small ? 0.6 : 1.0;
  if (sphere) {
    p.kind = ShapeKind::kSphere;
    p.radius = scale * (0.25 + 0.45 * unit(rng));
    p.center = Vec3(pos(rng), pos(rng), p.radius);
  } else {
    p.kind = ShapeKind::kBox;
    p.half_extents = scale * Vec3(0.2 + 0.4 * unit(rng), 0.2 + 0.4 * unit(rng),
                                  0.2 + 0.5 * unit(rng));
    p.center = Vec3(pos(rng), pos(rng), p.half_extents.z());
  }
  p.texture = random_texture(rng, 2.0, 5.0);
  return p;
}

}  // namespace

void SceneConfig::validate() const {
  if (horizon < 1) throw InvalidArgument("scene horizon must be >= 1");
  if (n_static < 0 || n_dynamic < 0) {
    throw InvalidArgument("primitive counts must be >= 0");
  }
  if (!(extent > 0.0)) throw InvalidArgument("scene extent must be positive");
  if (motion != "linear" && motion != "circular" && motion != "mixed") {
    throw InvalidArgument("unknown motion kind '" + motion + "'");
  }
  if (!(min_speed > 0.0) || !(max_speed >= min_speed)) {
    throw InvalidArgument("speed range must satisfy 0 < min <= max");
  }
}

SceneSpec generate_scene(std::uint64_t seed, const SceneConfig& config) {
  config.validate();
  SceneSpec scene;
  scene.seed = seed;
  scene.config = config;
  scene.horizon = config.horizon;

  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Primitive ground;
  ground.kind = ShapeKind::kPlane;
  ground.center = Vec3::Zero();
  ground.normal = Vec3::UnitZ();
  ground.texture = random_texture(rng, 0.8, 1.6);
  scene.statics.push_back(ground);
  for (int k = 0; k < config.n_static; ++k) {
    scene.statics.push_back(random_solid(rng, config.extent, false));
  }

  for (int k = 0; k < config.n_dynamic; ++k) {
    DynamicObject obj;
    obj.shape = random_solid(rng, config.extent, true);
    bool circular = config.motion == "circular" ||
                    (config.motion == "mixed" && (k % 2 == 1));
    const double speed =
        config.min_speed + (config.max_speed - config.min_speed) * unit(rng);
    if (circular) {
      obj.motion.kind = MotionKind::kCircular;
      obj.motion.orbit_radius = 1.0 + 2.0 * unit(rng);
      obj.motion.angular_rate =
          (unit(rng) < 0.5 ? -1.0 : 1.0) * speed / obj.motion.orbit_radius;
      obj.motion.phase = 2.0 * M_PI * unit(rng);
      const double z = obj.shape.center.z();
      obj.motion.pivot = Vec3(0.5 * config.extent * (2.0 * unit(rng) - 1.0),
                              0.5 * config.extent * (2.0 * unit(rng) - 1.0), z);
      obj.shape.center =
          obj.motion.pivot + obj.motion.orbit_radius *
                                 Vec3(std::cos(obj.motion.phase),
                                      std::sin(obj.motion.phase), 0.0);
    } else {
      obj.motion.kind = MotionKind::kLinear;
      const double heading = 2.0 * M_PI * unit(rng);
      obj.motion.velocity =
          speed * Vec3(std::cos(heading), std::sin(heading), 0.0);
    }
    scene.dynamics.push_back(obj);
  }

  const double margin = config.extent + 2.0;
  scene.bounds_min = Vec3(-margin, -margin, -0.25);
  scene.bounds_max = Vec3(margin, margin, 3.0);
  return scene;
}

Vec3 object_center(const DynamicObject& object, int t) {
  const double dt = static_cast<double>(t - 1);
  const Motion& m = object.motion;
  if (m.kind == MotionKind::kLinear) {
    return object.shape.center + dt * m.velocity;
  }
  const double a = m.phase + m.angular_rate * dt;
  return m.pivot + m.orbit_radius * Vec3(std::cos(a), std::sin(a), 0.0);
}

std::vector<ObjectState> scene_state(const SceneSpec& scene, int t) {
  if (t < 1 || t > scene.horizon) {
    throw InvalidArgument("time " + std::to_string(t) + " outside horizon 1.." +
                          std::to_string(scene.horizon));
  }
  std::vector<ObjectState> out;
  int id = 0;
  for (const auto& s : scene.statics) out.push_back({id++, false, s.center});
  for (const auto& d : scene.dynamics) {
    out.push_back({id++, true, object_center(d, t)});
  }
  return out;
}

std::optional<RayHit> trace_ray(const SceneSpec& scene, int t, const Vec3& origin,
                                const Vec3& direction, double min_param,
                                double max_param) {
  std::optional<RayHit> best;
  double best_s = max_param;
  Vec3 best_normal = Vec3::Zero();
  const Primitive* best_prim = nullptr;
  Vec3 best_center = Vec3::Zero();
  int id = 0;

  auto consider = [&](const Primitive& prim, const Vec3& center, bool dynamic) {
    Vec3 normal;
    auto s = intersect(prim, center, origin, direction, min_param, best_s, normal);
    // Ties keep the earlier primitive.
    if (s && (!best || *s < best_s)) {
      best_s = *s;
      best_normal = normal;
      best_prim = &prim;
      best_center = center;
      best = RayHit{};
      best->dynamic = dynamic;
      best->object = id;
    }
    ++id;
  };
  for (const auto& prim : scene.statics) consider(prim, prim.center, false);
  for (const auto& obj : scene.dynamics) {
    consider(obj.shape, object_center(obj, t), true);
  }
  if (!best) return std::nullopt;

  best->distance = best_s;
  best->point = origin + best_s * direction;
  const Vec3 coord = best->dynamic ? Vec3(best->point - best_center)
                                   : best->point;
  best->color = shade(best_prim->texture, coord, best_normal, scene.light);
  return best;
}

Frame render_oracle(const SceneSpec& scene, const CameraAction& action) {
  const auto& k = action.intrinsics;
  k.validate();
  if (action.time < 1 || action.time > scene.horizon) {
    throw InvalidArgument("render time outside scene horizon");
  }
  Frame frame;
  frame.rgb = RgbImage(k.width, k.height, 0);
  frame.depth = DepthImage(k.width, k.height, 0.0f);
  frame.dynamic_mask = MaskImage(k.width, k.height, 0);
  const Vec3 origin = action.pose.center();
  const Mat3 cam_to_world = action.pose.rotation.transpose();

  parallel_for(0, k.height, [&](int v) {
    for (int u = 0; u < k.width; ++u) {
      // Camera-space ray with unit z, so the ray parameter is the z-depth.
      const Vec3 dir_cam((u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0);
      const Vec3 dir = cam_to_world * dir_cam;
      auto hit = trace_ray(scene, action.time, origin, dir, k.near, k.far);
      float depth = 0.0f;
      if (hit) depth = static_cast<float>(hit->distance);
      // Float rounding can land exactly on near; such pixels count as misses.
      if (hit && depth > k.near && depth <= k.far) {
        for (int c = 0; c < 3; ++c) frame.rgb.at(u, v, c) = hit->color[c];
        frame.depth->at(u, v) = depth;
        frame.dynamic_mask->at(u, v) = hit->dynamic ? 1 : 0;
      } else {
        for (int c = 0; c < 3; ++c) frame.rgb.at(u, v, c) = scene.sky[c];
      }
    }
  });
  return frame;
}

}  // namespace aw4re
