#include <cmath>

#include "aw4re/error.hpp"
#include "aw4re/scene.hpp"
#include "aw4re/serialization.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aw4re;

namespace {

// World-space direction of the ray through the center of pixel (u, v),
// scaled so that the ray parameter equals camera z.
Vec3 pixel_ray(const CameraAction& a, int u, int v) {
  const auto& k = a.intrinsics;
  const Vec3 cam((u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0);
  return a.pose.rotation.transpose() * cam;
}

}  // namespace

TEST_CASE("generate_scene is a function of seed and config") {
  const SceneConfig cfg;
  const Json a = generate_scene(7, cfg);
  const Json b = generate_scene(7, cfg);
  CHECK(a.dump() == b.dump());
  const Json c = generate_scene(8, cfg);
  CHECK(a.dump() != c.dump());

  const SceneSpec s = generate_scene(7, cfg);
  CHECK(static_cast<int>(s.statics.size()) == cfg.n_static + 1);
  CHECK(s.statics[0].kind == ShapeKind::kPlane);
  CHECK(static_cast<int>(s.dynamics.size()) == cfg.n_dynamic);
  CHECK(s.horizon == cfg.horizon);

  SceneConfig zero = cfg;
  zero.horizon = 0;
  CHECK_THROWS_AS(generate_scene(1, zero), InvalidArgument);
  zero = cfg;
  zero.n_dynamic = -1;
  CHECK_THROWS_AS(generate_scene(1, zero), InvalidArgument);
}

TEST_CASE("scene spec survives JSON") {
  const SceneSpec s = generate_scene(5, test::small_scene());
  const Json j = s;
  const SceneSpec back = j.get<SceneSpec>();
  CHECK(Json(back).dump() == j.dump());
  const auto a = default_camera(test::small_rig(), 3);
  CHECK(render_oracle(back, a) == render_oracle(s, a));
}

TEST_CASE("no dynamics means empty dynamic masks") {
  SceneConfig cfg = test::small_scene(4, 0);
  const SceneSpec s = generate_scene(3, cfg);
  for (int t = 1; t <= 4; ++t) {
    const Frame f = render_oracle(s, default_camera(test::small_rig(), t));
    REQUIRE(f.has_mask());
    CHECK(count_set(*f.dynamic_mask) == 0);
  }
}

TEST_CASE("motion laws") {
  SUBCASE("linear") {
    SceneConfig cfg = test::small_scene(30, 1);
    cfg.motion = "linear";
    const SceneSpec s = generate_scene(4, cfg);
    const auto& obj = s.dynamics.at(0);
    REQUIRE(obj.motion.kind == MotionKind::kLinear);
    for (int t : {1, 2, 17, 30}) {
      const Vec3 expect = obj.shape.center + (t - 1) * obj.motion.velocity;
      CHECK((object_center(obj, t) - expect).norm() < 1e-12);
      const auto state = scene_state(s, t);
      CHECK((state.back().center - expect).norm() < 1e-12);
      CHECK(state.back().dynamic);
    }
  }
  SUBCASE("circular quarter period") {
    DynamicObject obj;
    obj.motion.kind = MotionKind::kCircular;
    obj.motion.pivot = Vec3(1.0, -2.0, 0.5);
    obj.motion.orbit_radius = 1.5;
    obj.motion.phase = 0.3;
    obj.motion.angular_rate = (M_PI / 2) / 10.0;
    obj.shape.center = object_center(obj, 1);
    const Vec3 r0 = object_center(obj, 1) - obj.motion.pivot;
    const Vec3 r1 = object_center(obj, 11) - obj.motion.pivot;
    const Vec3 rotated(-r0.y(), r0.x(), r0.z());
    CHECK((r1 - rotated).norm() < 1e-12);
  }
}

TEST_CASE("scene_state") {
  const SceneSpec s = generate_scene(2, test::small_scene(5, 0));
  CHECK(scene_state(s, 1) == scene_state(s, 5));
  CHECK_THROWS_AS(scene_state(s, 0), InvalidArgument);
  CHECK_THROWS_AS(scene_state(s, 6), InvalidArgument);
}

TEST_CASE("render_oracle analytic cases") {
  SUBCASE("sky only") {
    const SceneSpec s = generate_scene(1, test::small_scene(2, 0));
    CameraAction a;
    a.intrinsics = make_intrinsics(24, 18, 50.0);
    // Ground plane is z = 0; look straight up from above it.
    a.pose = Pose::look_at(Vec3(0, 0, 50), Vec3(0, 0, 60), Vec3::UnitY());
    a.time = 1;
    const Frame f = render_oracle(s, a);
    CHECK(count_set(valid_depth_mask(*f.depth)) == 0);
    CHECK(count_set(*f.dynamic_mask) == 0);
    CHECK(f.rgb.at(3, 3, 0) == s.sky[0]);
  }
  SUBCASE("sphere on the optical axis") {
    SceneSpec s;
    s.horizon = 1;
    Primitive ball;
    ball.kind = ShapeKind::kSphere;
    ball.center = Vec3(0, 0, 1);
    ball.radius = 1.0;
    s.statics.push_back(ball);
    CameraAction a;
    a.intrinsics = make_intrinsics(33, 25, 40.0);
    a.pose = Pose::look_at(Vec3(0, -5, 1), Vec3(0, 0, 1));
    const Frame f = render_oracle(s, a);
    CHECK(f.depth->at(16, 12) == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(f.depth->at(0, 0) == 0.0f);
  }
  SUBCASE("deterministic") {
    const SceneSpec s = generate_scene(9, test::small_scene());
    const auto a = default_camera(test::small_rig(), 4);
    CHECK(render_oracle(s, a) == render_oracle(s, a));
  }
}

TEST_CASE("depth range and mask semantics") {
  const SceneSpec s = generate_scene(12, test::small_scene(8, 3));
  const auto rig = test::small_rig();
  for (int t : {1, 8}) {
    const CameraAction a = default_camera(rig, t);
    const Frame f = render_oracle(s, a);
    for (int v = 0; v < f.height(); ++v) {
      for (int u = 0; u < f.width(); ++u) {
        const float d = f.depth->at(u, v);
        CHECK((d == 0.0f || (d > a.intrinsics.near && d <= a.intrinsics.far)));
        const auto hit = trace_ray(s, t, a.pose.center(), pixel_ray(a, u, v),
                                   a.intrinsics.near, a.intrinsics.far);
        const bool dyn = hit && hit->dynamic;
        CHECK(f.dynamic_mask->at(u, v) == (dyn ? 1 : 0));
      }
    }
  }
}

TEST_CASE("oracle colors agree across views at mutually visible points") {
  const SceneSpec s = generate_scene(21, test::small_scene(3, 0));
  const auto rig = test::small_rig(64, 48);
  const CameraAction a = default_camera(rig, 2);
  CameraAction b = a;
  b.pose = Pose::look_at(Vec3(3, -7, 4), Vec3(0, 0, 0.5));
  const Frame fa = render_oracle(s, a);
  int checked = 0, mismatched = 0;
  for (int v = 0; v < fa.height(); ++v) {
    for (int u = 0; u < fa.width(); ++u) {
      const float d = fa.depth->at(u, v);
      if (d <= 0.0f) continue;
      const Vec3 p = unproject(Vec2(u + 0.5, v + 0.5), d, a);
      const Vec3 c = b.pose.center();
      const Vec3 dir = p - c;
      const auto hit = trace_ray(s, 2, c, dir, 1e-6, 1.0 + 1e-9);
      if (!hit || std::abs(hit->distance - 1.0) > 1e-6) continue;  // occluded from b
      ++checked;
      for (int ch = 0; ch < 3; ++ch) mismatched += hit->color[ch] != fa.rgb.at(u, v, ch);
    }
  }
  CHECK(checked > 500);
  CHECK(mismatched == 0);
}
