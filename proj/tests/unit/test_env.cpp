#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "aw4re/env.hpp"
#include "aw4re/error.hpp"
#include "aw4re/serialization.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aw4re;

namespace {

EnvConfig tiny_env(int horizon = 4) {
  EnvConfig cfg;
  cfg.scene = test::small_scene(horizon, 2);
  cfg.rig = test::small_rig(24, 18);
  cfg.pipeline.retrieval.frustum_samples = 256;
  cfg.pipeline.retrieval.budget = 4;
  return cfg;
}

using Cell = std::tuple<long long, long long, long long, int>;

// Cells hit by valid-depth pixels, computed from the scene bounds directly.
std::set<Cell> cells_of(const SceneSpec& scene, double cell, const std::vector<Frame>& frames,
                        const ActionSequence& actions) {
  std::set<Cell> out;
  const Vec3 span = scene.bounds_max - scene.bounds_min;
  const long long nx = std::max(1, int(std::ceil(span.x() / cell)));
  const long long ny = std::max(1, int(std::ceil(span.y() / cell)));
  const long long nz = std::max(1, int(std::ceil(span.z() / cell)));
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const auto& a = actions.actions[n];
    const auto& k = a.intrinsics;
    for (int v = 0; v < k.height; ++v) {
      for (int u = 0; u < k.width; ++u) {
        const double d = frames[n].depth->at(u, v);
        if (d <= 0.0) continue;
        const Vec3 cam((u + 0.5 - k.cx) / k.fx * d, (v + 0.5 - k.cy) / k.fy * d, d);
        const Vec3 w = a.pose.rotation.transpose() * (cam - a.pose.translation);
        const Vec3 q = (w - scene.bounds_min) / cell;
        const long long ix = std::floor(q.x()), iy = std::floor(q.y()), iz = std::floor(q.z());
        if (ix < 0 || iy < 0 || iz < 0 || ix >= nx || iy >= ny || iz >= nz) continue;
        out.emplace(ix, iy, iz, a.time);
      }
    }
  }
  return out;
}

double total_cells(const SceneSpec& scene, double cell, int horizon) {
  const Vec3 span = scene.bounds_max - scene.bounds_min;
  return std::max(1.0, std::ceil(span.x() / cell)) * std::max(1.0, std::ceil(span.y() / cell)) *
         std::max(1.0, std::ceil(span.z() / cell)) * horizon;
}

ActionSequence looking_at(const EnvConfig& cfg, const Vec3& eye, const Vec3& target) {
  CameraAction a = default_camera(cfg.rig);
  a.pose = Pose::look_at(eye, target);
  return static_sequence(cfg.horizon(), a);
}

}  // namespace

TEST_CASE("reset") {
  const EnvConfig cfg = tiny_env();
  const Episode a = reset(cfg, 3), b = reset(cfg, 3), c = reset(cfg, 4);
  CHECK(a.k == 1);
  CHECK(a.corpus.empty());
  CHECK(a.grid.covered_cells() == 0);
  CHECK(Json(a.scene).dump() == Json(b.scene).dump());
  CHECK(a.grid == b.grid);
  CHECK(Json(a.scene).dump() != Json(c.scene).dump());
  EnvConfig bad = cfg;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(reset(bad, 1), InvalidArgument);
  bad = cfg;
  bad.lambda = -1;
  CHECK_THROWS_AS(reset(bad, 1), InvalidArgument);
}

TEST_CASE("real and surrogate steps") {
  const EnvConfig cfg = tiny_env();
  Episode ep = reset(cfg, 8);
  const ActionSequence first = static_sequence(4, default_camera(cfg.rig));
  std::vector<std::vector<ObjectState>> states;
  for (int t = 1; t <= 4; ++t) states.push_back(scene_state(ep.scene, t));

  const auto r1 = step(ep, first, EnvMode::kReal);
  CHECK(ep.corpus.size() == 4);
  CHECK(ep.k == 2);
  CHECK(r1.observation.size() == 4);
  CHECK_FALSE(r1.prediction.has_value());

  const ActionSequence other = orbit(4, cfg.rig, 9.0, 5.0, -70.0, 20.0);
  const std::string hash = ep.corpus.content_hash();
  const double coverage = ep.grid.coverage();
  const auto s1 = step(ep, other, EnvMode::kSurrogate);
  const auto s2 = step(ep, other, EnvMode::kSurrogate);
  CHECK(ep.corpus.content_hash() == hash);
  CHECK(ep.k == 2);
  CHECK(ep.grid.coverage() == coverage);
  REQUIRE(s1.prediction.has_value());
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(s1.observation[t].rgb == s2.observation[t].rgb);
    CHECK(*s1.observation[t].depth == *s2.observation[t].depth);
  }
  CHECK(s1.reward.total == s2.reward.total);

  for (int t = 1; t <= 4; ++t) CHECK(scene_state(ep.scene, t) == states[t - 1]);
  CHECK(ep.log.size() == 3);
  CHECK(ep.log[1].mode == EnvMode::kSurrogate);
  CHECK(ep.log[1].discount == doctest::Approx(cfg.gamma));

  ActionSequence short_seq = first;
  short_seq.actions.pop_back();
  CHECK_THROWS_AS(step(ep, short_seq), InvalidArgument);
}

TEST_CASE("information gain") {
  const EnvConfig cfg = tiny_env(3);
  Episode ep = reset(cfg, 5);
  const ActionSequence a = looking_at(cfg, Vec3(0, -8, 5), Vec3(0, 0, 0.5));

  SUBCASE("first observation equals its own cell count over the total") {
    const auto frames = test::render_all(ep.scene, a);
    const auto cells = cells_of(ep.scene, cfg.cell_size, frames, a);
    CHECK(ep.grid.total_cells() == static_cast<std::size_t>(total_cells(ep.scene, cfg.cell_size, 3)));
    const double expect = double(cells.size()) / total_cells(ep.scene, cfg.cell_size, 3);
    CHECK(info_gain(ep, frames, a) == doctest::Approx(expect).epsilon(1e-15));
    const auto r = step(ep, a, EnvMode::kReal);
    CHECK(r.reward.info_gain == doctest::Approx(expect).epsilon(1e-15));
  }
  SUBCASE("repeating an executed sequence gains nothing") {
    step(ep, a, EnvMode::kReal);
    const auto again = step(ep, a, EnvMode::kReal);
    CHECK(again.reward.info_gain == 0.0);
    CHECK(again.reward.cost == 0.0);
  }
  SUBCASE("gain is additive over disjoint footprints") {
    const ActionSequence b = looking_at(cfg, Vec3(0.3, 2.0, 2.5), Vec3(0, 4.5, 0));
    const ActionSequence c = looking_at(cfg, Vec3(0.3, -2.0, 2.5), Vec3(0, -4.5, 0));
    const auto fb = test::render_all(ep.scene, b), fc = test::render_all(ep.scene, c);
    const auto cb = cells_of(ep.scene, cfg.cell_size, fb, b);
    const auto cc = cells_of(ep.scene, cfg.cell_size, fc, c);
    std::vector<Cell> shared;
    std::set_intersection(cb.begin(), cb.end(), cc.begin(), cc.end(), std::back_inserter(shared));
    REQUIRE(!cb.empty());
    REQUIRE(!cc.empty());
    REQUIRE(shared.empty());
    const double gb = info_gain(ep, fb, b), gc = info_gain(ep, fc, c);
    const double first = step(ep, b, EnvMode::kReal).reward.info_gain;
    const double second = step(ep, c, EnvMode::kReal).reward.info_gain;
    CHECK(first + second == doctest::Approx(gb + gc).epsilon(1e-15));
    CHECK(second == gc);
  }
  SUBCASE("surrogate gain uses supported depth and commits nothing") {
    step(ep, a, EnvMode::kReal);
    const std::size_t covered = ep.grid.covered_cells();
    const ActionSequence b = looking_at(cfg, Vec3(4, -7, 5), Vec3(0, 0, 0.5));
    const auto r = step(ep, b, EnvMode::kSurrogate);
    CHECK(r.reward.info_gain >= 0.0);
    CHECK(ep.grid.covered_cells() == covered);
  }
}

TEST_CASE("action cost") {
  const EnvConfig cfg = tiny_env(3);
  const ActionSequence base = static_sequence(3, default_camera(cfg.rig));
  CHECK(action_cost(base, &base) == 0.0);
  CHECK(action_cost(base) == 0.0);

  ActionSequence moved = base;
  moved.actions[1].pose.translation += moved.actions[1].pose.rotation * Vec3(1, 0, 0);
  CHECK(action_cost(moved, &base) == doctest::Approx(1.0).epsilon(1e-12));

  ActionSequence yawed = base;
  Mat3 r;
  r << 0, 0, 1, 0, 1, 0, -1, 0, 0;  // 90 degrees about camera y
  yawed.actions[2].pose.rotation = r * base.actions[2].pose.rotation;
  yawed.actions[2].pose.translation = r * base.actions[2].pose.translation;
  CHECK(action_cost(yawed, &base) == doctest::Approx(M_PI / 2).epsilon(1e-12));

  ActionSequence zoomed = zoom(base, 2.0, 2.0);
  CHECK(action_cost(zoomed, &base) == doctest::Approx(3 * std::log(2.0)).epsilon(1e-12));
  // Without a previous sequence, consecutive steps are compared.
  CHECK(action_cost(yawed) == doctest::Approx(M_PI / 2).epsilon(1e-12));
}

TEST_CASE("reward accounting and logs") {
  EnvConfig cfg = tiny_env(3);
  cfg.lambda = 0.25;
  cfg.gamma = 0.9;
  cfg.task_reward = [](const Episode& ep, const ActionSequence&, const std::vector<Frame>&) {
    return 0.5 * ep.k;
  };
  RandomPolicy policy(4, cfg.rig);
  const Episode ep = run_episode(cfg, 6, policy, 3);
  REQUIRE(ep.log.size() == 3);
  double last_coverage = 0.0;
  for (const auto& rec : ep.log) {
    const auto& r = rec.reward;
    CHECK(r.total == r.task + r.info_gain - r.lambda * r.cost);
    CHECK(r.task == 0.5 * rec.iteration);
    CHECK(rec.discount == doctest::Approx(std::pow(0.9, rec.iteration - 1)));
    CHECK(rec.coverage >= last_coverage);
    last_coverage = rec.coverage;
  }

  test::TempDir dir("log");
  write_episode_log(dir / "log.jsonl", ep);
  std::ifstream in(dir / "log.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const Json j = Json::parse(line);
    CHECK(j.at("reward").at("total").get<double>() == ep.log[lines].reward.total);
    CHECK(j.at("actions_sha256").get<std::string>().size() == 64);
    ++lines;
  }
  CHECK(lines == 3);
}

TEST_CASE("policies") {
  const EnvConfig cfg = tiny_env(3);
  const Episode ep = reset(cfg, 1);
  RandomPolicy p1(9, cfg.rig), p2(9, cfg.rig);
  const ActionSequence a = p1.next(ep);
  CHECK(a == p2.next(ep));
  CHECK_NOTHROW(a.validate());
  CHECK(a.horizon() == 3);

  const ActionSequence s1 = static_sequence(3, default_camera(cfg.rig));
  const ActionSequence s2 = orbit(3, cfg.rig, 9.0, 5.0, 0.0, 30.0);
  ScriptedPolicy script({s1, s2});
  CHECK(script.next(ep) == s1);
  CHECK(script.next(ep) == s2);
  CHECK(script.next(ep) == s1);
}

TEST_CASE("env config JSON") {
  EnvConfig cfg = tiny_env(5);
  cfg.gamma = 0.95;
  cfg.mode = EnvMode::kSurrogate;
  cfg.pipeline.retrieval.time_local = true;
  const Json j = env_config_to_json(cfg);
  const EnvConfig back = env_config_from_json(j);
  CHECK(env_config_to_json(back) == j);
  CHECK(back.mode == EnvMode::kSurrogate);
  CHECK(back.horizon() == 5);
  CHECK(back.rig.width == 24);

  CHECK_NOTHROW(env_config_from_json(Json::object()));
  CHECK_THROWS_AS(env_config_from_json(Json{{"envv", Json::object()}}), InvalidArgument);
  CHECK_THROWS_AS(env_config_from_json(Json{{"env", {{"gama", 0.9}}}}), InvalidArgument);
  CHECK_THROWS_AS(env_config_from_json(Json{{"env", {{"mode", "dream"}}}}), InvalidArgument);
  CHECK_THROWS_AS(env_mode_from_string("virtual"), InvalidArgument);
}
