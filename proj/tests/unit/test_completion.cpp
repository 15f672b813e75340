#include <chrono>
#include <fstream>
#include <random>

#include "aw4re/completion.hpp"
#include "aw4re/error.hpp"
#include "aw4re/png_io.hpp"
#include "aw4re/serialization.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aw4re;
namespace fs = std::filesystem;

namespace {

PartialObservation random_partial(int w, int h, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PartialObservation p;
  p.rgb = RgbImage(w, h, 0);
  p.support_mask = MaskImage(w, h, 0);
  p.depth_buffer = DepthImage(w, h, 0.0f);
  std::size_t n = 0;
  for (std::size_t k = 0; k < p.rgb.pixel_count(); ++k) {
    if (u(rng) < density) {
      p.support_mask.data[k] = 1;
      for (int c = 0; c < 3; ++c) p.rgb.data[k * 3 + c] = static_cast<std::uint8_t>(rng() & 0xff);
      ++n;
    }
  }
  p.support_density = double(n) / double(p.rgb.pixel_count());
  return p;
}

PartialObservation full_partial(const RgbImage& rgb) {
  PartialObservation p;
  p.rgb = rgb;
  p.support_mask = MaskImage(rgb.width, rgb.height, 1);
  p.support_density = 1.0;
  return p;
}

PartialObservation empty_partial(int w, int h) {
  PartialObservation p;
  p.rgb = RgbImage(w, h, 0);
  p.support_mask = MaskImage(w, h, 0);
  return p;
}

fs::path write_script(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
  fs::permissions(p, fs::perms::owner_all);
  return p;
}

std::vector<PartialObservation> sample_sequence() {
  return {random_partial(24, 16, 0.5, 1), random_partial(24, 16, 0.3, 2),
          random_partial(24, 16, 0.7, 3)};
}

}  // namespace

TEST_CASE("baseline completion") {
  SUBCASE("fully supported frames pass through") {
    const SceneSpec scene = generate_scene(2, test::small_scene(3, 2));
    const auto frames =
        test::render_all(scene, static_sequence(3, default_camera(test::small_rig(32, 24))));
    std::vector<PartialObservation> parts;
    for (const auto& f : frames) parts.push_back(full_partial(f.rgb));
    const auto out = complete_baseline(parts);
    REQUIRE(out.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(out[t].rgb == frames[t].rgb);
      CHECK(out[t].source == "baseline");
    }
  }
  SUBCASE("a supported first frame propagates through an unsupported static sequence") {
    const SceneSpec scene = generate_scene(2, test::small_scene(1, 0));
    const Frame f = render_oracle(scene, default_camera(test::small_rig(32, 24), 1));
    std::vector<PartialObservation> parts{full_partial(f.rgb)};
    for (int t = 0; t < 4; ++t) parts.push_back(empty_partial(32, 24));
    const auto out = complete_baseline(parts);
    for (const auto& c : out) CHECK(c.rgb == f.rgb);
  }
  SUBCASE("a constant supported half fills the other half") {
    auto p = empty_partial(30, 20);
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 15; ++x) {
        p.support_mask.at(x, y) = 1;
        p.rgb.at(x, y, 0) = 17;
        p.rgb.at(x, y, 1) = 200;
        p.rgb.at(x, y, 2) = 99;
      }
    }
    p.support_density = 0.5;
    const auto out = complete_baseline({p});
    for (std::size_t k = 0; k < out[0].rgb.pixel_count(); ++k) {
      CHECK(out[0].rgb.data[k * 3] == 17);
      CHECK(out[0].rgb.data[k * 3 + 1] == 200);
      CHECK(out[0].rgb.data[k * 3 + 2] == 99);
    }
  }
  SUBCASE("supported pixels are never altered and output is deterministic") {
    std::vector<PartialObservation> parts;
    for (int t = 0; t < 6; ++t) parts.push_back(random_partial(33, 21, 0.05 * (t + 1), 10 + t));
    const auto out = complete_baseline(parts);
    const auto again = complete_baseline(parts);
    std::size_t moved = 0;
    for (std::size_t t = 0; t < parts.size(); ++t) {
      CHECK(out[t].support_mask == parts[t].support_mask);
      CHECK(out[t].rgb == again[t].rgb);
      for (std::size_t k = 0; k < parts[t].rgb.pixel_count(); ++k) {
        if (!parts[t].support_mask.data[k]) continue;
        for (int c = 0; c < 3; ++c) moved += out[t].rgb.data[k * 3 + c] != parts[t].rgb.data[k * 3 + c];
      }
    }
    CHECK(moved == 0);
  }
  SUBCASE("temporal blend is the rounded mean of fill and previous value") {
    auto a = empty_partial(8, 8);
    for (std::size_t k = 0; k < a.rgb.pixel_count(); ++k) {
      a.support_mask.data[k] = 1;
      a.rgb.data[k * 3] = 100;
    }
    a.support_density = 1.0;
    auto b = empty_partial(8, 8);
    b.support_mask.at(0, 0) = 1;
    b.rgb.at(0, 0, 0) = 51;
    b.support_density = 1.0 / 64;
    const auto out = complete_baseline({a, b});
    CHECK(out[1].rgb.at(0, 0, 0) == 51);
    CHECK(out[1].rgb.at(5, 5, 0) == 76);  // (51 + 100 + 1) / 2
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(complete_baseline({empty_partial(8, 8), empty_partial(9, 8)}),
                    InvalidArgument);
  }
}

TEST_CASE("completion request layout") {
  test::TempDir dir("request");
  const auto parts = sample_sequence();
  write_completion_request(parts, dir / "req");
  const Json m = read_json_file(dir.path() / "req" / "manifest.json");
  CHECK(m.at("count") == 3);
  CHECK(m.at("width") == 24);
  CHECK(read_png_rgb(dir.path() / "req" / "frame_0002.png") == parts[1].rgb);
  CHECK(read_png_mask(dir.path() / "req" / "mask_0003.png") == parts[2].support_mask);
}

TEST_CASE("external completion plugins") {
  test::TempDir dir("plugin");
  const auto parts = sample_sequence();
  PluginDescriptor d;
  d.timeout_seconds = 30;

  SUBCASE("identity plugin") {
    d.executable = write_script(dir.path(), "identity.sh", "cp \"$1\"/frame_*.png \"$2\"/");
    d.strict = true;
    const auto out = complete_external(parts, d);
    REQUIRE(out.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(out[t].rgb == parts[t].rgb);
      CHECK(out[t].support_mask == parts[t].support_mask);
      CHECK(out[t].source == "external:identity.sh");
    }
  }
  SUBCASE("wrong frame count") {
    d.executable = write_script(dir.path(), "short.sh",
                                "cp \"$1\"/frame_*.png \"$2\"/ && rm \"$2\"/frame_0003.png");
    CHECK_THROWS_AS(complete_external(parts, d), MalformedResponse);
  }
  SUBCASE("wrong frame size") {
    write_png_rgb(dir.path() / "tiny.png", RgbImage(4, 4));
    d.executable = write_script(
        dir.path(), "size.sh",
        "cp \"$1\"/frame_*.png \"$2\"/ && cp " + (dir.path() / "tiny.png").string() +
            " \"$2\"/frame_0002.png");
    CHECK_THROWS_AS(complete_external(parts, d), MalformedResponse);
  }
  SUBCASE("evidence violations") {
    // Pre-rendered responses with supported pixels moved by 10/255 or 2/255.
    for (int shift : {10, 2}) {
      const fs::path resp = dir.path() / ("resp" + std::to_string(shift));
      fs::create_directories(resp);
      for (std::size_t t = 0; t < parts.size(); ++t) {
        RgbImage moved = parts[t].rgb;
        for (auto& v : moved.data) v = static_cast<std::uint8_t>(v < 128 ? v + shift : v - shift);
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04zu.png", t + 1);
        write_png_rgb(resp / name, moved);
      }
    }
    d.strict = true;
    d.executable = write_script(dir.path(), "shift10.sh",
                                "cp " + (dir.path() / "resp10").string() + "/*.png \"$2\"/");
    CHECK_THROWS_AS(complete_external(parts, d), EvidenceViolation);
    d.strict = false;
    CHECK(complete_external(parts, d).size() == 3);
    d.strict = true;
    d.executable = write_script(dir.path(), "shift2.sh",
                                "cp " + (dir.path() / "resp2").string() + "/*.png \"$2\"/");
    CHECK(complete_external(parts, d).size() == 3);
  }
  SUBCASE("timeout kills the plugin") {
    d.executable = write_script(dir.path(), "slow.sh", "sleep 30");
    d.timeout_seconds = 0.5;
    const auto start = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(complete_external(parts, d), PluginTimeout);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(secs < 10.0);
  }
  SUBCASE("nonzero exit") {
    d.executable = write_script(dir.path(), "fail.sh", "exit 3");
    CHECK_THROWS_AS(complete_external(parts, d), PluginError);
  }
  SUBCASE("missing executable") {
    d.executable = dir.path() / "nope.sh";
    CHECK_THROWS_AS(complete_external(parts, d), PluginError);
  }
  SUBCASE("kept work directory") {
    d.executable = write_script(dir.path(), "identity.sh", "cp \"$1\"/frame_*.png \"$2\"/");
    d.work_dir = dir.path() / "work";
    d.keep_files = true;
    d.id = "copy";
    const auto out = complete_external(parts, d);
    CHECK(out[0].source == "external:copy");
    CHECK(fs::exists(dir.path() / "work"));
  }
}
