#include "aw4re/serialization.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <memory>

#include "aw4re/error.hpp"

namespace aw4re {

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw InvalidArgument("expected a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json rgb_json(const Rgb& c) { return Json::array({c[0], c[1], c[2]}); }

Rgb rgb_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("expected RGB triple");
  return {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(),
          j[2].get<std::uint8_t>()};
}

const char* shape_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::kPlane:
      return "plane";
    case ShapeKind::kBox:
      return "box";
    case ShapeKind::kSphere:
      return "sphere";
  }
  return "?";
}

ShapeKind shape_from(const std::string& s) {
  if (s == "plane") return ShapeKind::kPlane;
  if (s == "box") return ShapeKind::kBox;
  if (s == "sphere") return ShapeKind::kSphere;
  throw InvalidArgument("unknown primitive kind '" + s + "'");
}

Json primitive_json(const Primitive& p) {
  return Json{{"kind", shape_name(p.kind)},
              {"center", vec_json(p.center)},
              {"half_extents", vec_json(p.half_extents)},
              {"radius", p.radius},
              {"normal", vec_json(p.normal)},
              {"texture",
               {{"seed", p.texture.seed},
                {"color_a", rgb_json(p.texture.color_a)},
                {"color_b", rgb_json(p.texture.color_b)},
                {"frequency", p.texture.frequency}}}};
}

Primitive primitive_from(const Json& j) {
  Primitive p;
  p.kind = shape_from(j.at("kind").get<std::string>());
  p.center = vec_from(j.at("center"));
  p.half_extents = vec_from(j.at("half_extents"));
  p.radius = j.at("radius").get<double>();
  p.normal = vec_from(j.at("normal"));
  const auto& t = j.at("texture");
  p.texture.seed = t.at("seed").get<std::uint64_t>();
  p.texture.color_a = rgb_from(t.at("color_a"));
  p.texture.color_b = rgb_from(t.at("color_b"));
  p.texture.frequency = t.at("frequency").get<double>();
  return p;
}

template <typename Fn>
auto wrap_json_errors(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("invalid ") + what + ": " + e.what());
  }
}

}  // namespace

void to_json(Json& j, const CameraAction& a) {
  const auto& k = a.intrinsics;
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(a.pose.rotation(r, c));
  }
  j = Json{{"fx", k.fx},         {"fy", k.fy},
           {"cx", k.cx},         {"cy", k.cy},
           {"width", k.width},   {"height", k.height},
           {"near", k.near},     {"far", k.far},
           {"rotation", rot},    {"translation", vec_json(a.pose.translation)},
           {"time", a.time}};
}

void from_json(const Json& j, CameraAction& a) {
  wrap_json_errors("camera action", [&] {
    auto& k = a.intrinsics;
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
    k.near = j.at("near").get<double>();
    k.far = j.at("far").get<double>();
    const auto& rot = j.at("rotation");
    if (!rot.is_array() || rot.size() != 9) {
      throw InvalidArgument("rotation must have 9 entries");
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a.pose.rotation(r, c) = rot[r * 3 + c].get<double>();
    }
    a.pose.translation = vec_from(j.at("translation"));
    a.time = j.at("time").get<int>();
    return 0;
  });
  a.intrinsics.validate();
  a.pose.validate();
}

Json actions_to_json(const ActionSequence& seq) {
  Json arr = Json::array();
  for (const auto& a : seq.actions) arr.push_back(a);
  return arr;
}

ActionSequence actions_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidArgument("action file must hold a JSON array");
  ActionSequence seq;
  for (const auto& item : j) seq.actions.push_back(item.get<CameraAction>());
  seq.validate();
  return seq;
}

void to_json(Json& j, const SceneConfig& c) {
  j = Json{{"n_static", c.n_static},   {"n_dynamic", c.n_dynamic},
           {"horizon", c.horizon},     {"extent", c.extent},
           {"motion", c.motion},       {"min_speed", c.min_speed},
           {"max_speed", c.max_speed}};
}

void from_json(const Json& j, SceneConfig& c) {
  wrap_json_errors("scene config", [&] {
    if (!j.is_object()) throw InvalidArgument("scene config must be an object");
    for (const auto& [key, _] : j.items()) {
      static const char* known[] = {"n_static", "n_dynamic", "horizon", "extent",
                                    "motion",   "min_speed", "max_speed"};
      if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
        throw InvalidArgument("unknown scene config key '" + key + "'");
      }
    }
    c.n_static = j.value("n_static", c.n_static);
    c.n_dynamic = j.value("n_dynamic", c.n_dynamic);
    c.horizon = j.value("horizon", c.horizon);
    c.extent = j.value("extent", c.extent);
    c.motion = j.value("motion", c.motion);
    c.min_speed = j.value("min_speed", c.min_speed);
    c.max_speed = j.value("max_speed", c.max_speed);
    return 0;
  });
  c.validate();
}

void to_json(Json& j, const SceneSpec& s) {
  Json statics = Json::array();
  for (const auto& p : s.statics) statics.push_back(primitive_json(p));
  Json dynamics = Json::array();
  for (const auto& d : s.dynamics) {
    const auto& m = d.motion;
    dynamics.push_back(
        {{"shape", primitive_json(d.shape)},
         {"motion",
          {{"kind", m.kind == MotionKind::kLinear ? "linear" : "circular"},
           {"velocity", vec_json(m.velocity)},
           {"pivot", vec_json(m.pivot)},
           {"orbit_radius", m.orbit_radius},
           {"angular_rate", m.angular_rate},
           {"phase", m.phase}}}});
  }
  j = Json{{"seed", s.seed},
           {"config", s.config},
           {"horizon", s.horizon},
           {"statics", statics},
           {"dynamics", dynamics},
           {"light",
            {{"ambient", s.light.ambient},
             {"diffuse", s.light.diffuse},
             {"direction", vec_json(s.light.direction)}}},
           {"sky", rgb_json(s.sky)},
           {"bounds_min", vec_json(s.bounds_min)},
           {"bounds_max", vec_json(s.bounds_max)}};
}

void from_json(const Json& j, SceneSpec& s) {
  wrap_json_errors("scene spec", [&] {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.config = j.at("config").get<SceneConfig>();
    s.horizon = j.at("horizon").get<int>();
    s.statics.clear();
    for (const auto& p : j.at("statics")) s.statics.push_back(primitive_from(p));
    s.dynamics.clear();
    for (const auto& d : j.at("dynamics")) {
      DynamicObject obj;
      obj.shape = primitive_from(d.at("shape"));
      const auto& m = d.at("motion");
      const auto kind = m.at("kind").get<std::string>();
      if (kind != "linear" && kind != "circular") {
        throw InvalidArgument("unknown motion kind '" + kind + "'");
      }
      obj.motion.kind =
          kind == "linear" ? MotionKind::kLinear : MotionKind::kCircular;
      obj.motion.velocity = vec_from(m.at("velocity"));
      obj.motion.pivot = vec_from(m.at("pivot"));
      obj.motion.orbit_radius = m.at("orbit_radius").get<double>();
      obj.motion.angular_rate = m.at("angular_rate").get<double>();
      obj.motion.phase = m.at("phase").get<double>();
      s.dynamics.push_back(obj);
    }
    const auto& l = j.at("light");
    s.light.ambient = l.at("ambient").get<double>();
    s.light.diffuse = l.at("diffuse").get<double>();
    s.light.direction = vec_from(l.at("direction"));
    s.sky = rgb_from(j.at("sky"));
    s.bounds_min = vec_from(j.at("bounds_min"));
    s.bounds_max = vec_from(j.at("bounds_max"));
    return 0;
  });
  if (s.horizon < 1) throw InvalidArgument("scene horizon must be >= 1");
  if (s.statics.empty()) throw InvalidArgument("scene needs a static primitive");
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

std::string sha256_hex(const void* data, std::size_t size) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data, size, digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 15]);
  }
  return out;
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(text.data(), text.size());
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string json_hash(const Json& j) { return sha256_hex(j.dump()); }

}  // namespace aw4re
