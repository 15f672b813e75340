#pragma once

#include <filesystem>
#include <string>

#include "aw4re/geometry.hpp"
#include "aw4re/scene.hpp"
#include "json.hpp"

namespace aw4re {

using Json = nlohmann::json;

// Camera actions: {fx, fy, cx, cy, width, height, near, far,
// rotation: 9 floats row-major, translation: 3 floats, time}.
void to_json(Json& j, const CameraAction& a);
void from_json(const Json& j, CameraAction& a);

// A JSON array of camera actions.
Json actions_to_json(const ActionSequence& seq);
ActionSequence actions_from_json(const Json& j);

void to_json(Json& j, const SceneConfig& c);
void from_json(const Json& j, SceneConfig& c);
void to_json(Json& j, const SceneSpec& s);
void from_json(const Json& j, SceneSpec& s);

// Reads and parses a JSON file. Throws Error naming the path on failure.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

// Lowercase hex SHA-256.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& path);

// SHA-256 of the canonical (sorted-key, compact) dump.
std::string json_hash(const Json& j);

}  // namespace aw4re
