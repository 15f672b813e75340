#pragma once

namespace aw4re {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace aw4re
