#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aw4re/decoder.hpp"
#include "aw4re/image.hpp"

namespace aw4re {

struct CompletedObservation {
  RgbImage rgb;
  MaskImage support_mask;  // inherited from the partial observation
  std::string source;      // "baseline" or "external:<plugin id>"
};

// Spatial pull-push fill of every frame, then a forward temporal pass: an
// unsupported pixel whose previous-frame pixel was supported or propagated
// becomes the rounded mean of the spatial fill and the previous completed
// value (the previous value alone when the frame has no support at all).
// Supported pixels are never modified. Throws InvalidArgument on size
// mismatch.
std::vector<CompletedObservation> complete_baseline(
    const std::vector<PartialObservation>& partials);

struct PluginDescriptor {
  std::filesystem::path executable;
  std::string id;  // defaults to the executable file name
  double timeout_seconds = 600.0;
  // Reject outputs that move a supported pixel by more than 2/255.
  bool strict = false;
  // Parent of the request/response directories; a fresh temporary directory
  // when empty. Directories are kept when keep_files is set.
  std::filesystem::path work_dir;
  bool keep_files = false;
};

inline constexpr int kEvidenceTolerance = 2;

// Request directory: manifest.json, frame_%04d.png, mask_%04d.png (t from
// 1). The plugin runs as `<executable> <request_dir> <response_dir>` and
// must write frame_%04d.png for every t and exit with status 0.
// Throws PluginTimeout, MalformedResponse, EvidenceViolation or PluginError.
std::vector<CompletedObservation> complete_external(
    const std::vector<PartialObservation>& partials, const PluginDescriptor& plugin);

void write_completion_request(const std::vector<PartialObservation>& partials,
                              const std::filesystem::path& request_dir);

}  // namespace aw4re
