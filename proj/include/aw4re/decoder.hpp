#pragma once

#include <string>
#include <vector>

#include "aw4re/corpus.hpp"
#include "aw4re/image.hpp"
#include "aw4re/proxy.hpp"
#include "aw4re/retrieval.hpp"

namespace aw4re {

// Evidence-backed rendering of one query frame. Unsupported pixels are
// black with depth 0.
struct PartialObservation {
  RgbImage rgb;
  MaskImage support_mask;
  double support_density = 0.0;
  DepthImage depth_buffer;  // query z-depth of the winning evidence
  // Diagnostics.
  MaskImage splat_mask;   // pixels written directly by a proxy point
  MaskImage free_mask;    // pixels an aligned on-time record saw as empty
  std::vector<int> origin;  // winning point index per pixel, -1 if none
  double zoom_ratio = 1.0;
  std::vector<std::string> warnings;

  int width() const { return rgb.width; }
  int height() const { return rgb.height; }
};

struct DecoderConfig {
  double dense_threshold = 0.6;
  double max_fill_radius = 8.0;  // pixels at native scale
  int base_levels = 4;
  int max_splat_size = 16;
  ProxyOptions proxy;

  void validate() const;
};

inline constexpr double kDepthTieTolerance = 1e-6;

// Projects the cloud into the query camera.
//
// Points of an aligned source (on-time, same camera as the query) own their
// source pixel: a point writes its stored color and depth, a free ray marks
// the pixel empty. The smallest aligned source key wins a pixel.
//
// Every other point covers an s x s square, s = round(query footprint ratio)
// clamped to [1, max_splat], through a z-buffer. Depths within 1e-6 are
// resolved by provenance (on-time first), then source key, then source
// pixel.
PartialObservation splat(const PointCloud& cloud, const CameraAction& query,
                         int max_splat_size = 16);

// Identity when support_density >= dense_threshold. Otherwise pull-push
// fills color and depth from the supported pixels; a filled pixel becomes
// supported when it lies within max_fill_radius * zoom_ratio of the original
// support and is not marked empty by aligned evidence.
PartialObservation densify(const PartialObservation& partial,
                           const CameraAction& query, double zoom_ratio,
                           const DecoderConfig& cfg);

// build_proxy, splat, densify. zoom_ratio is the query focal length over the
// median source focal length (1 without sources).
PartialObservation decode(const CameraAction& query,
                          const EvidenceSelection& selection,
                          const EvidenceCorpus& corpus,
                          const DecoderConfig& cfg = {});

}  // namespace aw4re
