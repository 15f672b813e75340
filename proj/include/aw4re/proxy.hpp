#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aw4re/corpus.hpp"
#include "aw4re/retrieval.hpp"
#include "aw4re/scene.hpp"

namespace aw4re {

enum class Provenance : std::uint8_t {
  kOnTime = 0,         // any pixel of a record captured at the query time
  kOffTimeStatic = 1,  // static pixel of a record from another time
};

struct ProxyPoint {
  Vec3 position = Vec3::Zero();
  Rgb color{0, 0, 0};
  RecordKey source;
  int u = 0;  // source pixel
  int v = 0;
  float depth = 0.0f;  // source depth, exactly as stored in the frame
  Provenance provenance = Provenance::kOnTime;
};

// A pixel of an on-time record whose ray hit nothing in (near, far].
struct FreeRay {
  RecordKey source;
  int u = 0;
  int v = 0;
};

struct ProxySource {
  RecordKey key;
  CameraAction action;
  Provenance provenance = Provenance::kOnTime;
};

// Local 3D proxy for one query frame. Points are ordered by source key, then
// row-major source pixel.
struct PointCloud {
  std::vector<ProxyPoint> points;
  std::vector<ProxySource> sources;
  std::vector<FreeRay> free_rays;

  bool empty() const { return points.empty(); }
  const ProxySource* find_source(const RecordKey& key) const;
};

struct ProxyOptions {
  // Keep only points that project into the query frustum dilated by
  // `dilation` of the image size on every side.
  bool frustum_prefilter = true;
  double dilation = 0.1;
};

struct ProxyResult {
  PointCloud cloud;
  bool empty_proxy = false;
  std::vector<std::string> warnings;
};

// Row-major pixel indices with dynamic_mask == 0 and depth > 0. Throws
// MissingMask when the record has no mask and InvalidArgument when it has
// no depth.
std::vector<int> static_mask_apply(const EvidenceRecord& record);

ProxyResult build_proxy(const CameraAction& query,
                        const EvidenceSelection& selection,
                        const EvidenceCorpus& corpus,
                        const ProxyOptions& options = {});

// ASCII PLY point list: x y z r g b.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace aw4re
