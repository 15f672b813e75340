#include "aw4re/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "aw4re/error.hpp"
#include "aw4re/fill.hpp"

namespace aw4re {

namespace {

double mean_focal(const CameraIntrinsics& k) { return 0.5 * (k.fx + k.fy); }

PartialObservation blank(const CameraAction& query) {
  const auto& k = query.intrinsics;
  PartialObservation out;
  out.rgb = RgbImage(k.width, k.height, 0);
  out.support_mask = MaskImage(k.width, k.height, 0);
  out.depth_buffer = DepthImage(k.width, k.height, 0.0f);
  out.splat_mask = MaskImage(k.width, k.height, 0);
  out.free_mask = MaskImage(k.width, k.height, 0);
  out.origin.assign(out.rgb.pixel_count(), -1);
  return out;
}

double density(const MaskImage& mask) {
  if (mask.pixel_count() == 0) return 0.0;
  return static_cast<double>(count_set(mask)) / static_cast<double>(mask.pixel_count());
}

// True when a should replace b in a depth tie.
bool wins_tie(const ProxyPoint& a, const ProxyPoint& b) {
  return std::tuple(a.provenance, a.source, a.v, a.u) <
         std::tuple(b.provenance, b.source, b.v, b.u);
}

}  // namespace

void DecoderConfig::validate() const {
  if (!(dense_threshold >= 0.0 && dense_threshold <= 1.0)) {
    throw InvalidArgument("dense_threshold must be in [0, 1]");
  }
  if (!(max_fill_radius >= 0.0)) throw InvalidArgument("max_fill_radius must be >= 0");
  if (base_levels < 0) throw InvalidArgument("base_levels must be >= 0");
  if (max_splat_size < 1) throw InvalidArgument("max_splat_size must be >= 1");
}

PartialObservation splat(const PointCloud& cloud, const CameraAction& query,
                         int max_splat_size) {
  query.intrinsics.validate();
  PartialObservation out = blank(query);
  const auto& k = query.intrinsics;
  const int w = k.width, h = k.height;

  // Aligned sources lock their own pixels.
  std::vector<const ProxySource*> aligned;
  for (const auto& s : cloud.sources) {
    if (s.provenance == Provenance::kOnTime && s.key.time == query.time &&
        same_camera(s.action, query)) {
      aligned.push_back(&s);
    }
  }
  auto is_aligned = [&](const RecordKey& key) {
    return std::any_of(aligned.begin(), aligned.end(),
                       [&](const ProxySource* s) { return s->key == key; });
  };
  std::vector<RecordKey> owner(out.rgb.pixel_count());
  std::vector<char> locked(out.rgb.pixel_count(), 0);
  auto claim = [&](const RecordKey& key, int u, int v) {
    if (u < 0 || v < 0 || u >= w || v >= h) return false;
    const std::size_t p = static_cast<std::size_t>(v) * w + u;
    if (locked[p] && !(key < owner[p])) return false;
    locked[p] = 1;
    owner[p] = key;
    return true;
  };

  std::vector<double> zbuf(out.rgb.pixel_count(), std::numeric_limits<double>::infinity());
  const double fq = mean_focal(k);

  if (!aligned.empty()) {
    for (int n = 0; n < static_cast<int>(cloud.points.size()); ++n) {
      const auto& pt = cloud.points[n];
      if (!is_aligned(pt.source) || !claim(pt.source, pt.u, pt.v)) continue;
      const std::size_t p = static_cast<std::size_t>(pt.v) * w + pt.u;
      out.origin[p] = n;
      out.free_mask.data[p] = 0;
    }
    for (const auto& ray : cloud.free_rays) {
      if (!is_aligned(ray.source) || !claim(ray.source, ray.u, ray.v)) continue;
      const std::size_t p = static_cast<std::size_t>(ray.v) * w + ray.u;
      out.origin[p] = -1;
      out.free_mask.data[p] = 1;
    }
  }

  for (int n = 0; n < static_cast<int>(cloud.points.size()); ++n) {
    const auto& pt = cloud.points[n];
    if (!aligned.empty() && is_aligned(pt.source)) continue;
    Projection proj;
    if (!try_project(pt.position, query, proj)) continue;
    if (!(proj.depth > k.near && proj.depth <= k.far)) continue;
    const ProxySource* src = cloud.find_source(pt.source);
    const double fs = src ? mean_focal(src->action.intrinsics) : fq;
    const double ratio = (fq / proj.depth) / (fs / static_cast<double>(pt.depth));
    const int side = static_cast<int>(
        std::clamp(std::round(ratio), 1.0, static_cast<double>(max_splat_size)));
    const double half = (side - 1) / 2.0;
    const double fx0 = std::floor(proj.pixel.x() - half);
    const double fy0 = std::floor(proj.pixel.y() - half);
    if (fx0 >= w || fy0 >= h || fx0 + side <= 0 || fy0 + side <= 0) continue;
    const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
    for (int y = std::max(0, y0); y < std::min(h, y0 + side); ++y) {
      for (int x = std::max(0, x0); x < std::min(w, x0 + side); ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        if (locked[p]) continue;
        const double cur = zbuf[p];
        bool take;
        if (out.origin[p] < 0) {
          take = true;
        } else if (proj.depth < cur - kDepthTieTolerance) {
          take = true;
        } else if (proj.depth <= cur + kDepthTieTolerance) {
          take = wins_tie(pt, cloud.points[out.origin[p]]);
        } else {
          take = false;
        }
        if (take) {
          zbuf[p] = proj.depth;
          out.origin[p] = n;
        }
      }
    }
  }

  for (std::size_t p = 0; p < out.origin.size(); ++p) {
    const int n = out.origin[p];
    if (n < 0) continue;
    const auto& pt = cloud.points[n];
    for (int c = 0; c < 3; ++c) out.rgb.data[p * 3 + c] = pt.color[c];
    out.depth_buffer.data[p] = locked[p] ? pt.depth : static_cast<float>(zbuf[p]);
    out.support_mask.data[p] = 1;
    out.splat_mask.data[p] = 1;
  }
  out.support_density = density(out.support_mask);
  return out;
}

PartialObservation densify(const PartialObservation& partial,
                           const CameraAction& query, double zoom_ratio,
                           const DecoderConfig& cfg) {
  cfg.validate();
  const auto& k = query.intrinsics;
  if (!partial.rgb.same_size(k.width, k.height)) {
    throw InvalidArgument("partial observation does not match the query size");
  }
  PartialObservation out = partial;
  out.zoom_ratio = zoom_ratio;
  if (partial.support_density >= cfg.dense_threshold) return out;
  if (count_set(partial.support_mask) == 0) return out;

  const int extra = zoom_ratio > 1.0 ? static_cast<int>(std::ceil(std::log2(zoom_ratio))) : 0;
  const int levels = cfg.base_levels + extra;

  MaskImage filled_rgb, filled_depth;
  const auto color = pull_push(to_float(partial.rgb), partial.support_mask, levels, filled_rgb);
  const auto depth = pull_push(partial.depth_buffer, partial.support_mask, levels, filled_depth);

  const double radius = cfg.max_fill_radius * zoom_ratio;
  const double r2 = radius * radius;
  const auto dist2 = squared_distance_to_set(partial.support_mask);
  for (std::size_t p = 0; p < out.rgb.pixel_count(); ++p) {
    if (partial.support_mask.data[p]) continue;
    if (!filled_rgb.data[p] || partial.free_mask.data[p] || dist2.data[p] > r2) continue;
    out.support_mask.data[p] = 1;
    for (int c = 0; c < 3; ++c) out.rgb.data[p * 3 + c] = to_byte(color.data[p * 3 + c]);
    out.depth_buffer.data[p] = filled_depth.data[p] ? depth.data[p] : 0.0f;
  }
  out.support_density = density(out.support_mask);
  return out;
}

PartialObservation decode(const CameraAction& query,
                          const EvidenceSelection& selection,
                          const EvidenceCorpus& corpus,
                          const DecoderConfig& cfg) {
  cfg.validate();
  ProxyResult proxy = build_proxy(query, selection, corpus, cfg.proxy);

  double zoom = 1.0;
  if (!proxy.cloud.sources.empty()) {
    std::vector<double> focals;
    for (const auto& s : proxy.cloud.sources) focals.push_back(mean_focal(s.action.intrinsics));
    std::sort(focals.begin(), focals.end());
    const std::size_t n = focals.size();
    const double median =
        n % 2 ? focals[n / 2] : 0.5 * (focals[n / 2 - 1] + focals[n / 2]);
    zoom = mean_focal(query.intrinsics) / median;
  }

  PartialObservation partial = splat(proxy.cloud, query, cfg.max_splat_size);
  PartialObservation out = densify(partial, query, zoom, cfg);
  out.warnings = std::move(proxy.warnings);
  if (proxy.empty_proxy) out.warnings.push_back("empty proxy: no usable evidence points");
  return out;
}

}  // namespace aw4re
