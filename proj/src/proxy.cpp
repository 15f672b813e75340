#include "aw4re/proxy.hpp"

#include <algorithm>
#include <fstream>

#include "aw4re/error.hpp"
#include "aw4re/parallel.hpp"

namespace aw4re {

const ProxySource* PointCloud::find_source(const RecordKey& key) const {
  for (const auto& s : sources) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

std::vector<int> static_mask_apply(const EvidenceRecord& record) {
  const Frame& f = *record.frame;
  if (!f.dynamic_mask) {
    throw MissingMask("record " + to_string(record.key()) + " has no dynamic mask");
  }
  if (!f.depth) {
    throw InvalidArgument("record " + to_string(record.key()) + " has no depth");
  }
  std::vector<int> out;
  const auto& depth = f.depth->data;
  const auto& mask = f.dynamic_mask->data;
  for (std::size_t k = 0; k < depth.size(); ++k) {
    if (mask[k] == 0 && depth[k] > 0.0f) out.push_back(static_cast<int>(k));
  }
  return out;
}

namespace {

struct SourcePoints {
  std::vector<ProxyPoint> points;
  std::vector<FreeRay> free_rays;
};

bool inside_dilated(const Vec3& p, const CameraAction& query, double dilation) {
  Projection proj;
  if (!try_project(p, query, proj)) return false;
  const auto& k = query.intrinsics;
  if (proj.depth > k.far) return false;
  const double mx = dilation * k.width, my = dilation * k.height;
  return proj.pixel.x() >= -mx && proj.pixel.x() < k.width + mx &&
         proj.pixel.y() >= -my && proj.pixel.y() < k.height + my;
}

SourcePoints lift(const EvidenceRecord& rec, Provenance provenance,
                  const std::vector<int>* pixels, const CameraAction& query,
                  const ProxyOptions& options) {
  SourcePoints out;
  const Frame& f = *rec.frame;
  const auto& depth = *f.depth;
  auto emit = [&](int k) {
    const int u = k % depth.width;
    const int v = k / depth.width;
    const float d = depth.data[k];
    if (!(d > 0.0f)) {
      if (provenance == Provenance::kOnTime) out.free_rays.push_back({rec.key(), u, v});
      return;
    }
    ProxyPoint p;
    try {
      p.position = unproject(Vec2(u + 0.5, v + 0.5), d, rec.action);
    } catch (const DepthOutOfRange&) {
      return;  // outside the source clip range; not usable evidence
    }
    if (options.frustum_prefilter && !inside_dilated(p.position, query, options.dilation)) {
      return;
    }
    p.color = {f.rgb.at(u, v, 0), f.rgb.at(u, v, 1), f.rgb.at(u, v, 2)};
    p.source = rec.key();
    p.u = u;
    p.v = v;
    p.depth = d;
    p.provenance = provenance;
    out.points.push_back(p);
  };
  if (pixels) {
    for (int k : *pixels) emit(k);
  } else {
    for (int k = 0; k < static_cast<int>(depth.data.size()); ++k) emit(k);
  }
  return out;
}

}  // namespace

ProxyResult build_proxy(const CameraAction& query,
                        const EvidenceSelection& selection,
                        const EvidenceCorpus& corpus,
                        const ProxyOptions& options) {
  ProxyResult result;

  struct Job {
    const EvidenceRecord* record;
    Provenance provenance;
    std::vector<int> pixels;  // off-time only
  };
  std::vector<Job> jobs;
  auto keys = selection.keys();
  std::sort(keys.begin(), keys.end());
  for (const auto& key : keys) {
    const auto* rec = corpus.find(key);
    if (!rec) {
      result.warnings.push_back("record " + to_string(key) + " not in corpus; skipped");
      continue;
    }
    if (!rec->usable_for_proxy()) {
      result.warnings.push_back("record " + to_string(key) + " has no depth; skipped");
      continue;
    }
    if (rec->time == selection.query_time) {
      jobs.push_back({rec, Provenance::kOnTime, {}});
      continue;
    }
    try {
      jobs.push_back({rec, Provenance::kOffTimeStatic, static_mask_apply(*rec)});
    } catch (const MissingMask& e) {
      result.warnings.push_back(std::string(e.what()) + "; off-time record skipped");
    }
  }

  std::vector<SourcePoints> lifted(jobs.size());
  parallel_for(0, static_cast<int>(jobs.size()), [&](int n) {
    const Job& job = jobs[n];
    lifted[n] = lift(*job.record, job.provenance,
                     job.provenance == Provenance::kOnTime ? nullptr : &job.pixels,
                     query, options);
  });

  PointCloud& cloud = result.cloud;
  for (std::size_t n = 0; n < jobs.size(); ++n) {
    cloud.sources.push_back({jobs[n].record->key(), jobs[n].record->action,
                             jobs[n].provenance});
    cloud.points.insert(cloud.points.end(), lifted[n].points.begin(),
                        lifted[n].points.end());
    cloud.free_rays.insert(cloud.free_rays.end(), lifted[n].free_rays.begin(),
                           lifted[n].free_rays.end());
  }
  result.empty_proxy = cloud.points.empty();
  return result;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\n"
         "end_header\n";
  out.precision(17);
  for (const auto& p : cloud.points) {
    out << p.position.x() << ' ' << p.position.y() << ' ' << p.position.z() << ' '
        << int(p.color[0]) << ' ' << int(p.color[1]) << ' ' << int(p.color[2])
        << '\n';
  }
}

}  // namespace aw4re
