#include "aw4re/metrics.hpp"

#include <cmath>
#include <sstream>

#include "aw4re/error.hpp"

namespace aw4re {

namespace {

constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

const std::vector<double>& gaussian_kernel() {
  static const std::vector<double> kernel = [] {
    std::vector<double> g(kSsimWindow);
    const int r = kSsimWindow / 2;
    double sum = 0.0;
    for (int k = 0; k < kSsimWindow; ++k) {
      g[k] = std::exp(-double((k - r) * (k - r)) / (2.0 * kSsimSigma * kSsimSigma));
      sum += g[k];
    }
    for (double& v : g) v /= sum;
    return g;
  }();
  return kernel;
}

void check_pair(const RgbImage& a, const RgbImage& b, const MaskImage* mask) {
  if (!a.same_size(b)) throw MetricError("image sizes differ");
  if (mask && !mask->same_size(a)) throw MetricError("mask size differs from image");
}

std::vector<double> luminance(const RgbImage& img) {
  std::vector<double> y(img.pixel_count());
  for (std::size_t p = 0; p < y.size(); ++p) {
    y[p] = 0.299 * img.data[p * 3] + 0.587 * img.data[p * 3 + 1] +
           0.114 * img.data[p * 3 + 2];
  }
  return y;
}

std::vector<double> channel(const RgbImage& img, int c) {
  std::vector<double> out(img.pixel_count());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = img.data[p * 3 + c];
  return out;
}

// 2x2 box average; odd trailing rows/columns are dropped.
std::vector<double> downsample(const std::vector<double>& x, int w, int h) {
  const int w2 = w / 2, h2 = h / 2;
  std::vector<double> out(static_cast<std::size_t>(w2) * h2);
  for (int y = 0; y < h2; ++y) {
    for (int xx = 0; xx < w2; ++xx) {
      const std::size_t a = static_cast<std::size_t>(2 * y) * w + 2 * xx;
      out[static_cast<std::size_t>(y) * w2 + xx] =
          0.25 * (x[a] + x[a + 1] + x[a + w] + x[a + w + 1]);
    }
  }
  return out;
}

// A coarse pixel is in the mask when all four children are.
MaskImage downsample(const MaskImage& m) {
  MaskImage out(m.width / 2, m.height / 2, 0);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = m.at(2 * x, 2 * y) && m.at(2 * x + 1, 2 * y) &&
                     m.at(2 * x, 2 * y + 1) && m.at(2 * x + 1, 2 * y + 1);
    }
  }
  return out;
}

bool has_window(int w, int h, const MaskImage* mask) {
  if (w < kSsimWindow || h < kSsimWindow) return false;
  if (!mask) return true;
  const int r = kSsimWindow / 2;
  for (int y = r; y < h - r; ++y) {
    for (int x = r; x < w - r; ++x) {
      if (mask->at(x, y)) return true;
    }
  }
  return false;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

template <typename Get>
std::optional<double> mean_of(const std::vector<FrameMetrics>& frames, Get get) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames) {
    if (auto v = get(f)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

void aggregate(MetricsReport& r) {
  r.full.psnr = mean_of(r.per_frame, [](const FrameMetrics& f) { return f.full.psnr; });
  r.full.ssim = mean_of(r.per_frame, [](const FrameMetrics& f) { return f.full.ssim; });
  r.full.perceptual =
      mean_of(r.per_frame, [](const FrameMetrics& f) { return f.full.perceptual; });
  r.evidence.psnr =
      mean_of(r.per_frame, [](const FrameMetrics& f) { return f.evidence.psnr; });
  r.evidence.ssim =
      mean_of(r.per_frame, [](const FrameMetrics& f) { return f.evidence.ssim; });
  r.evidence.perceptual =
      mean_of(r.per_frame, [](const FrameMetrics& f) { return f.evidence.perceptual; });
}

double support_density(const MaskImage& m) {
  return m.pixel_count() ? static_cast<double>(count_set(m)) / m.pixel_count() : 0.0;
}

}  // namespace

double psnr(const RgbImage& a, const RgbImage& b, const MaskImage* mask) {
  check_pair(a, b, mask);
  double sse = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    if (mask && !mask->data[p]) continue;
    for (int c = 0; c < 3; ++c) {
      const double d = double(a.data[p * 3 + c]) - double(b.data[p * 3 + c]);
      sse += d * d;
    }
    n += 3;
  }
  if (n == 0) throw MetricError("psnr over an empty region");
  const double mse = sse / static_cast<double>(n);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim_plane(const std::vector<double>& x, const std::vector<double>& y, int w,
                  int h, const MaskImage* mask) {
  if (w < kSsimWindow || h < kSsimWindow) {
    throw MetricError("image smaller than the 11x11 SSIM window");
  }
  const auto& g = gaussian_kernel();
  const int r = kSsimWindow / 2;
  const int ow = w - 2 * r, oh = h - 2 * r;

  // Horizontal pass over the five moments, then vertical.
  std::vector<double> hx(static_cast<std::size_t>(ow) * h), hy(hx.size()), hxx(hx.size()),
      hyy(hx.size()), hxy(hx.size());
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < ow; ++col) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int k = 0; k < kSsimWindow; ++k) {
        const std::size_t p = static_cast<std::size_t>(row) * w + col + k;
        const double a = x[p], b = y[p];
        sx += g[k] * a;
        sy += g[k] * b;
        sxx += g[k] * a * a;
        syy += g[k] * b * b;
        sxy += g[k] * a * b;
      }
      const std::size_t q = static_cast<std::size_t>(row) * ow + col;
      hx[q] = sx;
      hy[q] = sy;
      hxx[q] = sxx;
      hyy[q] = syy;
      hxy[q] = sxy;
    }
  }
  double total = 0.0;
  std::size_t count = 0;
  for (int row = 0; row < oh; ++row) {
    for (int col = 0; col < ow; ++col) {
      if (mask && !mask->at(col + r, row + r)) continue;
      double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
      for (int k = 0; k < kSsimWindow; ++k) {
        const std::size_t q = static_cast<std::size_t>(row + k) * ow + col;
        mx += g[k] * hx[q];
        my += g[k] * hy[q];
        exx += g[k] * hxx[q];
        eyy += g[k] * hyy[q];
        exy += g[k] * hxy[q];
      }
      const double vx = exx - mx * mx, vy = eyy - my * my, cxy = exy - mx * my;
      total += ((2 * mx * my + kC1) * (2 * cxy + kC2)) /
               ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++count;
    }
  }
  if (count == 0) throw MetricError("no SSIM window centered inside the mask");
  return total / static_cast<double>(count);
}

double ssim(const RgbImage& a, const RgbImage& b, const MaskImage* mask) {
  check_pair(a, b, mask);
  return ssim_plane(luminance(a), luminance(b), a.width, a.height, mask);
}

double perceptual_proxy(const RgbImage& a, const RgbImage& b, const MaskImage* mask) {
  check_pair(a, b, mask);
  std::vector<std::vector<double>> xa(3), xb(3);
  for (int c = 0; c < 3; ++c) {
    xa[c] = channel(a, c);
    xb[c] = channel(b, c);
  }
  std::optional<MaskImage> m;
  if (mask) m = *mask;
  int w = a.width, h = a.height;
  std::vector<double> dists;
  for (int scale = 0; scale < 3; ++scale) {
    if (scale > 0) {
      for (int c = 0; c < 3; ++c) {
        xa[c] = downsample(xa[c], w, h);
        xb[c] = downsample(xb[c], w, h);
      }
      if (m) m = downsample(*m);
      w /= 2;
      h /= 2;
    }
    const MaskImage* mp = m ? &*m : nullptr;
    if (!has_window(w, h, mp)) continue;
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += ssim_plane(xa[c], xb[c], w, h, mp);
    dists.push_back((1.0 - s / 3.0) / 2.0);
  }
  if (dists.empty()) throw MetricError("no scale has an SSIM window inside the region");
  return mean(dists);
}

std::optional<double> temporal_consistency(const std::vector<RgbImage>& frames,
                                           const std::vector<MaskImage>* masks) {
  if (frames.size() < 2) throw MetricError("temporal consistency needs >= 2 frames");
  if (masks && masks->size() != frames.size()) {
    throw MetricError("mask count differs from frame count");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 1; t < frames.size(); ++t) {
    if (!masks) {
      sum += perceptual_proxy(frames[t - 1], frames[t]);
      ++n;
      continue;
    }
    const auto& m0 = (*masks)[t - 1];
    const auto& m1 = (*masks)[t];
    if (!m0.same_size(m1)) throw MetricError("mask sizes differ");
    MaskImage both(m0.width, m0.height, 0);
    for (std::size_t p = 0; p < both.data.size(); ++p) both.data[p] = m0.data[p] && m1.data[p];
    try {
      sum += perceptual_proxy(frames[t - 1], frames[t], &both);
      ++n;
    } catch (const MetricError&) {
      // empty or too-thin intersection: pair absent
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::size_t largest_component(const MaskImage& mask) {
  std::vector<char> seen(mask.pixel_count(), 0);
  std::vector<int> stack;
  std::size_t best = 0;
  const int w = mask.width, h = mask.height;
  for (int start = 0; start < static_cast<int>(mask.pixel_count()); ++start) {
    if (!mask.data[start] || seen[start]) continue;
    std::size_t size = 0;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      ++size;
      const int x = p % w, y = p / w;
      const int next[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& q : next) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= w || q[1] >= h) continue;
        const int k = q[1] * w + q[0];
        if (mask.data[k] && !seen[k]) {
          seen[k] = 1;
          stack.push_back(k);
        }
      }
    }
    best = std::max(best, size);
  }
  return best;
}

MetricsReport evaluate_query(const std::vector<CompletedObservation>& predicted,
                             const std::vector<Frame>& reference) {
  if (predicted.size() != reference.size()) {
    throw MetricError("prediction and reference lengths differ");
  }
  MetricsReport r;
  r.has_reference = true;
  r.per_frame.resize(predicted.size());
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    const auto& pred = predicted[t];
    const auto& ref = reference[t].rgb;
    FrameMetrics& f = r.per_frame[t];
    f.time = static_cast<int>(t) + 1;
    f.support_density = support_density(pred.support_mask);
    f.full.psnr = psnr(pred.rgb, ref);
    f.full.ssim = ssim(pred.rgb, ref);
    f.full.perceptual = perceptual_proxy(pred.rgb, ref);
    const MaskImage& m = pred.support_mask;
    if (count_set(m) > 0) {
      f.evidence.psnr = psnr(pred.rgb, ref, &m);
      if (largest_component(m) >= kMinEvidenceComponent) {
        try {
          f.evidence.ssim = ssim(pred.rgb, ref, &m);
          f.evidence.perceptual = perceptual_proxy(pred.rgb, ref, &m);
        } catch (const MetricError&) {
        }
      }
    }
  }
  aggregate(r);
  if (predicted.size() >= 2) {
    std::vector<RgbImage> frames;
    std::vector<MaskImage> masks;
    for (const auto& p : predicted) {
      frames.push_back(p.rgb);
      masks.push_back(p.support_mask);
    }
    r.full_tc = temporal_consistency(frames);
    r.evidence_tc = temporal_consistency(frames, &masks);
  }
  return r;
}

MetricsReport evaluate_query(const std::vector<CompletedObservation>& predicted,
                             const std::vector<PartialObservation>& partials) {
  if (predicted.size() != partials.size()) {
    throw MetricError("prediction and partial lengths differ");
  }
  MetricsReport r;
  r.has_reference = false;
  r.per_frame.resize(predicted.size());
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    FrameMetrics& f = r.per_frame[t];
    f.time = static_cast<int>(t) + 1;
    const MaskImage& m = partials[t].support_mask;
    f.support_density = support_density(m);
    if (count_set(m) > 0) f.evidence.psnr = psnr(predicted[t].rgb, partials[t].rgb, &m);
  }
  r.evidence.psnr =
      mean_of(r.per_frame, [](const FrameMetrics& f) { return f.evidence.psnr; });
  if (predicted.size() >= 2) {
    std::vector<RgbImage> frames;
    for (const auto& p : predicted) frames.push_back(p.rgb);
    r.full_tc = temporal_consistency(frames);
  }
  return r;
}

namespace {

nlohmann::json block_json(const MetricBlock& b) {
  nlohmann::json j = nlohmann::json::object();
  if (b.psnr) j["psnr"] = *b.psnr;
  if (b.ssim) j["ssim"] = *b.ssim;
  if (b.perceptual) j["perceptual"] = *b.perceptual;
  return j;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream out;
  out.precision(10);
  out << *v;
  return out.str();
}

}  // namespace

nlohmann::json report_to_json(const MetricsReport& r, bool per_frame) {
  nlohmann::json j;
  if (r.has_reference) j["full"] = block_json(r.full);
  j["evidence"] = block_json(r.evidence);
  nlohmann::json temporal = nlohmann::json::object();
  if (r.full_tc) temporal["full_tc"] = *r.full_tc;
  if (r.has_reference && r.evidence_tc) temporal["evidence_tc"] = *r.evidence_tc;
  j["temporal"] = temporal;
  j["metadata"] = {{"query_id", r.query_id},
                   {"mode", r.mode},
                   {"config_hash", r.config_hash},
                   {"has_reference", r.has_reference},
                   {"psnr_cap_db", kPsnrCap},
                   {"perceptual", "multiscale-ssim-proxy"}};
  if (per_frame) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : r.per_frame) {
      nlohmann::json fj = {{"time", f.time}, {"support_density", f.support_density}};
      if (r.has_reference) fj["full"] = block_json(f.full);
      fj["evidence"] = block_json(f.evidence);
      frames.push_back(fj);
    }
    j["per_frame"] = frames;
  }
  return j;
}

std::string csv_header() {
  return "query_id,mode,full_psnr,full_ssim,full_perceptual,evidence_psnr,"
         "evidence_ssim,evidence_perceptual,full_tc,evidence_tc";
}

std::string csv_row(const MetricsReport& r) {
  const bool ref = r.has_reference;
  return r.query_id + "," + r.mode + "," + cell(ref ? r.full.psnr : std::nullopt) + "," +
         cell(ref ? r.full.ssim : std::nullopt) + "," +
         cell(ref ? r.full.perceptual : std::nullopt) + "," + cell(r.evidence.psnr) + "," +
         cell(r.evidence.ssim) + "," + cell(r.evidence.perceptual) + "," +
         cell(r.full_tc) + "," + cell(ref ? r.evidence_tc : std::nullopt);
}

}  // namespace aw4re
