#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aw4re/completion.hpp"
#include "aw4re/decoder.hpp"
#include "aw4re/image.hpp"
#include "json.hpp"

namespace aw4re {

inline constexpr double kPsnrCap = 99.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
// Evidence SSIM and perceptual values need a connected support region of at
// least 32 x 32 pixels.
inline constexpr std::size_t kMinEvidenceComponent = 1024;

// 10 log10(255^2 / MSE) over all channels of the (masked) pixels, capped at
// 99 dB. Throws MetricError on size mismatch or an empty mask.
double psnr(const RgbImage& a, const RgbImage& b, const MaskImage* mask = nullptr);

// Single-scale SSIM on luminance (0.299 R + 0.587 G + 0.114 B) with an 11x11
// Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, over windows fully
// inside the image. The masked variant averages windows whose center pixel
// is in the mask.
double ssim(const RgbImage& a, const RgbImage& b, const MaskImage* mask = nullptr);

// Same window statistics on one float plane; exposed for tests.
double ssim_plane(const std::vector<double>& x, const std::vector<double>& y,
                  int width, int height, const MaskImage* mask = nullptr);

// Mean over three dyadic scales (2x2 box downsampling) of (1 - SSIM) / 2,
// SSIM averaged over the R, G, B channels. Zero iff the images are equal on
// the evaluated windows. Scales too small for a window are skipped.
double perceptual_proxy(const RgbImage& a, const RgbImage& b,
                        const MaskImage* mask = nullptr);

// Mean perceptual_proxy over consecutive pairs. With masks, each pair uses
// the intersection of its two masks and pairs without a usable intersection
// are skipped; std::nullopt when every pair was skipped. Throws MetricError
// for fewer than two frames.
std::optional<double> temporal_consistency(const std::vector<RgbImage>& frames,
                                           const std::vector<MaskImage>* masks = nullptr);

// Pixel count of the largest 4-connected component.
std::size_t largest_component(const MaskImage& mask);

struct MetricBlock {
  std::optional<double> psnr;
  std::optional<double> ssim;
  std::optional<double> perceptual;
};

struct FrameMetrics {
  int time = 1;
  double support_density = 0.0;
  MetricBlock full;
  MetricBlock evidence;
};

struct MetricsReport {
  bool has_reference = false;
  MetricBlock full;
  MetricBlock evidence;
  std::optional<double> full_tc;
  std::optional<double> evidence_tc;
  std::vector<FrameMetrics> per_frame;
  std::string query_id;
  std::string mode;
  std::string config_hash;
};

// With a reference: full-frame, evidence-region and temporal blocks. The
// evidence region of each frame is its support mask. Aggregates are means of
// the per-frame values.
MetricsReport evaluate_query(const std::vector<CompletedObservation>& predicted,
                             const std::vector<Frame>& reference);

// Without a reference: evidence PSNR of each prediction against its own
// partial observation on the support mask, plus full-frame temporal
// consistency.
MetricsReport evaluate_query(const std::vector<CompletedObservation>& predicted,
                             const std::vector<PartialObservation>& partials);

nlohmann::json report_to_json(const MetricsReport& report, bool per_frame = true);

// query_id,mode,full_psnr,full_ssim,full_perceptual,evidence_psnr,
// evidence_ssim,evidence_perceptual,full_tc,evidence_tc
std::string csv_header();
std::string csv_row(const MetricsReport& report);

}  // namespace aw4re
