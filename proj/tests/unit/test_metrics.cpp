#include <cmath>
#include <random>

#include "aw4re/error.hpp"
#include "aw4re/metrics.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aw4re;

namespace {

constexpr int kW = 37, kH = 29;

// Deterministic pattern reproduced by the skimage snippet that produced the
// frozen values below.
RgbImage pattern() {
  RgbImage a(kW, kH);
  for (int y = 0; y < kH; ++y) {
    for (int x = 0; x < kW; ++x) {
      for (int c = 0; c < 3; ++c) {
        a.at(x, y, c) = static_cast<std::uint8_t>((x * 37 + y * 91 + c * 53 + ((x * y) % 17) * 7) % 201 + 27);
      }
    }
  }
  return a;
}

RgbImage negative(const RgbImage& a) {
  RgbImage b = a;
  for (auto& v : b.data) v = static_cast<std::uint8_t>(255 - v);
  return b;
}

RgbImage noisy(const RgbImage& a, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RgbImage b = a;
  for (auto& v : b.data) {
    v = static_cast<std::uint8_t>(std::clamp(std::lround(v + amplitude * u(rng)), 0L, 255L));
  }
  return b;
}

std::vector<double> luminance(const RgbImage& im) {
  std::vector<double> out(im.pixel_count());
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = 0.299 * im.data[p * 3] + 0.587 * im.data[p * 3 + 1] + 0.114 * im.data[p * 3 + 2];
  }
  return out;
}

// Direct window-by-window SSIM with an explicit 2D Gaussian kernel.
double reference_ssim(const std::vector<double>& x, const std::vector<double>& y, int w, int h) {
  const int r = 5;
  double kernel[11][11];
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) {
      kernel[i + r][j + r] = std::exp(-(i * i + j * j) / (2.0 * 1.5 * 1.5));
      sum += kernel[i + r][j + r];
    }
  }
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double total = 0.0;
  int n = 0;
  for (int cy = r; cy < h - r; ++cy) {
    for (int cx = r; cx < w - r; ++cx) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = -r; i <= r; ++i) {
        for (int j = -r; j <= r; ++j) {
          const double k = kernel[i + r][j + r] / sum;
          const double a = x[(cy + i) * w + cx + j], b = y[(cy + i) * w + cx + j];
          mx += k * a;
          my += k * b;
          sxx += k * a * a;
          syy += k * b * b;
          sxy += k * a * b;
        }
      }
      sxx -= mx * mx;
      syy -= my * my;
      sxy -= mx * my;
      total += ((2 * mx * my + c1) * (2 * sxy + c2)) /
               ((mx * mx + my * my + c1) * (sxx + syy + c2));
      ++n;
    }
  }
  return total / n;
}

}  // namespace

TEST_CASE("psnr") {
  const RgbImage a = pattern();
  CHECK(psnr(a, a) == kPsnrCap);

  RgbImage b = a;
  for (auto& v : b.data) v = static_cast<std::uint8_t>(v + 16);  // max 227 + 16, no clipping
  CHECK(psnr(a, b) == doctest::Approx(20.0 * std::log10(255.0 / 16.0)).epsilon(1e-12));
  CHECK(psnr(a, b) == doctest::Approx(24.03).epsilon(1e-3));
  CHECK(psnr(a, b) == psnr(b, a));

  SUBCASE("masked half-frame corruption equals the cropped half") {
    RgbImage c = a;
    MaskImage left(kW, kH, 0);
    const int half = 18;
    RgbImage crop_a(half, kH), crop_c(half, kH);
    std::mt19937_64 rng(4);
    for (int y = 0; y < kH; ++y) {
      for (int x = 0; x < half; ++x) {
        left.at(x, y) = 1;
        for (int ch = 0; ch < 3; ++ch) {
          c.at(x, y, ch) = static_cast<std::uint8_t>(rng() & 0xff);
          crop_a.at(x, y, ch) = a.at(x, y, ch);
          crop_c.at(x, y, ch) = c.at(x, y, ch);
        }
      }
    }
    CHECK(psnr(a, c, &left) == doctest::Approx(psnr(crop_a, crop_c)).epsilon(1e-12));
  }
  SUBCASE("full mask equals unmasked") {
    const MaskImage all(kW, kH, 1);
    const RgbImage n = noisy(a, 20, 1);
    CHECK(psnr(a, n, &all) == psnr(a, n));
  }
  SUBCASE("errors") {
    const MaskImage none(kW, kH, 0);
    CHECK_THROWS_AS(psnr(a, b, &none), MetricError);
    CHECK_THROWS_AS(psnr(a, RgbImage(3, 3)), MetricError);
  }
}

TEST_CASE("ssim against two independent references") {
  const RgbImage a = pattern();
  const RgbImage b = negative(a);
  const double got = ssim(a, b);
  CHECK(std::abs(got - reference_ssim(luminance(a), luminance(b), kW, kH)) < 1e-6);
  // skimage 0.25 structural_similarity on the same luminance planes
  // (gaussian_weights, sigma 1.5, population covariance, data_range 255).
  CHECK(std::abs(got - (-0.9435702803634024)) < 1e-6);

  RgbImage c = a;
  for (int y = 0; y < kH; ++y) {
    for (int x = 0; x < kW; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        c.at(x, y, ch) = static_cast<std::uint8_t>(std::min(255, a.at(x, y, ch) + (x % 5) * 3));
      }
    }
  }
  CHECK(std::abs(ssim(a, c) - 0.9908132533529084) < 1e-6);
}

TEST_CASE("ssim properties") {
  const RgbImage a = pattern();
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  const RgbImage n = noisy(a, 30, 2);
  CHECK(ssim(a, n) == doctest::Approx(ssim(n, a)).epsilon(1e-12));
  const MaskImage all(kW, kH, 1);
  CHECK(ssim(a, n, &all) == ssim(a, n));

  SUBCASE("constants differing by an offset reduce to the luminance term") {
    const RgbImage x(20, 20, 100), y(20, 20, 140);
    const double c1 = std::pow(0.01 * 255, 2);
    const double expect = (2.0 * 100 * 140 + c1) / (100.0 * 100 + 140.0 * 140 + c1);
    CHECK(ssim(x, y) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("too small") { CHECK_THROWS_AS(ssim(RgbImage(10, 30), RgbImage(10, 30)), MetricError); }
  SUBCASE("masked variant averages windows with masked-in centers") {
    MaskImage m(kW, kH, 0);
    for (int y = 0; y < kH; ++y) m.at(12, y) = 1;  // one column of centers
    const auto lx = luminance(a), ly = luminance(n);
    // Only rows 5..23 of column 12 have full windows.
    double sum = 0.0;
    int count = 0;
    for (int cy = 5; cy < kH - 5; ++cy) {
      std::vector<double> wx, wy;
      for (int y = cy - 5; y <= cy + 5; ++y) {
        for (int x = 7; x <= 17; ++x) {
          wx.push_back(lx[y * kW + x]);
          wy.push_back(ly[y * kW + x]);
        }
      }
      sum += reference_ssim(wx, wy, 11, 11);
      ++count;
    }
    CHECK(ssim(a, n, &m) == doctest::Approx(sum / count).epsilon(1e-9));
  }
}

TEST_CASE("perceptual proxy") {
  const RgbImage a = pattern();
  CHECK(perceptual_proxy(a, a) == 0.0);
  const RgbImage n = noisy(a, 25, 3);
  CHECK(perceptual_proxy(a, n) > 0.0);
  CHECK(perceptual_proxy(a, n) == doctest::Approx(perceptual_proxy(n, a)).epsilon(1e-12));
  // Chroma-only change is still visible.
  RgbImage swapped = a;
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    std::swap(swapped.data[p * 3], swapped.data[p * 3 + 2]);
  }
  CHECK(perceptual_proxy(a, swapped) > 0.0);

  SUBCASE("monotone in uniform noise amplitude") {
    RgbImage big(64, 64);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        for (int c = 0; c < 3; ++c) {
          big.at(x, y, c) = static_cast<std::uint8_t>(128 + 60 * std::sin(0.3 * x + c) * std::cos(0.2 * y));
        }
      }
    }
    const double d1 = perceptual_proxy(big, noisy(big, 5, 9));
    const double d2 = perceptual_proxy(big, noisy(big, 20, 9));
    const double d3 = perceptual_proxy(big, noisy(big, 60, 9));
    CHECK(d1 < d2);
    CHECK(d2 < d3);
  }
}

TEST_CASE("temporal consistency") {
  const RgbImage a = pattern();
  const RgbImage n = noisy(a, 15, 5);
  CHECK(temporal_consistency({a, a, a, a}) == 0.0);
  CHECK(*temporal_consistency({a, n}) == perceptual_proxy(a, n));
  CHECK(*temporal_consistency({a, n, a}) == doctest::Approx(perceptual_proxy(a, n)));
  CHECK_THROWS_AS(temporal_consistency({a}), MetricError);

  MaskImage left(kW, kH, 0), right(kW, kH, 0);
  for (int y = 0; y < kH; ++y) {
    for (int x = 0; x < kW; ++x) (x < 18 ? left : right).at(x, y) = 1;
  }
  const std::vector<MaskImage> disjoint{left, right};
  CHECK_FALSE(temporal_consistency({a, n}, &disjoint).has_value());
  const std::vector<MaskImage> same{MaskImage(kW, kH, 1), MaskImage(kW, kH, 1)};
  CHECK(*temporal_consistency({a, n}, &same) == *temporal_consistency({a, n}));
}

TEST_CASE("largest component") {
  MaskImage m(10, 10, 0);
  for (int x = 0; x < 5; ++x) m.at(x, 0) = 1;
  for (int y = 3; y < 10; ++y) m.at(7, y) = 1;
  m.at(6, 2) = 1;  // diagonal neighbour only
  CHECK(largest_component(m) == 7);
  CHECK(largest_component(MaskImage(4, 4, 0)) == 0);
}

TEST_CASE("evaluate_query report shapes") {
  const auto rig = test::small_rig(48, 40);
  const SceneSpec scene = generate_scene(3, test::small_scene(3, 0));
  const ActionSequence seq = static_sequence(3, default_camera(rig));
  const auto frames = test::render_all(scene, seq);
  std::vector<CompletedObservation> pred;
  std::vector<PartialObservation> parts;
  for (const auto& f : frames) {
    CompletedObservation c;
    c.rgb = f.rgb;
    c.support_mask = MaskImage(48, 40, 1);
    c.source = "baseline";
    pred.push_back(c);
    PartialObservation p;
    p.rgb = f.rgb;
    p.support_mask = c.support_mask;
    p.support_density = 1.0;
    parts.push_back(p);
  }

  SUBCASE("prediction equal to reference") {
    const auto r = evaluate_query(pred, frames);
    CHECK(r.has_reference);
    CHECK(*r.full.psnr == kPsnrCap);
    CHECK(*r.full.ssim == doctest::Approx(1.0));
    CHECK(*r.full.perceptual == 0.0);
    CHECK(*r.full_tc == 0.0);
    CHECK(*r.evidence_tc == 0.0);
    CHECK(*r.evidence.psnr == kPsnrCap);
    CHECK(r.per_frame.size() == 3);
    const auto j = report_to_json(r, false);
    CHECK(j.at("full").size() == 3);
    CHECK(j.at("evidence").size() == 3);
    for (const char* k : {"psnr", "ssim", "perceptual"}) {
      CHECK(j.at("full").contains(k));
      CHECK(j.at("evidence").contains(k));
    }
    CHECK(j.at("temporal").size() == 2);
    CHECK(j.at("temporal").contains("full_tc"));
    CHECK(j.at("temporal").contains("evidence_tc"));
  }
  SUBCASE("no reference: evidence psnr and full temporal consistency only") {
    const auto r = evaluate_query(pred, parts);
    CHECK_FALSE(r.has_reference);
    const auto j = report_to_json(r, false);
    CHECK_FALSE(j.contains("full"));
    CHECK(j.at("evidence").size() == 1);
    CHECK(j.at("evidence").contains("psnr"));
    CHECK(j.at("temporal").size() == 1);
    CHECK(j.at("temporal").contains("full_tc"));
    CHECK(csv_row(r).find(",,,") != std::string::npos);
  }
  SUBCASE("small evidence regions drop ssim and perceptual") {
    auto sparse = pred;
    for (auto& c : sparse) {
      c.support_mask = MaskImage(48, 40, 0);
      for (int y = 0; y < 20; ++y) {
        for (int x = 0; x < 40; ++x) c.support_mask.at(x, y) = 1;  // 800 px < 1024
      }
    }
    const auto r = evaluate_query(sparse, frames);
    CHECK(r.evidence.psnr.has_value());
    CHECK_FALSE(r.evidence.ssim.has_value());
    CHECK_FALSE(r.evidence.perceptual.has_value());
  }
  SUBCASE("aggregates are means of per-frame values") {
    auto shifted = pred;
    for (std::size_t k = 0; k < shifted.size(); ++k) {
      shifted[k].rgb = noisy(shifted[k].rgb, 10.0 * (k + 1), k);
    }
    const auto r = evaluate_query(shifted, frames);
    double sum = 0.0;
    for (const auto& f : r.per_frame) sum += *f.full.psnr;
    CHECK(*r.full.psnr == doctest::Approx(sum / 3).epsilon(1e-12));
  }
  CHECK(csv_header() ==
        "query_id,mode,full_psnr,full_ssim,full_perceptual,evidence_psnr,evidence_ssim,"
        "evidence_perceptual,full_tc,evidence_tc");
}
