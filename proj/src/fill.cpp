#include "aw4re/fill.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace aw4re {

namespace {

template <int C>
struct Level {
  int width = 0;
  int height = 0;
  std::vector<float> value;  // C per pixel
  std::vector<char> known;
};

// 1D squared distance transform of a sampled function (Felzenszwalb and
// Huttenlocher).
void distance_1d(const std::vector<double>& f, std::vector<double>& d,
                 std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    while (k >= 0) {
      const double s =
          ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -inf
                  : ((f[q] + double(q) * q) - (f[v[k - 1]] + double(v[k - 1]) * v[k - 1])) /
                        (2.0 * q - 2.0 * v[k - 1]);
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

template <int C>
Image<float, C> pull_push(const Image<float, C>& values, const MaskImage& support,
                          int levels, MaskImage& filled) {
  Level<C> base;
  base.width = values.width;
  base.height = values.height;
  base.value.assign(values.data.size(), 0.0f);
  base.known.assign(values.pixel_count(), 0);
  for (std::size_t p = 0; p < values.pixel_count(); ++p) {
    if (support.data[p]) {
      base.known[p] = 1;
      for (int c = 0; c < C; ++c) base.value[p * C + c] = values.data[p * C + c];
    }
  }
  std::vector<Level<C>> pyr;
  pyr.push_back(std::move(base));

  // Pull: weighted 2x2 averages of known children.
  while ((levels < 0 || static_cast<int>(pyr.size()) <= levels) &&
         (pyr.back().width > 1 || pyr.back().height > 1)) {
    const Level<C>& fine = pyr.back();
    Level<C> coarse;
    coarse.width = (fine.width + 1) / 2;
    coarse.height = (fine.height + 1) / 2;
    coarse.value.assign(static_cast<std::size_t>(coarse.width) * coarse.height * C, 0.0f);
    coarse.known.assign(static_cast<std::size_t>(coarse.width) * coarse.height, 0);
    for (int y = 0; y < coarse.height; ++y) {
      for (int x = 0; x < coarse.width; ++x) {
        double acc[C] = {};
        int n = 0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int fx = 2 * x + dx, fy = 2 * y + dy;
            if (fx >= fine.width || fy >= fine.height) continue;
            const std::size_t fp = static_cast<std::size_t>(fy) * fine.width + fx;
            if (!fine.known[fp]) continue;
            for (int c = 0; c < C; ++c) acc[c] += fine.value[fp * C + c];
            ++n;
          }
        }
        if (n > 0) {
          const std::size_t cp = static_cast<std::size_t>(y) * coarse.width + x;
          coarse.known[cp] = 1;
          for (int c = 0; c < C; ++c) coarse.value[cp * C + c] = static_cast<float>(acc[c] / n);
        }
      }
    }
    pyr.push_back(std::move(coarse));
  }

  // Push: unknown pixels take a bilinear blend of known coarser pixels.
  for (int l = static_cast<int>(pyr.size()) - 2; l >= 0; --l) {
    Level<C>& fine = pyr[l];
    const Level<C>& coarse = pyr[l + 1];
    for (int y = 0; y < fine.height; ++y) {
      for (int x = 0; x < fine.width; ++x) {
        const std::size_t fp = static_cast<std::size_t>(y) * fine.width + x;
        if (fine.known[fp]) continue;
        const double cx = (x + 0.5) * 0.5 - 0.5;
        const double cy = (y + 0.5) * 0.5 - 0.5;
        const int x0 = static_cast<int>(std::floor(cx));
        const int y0 = static_cast<int>(std::floor(cy));
        const double ax = cx - x0, ay = cy - y0;
        double acc[C] = {};
        double wsum = 0.0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int qx = std::clamp(x0 + dx, 0, coarse.width - 1);
            const int qy = std::clamp(y0 + dy, 0, coarse.height - 1);
            const std::size_t cp = static_cast<std::size_t>(qy) * coarse.width + qx;
            if (!coarse.known[cp]) continue;
            const double w = (dx ? ax : 1.0 - ax) * (dy ? ay : 1.0 - ay);
            if (w <= 0.0) continue;
            for (int c = 0; c < C; ++c) acc[c] += w * coarse.value[cp * C + c];
            wsum += w;
          }
        }
        if (wsum > 0.0) {
          fine.known[fp] = 1;
          for (int c = 0; c < C; ++c) {
            fine.value[fp * C + c] = static_cast<float>(acc[c] / wsum);
          }
        }
      }
    }
  }

  const Level<C>& finest = pyr[0];
  Image<float, C> out(values.width, values.height, 0.0f);
  filled = MaskImage(values.width, values.height, 0);
  for (std::size_t p = 0; p < values.pixel_count(); ++p) {
    if (!finest.known[p]) continue;
    filled.data[p] = 1;
    for (int c = 0; c < C; ++c) out.data[p * C + c] = finest.value[p * C + c];
  }
  return out;
}

template Image<float, 1> pull_push<1>(const Image<float, 1>&, const MaskImage&, int,
                                      MaskImage&);
template Image<float, 3> pull_push<3>(const Image<float, 3>&, const MaskImage&, int,
                                      MaskImage&);

FloatImage3 to_float(const RgbImage& image) {
  FloatImage3 out(image.width, image.height, 0.0f);
  for (std::size_t k = 0; k < image.data.size(); ++k) out.data[k] = image.data[k];
  return out;
}

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Image<double, 1> squared_distance_to_set(const MaskImage& mask) {
  const double inf = std::numeric_limits<double>::infinity();
  const int w = mask.width, h = mask.height;
  Image<double, 1> dist(w, h, inf);
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (mask.data[p]) dist.data[p] = 0.0;
  }
  const int n = std::max(w, h);
  std::vector<double> f, d;
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  // Columns, then rows.
  for (int x = 0; x < w; ++x) {
    f.assign(h, 0.0);
    d.assign(h, 0.0);
    for (int y = 0; y < h; ++y) f[y] = dist.at(x, y);
    distance_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) dist.at(x, y) = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.assign(w, 0.0);
    d.assign(w, 0.0);
    for (int x = 0; x < w; ++x) f[x] = dist.at(x, y);
    distance_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) dist.at(x, y) = d[x];
  }
  return dist;
}

}  // namespace aw4re
