#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sacl/errors.hpp"
#include "sacl/image.hpp"

namespace sacl {

// Per-slice quality signals consumed by slice selection and the f_qual
// difficulty factor.
struct QualityFeatures {
  double laplacian_var = 0.0;  // sharpness proxy
  double contrast = 0.0;       // population stddev of intensities
  double lung_coverage = 0.0;  // fraction of mask pixels set, in [0,1]
};

enum class QualityTier { High, Medium, Low };

inline const char* to_string(QualityTier t) {
  switch (t) {
    case QualityTier::High: return "High";
    case QualityTier::Medium: return "Medium";
    default: return "Low";
  }
}

inline QualityTier quality_tier_from_string(const std::string& s) {
  if (s == "High") return QualityTier::High;
  if (s == "Medium") return QualityTier::Medium;
  if (s == "Low") return QualityTier::Low;
  throw ValidationError("unknown quality tier: " + s);
}

struct QualityThresholds {
  double laplacian_high = 500.0;
  double contrast_high = 30.0;
  double laplacian_low = 100.0;
  double contrast_low = 10.0;
};

// High iff both high thresholds are exceeded, Low iff either low threshold
// is undercut, Medium otherwise. The two regions are disjoint for any
// thresholds with low < high; High is checked first regardless.
inline QualityTier quality_tier(const QualityFeatures& q, const QualityThresholds& t = {}) {
  if (q.laplacian_var > t.laplacian_high && q.contrast > t.contrast_high) return QualityTier::High;
  if (q.laplacian_var < t.laplacian_low || q.contrast < t.contrast_low) return QualityTier::Low;
  return QualityTier::Medium;
}

// Variance of the 4-neighbour Laplacian response
//   [[0,1,0],[1,-4,1],[0,1,0]]
// over valid interior pixels only (no padding). Population variance.
inline double laplacian_variance(const GrayImage& img) {
  if (img.width < 3 || img.height < 3) {
    throw ValidationError("laplacian_variance: image smaller than 3x3");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  const std::size_t n = static_cast<std::size_t>(img.width - 2) * static_cast<std::size_t>(img.height - 2);
  for (int y = 1; y + 1 < img.height; ++y) {
    for (int x = 1; x + 1 < img.width; ++x) {
      const double r = static_cast<double>(img.at(x, y - 1)) + static_cast<double>(img.at(x, y + 1)) +
                       static_cast<double>(img.at(x - 1, y)) + static_cast<double>(img.at(x + 1, y)) -
                       4.0 * static_cast<double>(img.at(x, y));
      sum += r;
      sum_sq += r * r;
    }
  }
  const double mean = sum / static_cast<double>(n);
  return std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
}

// Population standard deviation of all intensities.
inline double contrast_stddev(const GrayImage& img) {
  if (img.pixels.empty()) throw ValidationError("contrast_stddev: empty image");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint8_t p : img.pixels) {
    const double v = static_cast<double>(p);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(img.pixels.size());
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

// Fraction of mask pixels equal to 255. The mask must be strictly binary.
inline double lung_coverage(const GrayImage& img, const GrayImage& mask) {
  if (img.width != mask.width || img.height != mask.height) {
    throw ValidationError("lung_coverage: mask dimensions do not match image");
  }
  std::size_t inside = 0;
  for (std::uint8_t p : mask.pixels) {
    if (p == 255) {
      ++inside;
    } else if (p != 0) {
      throw ValidationError("lung_coverage: mask is not binary (pixel value " + std::to_string(int(p)) + ")");
    }
  }
  return static_cast<double>(inside) / static_cast<double>(mask.pixels.size());
}

namespace clahe_detail {

using Histogram = std::array<std::int64_t, 256>;

inline Histogram tile_histogram(const GrayImage& img, int x0, int x1, int y0, int y1) {
  Histogram h{};
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) h[img.at(x, y)] += 1;
  }
  return h;
}

// Clip bound for a tile: clip_limit * tile_pixels / 256, floored, never
// below 1.
inline std::int64_t clip_bound(double clip_limit, std::int64_t tile_pixels) {
  return std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor(clip_limit * static_cast<double>(tile_pixels) / 256.0)));
}

// Clip bins at `bound` and redistribute the excess uniformly: excess/256 to
// every bin, the remainder one count each to bins 0..rem-1. Mass is
// conserved.
inline Histogram clip_and_redistribute(const Histogram& h, std::int64_t bound) {
  Histogram out = h;
  std::int64_t excess = 0;
  for (auto& bin : out) {
    if (bin > bound) {
      excess += bin - bound;
      bin = bound;
    }
  }
  const std::int64_t per_bin = excess / 256;
  const std::int64_t rem = excess % 256;
  for (int i = 0; i < 256; ++i) out[i] += per_bin + (i < rem ? 1 : 0);
  return out;
}

// Equalization lookup from a (redistributed) histogram whose mass is
// tile_pixels: map[v] = round(255 * cdf(v) / tile_pixels).
inline std::array<std::uint8_t, 256> equalization_map(const Histogram& h, std::int64_t tile_pixels) {
  std::array<std::uint8_t, 256> map{};
  std::int64_t cdf = 0;
  for (int v = 0; v < 256; ++v) {
    cdf += h[v];
    const long mapped = std::lround(255.0 * static_cast<double>(cdf) / static_cast<double>(tile_pixels));
    map[v] = static_cast<std::uint8_t>(std::clamp<long>(mapped, 0, 255));
  }
  return map;
}

}  // namespace clahe_detail

// Contrast-limited adaptive histogram equalization. `tiles` is the grid
// count per side; non-divisible dimensions are absorbed by edge tiles of
// near-equal size. Mappings are bilinearly interpolated between tile
// centers, clamped to the nearest tile outside the center grid.
inline GrayImage clahe(const GrayImage& img, double clip_limit = 2.0, int tiles = 8) {
  if (clip_limit < 1.0) throw ValidationError("clahe: clip_limit must be >= 1");
  if (tiles < 1) throw ValidationError("clahe: tile grid must be >= 1");
  if (img.width < tiles || img.height < tiles) {
    throw ValidationError("clahe: image smaller than tile grid");
  }

  // Tile boundaries bx[k] = floor(k*W/tiles); tile t spans [bx[t], bx[t+1]).
  std::vector<int> bx(tiles + 1), by(tiles + 1);
  for (int k = 0; k <= tiles; ++k) {
    bx[k] = static_cast<int>(static_cast<std::int64_t>(k) * img.width / tiles);
    by[k] = static_cast<int>(static_cast<std::int64_t>(k) * img.height / tiles);
  }

  std::vector<std::array<std::uint8_t, 256>> maps(static_cast<std::size_t>(tiles) * tiles);
  std::vector<double> cx(tiles), cy(tiles);
  for (int ty = 0; ty < tiles; ++ty) {
    for (int tx = 0; tx < tiles; ++tx) {
      const std::int64_t tile_pixels =
          static_cast<std::int64_t>(bx[tx + 1] - bx[tx]) * (by[ty + 1] - by[ty]);
      auto hist = clahe_detail::tile_histogram(img, bx[tx], bx[tx + 1], by[ty], by[ty + 1]);
      hist = clahe_detail::clip_and_redistribute(hist, clahe_detail::clip_bound(clip_limit, tile_pixels));
      maps[static_cast<std::size_t>(ty) * tiles + tx] = clahe_detail::equalization_map(hist, tile_pixels);
    }
  }
  for (int t = 0; t < tiles; ++t) {
    cx[t] = (bx[t] + bx[t + 1] - 1) / 2.0;
    cy[t] = (by[t] + by[t + 1] - 1) / 2.0;
  }

  // Locate the center interval for a coordinate; returns (tile, fraction).
  const auto locate = [tiles](const std::vector<double>& centers, int pos) {
    if (pos <= centers.front()) return std::pair<int, double>(0, 0.0);
    if (pos >= centers.back()) return std::pair<int, double>(tiles - 2 >= 0 ? tiles - 2 : 0,
                                                             tiles >= 2 ? 1.0 : 0.0);
    int t = 0;
    while (pos > centers[t + 1]) ++t;
    return std::pair<int, double>(t, (pos - centers[t]) / (centers[t + 1] - centers[t]));
  };

  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    const auto [ty, fy] = locate(cy, y);
    const int ty1 = std::min(ty + 1, tiles - 1);
    for (int x = 0; x < img.width; ++x) {
      const auto [tx, fx] = locate(cx, x);
      const int tx1 = std::min(tx + 1, tiles - 1);
      const std::uint8_t v = img.at(x, y);
      const double m00 = maps[static_cast<std::size_t>(ty) * tiles + tx][v];
      const double m01 = maps[static_cast<std::size_t>(ty) * tiles + tx1][v];
      const double m10 = maps[static_cast<std::size_t>(ty1) * tiles + tx][v];
      const double m11 = maps[static_cast<std::size_t>(ty1) * tiles + tx1][v];
      const double top = m00 * (1.0 - fx) + m01 * fx;
      const double bot = m10 * (1.0 - fx) + m11 * fx;
      const long mapped = std::lround(top * (1.0 - fy) + bot * fy);
      out.set(x, y, static_cast<std::uint8_t>(std::clamp<long>(mapped, 0, 255)));
    }
  }
  return out;
}

// Full feature vector for one slice.
inline QualityFeatures compute_quality(const GrayImage& img, const GrayImage* mask) {
  QualityFeatures q;
  q.laplacian_var = laplacian_variance(img);
  q.contrast = contrast_stddev(img);
  q.lung_coverage = mask != nullptr ? lung_coverage(img, *mask) : 1.0;
  return q;
}

}  // namespace sacl
