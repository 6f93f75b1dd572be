#include "trafficlens/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace trafficlens::kernels {
namespace {

inline double blend_one(double acc, std::uint8_t v, double alpha) {
  return acc + alpha * (static_cast<double>(v) - acc);
}

template <class Pick>
inline std::uint8_t neighbourhood(std::span<const std::uint8_t> in, int width, int height, int x, int y, Pick pick) {
  std::uint8_t best = in[static_cast<std::size_t>(y) * width + x];
  for (int dy = -1; dy <= 1; ++dy) {
    const int yy = y + dy;
    if (yy < 0 || yy >= height) continue;
    for (int dx = -1; dx <= 1; ++dx) {
      const int xx = x + dx;
      if (xx < 0 || xx >= width) continue;
      best = pick(best, in[static_cast<std::size_t>(yy) * width + xx]);
    }
  }
  return best;
}

inline std::uint8_t max_u8(std::uint8_t a, std::uint8_t b) { return std::max(a, b); }
inline std::uint8_t min_u8(std::uint8_t a, std::uint8_t b) { return std::min(a, b); }

inline bool is_inlier(const Eigen::Matrix3d& g, const Eigen::Vector2d& s, const Eigen::Vector2d& d, double tau) {
  const double w = g(2, 0) * s.x() + g(2, 1) * s.y() + g(2, 2);
  if (!(std::abs(w) >= 1e-12)) return false;
  const double u = (g(0, 0) * s.x() + g(0, 1) * s.y() + g(0, 2)) / w;
  const double v = (g(1, 0) * s.x() + g(1, 1) * s.y() + g(1, 2)) / w;
  return std::hypot(u - d.x(), v - d.y()) < tau;
}

inline double heat_level(double h, double lo, double hi) {
  if (!(hi > lo)) return 255.0;
  return (h - lo) / (hi - lo) * 255.0;
}

inline void colorize_one(double h, double lo, double hi, double floor, std::uint8_t* rgb, std::uint8_t* alpha) {
  const double level = heat_level(h, lo, hi);
  if (level < floor) {
    rgb[0] = rgb[1] = rgb[2] = 0;
    *alpha = 0;
    return;
  }
  const Rgb c = gradient_color(level);
  rgb[0] = c.r;
  rgb[1] = c.g;
  rgb[2] = c.b;
  *alpha = 255;
}

inline void warp_one(std::span<const std::uint8_t> src, int sw, int sh, int channels, const Eigen::Matrix3d& m,
                     std::uint8_t* out, int x, int y, std::uint8_t fill) {
  const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
  bool inside = std::abs(w) >= 1e-12;
  long sx = 0, sy = 0;
  if (inside) {
    const double u = (m(0, 0) * x + m(0, 1) * y + m(0, 2)) / w;
    const double v = (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / w;
    inside = std::isfinite(u) && std::isfinite(v) && u > -0.5 && v > -0.5 && u < sw - 0.5 && v < sh - 0.5;
    if (inside) {
      sx = std::lround(u);
      sy = std::lround(v);
      inside = sx >= 0 && sy >= 0 && sx < sw && sy < sh;
    }
  }
  for (int c = 0; c < channels; ++c) {
    out[c] = inside ? src[(static_cast<std::size_t>(sy) * sw + sx) * channels + c] : fill;
  }
}

}  // namespace

Rgb gradient_color(double level) {
  static constexpr std::array<std::array<double, 3>, 5> kAnchors{{
      {0, 0, 255},    // blue
      {0, 255, 255},  // cyan
      {0, 255, 0},    // green
      {255, 255, 0},  // yellow
      {255, 0, 0},    // red
  }};
  const double t = std::clamp(level / 255.0, 0.0, 1.0) * 4.0;
  const int seg = std::min(static_cast<int>(t), 3);
  const double frac = t - seg;
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double v = kAnchors[seg][c] + (kAnchors[seg + 1][c] - kAnchors[seg][c]) * frac;
    out[c] = static_cast<std::uint8_t>(std::lround(v));
  }
  return {out[0], out[1], out[2]};
}

// ---------------------------------------------------------------------------
// serial reference
// ---------------------------------------------------------------------------
namespace serial {

void blend(std::span<double> acc, std::span<const std::uint8_t> frame, double alpha) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = blend_one(acc[i], frame[i], alpha);
}

void dilate3x3(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, int width, int height) {
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out[static_cast<std::size_t>(y) * width + x] = neighbourhood(in, width, height, x, y, max_u8);
}

void erode3x3(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, int width, int height) {
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out[static_cast<std::size_t>(y) * width + x] = neighbourhood(in, width, height, x, y, min_u8);
}

std::array<std::uint64_t, 256> histogram(std::span<const std::uint8_t> pixels) {
  std::array<std::uint64_t, 256> h{};
  for (auto v : pixels) ++h[v];
  return h;
}

void apply_lut(std::span<const std::uint8_t> in, std::span<std::uint8_t> out,
               const std::array<std::uint8_t, 256>& lut) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = lut[in[i]];
}

std::size_t vote_inliers(const Eigen::Matrix3d& g, std::span<const Eigen::Vector2d> src,
                         std::span<const Eigen::Vector2d> dst, double tau, std::span<std::uint8_t> mask) {
  std::size_t votes = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    mask[i] = is_inlier(g, src[i], dst[i], tau) ? 1 : 0;
    votes += mask[i];
  }
  return votes;
}

void colorize(std::span<const double> heat, double lo, double hi, double floor, std::span<std::uint8_t> rgb,
              std::span<std::uint8_t> alpha) {
  for (std::size_t i = 0; i < heat.size(); ++i) colorize_one(heat[i], lo, hi, floor, &rgb[3 * i], &alpha[i]);
}

void warp_nearest(std::span<const std::uint8_t> src, int src_width, int src_height, int channels,
                  const Eigen::Matrix3d& dst_to_src, std::span<std::uint8_t> dst, int dst_width, int dst_height,
                  std::uint8_t fill) {
  for (int y = 0; y < dst_height; ++y)
    for (int x = 0; x < dst_width; ++x)
      warp_one(src, src_width, src_height, channels, dst_to_src,
               &dst[(static_cast<std::size_t>(y) * dst_width + x) * channels], x, y, fill);
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP
// ---------------------------------------------------------------------------
namespace parallel {

void blend(std::span<double> acc, std::span<const std::uint8_t> frame, double alpha) {
  const auto n = static_cast<std::ptrdiff_t>(acc.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc[i] = blend_one(acc[i], frame[i], alpha);
}

void dilate3x3(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, int width, int height) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out[static_cast<std::size_t>(y) * width + x] = neighbourhood(in, width, height, x, y, max_u8);
}

void erode3x3(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, int width, int height) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out[static_cast<std::size_t>(y) * width + x] = neighbourhood(in, width, height, x, y, min_u8);
}

std::array<std::uint64_t, 256> histogram(std::span<const std::uint8_t> pixels) {
  std::array<std::uint64_t, 256> total{};
  const auto n = static_cast<std::ptrdiff_t>(pixels.size());
#pragma omp parallel
  {
    std::array<std::uint64_t, 256> local{};
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) ++local[pixels[i]];
#pragma omp critical
    for (int v = 0; v < 256; ++v) total[v] += local[v];
  }
  return total;
}

void apply_lut(std::span<const std::uint8_t> in, std::span<std::uint8_t> out,
               const std::array<std::uint8_t, 256>& lut) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = lut[in[i]];
}

std::size_t vote_inliers(const Eigen::Matrix3d& g, std::span<const Eigen::Vector2d> src,
                         std::span<const Eigen::Vector2d> dst, double tau, std::span<std::uint8_t> mask) {
  const auto n = static_cast<std::ptrdiff_t>(src.size());
  std::size_t votes = 0;
#pragma omp parallel for schedule(static) reduction(+ : votes)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    mask[i] = is_inlier(g, src[i], dst[i], tau) ? 1 : 0;
    votes += mask[i];
  }
  return votes;
}

void colorize(std::span<const double> heat, double lo, double hi, double floor, std::span<std::uint8_t> rgb,
              std::span<std::uint8_t> alpha) {
  const auto n = static_cast<std::ptrdiff_t>(heat.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) colorize_one(heat[i], lo, hi, floor, &rgb[3 * i], &alpha[i]);
}

void warp_nearest(std::span<const std::uint8_t> src, int src_width, int src_height, int channels,
                  const Eigen::Matrix3d& dst_to_src, std::span<std::uint8_t> dst, int dst_width, int dst_height,
                  std::uint8_t fill) {
#pragma omp parallel for schedule(static)
  for (int y = 0; y < dst_height; ++y)
    for (int x = 0; x < dst_width; ++x)
      warp_one(src, src_width, src_height, channels, dst_to_src,
               &dst[(static_cast<std::size_t>(y) * dst_width + x) * channels], x, y, fill);
}

}  // namespace parallel

}  // namespace trafficlens::kernels
