#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial` is the plain
// reference kept for tests and benchmarks, `parallel` is the OpenMP version the
// modules call. Both produce bit-identical results; the kernel tests assert it.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace trafficlens::kernels {

struct Rgb {
  std::uint8_t r, g, b;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Five-anchor gradient blue -> cyan -> green -> yellow -> red over [0, 255].
Rgb gradient_color(double level);

namespace serial {

/// acc <- (1 - alpha) * acc + alpha * frame
void blend(std::span<double> acc, std::span<const std::uint8_t> frame, double alpha);
/// 3x3 max; out-of-bounds neighbours are ignored.
void dilate3x3(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, int width, int height);
/// 3x3 min; out-of-bounds neighbours are ignored.
void erode3x3(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, int width, int height);
std::array<std::uint64_t, 256> histogram(std::span<const std::uint8_t> pixels);
void apply_lut(std::span<const std::uint8_t> in, std::span<std::uint8_t> out,
               const std::array<std::uint8_t, 256>& lut);
/// mask[i] = |project(g, src[i]) - dst[i]| < tau. Returns the number of hits.
std::size_t vote_inliers(const Eigen::Matrix3d& g, std::span<const Eigen::Vector2d> src,
                         std::span<const Eigen::Vector2d> dst, double tau, std::span<std::uint8_t> mask);
/// Min-max normalised heat to rgb; alpha is 0 where the level is below `floor`.
void colorize(std::span<const double> heat, double lo, double hi, double floor, std::span<std::uint8_t> rgb,
              std::span<std::uint8_t> alpha);
/// Nearest-neighbour inverse warp: dst pixel (x, y) samples src at dst_to_src * (x, y, 1).
void warp_nearest(std::span<const std::uint8_t> src, int src_width, int src_height, int channels,
                  const Eigen::Matrix3d& dst_to_src, std::span<std::uint8_t> dst, int dst_width, int dst_height,
                  std::uint8_t fill);

}  // namespace serial

namespace parallel {

void blend(std::span<double> acc, std::span<const std::uint8_t> frame, double alpha);
void dilate3x3(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, int width, int height);
void erode3x3(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, int width, int height);
std::array<std::uint64_t, 256> histogram(std::span<const std::uint8_t> pixels);
void apply_lut(std::span<const std::uint8_t> in, std::span<std::uint8_t> out,
               const std::array<std::uint8_t, 256>& lut);
std::size_t vote_inliers(const Eigen::Matrix3d& g, std::span<const Eigen::Vector2d> src,
                         std::span<const Eigen::Vector2d> dst, double tau, std::span<std::uint8_t> mask);
void colorize(std::span<const double> heat, double lo, double hi, double floor, std::span<std::uint8_t> rgb,
              std::span<std::uint8_t> alpha);
void warp_nearest(std::span<const std::uint8_t> src, int src_width, int src_height, int channels,
                  const Eigen::Matrix3d& dst_to_src, std::span<std::uint8_t> dst, int dst_width, int dst_height,
                  std::uint8_t fill);

}  // namespace parallel

}  // namespace trafficlens::kernels
