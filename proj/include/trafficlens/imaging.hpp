#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trafficlens/geometry.hpp"

namespace trafficlens {

/// Row-major 8-bit image with 1 (gray) or 3 (RGB, interleaved) channels.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, std::uint8_t fill = 0);
  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<std::uint8_t> data_;
};

/// Luminance round(0.299 R + 0.587 G + 0.114 B); 1-channel input is returned as is.
ImageBuffer to_gray(const ImageBuffer& img);

/// Gray -> 3 identical channels; 3-channel input is returned as is.
ImageBuffer to_rgb(const ImageBuffer& img);

/// Running exponentially weighted background, b <- (1 - alpha) b + alpha I.
///
/// The first frame pushed into an empty accumulator becomes B^0 as is. Values
/// stay real-valued; quantisation happens only in `export_image`.
class BackgroundAccumulator {
 public:
  static constexpr double kDefaultAlpha = 0.01;
  static constexpr int kDefaultFrames = 70;

  BackgroundAccumulator(int width, int height, int channels, double alpha = kDefaultAlpha);

  /// Accumulator that already holds B^0 = `initial` (counts as one frame seen).
  static BackgroundAccumulator seeded(int width, int height, int channels, std::vector<double> initial,
                                      double alpha = kDefaultAlpha);

  void accumulate(const ImageBuffer& frame);

  std::span<const double> values() const { return b_; }
  double alpha() const { return alpha_; }
  std::size_t frames_seen() const { return frames_seen_; }
  ImageBuffer export_image() const;

 private:
  int width_;
  int height_;
  int channels_;
  double alpha_;
  std::size_t frames_seen_ = 0;
  std::vector<double> b_;
};

struct HistogramMatch {
  ImageBuffer image;
  std::array<std::uint8_t, 256> mapping{};
};

/// CDF matching: E(v) is the smallest reference level whose cumulative share
/// reaches the source's cumulative share at v. E is monotone non-decreasing.
HistogramMatch histogram_match(const ImageBuffer& source, const ImageBuffer& reference);

/// 256 comma-separated integers.
std::string format_mapping(const std::array<std::uint8_t, 256>& mapping);

/// Polynomial radial model around `center`. Radii are measured after dividing
/// centred coordinates by `norm_radius` (half the image diagonal), which keeps
/// k1, k2 independent of the image size.
struct DistortionParams {
  double k1 = 0.0;
  double k2 = 0.0;
  ImagePoint center{};
  double norm_radius = 1.0;

  /// Zero distortion centred in a width x height image.
  static DistortionParams for_image(int width, int height, double k1 = 0.0, double k2 = 0.0);
  bool is_identity() const { return k1 == 0.0 && k2 == 0.0; }
};

/// (p - c) * (1 + k1 r^2 + k2 r^4) + c.
ImagePoint distort_point(ImagePoint p, const DistortionParams& params);

/// Inverse of distort_point by fixed-point iteration.
ImagePoint undistort_point(ImagePoint p, const DistortionParams& params, int rounds = 5);

ImageBuffer dilate3x3(const ImageBuffer& mask);
ImageBuffer erode3x3(const ImageBuffer& mask);

// Binary netpbm: P5 (gray) and P6 (RGB), maxval 255 only.
ImageBuffer decode_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pnm(const ImageBuffer& img);
ImageBuffer read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const ImageBuffer& img);

}  // namespace trafficlens
