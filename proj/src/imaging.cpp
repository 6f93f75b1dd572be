#include "trafficlens/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trafficlens/kernels.hpp"

namespace trafficlens {

ImageBuffer::ImageBuffer(int width, int height, int channels, std::uint8_t fill)
    : ImageBuffer(width, height, channels,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) *
                                                std::max(channels, 0),
                                            fill)) {}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidArgument, "image dimensions must be >= 1");
  if (channels != 1 && channels != 3) throw Error(ErrorKind::InvalidArgument, "channels must be 1 or 3");
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorKind::ShapeMismatch, "data length does not match width * height * channels");
  }
}

ImageBuffer to_gray(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  ImageBuffer out(img.width(), img.height(), 1);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double y = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
  }
  return out;
}

ImageBuffer to_rgb(const ImageBuffer& img) {
  if (img.channels() == 3) return img;
  ImageBuffer out(img.width(), img.height(), 3);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  return out;
}

// ---------------------------------------------------------------------------

BackgroundAccumulator::BackgroundAccumulator(int width, int height, int channels, double alpha)
    : width_(width), height_(height), channels_(channels), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
  if (width < 1 || height < 1 || (channels != 1 && channels != 3)) {
    throw Error(ErrorKind::InvalidArgument, "invalid accumulator shape");
  }
  b_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
}

BackgroundAccumulator BackgroundAccumulator::seeded(int width, int height, int channels, std::vector<double> initial,
                                                    double alpha) {
  BackgroundAccumulator acc(width, height, channels, alpha);
  if (initial.size() != acc.b_.size()) throw Error(ErrorKind::ShapeMismatch, "initial background has wrong size");
  for (double v : initial) {
    if (!(v >= 0.0 && v <= 255.0)) throw Error(ErrorKind::InvalidArgument, "background values must lie in [0, 255]");
  }
  acc.b_ = std::move(initial);
  acc.frames_seen_ = 1;
  return acc;
}

void BackgroundAccumulator::accumulate(const ImageBuffer& frame) {
  if (frame.width() != width_ || frame.height() != height_ || frame.channels() != channels_) {
    throw Error(ErrorKind::ShapeMismatch, "frame shape differs from the accumulator");
  }
  if (frames_seen_ == 0) {
    std::transform(frame.data().begin(), frame.data().end(), b_.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v); });
  } else {
    kernels::parallel::blend(b_, frame.data(), alpha_);
  }
  ++frames_seen_;
}

ImageBuffer BackgroundAccumulator::export_image() const {
  ImageBuffer out(width_, height_, channels_);
  auto dst = out.data();
  for (std::size_t i = 0; i < b_.size(); ++i) {
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(b_[i]), 0L, 255L));
  }
  return out;
}

// ---------------------------------------------------------------------------

HistogramMatch histogram_match(const ImageBuffer& source, const ImageBuffer& reference) {
  if (source.empty() || reference.empty()) throw Error(ErrorKind::EmptyImage, "histogram matching needs pixels");
  if (source.channels() != 1 || reference.channels() != 1) {
    throw Error(ErrorKind::InvalidArgument, "histogram matching expects 1-channel images");
  }
  const auto hs = kernels::parallel::histogram(source.data());
  const auto hr = kernels::parallel::histogram(reference.data());
  const std::uint64_t ns = source.pixel_count();
  const std::uint64_t nr = reference.pixel_count();

  std::array<std::uint64_t, 256> cs{}, cr{};
  std::uint64_t run = 0;
  for (int v = 0; v < 256; ++v) cs[v] = run += hs[v];
  run = 0;
  for (int v = 0; v < 256; ++v) cr[v] = run += hr[v];

  // Compare cr[u] / nr >= cs[v] / ns in exact integer arithmetic. Both CDFs are
  // non-decreasing, so the reference cursor only moves forward.
  HistogramMatch out;
  int u = 0;
  for (int v = 0; v < 256; ++v) {
    while (u < 255 && static_cast<unsigned __int128>(cr[u]) * ns < static_cast<unsigned __int128>(cs[v]) * nr) ++u;
    out.mapping[v] = static_cast<std::uint8_t>(u);
  }
  out.image = ImageBuffer(source.width(), source.height(), 1);
  kernels::parallel::apply_lut(source.data(), out.image.data(), out.mapping);
  return out;
}

std::string format_mapping(const std::array<std::uint8_t, 256>& mapping) {
  std::ostringstream os;
  for (int v = 0; v < 256; ++v) os << (v ? "," : "") << static_cast<int>(mapping[v]);
  return os.str();
}

// ---------------------------------------------------------------------------

DistortionParams DistortionParams::for_image(int width, int height, double k1, double k2) {
  DistortionParams p;
  p.k1 = k1;
  p.k2 = k2;
  p.center = {width / 2.0, height / 2.0};
  p.norm_radius = 0.5 * std::hypot(static_cast<double>(width), static_cast<double>(height));
  return p;
}

namespace {
// k1 r^2 + k2 r^4; the full factor is one plus this.
double radial_excess(double dx, double dy, const DistortionParams& params) {
  const double r2 = (dx * dx + dy * dy) / (params.norm_radius * params.norm_radius);
  return params.k1 * r2 + params.k2 * r2 * r2;
}
}  // namespace

ImagePoint distort_point(ImagePoint p, const DistortionParams& params) {
  const double dx = p.x - params.center.x;
  const double dy = p.y - params.center.y;
  const double e = radial_excess(dx, dy, params);
  return {p.x + dx * e, p.y + dy * e};
}

ImagePoint undistort_point(ImagePoint p, const DistortionParams& params, int rounds) {
  if (params.is_identity()) return p;
  const double dx = p.x - params.center.x;
  const double dy = p.y - params.center.y;
  double ux = dx, uy = dy;
  for (int i = 0; i < rounds; ++i) {
    const double f = 1.0 + radial_excess(ux, uy, params);
    if (!(std::abs(f) > 1e-12)) break;
    ux = dx / f;
    uy = dy / f;
  }
  return {params.center.x + ux, params.center.y + uy};
}

// ---------------------------------------------------------------------------

namespace {
void require_mask(const ImageBuffer& mask) {
  if (mask.channels() != 1) throw Error(ErrorKind::InvalidArgument, "morphology expects a 1-channel mask");
}
}  // namespace

ImageBuffer dilate3x3(const ImageBuffer& mask) {
  require_mask(mask);
  ImageBuffer out(mask.width(), mask.height(), 1);
  kernels::parallel::dilate3x3(mask.data(), out.data(), mask.width(), mask.height());
  return out;
}

ImageBuffer erode3x3(const ImageBuffer& mask) {
  require_mask(mask);
  ImageBuffer out(mask.width(), mask.height(), 1);
  kernels::parallel::erode3x3(mask.data(), out.data(), mask.width(), mask.height());
  return out;
}

}  // namespace trafficlens
