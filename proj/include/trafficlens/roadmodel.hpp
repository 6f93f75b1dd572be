#pragma once

#include <span>
#include <vector>

#include "trafficlens/geometry.hpp"
#include "trafficlens/imaging.hpp"

namespace trafficlens {

inline constexpr std::uint8_t kRoad = 255;

struct SrgParams {
  int tau_alpha = 12;  // gray levels

  void validate() const;
};

/// Seeded region growing on a gray image, 8-connected. A neighbour joins when
/// its intensity differs from the pixel that reached it by less than
/// tau_alpha. Seeds are rounded to the nearest pixel; seeds outside the image
/// are skipped. Returns a mask with 255 on the grown region.
ImageBuffer srg_segment(const ImageBuffer& gray, std::span<const BevPoint> seeds, const SrgParams& params);

/// Morphological closing (3x3 dilate then erode).
ImageBuffer refine_mask(const ImageBuffer& mask);

struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel& a, const Pixel& b) {
    return a.y != b.y ? a.y <=> b.y : a.x <=> b.x;
  }
};

struct BoundarySet {
  std::vector<std::vector<Pixel>> chains;

  bool empty() const;
  /// Distinct chain pixels ordered by (y, x).
  std::vector<Pixel> pixels() const;
};

/// Moore-neighbour tracing of every outer and hole contour of the road mask,
/// stopped by Jacob's criterion. Pixels outside the image count as background.
BoundarySet extract_boundary(const ImageBuffer& mask);

struct NearestBoundary {
  BevPoint point;
  double distance = 0.0;
};

/// Linear scan; ties go to the lowest (y, x).
NearestBoundary nearest_boundary_point(BevPoint p, const BoundarySet& boundary);

/// Bucket grid over the boundary pixels for repeated queries. Answers are
/// identical to nearest_boundary_point.
class BoundaryIndex {
 public:
  explicit BoundaryIndex(const BoundarySet& boundary, int cell = 16);

  bool empty() const { return pixels_.empty(); }
  NearestBoundary nearest(BevPoint p) const;
  /// Pixels whose distance to `p` lies in [lo, hi], ordered by (y, x).
  std::vector<Pixel> within(BevPoint p, double lo, double hi) const;

 private:
  std::vector<int> cells_covering(double x0, double y0, double x1, double y1) const;

  int cell_;
  int min_cx_ = 0, min_cy_ = 0, cols_ = 0, rows_ = 0;
  std::vector<Pixel> pixels_;          // sorted by (y, x)
  std::vector<std::vector<int>> buckets_;  // indices into pixels_
};

/// Direction of the road edge near `l_r`, degrees in [0, 180). Uses the two
/// boundary pixels farthest apart within the annulus radius +- sqrt(2)/2. The
/// radius doubles up to four times when fewer than two pixels are found.
double boundary_heading(BevPoint l_r, const BoundaryIndex& index, double radius = 5.0);
double boundary_heading(BevPoint l_r, const BoundarySet& boundary, double radius = 5.0);

}  // namespace trafficlens
