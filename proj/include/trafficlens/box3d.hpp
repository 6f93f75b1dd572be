#pragma once

#include <array>
#include <optional>

#include "trafficlens/detection.hpp"
#include "trafficlens/geometry.hpp"

namespace trafficlens {

struct Dimensions {
  double length = 0.0;  // meters, along the heading
  double width = 0.0;   // meters
};

/// Footprint size per class. Defaults are rough operator-tunable values; only
/// the bus entry has a published source.
class DimensionPriors {
 public:
  DimensionPriors();  // default table
  static DimensionPriors empty();

  void set(ObjectClass cls, Dimensions d);
  std::optional<Dimensions> get(ObjectClass cls) const;
  /// Throws MissingPrior.
  Dimensions at(ObjectClass cls) const;

 private:
  struct Empty {};
  explicit DimensionPriors(Empty) {}
  std::array<std::optional<Dimensions>, kNumClasses> table_{};
};

/// BEV rectangle ordered front-left, rear-left, rear-right, front-right:
/// counter-clockwise for a y-up reader, i.e. positive shoelace area in pixel
/// coordinates.
using Footprint = std::array<BevPoint, 4>;

Footprint make_footprint(BevPoint center, ObjectClass cls, double heading_deg, const DimensionPriors& priors,
                         GroundScale scale);

double footprint_area(const Footprint& f);

/// Floor corners 0..3 then roof corners 4..7, perspective pixels.
struct Cuboid {
  std::array<ImagePoint, 8> corners;
};

inline constexpr double kDefaultHeightCoefficient = 0.6;

/// Floor = G^-1 applied to the footprint; roof = floor shifted up by
/// beta * h_b (vehicles) or h_b (pedestrians).
Cuboid lift_to_3d(const Footprint& footprint, const InverseHomography& g_inv, const BBox& bbox_2d,
                  ObjectClass cls, double beta = kDefaultHeightCoefficient);

/// Intersection of the floor diagonals: the image of the footprint centre.
ImagePoint floor_center(const Cuboid& c);

}  // namespace trafficlens
