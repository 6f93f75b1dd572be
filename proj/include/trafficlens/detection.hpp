#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "trafficlens/geometry.hpp"

namespace trafficlens {

inline constexpr int kNumClasses = 11;

// MIO-TCD categories in their canonical (alphabetical) order; the index is the
// position in class-probability vectors.
enum class ObjectClass : int {
  ArticulatedTruck = 0,
  Bicycle,
  Bus,
  Car,
  Motorcycle,
  MotorisedVehicle,
  NonMotorisedVehicle,
  Pedestrian,
  PickupTruck,
  SingleUnitTruck,
  WorkVan,
};

std::string_view class_name(ObjectClass cls);
std::optional<ObjectClass> class_from_name(std::string_view name);
inline bool is_pedestrian(ObjectClass cls) { return cls == ObjectClass::Pedestrian; }
inline int class_index(ObjectClass cls) { return static_cast<int>(cls); }

using ClassVector = std::array<double, kNumClasses>;

/// Index of the largest entry; ties go to the lowest index.
int argmax_class(const ClassVector& v);

/// Axis-aligned box: centre (x, y) and size (w, h), image pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
  int frame = 0;
  BBox bbox;
  double objectness = 1.0;
  ClassVector class_probs{};

  void validate() const;
};

}  // namespace trafficlens
