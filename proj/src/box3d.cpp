#include "trafficlens/box3d.hpp"

#include <cmath>
#include <string>

namespace trafficlens {

DimensionPriors::DimensionPriors() {
  using C = ObjectClass;
  set(C::Car, {4.5, 1.8});
  set(C::Bus, {5.8, 2.9});
  set(C::ArticulatedTruck, {10.0, 2.5});
  set(C::PickupTruck, {5.3, 2.0});
  set(C::SingleUnitTruck, {7.0, 2.4});
  set(C::WorkVan, {5.0, 2.0});
  set(C::Motorcycle, {2.0, 0.8});
  set(C::Bicycle, {2.0, 0.8});
  set(C::Pedestrian, {0.6, 0.6});
  set(C::MotorisedVehicle, {4.0, 1.8});
  set(C::NonMotorisedVehicle, {4.0, 1.8});
}

DimensionPriors DimensionPriors::empty() { return DimensionPriors(Empty{}); }

void DimensionPriors::set(ObjectClass cls, Dimensions d) {
  if (!(d.length > 0.0) || !(d.width > 0.0)) {
    throw Error(ErrorKind::ConfigError, "prior for " + std::string(class_name(cls)) + " must be positive");
  }
  table_[class_index(cls)] = d;
}

std::optional<Dimensions> DimensionPriors::get(ObjectClass cls) const { return table_[class_index(cls)]; }

Dimensions DimensionPriors::at(ObjectClass cls) const {
  const auto d = get(cls);
  if (!d) throw Error(ErrorKind::MissingPrior, "no dimension prior for " + std::string(class_name(cls)));
  return *d;
}

Footprint make_footprint(BevPoint c, ObjectClass cls, double heading_deg, const DimensionPriors& priors,
                         GroundScale scale) {
  const Dimensions dim = priors.at(cls);
  const double half_l = dim.length / scale.meters_per_px / 2.0;
  const double half_w = dim.width / scale.meters_per_px / 2.0;
  const double t = deg_to_rad(heading_deg);
  const double dx = std::cos(t), dy = std::sin(t);  // forward
  const double nx = -dy, ny = dx;                   // left of forward with y up
  const auto corner = [&](double along, double across) {
    return BevPoint{c.x + along * dx + across * nx, c.y + along * dy + across * ny};
  };
  return {corner(half_l, half_w), corner(-half_l, half_w), corner(-half_l, -half_w), corner(half_l, -half_w)};
}

double footprint_area(const Footprint& f) {
  double twice = 0.0;
  for (int i = 0; i < 4; ++i) {
    const BevPoint& a = f[i];
    const BevPoint& b = f[(i + 1) % 4];
    twice += a.x * b.y - b.x * a.y;
  }
  return twice / 2.0;
}

Cuboid lift_to_3d(const Footprint& footprint, const InverseHomography& g_inv, const BBox& bbox_2d, ObjectClass cls,
                  double beta) {
  const double h3d = is_pedestrian(cls) ? bbox_2d.h : beta * bbox_2d.h;
  Cuboid out;
  for (int i = 0; i < 4; ++i) {
    const ImagePoint floor = apply(g_inv, footprint[i]);
    out.corners[i] = floor;
    out.corners[i + 4] = {floor.x, floor.y - h3d};
  }
  return out;
}

ImagePoint floor_center(const Cuboid& c) {
  // Lines p0 + s (p2 - p0) and p1 + u (p3 - p1).
  const auto& p0 = c.corners[0];
  const auto& p1 = c.corners[1];
  const auto& p2 = c.corners[2];
  const auto& p3 = c.corners[3];
  const double rx = p2.x - p0.x, ry = p2.y - p0.y;
  const double sx = p3.x - p1.x, sy = p3.y - p1.y;
  const double den = rx * sy - ry * sx;
  if (std::abs(den) < 1e-12) throw Error(ErrorKind::DegeneratePoint, "floor diagonals are parallel");
  const double s = ((p1.x - p0.x) * sy - (p1.y - p0.y) * sx) / den;
  return {p0.x + s * rx, p0.y + s * ry};
}

}  // namespace trafficlens
