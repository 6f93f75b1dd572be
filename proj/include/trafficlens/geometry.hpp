#pragma once

#include <array>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "trafficlens/error.hpp"

namespace trafficlens {

// Frame tags. A point or planar map is bound to its frames at compile time so
// perspective pixels can never be fed where BEV pixels are expected.
struct ImageFrame {};   // camera perspective pixels (x right, y down)
struct BevFrame {};     // bird's-eye-view / satellite pixels
struct GroundFrame {};  // world ground plane, meters

template <class Frame>
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

using ImagePoint = Point<ImageFrame>;
using BevPoint = Point<BevFrame>;
using GroundPoint = Point<GroundFrame>;

template <class Frame>
double distance(Point<Frame> a, Point<Frame> b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

namespace detail {
inline constexpr double kDegenerateDenominator = 1e-12;
inline constexpr double kSingularDeterminant = 1e-12;

Eigen::Matrix3d canonicalize(const Eigen::Matrix3d& g);
// Throws SingularMatrix if the canonical matrix is (numerically) singular.
void require_invertible(const Eigen::Matrix3d& canonical);
Eigen::Vector2d project(const Eigen::Matrix3d& g, double x, double y);
Eigen::Matrix3d dlt(std::span<const Eigen::Vector2d> src, std::span<const Eigen::Vector2d> dst);
}  // namespace detail

/// Planar projective transform from frame `From` to frame `To`.
///
/// The matrix is kept in canonical scale: unit Frobenius norm, and g33 >= 0
/// (or, when g33 is exactly zero, the first non-zero entry positive). Two maps
/// that differ only by a scalar factor therefore compare element-wise equal.
template <class From, class To>
class PlanarMap {
 public:
  PlanarMap() : g_(detail::canonicalize(Eigen::Matrix3d::Identity())) {}

  static PlanarMap identity() { return PlanarMap(); }

  static PlanarMap from_matrix(const Eigen::Matrix3d& g) {
    PlanarMap h;
    h.g_ = detail::canonicalize(g);
    detail::require_invertible(h.g_);
    return h;
  }

  /// Row-major g11..g33.
  static PlanarMap from_row_major(const std::array<double, 9>& v) {
    Eigen::Matrix3d g;
    g << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    return from_matrix(g);
  }

  std::array<double, 9> row_major() const {
    return {g_(0, 0), g_(0, 1), g_(0, 2), g_(1, 0), g_(1, 1), g_(1, 2), g_(2, 0), g_(2, 1), g_(2, 2)};
  }

  const Eigen::Matrix3d& matrix() const { return g_; }

  Point<To> operator()(Point<From> p) const {
    const Eigen::Vector2d q = detail::project(g_, p.x, p.y);
    return {q.x(), q.y()};
  }

 private:
  Eigen::Matrix3d g_;
};

/// Perspective image -> BEV pixels (the calibration result).
using Homography = PlanarMap<ImageFrame, BevFrame>;
using InverseHomography = PlanarMap<BevFrame, ImageFrame>;

template <class From, class To>
Point<To> apply(const PlanarMap<From, To>& h, Point<From> p) {
  return h(p);
}

template <class From, class To>
PlanarMap<To, From> invert(const PlanarMap<From, To>& h) {
  return PlanarMap<To, From>::from_matrix(h.matrix().inverse());
}

/// Map that applies `first`, then `second`.
template <class A, class B, class C>
PlanarMap<A, C> compose(const PlanarMap<A, B>& first, const PlanarMap<B, C>& second) {
  return PlanarMap<A, C>::from_matrix(second.matrix() * first.matrix());
}

template <class From, class To>
using PointPair = std::pair<Point<From>, Point<To>>;

/// Least-squares homography by Hartley-normalised DLT. Needs >= 4 pairs; four
/// pairs with three collinear points, or any rank-deficient design matrix,
/// raise DegenerateConfiguration.
template <class From, class To>
PlanarMap<From, To> estimate_dlt(std::span<const PointPair<From, To>> pairs) {
  std::vector<Eigen::Vector2d> src, dst;
  src.reserve(pairs.size());
  dst.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    src.emplace_back(a.x, a.y);
    dst.emplace_back(b.x, b.y);
  }
  const Eigen::Matrix3d g = detail::dlt(src, dst);
  try {
    return PlanarMap<From, To>::from_matrix(g);
  } catch (const Error& e) {
    throw Error(ErrorKind::DegenerateConfiguration, e.detail());
  }
}

template <class From, class To>
PlanarMap<From, To> estimate_dlt(const std::vector<PointPair<From, To>>& pairs) {
  return estimate_dlt(std::span<const PointPair<From, To>>(pairs));
}

/// Pinhole camera looking at a flat ground plane.
///
/// theta_c is the pitch below the horizon in degrees (90 = straight down);
/// h_c the mounting height in meters. `width`/`height` are the image size and
/// only used by callers that rasterise.
struct CameraModel {
  double f = 1.0;
  double kx = 1.0;
  double ky = 1.0;
  double shear = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double theta_c = 90.0;
  double h_c = 1.0;
  int width = 0;
  int height = 0;

  void validate() const;
};

/// Full 3x4 projection K * T * R for world points [X Y Z 1]. R pitches the
/// ground plane by (theta_c - 90) degrees about the X axis, T moves it
/// h_c / sin(theta_c) along the optical axis, so the axis meets the ground at
/// the world origin and the camera sits h_c above the plane.
Eigen::Matrix<double, 3, 4> projection_matrix(const CameraModel& cam);

/// Ground-plane (Z = 0) reduction of the projection: world meters -> image.
PlanarMap<GroundFrame, ImageFrame> compose_from_camera(const CameraModel& cam);

/// Depth of a ground point along the optical axis (positive in front).
double camera_depth(const CameraModel& cam, GroundPoint p);

struct GroundScale {
  double meters_per_px = 1.0;  // iota

  static GroundScale make(double iota);
};

inline constexpr double deg_to_rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / 3.14159265358979323846; }

/// Wraps an angle into (-180, 180].
double wrap_degrees(double deg);

}  // namespace trafficlens
