#include "trafficlens/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <string>

namespace trafficlens {
namespace detail {

Eigen::Matrix3d canonicalize(const Eigen::Matrix3d& g) {
  const double norm = g.norm();
  if (!std::isfinite(norm) || norm == 0.0) {
    throw Error(ErrorKind::SingularMatrix, "matrix is zero or non-finite");
  }
  Eigen::Matrix3d c = g / norm;
  double pivot = c(2, 2);
  if (pivot == 0.0) {
    for (int i = 0; i < 9 && pivot == 0.0; ++i) pivot = c(i / 3, i % 3);
  }
  if (pivot < 0.0) c = -c;
  return c;
}

void require_invertible(const Eigen::Matrix3d& canonical) {
  const double det = canonical.determinant();
  if (!std::isfinite(det) || std::abs(det) < kSingularDeterminant) {
    throw Error(ErrorKind::SingularMatrix, "|det| = " + std::to_string(std::abs(det)));
  }
}

Eigen::Vector2d project(const Eigen::Matrix3d& g, double x, double y) {
  const double d = g(2, 0) * x + g(2, 1) * y + g(2, 2);
  if (!(std::abs(d) >= kDegenerateDenominator)) {
    throw Error(ErrorKind::DegeneratePoint,
                "projective denominator vanishes at (" + std::to_string(x) + ", " + std::to_string(y) + ")");
  }
  return {(g(0, 0) * x + g(0, 1) * y + g(0, 2)) / d, (g(1, 0) * x + g(1, 1) * y + g(1, 2)) / d};
}

namespace {

// Similarity taking the centroid to the origin and the mean distance to sqrt(2).
Eigen::Matrix3d normalizer(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 0.0) || !std::isfinite(mean_dist)) {
    throw Error(ErrorKind::DegenerateConfiguration, "all points coincide");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

bool has_collinear_triple(std::span<const Eigen::Vector2d> pts) {
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, (p - pts[0]).norm());
  const double tol = 1e-9 * scale * scale;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        const Eigen::Vector2d a = pts[j] - pts[i];
        const Eigen::Vector2d b = pts[k] - pts[i];
        if (std::abs(a.x() * b.y() - a.y() * b.x()) <= tol) return true;
      }
  return false;
}

}  // namespace

Eigen::Matrix3d dlt(std::span<const Eigen::Vector2d> src, std::span<const Eigen::Vector2d> dst) {
  const std::size_t n = src.size();
  if (n < 4 || dst.size() != n) {
    throw Error(ErrorKind::InsufficientPairs, "need at least 4 pairs, got " + std::to_string(n));
  }
  if (n == 4 && (has_collinear_triple(src) || has_collinear_triple(dst))) {
    throw Error(ErrorKind::DegenerateConfiguration, "three of the four points are collinear");
  }

  const Eigen::Matrix3d ts = normalizer(src);
  const Eigen::Matrix3d td = normalizer(dst);

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d p = ts * src[i].homogeneous();
    const Eigen::Vector3d q = td * dst[i].homogeneous();
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Rank must be at least 8 for a unique null direction.
  if (sv.size() < 8 || sv(7) <= 1e-10 * sv(0)) {
    throw Error(ErrorKind::DegenerateConfiguration, "design matrix is rank deficient");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return td.inverse() * hn * ts;
}

}  // namespace detail

void CameraModel::validate() const {
  const auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidCamera, what); };
  for (double v : {f, kx, ky, shear, cx, cy, theta_c, h_c}) {
    if (!std::isfinite(v)) bad("non-finite camera parameter");
  }
  if (!(f > 0.0)) bad("focal length must be positive");
  if (!(kx > 0.0) || !(ky > 0.0)) bad("axis coefficients must be positive");
  if (!(h_c > 0.0)) bad("camera height must be positive");
  // 90 (looking straight down) is accepted; the overhead camera is a valid limit case.
  if (!(theta_c > 0.0) || theta_c > 90.0) bad("camera pitch must lie in (0, 90] degrees");
  if (width < 0 || height < 0) bad("negative image size");
}

Eigen::Matrix<double, 3, 4> projection_matrix(const CameraModel& cam) {
  cam.validate();
  const double phi = deg_to_rad(cam.theta_c - 90.0);
  Eigen::Matrix<double, 3, 4> k;
  k << cam.f * cam.kx, cam.shear, cam.cx, 0,  //
      0, cam.f * cam.ky, cam.cy, 0,           //
      0, 0, 1, 0;
  Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
  r(1, 1) = std::cos(phi);
  r(1, 2) = -std::sin(phi);
  r(2, 1) = std::sin(phi);
  r(2, 2) = std::cos(phi);
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t(2, 3) = cam.h_c / std::sin(deg_to_rad(cam.theta_c));
  return k * t * r;
}

PlanarMap<GroundFrame, ImageFrame> compose_from_camera(const CameraModel& cam) {
  cam.validate();
  const double phi = deg_to_rad(cam.theta_c - 90.0);
  const double axis_dist = cam.h_c / std::sin(deg_to_rad(cam.theta_c));
  Eigen::Matrix3d k;
  k << cam.f * cam.kx, cam.shear, cam.cx, 0, cam.f * cam.ky, cam.cy, 0, 0, 1;
  // Columns: first two rotation columns (X, Y axes) and the translation; the
  // Z column drops out on the ground plane.
  Eigen::Matrix3d extr;
  extr << 1, 0, 0,  //
      0, std::cos(phi), 0,  //
      0, std::sin(phi), axis_dist;
  return PlanarMap<GroundFrame, ImageFrame>::from_matrix(k * extr);
}

double camera_depth(const CameraModel& cam, GroundPoint p) {
  const double phi = deg_to_rad(cam.theta_c - 90.0);
  return std::sin(phi) * p.y + cam.h_c / std::sin(deg_to_rad(cam.theta_c));
}

GroundScale GroundScale::make(double iota) {
  if (!(iota > 0.0) || !std::isfinite(iota)) {
    throw Error(ErrorKind::InvalidArgument, "ground scale must be positive");
  }
  return GroundScale{iota};
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

}  // namespace trafficlens
