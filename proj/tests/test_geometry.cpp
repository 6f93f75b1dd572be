#include <cmath>
#include <vector>

#include "support.hpp"
#include "trafficlens/geometry.hpp"

using namespace trafficlens;
using tl_test::for_all;
using tl_test::Gen;

namespace {

// Independent pinhole model: pitch the world about X, push it along the
// optical axis, then apply the intrinsics by hand.
ImagePoint pinhole(const CameraModel& c, double X, double Y, double Z) {
  const double phi = (c.theta_c - 90.0) * M_PI / 180.0;
  const double xc = X;
  const double yc = std::cos(phi) * Y - std::sin(phi) * Z;
  const double zc = std::sin(phi) * Y + std::cos(phi) * Z + c.h_c / std::sin(c.theta_c * M_PI / 180.0);
  return {(c.f * c.kx * xc + c.shear * yc) / zc + c.cx, c.f * c.ky * yc / zc + c.cy};
}

CameraModel random_camera(Gen& g) {
  CameraModel c;
  c.f = g.uniform(400, 2000);
  c.kx = g.uniform(0.9, 1.1);
  c.ky = g.uniform(0.9, 1.1);
  c.shear = g.uniform(-2, 2);
  c.cx = g.uniform(300, 900);
  c.cy = g.uniform(200, 500);
  c.theta_c = g.uniform(15, 90);
  c.h_c = g.uniform(3, 20);
  c.width = 1280;
  c.height = 720;
  return c;
}

}  // namespace

TEST(Homography, RoundTripOnRandomPoints) {
  for_all(20, 1, [](Gen& g) {
    const auto h = Homography::from_matrix(g.homography());
    const auto inv = invert(h);
    for (int i = 0; i < 1000; ++i) {
      const ImagePoint p = g.point<ImageFrame>(0, 1000);
      const ImagePoint back = inv(h(p));
      ASSERT_LT(distance(p, back), 1e-9);
    }
  });
}

TEST(Homography, CanonicalScaleIgnoresFactor) {
  for_all(50, 2, [](Gen& g) {
    const Eigen::Matrix3d m = g.homography();
    const double k = g.coin() ? g.uniform(0.01, 100) : -g.uniform(0.01, 100);
    const auto a = Homography::from_matrix(m);
    const auto b = Homography::from_matrix(k * m);
    EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(a.matrix().norm(), 1.0, 1e-12);
    EXPECT_GE(a.matrix()(2, 2), 0.0);
  });
}

TEST(Homography, ComposeMatchesSequentialApplication) {
  for_all(30, 3, [](Gen& g) {
    const auto a = PlanarMap<GroundFrame, ImageFrame>::from_matrix(g.homography());
    const auto b = Homography::from_matrix(g.homography());
    const auto ab = compose(a, b);
    for (int i = 0; i < 50; ++i) {
      const GroundPoint p = g.point<GroundFrame>(-50, 50);
      const BevPoint direct = b(a(p));
      const BevPoint composed = ab(p);
      EXPECT_LT(distance(direct, composed), 1e-7 * (1.0 + std::hypot(direct.x, direct.y)));
    }
  });
}

TEST(Homography, IdentityLeavesPointsAlone) {
  const auto id = Homography::identity();
  const BevPoint p = id(ImagePoint{3.5, -7.25});
  // Stored at unit norm, so only rounding separates the result from the input.
  EXPECT_NEAR(p.x, 3.5, 1e-12);
  EXPECT_NEAR(p.y, -7.25, 1e-12);
}

TEST(Homography, SingularMatrixRejected) {
  Eigen::Matrix3d m;
  m << 1, 2, 3, 2, 4, 6, 0, 0, 1;
  EXPECT_THROW(Homography::from_matrix(m), Error);
  try {
    Homography::from_matrix(Eigen::Matrix3d::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularMatrix);
  }
}

TEST(Homography, PointOnLineAtInfinityIsDegenerate) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 0) = 1.0;
  m(2, 2) = 0.0;
  m(0, 2) = 1.0;
  const auto h = Homography::from_matrix(m);
  try {
    h(ImagePoint{0.0, 5.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegeneratePoint);
  }
}

TEST(Dlt, ExactOnNoiselessPlantedHomographies) {
  for_all(100, 4, [](Gen& g) {
    const auto truth = Homography::from_matrix(g.homography());
    const int n = g.integer(4, 60);
    std::vector<PointPair<ImageFrame, BevFrame>> pairs;
    for (int i = 0; i < n; ++i) {
      const ImagePoint p = g.point<ImageFrame>(0, 1000);
      pairs.emplace_back(p, truth(p));
    }
    const auto est = estimate_dlt(pairs);
    double sq = 0.0;
    for (const auto& [a, b] : pairs) sq += std::pow(distance(est(a), b), 2);
    EXPECT_LT(std::sqrt(sq / n), 1e-8);
  });
}

TEST(Dlt, FewerThanFourPairs) {
  std::vector<PointPair<ImageFrame, BevFrame>> pairs = {{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}};
  try {
    estimate_dlt(pairs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientPairs);
  }
}

TEST(Dlt, CollinearTripleIsDegenerate) {
  std::vector<PointPair<ImageFrame, BevFrame>> pairs = {
      {{0, 0}, {0, 0}}, {{1, 1}, {2, 2}}, {{2, 2}, {4, 4}}, {{0, 5}, {1, 7}}};
  try {
    estimate_dlt(pairs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateConfiguration);
  }
}

TEST(Camera, GroundHomographyAgreesWithExplicitProjection) {
  for_all(50, 5, [](Gen& g) {
    const CameraModel cam = random_camera(g);
    const auto h = compose_from_camera(cam);
    const Eigen::Matrix<double, 3, 4> p = projection_matrix(cam);
    for (int i = 0; i < 200; ++i) {
      const GroundPoint w{g.uniform(-30, 30), g.uniform(-40, 10)};
      if (camera_depth(cam, w) < 1.0) continue;
      const ImagePoint expect = pinhole(cam, w.x, w.y, 0.0);
      const ImagePoint got = h(w);
      ASSERT_LT(distance(expect, got), 1e-9 * (1.0 + std::hypot(expect.x, expect.y)));
      const Eigen::Vector3d q = p * Eigen::Vector4d(w.x, w.y, 0.0, 1.0);
      ASSERT_LT(distance(expect, ImagePoint{q.x() / q.z(), q.y() / q.z()}), 1e-9 * (1.0 + std::hypot(expect.x, expect.y)));
    }
  });
}

TEST(Camera, ProjectionMatchesPinholeOffTheGround) {
  for_all(20, 6, [](Gen& g) {
    const CameraModel cam = random_camera(g);
    const Eigen::Matrix<double, 3, 4> p = projection_matrix(cam);
    for (int i = 0; i < 100; ++i) {
      const double X = g.uniform(-10, 10), Y = g.uniform(-20, 0), Z = g.uniform(-3, 0);
      const Eigen::Vector3d q = p * Eigen::Vector4d(X, Y, Z, 1.0);
      if (q.z() < 1.0) continue;
      const ImagePoint expect = pinhole(cam, X, Y, Z);
      EXPECT_LT(distance(expect, ImagePoint{q.x() / q.z(), q.y() / q.z()}), 1e-8);
    }
  });
}

TEST(Camera, CentreSitsAtMountingHeight) {
  for_all(30, 7, [](Gen& g) {
    const CameraModel cam = random_camera(g);
    const Eigen::Matrix<double, 3, 4> p = projection_matrix(cam);
    // The camera centre spans the null space of P.
    Eigen::FullPivLU<Eigen::Matrix<double, 3, 4>> lu(p);
    const Eigen::Vector4d c = lu.kernel().col(0);
    EXPECT_NEAR(std::abs(c.z() / c.w()), cam.h_c, 1e-9 * cam.h_c);
    EXPECT_NEAR(c.x() / c.w(), 0.0, 1e-9);
  });
}

TEST(Camera, OriginLandsOnPrincipalPoint) {
  CameraModel cam;
  cam.f = 1000;
  cam.cx = 640;
  cam.cy = 360;
  cam.theta_c = 30;
  cam.h_c = 8;
  const ImagePoint o = compose_from_camera(cam)(GroundPoint{0, 0});
  EXPECT_NEAR(o.x, 640, 1e-9);
  EXPECT_NEAR(o.y, 360, 1e-9);
  EXPECT_NEAR(camera_depth(cam, {0, 0}), 16.0, 1e-12);
}

TEST(Camera, StraightDownIsAllowed) {
  CameraModel cam;
  cam.f = 500;
  cam.theta_c = 90;
  cam.h_c = 10;
  const ImagePoint p = compose_from_camera(cam)(GroundPoint{2, 4});
  EXPECT_NEAR(p.x, 100, 1e-9);
  EXPECT_NEAR(p.y, 200, 1e-9);
}

TEST(Camera, InvalidParametersRejected) {
  const auto kind_of = [](CameraModel c) {
    try {
      c.validate();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  CameraModel c;
  c.f = 0;
  EXPECT_EQ(kind_of(c), ErrorKind::InvalidCamera);
  c = {};
  c.theta_c = 0;
  EXPECT_EQ(kind_of(c), ErrorKind::InvalidCamera);
  c.theta_c = 91;
  EXPECT_EQ(kind_of(c), ErrorKind::InvalidCamera);
  c = {};
  c.h_c = -1;
  EXPECT_EQ(kind_of(c), ErrorKind::InvalidCamera);
  c = {};
  c.cx = NAN;
  EXPECT_EQ(kind_of(c), ErrorKind::InvalidCamera);
}

TEST(Angles, WrapIntoHalfOpenRange) {
  EXPECT_EQ(wrap_degrees(180.0), 180.0);
  EXPECT_EQ(wrap_degrees(-180.0), 180.0);
  EXPECT_EQ(wrap_degrees(540.0), 180.0);
  EXPECT_NEAR(wrap_degrees(-190.0), 170.0, 1e-12);
  for_all(1, 8, [](Gen& g) {
    for (int i = 0; i < 1000; ++i) {
      const double a = g.uniform(-2000, 2000);
      const double w = wrap_degrees(a);
      EXPECT_GT(w, -180.0);
      EXPECT_LE(w, 180.0);
      EXPECT_NEAR(std::remainder(a - w, 360.0), 0.0, 1e-9);
    }
  });
}

TEST(GroundScale, RejectsNonPositive) {
  EXPECT_THROW(GroundScale::make(0.0), Error);
  EXPECT_THROW(GroundScale::make(-0.1), Error);
  EXPECT_EQ(GroundScale::make(0.1).meters_per_px, 0.1);
}
