#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "support.hpp"
#include "trafficlens/calibration.hpp"

using namespace trafficlens;
using tl_test::for_all;
using tl_test::Gen;

namespace {

// Planted image -> BEV map sized like a roadside camera.
Homography planted(Gen& g) {
  Eigen::Matrix3d m;
  m << 0.45 + g.uniform(-0.05, 0.05), 0.1 + g.uniform(-0.05, 0.05), 20 + g.uniform(-10, 10),  //
      0.01 + g.uniform(-0.01, 0.01), 0.9 + g.uniform(-0.1, 0.1), 5 + g.uniform(-10, 10),     //
      g.uniform(-1e-5, 1e-5), 8e-4 + g.uniform(-1e-4, 1e-4), 1.0;
  return Homography::from_matrix(m);
}

struct Planted {
  Homography truth;
  std::vector<Correspondence> matches;
  std::vector<bool> inlier;
};

Planted make_matches(Gen& g, int n, double outlier_fraction, double sigma) {
  Planted p{planted(g), {}, {}};
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), g.engine());
  p.inlier.assign(n, true);
  for (int i = 0; i < static_cast<int>(n * outlier_fraction); ++i) p.inlier[order[i]] = false;
  for (int i = 0; i < n; ++i) {
    const ImagePoint cam{g.uniform(0, 1280), g.uniform(0, 720)};
    BevPoint sat = p.truth(cam);
    if (p.inlier[i]) {
      sat.x += g.normal(sigma);
      sat.y += g.normal(sigma);
    } else {
      sat = {g.uniform(0, 600), g.uniform(0, 600)};
    }
    p.matches.push_back({cam, sat});
  }
  return p;
}

double rmse_vs_truth(const Homography& est, const Planted& p) {
  double sq = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < p.matches.size(); ++i) {
    if (!p.inlier[i]) continue;
    sq += std::pow(distance(est(p.matches[i].cam), p.truth(p.matches[i].cam)), 2);
    ++n;
  }
  return std::sqrt(sq / n);
}

std::vector<std::vector<ImagePoint>> straight_lines(Gen& g, int count, int per_line) {
  std::vector<std::vector<ImagePoint>> out;
  for (int k = 0; k < count; ++k) {
    const double y0 = g.uniform(60, 660), slope = g.uniform(-0.3, 0.3);
    std::vector<ImagePoint> line;
    for (int i = 0; i < per_line; ++i) {
      const double x = 40 + 1200.0 * i / (per_line - 1);
      line.push_back({x, y0 + slope * (x - 640)});
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace

TEST(RansacIterations, ClosedFormValues) {
  EXPECT_EQ(ransac_iterations(0.99, 0.5, 4), 72u);
  EXPECT_EQ(ransac_iterations(0.99, 0.9, 4), 5u);
  EXPECT_EQ(ransac_iterations(0.99, 1.0, 4), 1u);
}

TEST(RansacIterations, MatchesDirectEvaluation) {
  for_all(200, 1, [](Gen& g) {
    const double rho = g.uniform(0.5, 0.999), eps = g.uniform(0.2, 0.99);
    const double direct = std::ceil(std::log(1 - rho) / std::log(1 - std::pow(eps, 4)));
    const auto n = ransac_iterations(rho, eps, 4);
    // log1p and log can disagree only when the ratio sits on an integer.
    EXPECT_LE(std::abs(static_cast<double>(n) - direct), 1.0);
  });
}

TEST(RansacIterations, RejectsBadProbabilities) {
  const auto kind = [](double rho, double eps) {
    try {
      ransac_iterations(rho, eps, 4);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  EXPECT_EQ(kind(1.0, 0.5), ErrorKind::InvalidProbability);
  EXPECT_EQ(kind(0.0, 0.5), ErrorKind::InvalidProbability);
  EXPECT_EQ(kind(0.99, 0.0), ErrorKind::InvalidProbability);
  EXPECT_EQ(kind(0.99, 1.5), ErrorKind::InvalidProbability);
}

TEST(RansacIterations, TinyInlierRatioSaturates) {
  EXPECT_EQ(ransac_iterations(0.99, 1e-100, 4), std::numeric_limits<std::size_t>::max());
}

TEST(Ransac, FourExactMatches) {
  Gen g(2);
  const Homography truth = planted(g);
  std::vector<Correspondence> m;
  for (ImagePoint p : {ImagePoint{100, 100}, ImagePoint{1100, 120}, ImagePoint{1000, 650}, ImagePoint{150, 600}}) {
    m.push_back({p, truth(p)});
  }
  const auto r = ransac_homography(m, {}, 9);
  EXPECT_EQ(r.votes, 4u);
  for (bool b : r.inlier_mask) EXPECT_TRUE(b);
  for (const auto& c : m) EXPECT_LT(distance(r.h(c.cam), c.sat), 1e-8);
}

TEST(Ransac, EightOfTenVotes) {
  // Inliers on a jittered 4 x 2 grid so the eight span the image.
  for_all(20, 3, [](Gen& g) {
    const Homography truth = planted(g);
    std::vector<Correspondence> m;
    for (int i = 0; i < 8; ++i) {
      const ImagePoint p{160 + 320 * (i % 4) + g.uniform(-100, 100), 180 + 360 * (i / 4) + g.uniform(-100, 100)};
      const BevPoint q = truth(p);
      m.push_back({p, {q.x + g.normal(0.5), q.y + g.normal(0.5)}});
    }
    for (int i = 0; i < 2; ++i) {
      const ImagePoint p{g.uniform(0, 1280), g.uniform(0, 720)};
      const BevPoint q = truth(p);
      m.push_back({p, {q.x + 50 + g.uniform(0, 50), q.y - 60}});
    }
    const auto r = ransac_homography(m, {}, g.integer(0, 1000));
    EXPECT_EQ(r.votes, 8u);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(r.inlier_mask[i], i < 8);
  });
}

TEST(Ransac, RandomLayoutsFindNearlyAllInliers) {
  // With inliers scattered anywhere, an isolated one can sit beyond the
  // threshold of the fit through the rest; gross outliers never get in.
  int exact = 0;
  for_all(100, 5, [&](Gen& g) {
    const Homography truth = planted(g);
    std::vector<Correspondence> m;
    for (int i = 0; i < 8; ++i) {
      const ImagePoint p{g.uniform(0, 1280), g.uniform(0, 720)};
      const BevPoint q = truth(p);
      m.push_back({p, {q.x + g.normal(0.5), q.y + g.normal(0.5)}});
    }
    for (int i = 0; i < 2; ++i) {
      const ImagePoint p{g.uniform(0, 1280), g.uniform(0, 720)};
      const BevPoint q = truth(p);
      m.push_back({p, {q.x + 50 + g.uniform(0, 50), q.y - 60}});
    }
    const auto r = ransac_homography(m, {}, g.integer(0, 1000));
    EXPECT_GE(r.votes, 4u);
    EXPECT_FALSE(r.inlier_mask[8] || r.inlier_mask[9]);
    exact += r.votes == 8;
  });
  EXPECT_GE(exact, 90);
}

TEST(Ransac, FortyPercentOutliers) {
  for_all(10, 4, [](Gen& g) {
    const Planted p = make_matches(g, 200, 0.4, 0.5);
    const auto r = ransac_homography(p.matches, {}, g.integer(0, 1 << 30));
    EXPECT_LT(rmse_vs_truth(r.h, p), 0.5);
    EXPECT_GE(r.votes, 115u);
  });
}

TEST(Ransac, BudgetShrinksWithBetterModels) {
  Gen g(5);
  const Planted p = make_matches(g, 200, 0.1, 0.3);
  const auto r = ransac_homography(p.matches, {}, 1);
  EXPECT_LT(r.iterations_run, 100u);
  EXPECT_EQ(r.iteration_votes.size(), r.iterations_run);
  EXPECT_GE(r.votes, r.hypothesis_votes);
}

TEST(Ransac, SameSeedSameResult) {
  Gen g(6);
  const Planted p = make_matches(g, 150, 0.4, 0.5);
  const auto a = ransac_homography(p.matches, {}, 77);
  const auto b = ransac_homography(p.matches, {}, 77);
  EXPECT_EQ(a.h.row_major(), b.h.row_major());
  EXPECT_EQ(a.inlier_mask, b.inlier_mask);
  EXPECT_EQ(a.iteration_votes, b.iteration_votes);
}

TEST(Ransac, TooFewMatches) {
  std::vector<Correspondence> m(3);
  try {
    ransac_homography(m, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientMatches);
    EXPECT_EQ(exit_code_for(e.kind()), 2);
  }
}

TEST(Ransac, PureNoiseHasNoConsensus) {
  // Every match lands on the same BEV pixel: no four of them fit a homography.
  std::vector<Correspondence> m;
  for (int i = 0; i < 20; ++i) m.push_back({{double(i * 37 % 500), double(i * 91 % 400)}, {5, 5}});
  try {
    ransac_homography(m, {3.0, 0.99, 4, 200}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConsensus);
  }
}

TEST(Ransac, ParamsValidated) {
  RansacParams p;
  p.rho = 1.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.tau_z = 0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(LineFit, HorizontalLine) {
  const std::vector<ImagePoint> pts = {{0, 0}, {1, 0}, {5, 0}, {9, 0}};
  const auto l = fit_line_tls(pts);
  EXPECT_NEAR(l.a, 0.0, 1e-15);
  EXPECT_NEAR(l.b, 1.0, 1e-15);
  EXPECT_NEAR(line_residual(l, pts), 0.0, 1e-20);
}

TEST(LineFit, SlopedLine) {
  std::vector<ImagePoint> pts;
  for (int i = -5; i <= 5; ++i) pts.push_back({double(i), 2.0 * i + 1.0});
  EXPECT_LT(line_residual(fit_line_tls(pts), pts), 1e-12);
}

TEST(LineFit, MatchesAngleGridMinimum) {
  const auto brute = [](const std::vector<ImagePoint>& pts) {
    double mx = 0, my = 0;
    for (auto p : pts) {
      mx += p.x;
      my += p.y;
    }
    mx /= pts.size();
    my /= pts.size();
    double best = 1e300;
    for (double t = 0; t < M_PI; t += 1e-3) {
      const double a = std::cos(t), b = std::sin(t);
      double r = 0;
      for (auto p : pts) r += std::pow(a * (p.x - mx) + b * (p.y - my), 2);
      best = std::min(best, r);
    }
    return best;
  };
  const std::vector<ImagePoint> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_NEAR(line_residual(fit_line_tls(square), square), brute(square), 1e-6);
  for_all(30, 7, [&](Gen& g) {
    std::vector<ImagePoint> pts;
    for (int i = 0; i < g.integer(3, 20); ++i) pts.push_back({g.uniform(-5, 5), g.uniform(-5, 5)});
    // The fit is the exact minimum, so it can only beat the 1e-3 rad grid.
    const double fit = line_residual(fit_line_tls(pts), pts);
    EXPECT_LE(fit, brute(pts) + 1e-9);
    EXPECT_GE(fit, brute(pts) * (1 - 1e-4) - 1e-9);
  });
}

TEST(LineFit, DegenerateInputs) {
  EXPECT_THROW(fit_line_tls(std::vector<ImagePoint>{{1, 1}}), Error);
  EXPECT_THROW(fit_line_tls(std::vector<ImagePoint>{{1, 1}, {1, 1}, {1, 1}}), Error);
}

TEST(DistortionEs, StraightLinesNeedNoCorrection) {
  Gen g(8);
  const auto lines = straight_lines(g, 10, 30);
  const auto r = fit_distortion_es(lines, 1280, 720, 3);
  EXPECT_LT(std::abs(r.params.k1), 1e-3);
  EXPECT_LT(std::abs(r.params.k2), 1e-3);
  EXPECT_LE(r.objective_history.back(), r.objective_history.front() + 1e-9);
}

TEST(DistortionEs, RecoversPlantedBarrel) {
  for_all(5, 9, [](Gen& g) {
    const auto truth = DistortionParams::for_image(1280, 720, -0.2, 0.0);
    auto lines = straight_lines(g, 10, 30);
    for (auto& l : lines)
      for (auto& p : l) p = distort_point(p, truth);
    const auto r = fit_distortion_es(lines, 1280, 720, g.integer(0, 1000));
    EXPECT_NEAR(r.params.k1, -0.2, 0.02);
    const double before = straightness_objective(lines, DistortionParams::for_image(1280, 720));
    EXPECT_LE(r.objective_history.back(), 0.1 * before);
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      EXPECT_LE(r.objective_history[i], r.objective_history[i - 1]);
    }
  });
}

TEST(DistortionEs, NeedsUsableTrajectory) {
  try {
    fit_distortion_es({{{1, 1}, {2, 2}}}, 100, 100, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientTrajectories);
  }
}

TEST(DistortionEs, ShrinkingTowardCentreDoesNotPay) {
  // A huge positive k1 pulls every point to the centre; the scatter
  // normalisation keeps it from looking straighter than it is.
  Gen g(10);
  auto lines = straight_lines(g, 5, 20);
  for (auto& l : lines)
    for (auto& p : l) p.y += 3.0 * std::sin(p.x / 50.0);
  const double base = straightness_objective(lines, DistortionParams::for_image(1280, 720));
  const double squeezed = straightness_objective(lines, DistortionParams::for_image(1280, 720, 50.0, 0.0));
  EXPECT_GT(squeezed, 0.2 * base);
}
