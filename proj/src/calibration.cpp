#include "trafficlens/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "trafficlens/kernels.hpp"

namespace trafficlens {

void RansacParams::validate() const {
  if (!(tau_z > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau_z must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidProbability, "rho must lie in (0, 1)");
  if (gamma != 4) throw Error(ErrorKind::InvalidArgument, "homography samples need gamma = 4");
  if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be at least 1");
}

namespace {
constexpr int kRefitRounds = 5;
constexpr double kRefitWidening = 2.0;
}  // namespace

std::size_t ransac_iterations(double rho, double epsilon, int gamma) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidProbability, "rho must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::InvalidProbability, "epsilon must lie in (0, 1]");
  if (gamma < 1) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  if (epsilon == 1.0) return 1;
  const double clean = std::pow(epsilon, gamma);
  if (!(clean > 0.0)) return std::numeric_limits<std::size_t>::max();
  const double n = std::ceil(std::log1p(-rho) / std::log1p(-clean));
  if (!(n < 1e18)) return std::numeric_limits<std::size_t>::max();
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

RansacResult ransac_homography(std::span<const Correspondence> matches, const RansacParams& params,
                               std::uint64_t seed) {
  params.validate();
  const std::size_t eta = matches.size();
  if (eta < 4) {
    throw Error(ErrorKind::InsufficientMatches, "need at least 4 matches, got " + std::to_string(eta));
  }

  std::vector<Eigen::Vector2d> cam(eta), sat(eta);
  for (std::size_t i = 0; i < eta; ++i) {
    cam[i] = {matches[i].cam.x, matches[i].cam.y};
    sat[i] = {matches[i].sat.x, matches[i].sat.y};
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, eta - 1);

  RansacResult result;
  std::vector<std::uint8_t> mask(eta), best_mask(eta);
  std::size_t best_votes = 0;
  Eigen::Matrix3d best_g = Eigen::Matrix3d::Zero();
  std::size_t budget = params.max_iter;

  for (std::size_t it = 0; it < budget; ++it) {
    std::array<std::size_t, 4> idx{};
    for (std::size_t k = 0; k < 4; ++k) {
      do {
        idx[k] = pick(rng);
      } while (std::find(idx.begin(), idx.begin() + k, idx[k]) != idx.begin() + k);
    }
    ++result.iterations_run;

    std::array<Eigen::Vector2d, 4> s, d;
    for (std::size_t k = 0; k < 4; ++k) {
      s[k] = cam[idx[k]];
      d[k] = sat[idx[k]];
    }
    Eigen::Matrix3d g;
    try {
      g = detail::canonicalize(detail::dlt(s, d));
      detail::require_invertible(g);
    } catch (const Error&) {
      result.iteration_votes.push_back(0);
      continue;
    }

    const std::size_t votes = kernels::parallel::vote_inliers(g, cam, sat, params.tau_z, mask);
    result.iteration_votes.push_back(votes);
    if (votes > best_votes) {
      best_votes = votes;
      best_g = g;
      best_mask = mask;
      const double eps = static_cast<double>(votes) / static_cast<double>(eta);
      budget = std::min(params.max_iter, ransac_iterations(params.rho, eps, params.gamma));
    }
  }

  if (best_votes < 4) {
    throw Error(ErrorKind::NoConsensus, "best hypothesis has " + std::to_string(best_votes) + " inliers");
  }
  result.hypothesis_votes = best_votes;

  // Local optimisation: refit on everything within twice the threshold,
  // vote at the threshold, and repeat while the consensus does not shrink.
  Eigen::Matrix3d final_g = best_g;
  std::vector<std::uint8_t> wide(eta);
  for (int round = 0; round < kRefitRounds; ++round) {
    kernels::parallel::vote_inliers(final_g, cam, sat, kRefitWidening * params.tau_z, wide);
    std::vector<Eigen::Vector2d> in_cam, in_sat;
    for (std::size_t i = 0; i < eta; ++i) {
      if (wide[i]) {
        in_cam.push_back(cam[i]);
        in_sat.push_back(sat[i]);
      }
    }
    Eigen::Matrix3d refit;
    try {
      refit = detail::canonicalize(detail::dlt(in_cam, in_sat));
      detail::require_invertible(refit);
    } catch (const Error&) {
      break;  // degenerate support: keep what we have
    }
    const std::size_t refit_votes = kernels::parallel::vote_inliers(refit, cam, sat, params.tau_z, mask);
    if (refit_votes < best_votes) break;
    const bool settled = mask == best_mask;
    final_g = refit;
    best_mask = mask;
    best_votes = refit_votes;
    if (settled) break;
  }

  result.h = Homography::from_matrix(final_g);
  result.votes = best_votes;
  result.inlier_mask.assign(best_mask.begin(), best_mask.end());
  return result;
}

// ---------------------------------------------------------------------------

TrajectoryLine fit_line_tls(std::span<const ImagePoint> points) {
  if (points.size() < 2) throw Error(ErrorKind::DegeneratePoints, "line fit needs at least 2 points");
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = p.x - mx, dy = p.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx + syy == 0.0) throw Error(ErrorKind::DegeneratePoints, "all points are identical");

  // Direction of the largest scatter; the normal is perpendicular to it.
  const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  double a = -std::sin(angle);
  double b = std::cos(angle);
  if (b < 0.0 || (b == 0.0 && a < 0.0)) {
    a = -a;
    b = -b;
  }
  return {a, b, -(a * mx + b * my)};
}

double line_residual(const TrajectoryLine& line, std::span<const ImagePoint> points) {
  double r = 0.0;
  for (const auto& p : points) {
    const double d = line.signed_distance(p.x, p.y);
    r += d * d;
  }
  return r;
}

namespace {

constexpr std::size_t kMinTrajectoryPoints = 5;

double scatter(std::span<const ImagePoint> pts) {
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double s = 0.0;
  for (const auto& p : pts) s += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
  return s;
}

}  // namespace

double straightness_objective(const std::vector<std::vector<ImagePoint>>& trajectories,
                              const DistortionParams& params, int undistort_rounds) {
  double total = 0.0;
  std::vector<ImagePoint> corrected;
  for (const auto& traj : trajectories) {
    if (traj.size() < kMinTrajectoryPoints) continue;
    const double raw_scatter = scatter(traj);
    if (!(raw_scatter > 0.0)) continue;
    corrected.clear();
    for (const auto& p : traj) corrected.push_back(undistort_point(p, params, undistort_rounds));
    const double corr_scatter = scatter(corrected);
    if (!(corr_scatter > 0.0) || !std::isfinite(corr_scatter)) return std::numeric_limits<double>::infinity();
    const double r = line_residual(fit_line_tls(corrected), corrected);
    total += r * (raw_scatter / corr_scatter);
  }
  return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
}

EsResult fit_distortion_es(const std::vector<std::vector<ImagePoint>>& trajectories, int width, int height,
                           std::uint64_t seed, const EsOptions& options) {
  const bool usable = std::any_of(trajectories.begin(), trajectories.end(), [](const auto& t) {
    return t.size() >= kMinTrajectoryPoints && scatter(t) > 0.0;
  });
  if (!usable) {
    throw Error(ErrorKind::InsufficientTrajectories, "need a trajectory with at least 5 distinct points");
  }
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidArgument, "image size must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  EsResult res;
  res.params = DistortionParams::for_image(width, height);
  double parent_obj = straightness_objective(trajectories, res.params, options.undistort_rounds);
  res.objective_history.push_back(parent_obj);
  double step = options.initial_step;

  for (int gen = 1; gen <= options.max_generations; ++gen) {
    if (parent_obj == 0.0) break;
    DistortionParams best_child = res.params;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int i = 0; i < options.lambda; ++i) {
      DistortionParams child = res.params;
      child.k1 += step * gauss(rng);
      child.k2 += step * gauss(rng);
      const double obj = straightness_objective(trajectories, child, options.undistort_rounds);
      if (obj < best_obj) {
        best_obj = obj;
        best_child = child;
      }
    }
    if (best_obj < parent_obj) {
      res.params = best_child;
      parent_obj = best_obj;
      step *= options.success_factor;
    } else {
      step *= options.failure_factor;
    }
    res.objective_history.push_back(parent_obj);
    res.generations = gen;

    if (gen >= options.stall_window) {
      const double before = res.objective_history[gen - options.stall_window];
      if (before - parent_obj <= options.min_relative_improvement * before) break;
    }
  }
  return res;
}

}  // namespace trafficlens
