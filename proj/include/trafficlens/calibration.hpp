#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trafficlens/geometry.hpp"
#include "trafficlens/imaging.hpp"

namespace trafficlens {

/// A putative match between a camera pixel and a satellite/BEV pixel.
struct Correspondence {
  ImagePoint cam;
  BevPoint sat;
};

struct RansacParams {
  double tau_z = 3.0;           // inlier distance threshold, BEV pixels
  double rho = 0.99;            // desired probability of drawing one clean sample
  int gamma = 4;                // minimal sample size
  std::size_t max_iter = 10000;

  void validate() const;
};

struct RansacResult {
  Homography h;
  std::vector<bool> inlier_mask;
  std::size_t votes = 0;
  std::size_t iterations_run = 0;
  /// Votes of every hypothesis drawn, in order (0 for degenerate samples).
  std::vector<std::size_t> iteration_votes;
  /// Votes of the winning hypothesis before the inlier refit.
  std::size_t hypothesis_votes = 0;
};

/// ceil(log(1 - rho) / log(1 - epsilon^gamma)); 1 when epsilon == 1.
std::size_t ransac_iterations(double rho, double epsilon, int gamma);

/// Hypothesise-and-vote homography fit. The iteration budget shrinks as better
/// models appear; the winner is refit by DLT on its inliers. Deterministic for
/// a given seed.
RansacResult ransac_homography(std::span<const Correspondence> matches, const RansacParams& params,
                               std::uint64_t seed);

/// Line a x + b y + c = 0 with a^2 + b^2 = 1.
struct TrajectoryLine {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;

  double signed_distance(double x, double y) const { return a * x + b * y + c; }
};

/// Orthogonal regression through the centroid. The normal is oriented with
/// b > 0 (or a > 0 for vertical lines).
TrajectoryLine fit_line_tls(std::span<const ImagePoint> points);

/// Sum of squared point-to-line distances.
double line_residual(const TrajectoryLine& line, std::span<const ImagePoint> points);

struct EsOptions {
  int lambda = 8;
  int max_generations = 200;
  double initial_step = 0.05;
  double success_factor = 1.5;
  double failure_factor = 0.82;
  /// Stop once the objective improved by less than this fraction over the
  /// last `stall_window` generations.
  double min_relative_improvement = 1e-9;
  int stall_window = 20;
  int undistort_rounds = 5;
};

struct EsResult {
  DistortionParams params;
  /// Parent objective after each generation; entry 0 is the undistorted start.
  std::vector<double> objective_history;
  int generations = 0;
};

/// Straightness of the trajectories after undistorting them with `params`:
/// per trajectory, the TLS residual rescaled by (raw scatter / corrected
/// scatter) so that shrinking every point towards the centre cannot win.
/// Trajectories with fewer than 5 points are ignored.
double straightness_objective(const std::vector<std::vector<ImagePoint>>& trajectories,
                              const DistortionParams& params, int undistort_rounds = 5);

/// (1 + lambda)-ES over (k1, k2) minimising straightness_objective.
EsResult fit_distortion_es(const std::vector<std::vector<ImagePoint>>& trajectories, int width, int height,
                           std::uint64_t seed, const EsOptions& options = {});

}  // namespace trafficlens
