#pragma once

// Hand-rolled generators and a tiny property runner shared by the tests.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "trafficlens/geometry.hpp"

namespace tl_test {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sigma = 1.0) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return rng_; }

  template <class Frame>
  trafficlens::Point<Frame> point(double lo, double hi) {
    return {uniform(lo, hi), uniform(lo, hi)};
  }

  /// Well-conditioned homography: a perturbed similarity with a mild
  /// perspective row, sized for coordinates in the low thousands.
  Eigen::Matrix3d homography() {
    const double a = uniform(-3.14159, 3.14159), s = uniform(0.5, 2.0);
    Eigen::Matrix3d g;
    g << s * std::cos(a) + normal(0.05), -s * std::sin(a) + normal(0.05), uniform(-200, 200),  //
        s * std::sin(a) + normal(0.05), s * std::cos(a) + normal(0.05), uniform(-200, 200),    //
        uniform(-2e-4, 2e-4), uniform(-2e-4, 2e-4), 1.0;
    return g;
  }

 private:
  std::mt19937_64 rng_;
};

/// Runs `prop` on `cases` generators derived from `seed`; the failing case
/// index is reported through SCOPED_TRACE.
inline void for_all(int cases, std::uint64_t seed, const std::function<void(Gen&)>& prop) {
  for (int i = 0; i < cases; ++i) {
    SCOPED_TRACE("case " + std::to_string(i) + " of seed " + std::to_string(seed));
    Gen g(seed * 1000003ULL + static_cast<std::uint64_t>(i));
    prop(g);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

}  // namespace tl_test
