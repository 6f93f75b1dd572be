#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "trafficlens/geometry.hpp"

namespace trafficlens {

inline constexpr double kMpsToMph = 2.236936;

struct MotionConfig {
  double fps = 25.0;
  double jerk_density = 10.0;     // px^2 / s^5
  double measurement_var = 4.0;   // px^2 per axis
  double initial_velocity_var = 1e4;
  double initial_accel_var = 1e4;
  int occlusion_buffer = 25;      // frames
  bool x_only_speed = false;

  double frame_time() const { return 1.0 / fps; }
  void validate() const;
};

/// Constant-acceleration filter over (x, y, vx, vy, ax, ay), BEV pixels and seconds.
struct BevKalmanState {
  using Vector = Eigen::Matrix<double, 6, 1>;
  using Matrix = Eigen::Matrix<double, 6, 6>;

  Vector x = Vector::Zero();
  Matrix p = Matrix::Identity();

  BevPoint position() const { return {x(0), x(1)}; }
  Eigen::Vector2d velocity() const { return {x(2), x(3)}; }
  Eigen::Vector2d acceleration() const { return {x(4), x(5)}; }

  static BevKalmanState at(BevPoint p, const MotionConfig& cfg);
};

BevKalmanState::Matrix ca_transition(double t_w);
/// Discretised white-jerk process noise.
BevKalmanState::Matrix ca_process_noise(double t_w, double jerk_density);

BevKalmanState kf_predict(const BevKalmanState& s, double t_w, double jerk_density = 10.0);
BevKalmanState kf_update(const BevKalmanState& s, BevPoint z, double measurement_var = 4.0);

/// Distance between two BEV points in meters per second.
double raw_speed(BevPoint now, BevPoint prev, double dt, GroundScale scale);

double speed_mph(const BevKalmanState& s, GroundScale scale, bool x_only = false);

/// Direction of travel from `prev` to `now`, degrees in (-180, 180].
double heading(BevPoint now, BevPoint prev);

/// Cosine weight on a heading change: 1 at 0 and +-180, 0 at +-90.
double abf_weight(double delta_deg);

/// Heading rectified against the previous one.
double abf(double theta_prev, double theta_now);

/// Positions after 1..n predictions without updates.
std::vector<BevPoint> predict_gap(const BevKalmanState& s, int n_frames, double t_w, int buffer_limit,
                                  double jerk_density = 10.0);

struct MotionEstimate {
  BevPoint position;
  double speed_mph = 0.0;
  std::optional<double> heading_deg;  // unset until the object has moved
};

/// Per-track motion: filter, speed, ABF-rectified heading and occlusion coasting.
class MotionTrack {
 public:
  MotionTrack(MotionConfig cfg, GroundScale scale);

  /// Frames must not go backwards.
  MotionEstimate observe(int frame, BevPoint z);
  /// Predicted estimate for a frame without observation. Throws BufferExceeded
  /// once more than `occlusion_buffer` frames have passed since the last update.
  MotionEstimate coast(int frame);

  bool started() const { return last_frame_.has_value(); }
  int frames_since_update(int frame) const { return frame - last_update_frame_; }
  const BevKalmanState& state() const { return state_; }

 private:
  void advance_to(int frame);
  MotionEstimate estimate();

  MotionConfig cfg_;
  GroundScale scale_;
  BevKalmanState state_;
  std::optional<int> last_frame_;
  int last_update_frame_ = 0;
  std::optional<BevPoint> prev_position_;
  std::optional<double> heading_;
};

}  // namespace trafficlens
