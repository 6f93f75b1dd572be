#include "trafficlens/motion.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

namespace trafficlens {

void MotionConfig::validate() const {
  if (!(fps > 0.0)) throw Error(ErrorKind::ConfigError, "fps must be positive");
  if (!(jerk_density >= 0.0)) throw Error(ErrorKind::ConfigError, "jerk density must be non-negative");
  if (!(measurement_var > 0.0)) throw Error(ErrorKind::ConfigError, "measurement variance must be positive");
  if (!(initial_velocity_var > 0.0) || !(initial_accel_var > 0.0)) {
    throw Error(ErrorKind::ConfigError, "initial variances must be positive");
  }
  if (occlusion_buffer < 0) throw Error(ErrorKind::ConfigError, "occlusion buffer must be non-negative");
}

BevKalmanState BevKalmanState::at(BevPoint p, const MotionConfig& cfg) {
  BevKalmanState s;
  s.x.setZero();
  s.x(0) = p.x;
  s.x(1) = p.y;
  s.p.setZero();
  s.p(0, 0) = s.p(1, 1) = cfg.measurement_var;
  s.p(2, 2) = s.p(3, 3) = cfg.initial_velocity_var;
  s.p(4, 4) = s.p(5, 5) = cfg.initial_accel_var;
  return s;
}

BevKalmanState::Matrix ca_transition(double t) {
  BevKalmanState::Matrix f = BevKalmanState::Matrix::Identity();
  for (int axis = 0; axis < 2; ++axis) {
    f(axis, 2 + axis) = t;
    f(axis, 4 + axis) = t * t / 2.0;
    f(2 + axis, 4 + axis) = t;
  }
  return f;
}

BevKalmanState::Matrix ca_process_noise(double t, double q) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double block[3][3] = {{t5 / 20, t4 / 8, t3 / 6}, {t4 / 8, t3 / 3, t2 / 2}, {t3 / 6, t2 / 2, t}};
  BevKalmanState::Matrix m = BevKalmanState::Matrix::Zero();
  for (int axis = 0; axis < 2; ++axis)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(2 * i + axis, 2 * j + axis) = q * block[i][j];
  return m;
}

BevKalmanState kf_predict(const BevKalmanState& s, double t_w, double jerk_density) {
  if (!(t_w > 0.0)) throw Error(ErrorKind::InvalidArgument, "t_w must be positive");
  const auto f = ca_transition(t_w);
  BevKalmanState out;
  out.x = f * s.x;
  out.p = f * s.p * f.transpose() + ca_process_noise(t_w, jerk_density);
  return out;
}

BevKalmanState kf_update(const BevKalmanState& s, BevPoint z, double measurement_var) {
  if (!std::isfinite(z.x) || !std::isfinite(z.y)) throw Error(ErrorKind::InvalidArgument, "observation not finite");
  Eigen::Matrix<double, 2, 6> h = Eigen::Matrix<double, 2, 6>::Zero();
  h(0, 0) = h(1, 1) = 1.0;
  const Eigen::Vector2d innovation = Eigen::Vector2d(z.x, z.y) - h * s.x;
  const Eigen::Matrix2d sm = h * s.p * h.transpose() + measurement_var * Eigen::Matrix2d::Identity();
  const Eigen::Matrix<double, 6, 2> k = s.p * h.transpose() * sm.inverse();
  BevKalmanState out;
  out.x = s.x + k * innovation;
  // Joseph form keeps p symmetric over long runs.
  const BevKalmanState::Matrix ikh = BevKalmanState::Matrix::Identity() - k * h;
  out.p = ikh * s.p * ikh.transpose() + measurement_var * k * k.transpose();
  return out;
}

double raw_speed(BevPoint now, BevPoint prev, double dt, GroundScale scale) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  return distance(now, prev) * scale.meters_per_px / dt;
}

double speed_mph(const BevKalmanState& s, GroundScale scale, bool x_only) {
  const double px_per_s = x_only ? std::abs(s.x(2)) : std::hypot(s.x(2), s.x(3));
  return px_per_s * scale.meters_per_px * kMpsToMph;
}

double heading(BevPoint now, BevPoint prev) {
  const double dx = now.x - prev.x, dy = now.y - prev.y;
  if (dx == 0.0 && dy == 0.0) throw Error(ErrorKind::DegenerateDisplacement, "points coincide");
  return wrap_degrees(rad_to_deg(std::atan2(dy, dx)));
}

double abf_weight(double delta_deg) {
  const double d = std::remainder(delta_deg, 360.0);  // [-180, 180]
  const double shifted = (d + 180.0) / 360.0;
  // cos(4 pi s) is exactly +-1 or 0 at the quarter points; evaluate those from
  // the integer phase to avoid 1e-16 residues.
  const double phase = 4.0 * shifted;  // in units of pi
  const double quarter = phase * 2.0;  // in units of pi/2
  if (quarter == std::floor(quarter)) {
    static constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
    const long q = static_cast<long>(quarter) % 4;
    return (kCos[(q + 4) % 4] + 1.0) / 2.0;
  }
  return (std::cos(std::numbers::pi * phase) + 1.0) / 2.0;
}

double abf(double theta_prev, double theta_now) {
  const double delta = std::remainder(theta_now - theta_prev, 360.0);
  return wrap_degrees(theta_prev + abf_weight(delta) * delta);
}

std::vector<BevPoint> predict_gap(const BevKalmanState& s, int n_frames, double t_w, int buffer_limit,
                                  double jerk_density) {
  if (n_frames < 0) throw Error(ErrorKind::InvalidArgument, "negative gap");
  if (n_frames > buffer_limit) {
    throw Error(ErrorKind::BufferExceeded,
                std::to_string(n_frames) + " frames exceed the buffer of " + std::to_string(buffer_limit));
  }
  std::vector<BevPoint> out;
  out.reserve(n_frames);
  BevKalmanState cur = s;
  for (int i = 0; i < n_frames; ++i) {
    cur = kf_predict(cur, t_w, jerk_density);
    out.push_back(cur.position());
  }
  return out;
}

// ---------------------------------------------------------------------------

MotionTrack::MotionTrack(MotionConfig cfg, GroundScale scale) : cfg_(cfg), scale_(scale) { cfg_.validate(); }

void MotionTrack::advance_to(int frame) {
  if (frame < *last_frame_) throw Error(ErrorKind::InvalidArgument, "motion frames went backwards");
  for (; *last_frame_ < frame; ++*last_frame_) state_ = kf_predict(state_, cfg_.frame_time(), cfg_.jerk_density);
}

MotionEstimate MotionTrack::estimate() {
  const BevPoint pos = state_.position();
  if (prev_position_ && (pos.x != prev_position_->x || pos.y != prev_position_->y)) {
    const double raw = heading(pos, *prev_position_);
    heading_ = heading_ ? abf(*heading_, raw) : raw;
  }
  prev_position_ = pos;
  return {pos, speed_mph(state_, scale_, cfg_.x_only_speed), heading_};
}

MotionEstimate MotionTrack::observe(int frame, BevPoint z) {
  if (!last_frame_) {
    state_ = BevKalmanState::at(z, cfg_);
    last_frame_ = frame;
  } else {
    advance_to(frame);
    state_ = kf_update(state_, z, cfg_.measurement_var);
  }
  last_update_frame_ = frame;
  return estimate();
}

MotionEstimate MotionTrack::coast(int frame) {
  if (!last_frame_) throw Error(ErrorKind::InvalidArgument, "cannot coast before the first observation");
  if (frame - last_update_frame_ > cfg_.occlusion_buffer) {
    throw Error(ErrorKind::BufferExceeded, "gap of " + std::to_string(frame - last_update_frame_) + " frames");
  }
  advance_to(frame);
  return estimate();
}

}  // namespace trafficlens
