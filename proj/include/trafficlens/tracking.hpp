#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "trafficlens/detection.hpp"

namespace trafficlens {

/// Raw network regression output for one anchor.
struct BoxOffsets {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

/// Grid cell top-left corner and anchor size, pixels.
struct AnchorSpec {
  double cell_x = 0.0;
  double cell_y = 0.0;
  double anchor_w = 1.0;
  double anchor_h = 1.0;
};

/// x_b = sigmoid(x_o) + x_c, w_b = w_a * exp(w_o); same for y and h.
BBox decode_offsets(const BoxOffsets& offsets, const AnchorSpec& spec);

/// Bottom centre of the box: the object's ground contact point.
ImagePoint reference_point(const BBox& box);

double iou(const BBox& a, const BBox& b);

struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track, detection)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

/// Total-IoU-optimal matching (Hungarian on 1 - IoU); pairs below `iou_min`
/// are split back into the unmatched lists. Class labels play no part.
Association associate(std::span<const BBox> tracks, std::span<const BBox> detections, double iou_min);

struct TrackerConfig {
  double iou_min = 0.3;
  int max_age = 10;
  int min_hits = 3;
  double objectness_min = 0.25;

  void validate() const;
};

struct TrajectorySample {
  int frame = 0;
  ImagePoint ref;
};

/// One tracked object. Its Kalman state is
/// [x_ref, y_ref, area, aspect, vx, vy, v_area | c_0 .. c_10]
/// where the trailing block smooths the one-hot detector class.
class Track {
 public:
  static constexpr int kStateDim = 7 + kNumClasses;
  static constexpr int kObsDim = 4 + kNumClasses;
  using State = Eigen::Matrix<double, kStateDim, 1>;
  using Covariance = Eigen::Matrix<double, kStateDim, kStateDim>;
  using Observation = Eigen::Matrix<double, kObsDim, 1>;

  Track(int id, const Detection& det, int frame);

  void predict();
  void update(const Detection& det, int frame);

  int id() const { return id_; }
  int hits() const { return hits_; }
  int age() const { return age_; }
  int time_since_update() const { return time_since_update_; }
  const State& state() const { return x_; }
  const std::vector<TrajectorySample>& trajectory() const { return trajectory_; }

  BBox bbox() const;
  ClassVector category() const;
  ObjectClass object_class() const;

  static Observation observe(const Detection& det);

 private:
  int id_;
  State x_;
  Covariance p_;
  int hits_ = 1;
  int age_ = 0;
  int time_since_update_ = 0;
  std::vector<TrajectorySample> trajectory_;
};

struct TrackSnapshot {
  int id = 0;
  int frame = 0;
  BBox bbox;
  ObjectClass cls = ObjectClass::Car;
  ImagePoint ref;        // reference point of the matched detection
  ClassVector category{};
  int hits = 0;
};

/// SORT-style tracker whose Kalman state carries a smoothed one-hot class, so
/// IoU association runs across categories and detector class flicker is
/// filtered instead of spawning new ids.
class MomctTracker {
 public:
  explicit MomctTracker(TrackerConfig config = {});

  /// Advances one frame. Frames must strictly increase between calls. Returns
  /// the tracks updated this frame that have at least `min_hits` hits.
  std::vector<TrackSnapshot> step(int frame, std::span<const Detection> detections);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<int> last_frame_;
};

}  // namespace trafficlens
