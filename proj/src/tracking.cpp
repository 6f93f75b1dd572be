#include "trafficlens/tracking.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "trafficlens/assignment.hpp"

namespace trafficlens {

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "articulated_truck", "bicycle",          "bus",           "car",
    "motorcycle",        "motorized_vehicle", "non-motorized_vehicle", "pedestrian",
    "pickup_truck",      "single_unit_truck", "work_van",
};

}  // namespace

std::string_view class_name(ObjectClass cls) { return kClassNames[class_index(cls)]; }

std::optional<ObjectClass> class_from_name(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == name) return static_cast<ObjectClass>(i);
  }
  return std::nullopt;
}

int argmax_class(const ClassVector& v) {
  int best = 0;
  for (int i = 1; i < kNumClasses; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

void Detection::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::SchemaError, what); };
  if (!std::isfinite(bbox.x) || !std::isfinite(bbox.y)) fail("bbox centre must be finite");
  if (!(bbox.w > 0.0) || !(bbox.h > 0.0)) fail("bbox size must be positive");
  if (!(objectness >= 0.0 && objectness <= 1.0)) fail("score must lie in [0, 1]");
  double sum = 0.0;
  for (double p : class_probs) {
    if (!(p >= 0.0 && p <= 1.0)) fail("class probabilities must lie in [0, 1]");
    sum += p;
  }
  if (sum > 1.0 + 1e-6) fail("class probabilities sum above 1");
}

// ---------------------------------------------------------------------------

BBox decode_offsets(const BoxOffsets& o, const AnchorSpec& spec) {
  const auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  return {sigmoid(o.x) + spec.cell_x, sigmoid(o.y) + spec.cell_y, spec.anchor_w * std::exp(o.w),
          spec.anchor_h * std::exp(o.h)};
}

ImagePoint reference_point(const BBox& box) { return {box.x, box.y + box.h / 2.0}; }

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x + a.w / 2, b.x + b.w / 2) - std::max(a.x - a.w / 2, b.x - b.w / 2);
  const double iy = std::min(a.y + a.h / 2, b.y + b.h / 2) - std::max(a.y - a.h / 2, b.y - b.h / 2);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Association associate(std::span<const BBox> tracks, std::span<const BBox> detections, double iou_min) {
  Association out;
  const std::size_t nt = tracks.size(), nd = detections.size();
  if (nt == 0 || nd == 0) {
    for (std::size_t t = 0; t < nt; ++t) out.unmatched_tracks.push_back(t);
    for (std::size_t d = 0; d < nd; ++d) out.unmatched_detections.push_back(d);
    return out;
  }
  Eigen::MatrixXd overlap(nt, nd);
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t d = 0; d < nd; ++d) overlap(t, d) = iou(tracks[t], detections[d]);

  const std::vector<int> assigned = solve_assignment(Eigen::MatrixXd::Ones(nt, nd) - overlap);
  std::vector<bool> det_used(nd, false);
  for (std::size_t t = 0; t < nt; ++t) {
    const int d = assigned[t];
    if (d >= 0 && overlap(t, d) >= iou_min) {
      out.matches.emplace_back(t, static_cast<std::size_t>(d));
      det_used[d] = true;
    } else {
      out.unmatched_tracks.push_back(t);
    }
  }
  for (std::size_t d = 0; d < nd; ++d) {
    if (!det_used[d]) out.unmatched_detections.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct MomctModel {
  Track::Covariance f = Track::Covariance::Identity();
  Eigen::Matrix<double, Track::kObsDim, Track::kStateDim> h =
      Eigen::Matrix<double, Track::kObsDim, Track::kStateDim>::Zero();
  Track::Covariance q = Track::Covariance::Zero();
  Eigen::Matrix<double, Track::kObsDim, Track::kObsDim> r = Eigen::Matrix<double, Track::kObsDim, Track::kObsDim>::Zero();
  Track::Covariance p0 = Track::Covariance::Zero();

  MomctModel() {
    // Constant velocity on x, y and area; aspect ratio and class are static.
    f(0, 4) = f(1, 5) = f(2, 6) = 1.0;
    for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
    for (int c = 0; c < kNumClasses; ++c) h(4 + c, 7 + c) = 1.0;

    const double r_box[4] = {1.0, 1.0, 10.0, 0.01};
    for (int i = 0; i < 4; ++i) r(i, i) = r_box[i];
    for (int c = 0; c < kNumClasses; ++c) r(4 + c, 4 + c) = 0.01;

    const double q_box[7] = {1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 1e-4};
    for (int i = 0; i < 7; ++i) q(i, i) = q_box[i];
    for (int c = 0; c < kNumClasses; ++c) q(7 + c, 7 + c) = 1e-4;

    const double p_box[7] = {10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4};
    for (int i = 0; i < 7; ++i) p0(i, i) = p_box[i];
    // The initial one-hot is itself a measurement.
    for (int c = 0; c < kNumClasses; ++c) p0(7 + c, 7 + c) = 0.01;
  }
};

const MomctModel& model() {
  static const MomctModel m;
  return m;
}

}  // namespace

Track::Observation Track::observe(const Detection& det) {
  Observation z = Observation::Zero();
  const ImagePoint ref = reference_point(det.bbox);
  z(0) = ref.x;
  z(1) = ref.y;
  z(2) = det.bbox.w * det.bbox.h;
  z(3) = det.bbox.w / det.bbox.h;
  z(4 + argmax_class(det.class_probs)) = 1.0;
  return z;
}

Track::Track(int id, const Detection& det, int frame) : id_(id), p_(model().p0) {
  const Observation z = observe(det);
  x_.setZero();
  x_.head<4>() = z.head<4>();
  x_.tail<kNumClasses>() = z.tail<kNumClasses>();
  trajectory_.push_back({frame, reference_point(det.bbox)});
}

void Track::predict() {
  if (x_(2) + x_(6) <= 0.0) x_(6) = 0.0;
  const auto& m = model();
  x_ = m.f * x_;
  p_ = m.f * p_ * m.f.transpose() + m.q;
  ++age_;
  ++time_since_update_;
}

void Track::update(const Detection& det, int frame) {
  const auto& m = model();
  const Observation z = observe(det);
  const Observation innovation = z - m.h * x_;
  const Eigen::Matrix<double, kObsDim, kObsDim> s = m.h * p_ * m.h.transpose() + m.r;
  const Eigen::Matrix<double, kStateDim, kObsDim> k = p_ * m.h.transpose() * s.inverse();
  x_ += k * innovation;
  p_ = (Covariance::Identity() - k * m.h) * p_;
  ++hits_;
  time_since_update_ = 0;
  trajectory_.push_back({frame, reference_point(det.bbox)});
}

BBox Track::bbox() const {
  const double area = std::max(x_(2), 1e-9);
  const double aspect = std::max(x_(3), 1e-9);
  const double w = std::sqrt(area * aspect);
  const double h = area / w;
  return {x_(0), x_(1) - h / 2.0, w, h};
}

ClassVector Track::category() const {
  ClassVector c{};
  for (int i = 0; i < kNumClasses; ++i) c[i] = x_(7 + i);
  return c;
}

ObjectClass Track::object_class() const { return static_cast<ObjectClass>(argmax_class(category())); }

// ---------------------------------------------------------------------------

void TrackerConfig::validate() const {
  if (!(iou_min >= 0.0 && iou_min <= 1.0)) throw Error(ErrorKind::ConfigError, "iou_min must lie in [0, 1]");
  if (max_age < 0) throw Error(ErrorKind::ConfigError, "max_age must be non-negative");
  if (min_hits < 1) throw Error(ErrorKind::ConfigError, "min_hits must be at least 1");
  if (!(objectness_min >= 0.0 && objectness_min <= 1.0)) {
    throw Error(ErrorKind::ConfigError, "objectness_min must lie in [0, 1]");
  }
}

MomctTracker::MomctTracker(TrackerConfig config) : config_(config) { config_.validate(); }

std::vector<TrackSnapshot> MomctTracker::step(int frame, std::span<const Detection> detections) {
  if (last_frame_ && frame <= *last_frame_) {
    throw Error(ErrorKind::InvalidArgument, "frame " + std::to_string(frame) + " does not advance the tracker");
  }
  last_frame_ = frame;

  std::vector<const Detection*> kept;
  for (const auto& d : detections) {
    if (d.objectness >= config_.objectness_min) kept.push_back(&d);
  }

  std::vector<BBox> predicted;
  predicted.reserve(tracks_.size());
  for (auto& t : tracks_) {
    t.predict();
    predicted.push_back(t.bbox());
  }
  std::vector<BBox> det_boxes;
  det_boxes.reserve(kept.size());
  for (const auto* d : kept) det_boxes.push_back(d->bbox);

  const Association assoc = associate(predicted, det_boxes, config_.iou_min);
  for (const auto& [t, d] : assoc.matches) tracks_[t].update(*kept[d], frame);
  for (std::size_t d : assoc.unmatched_detections) tracks_.emplace_back(next_id_++, *kept[d], frame);

  std::erase_if(tracks_, [&](const Track& t) { return t.time_since_update() > config_.max_age; });

  std::vector<TrackSnapshot> out;
  for (const auto& t : tracks_) {
    if (t.time_since_update() != 0 || t.hits() < config_.min_hits) continue;
    TrackSnapshot s;
    s.id = t.id();
    s.frame = frame;
    s.bbox = t.bbox();
    s.cls = t.object_class();
    s.ref = t.trajectory().back().ref;
    s.category = t.category();
    s.hits = t.hits();
    out.push_back(s);
  }
  return out;
}

}  // namespace trafficlens
