#include "trafficlens/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "trafficlens/kernels.hpp"

namespace trafficlens {

std::string_view heat_kind_name(HeatKind kind) {
  switch (kind) {
    case HeatKind::Pedestrian: return "pedestrian";
    case HeatKind::Vehicle: return "vehicle";
    case HeatKind::Speeding: return "speeding";
    case HeatKind::Congestion: return "congestion";
    case HeatKind::Proximity: return "proximity";
  }
  return "unknown";
}

HeatMap::HeatMap(int width, int height, HeatKind kind) : width_(width), height_(height), kind_(kind) {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidArgument, "heat map needs a positive size");
  cells_.assign(static_cast<std::size_t>(width) * height, 0);
}

void HeatMap::bump(BevPoint p) {
  const auto clamp_round = [](double v, int n) {
    if (!std::isfinite(v)) return 0L;
    return std::clamp(std::lround(std::clamp(v, -1e9, 1e9)), 0L, static_cast<long>(n - 1));
  };
  const long cx = clamp_round(p.x, width_), cy = clamp_round(p.y, height_);
  static constexpr int kW[3] = {1, 2, 1};
  int total = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const long x = cx + dx, y = cy + dy;
      if (x >= 0 && y >= 0 && x < width_ && y < height_) total += kW[dx + 1] * kW[dy + 1];
    }
  const std::int64_t per_weight = kUnitsPerEvent / total;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const long x = cx + dx, y = cy + dy;
      if (x >= 0 && y >= 0 && x < width_ && y < height_) {
        cells_[static_cast<std::size_t>(y) * width_ + x] += per_weight * kW[dx + 1] * kW[dy + 1];
      }
    }
  ++events_;
}

void HeatMap::merge(const HeatMap& other) {
  if (other.width_ != width_ || other.height_ != height_ || other.kind_ != kind_) {
    throw Error(ErrorKind::ShapeMismatch, "heat maps differ in size or kind");
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
  events_ += other.events_;
}

std::vector<double> HeatMap::values() const {
  std::vector<double> out(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) out[i] = static_cast<double>(cells_[i]) / kUnitsPerEvent;
  return out;
}

double HeatMap::sum() const {
  const std::int64_t units = std::accumulate(cells_.begin(), cells_.end(), std::int64_t{0});
  return static_cast<double>(units) / kUnitsPerEvent;
}

HeatMap HeatMap::from_units(int width, int height, HeatKind kind, std::uint64_t events,
                            std::vector<std::int64_t> units) {
  HeatMap m(width, height, kind);
  if (units.size() != m.cells_.size()) throw Error(ErrorKind::ShapeMismatch, "heat map data has the wrong size");
  std::int64_t total = 0;
  for (auto u : units) {
    if (u < 0) throw Error(ErrorKind::SchemaError, "heat map cells must be non-negative");
    total += u;
  }
  if (total != static_cast<std::int64_t>(events) * kUnitsPerEvent) {
    throw Error(ErrorKind::SchemaError, "heat map mass does not match its event count");
  }
  m.cells_ = std::move(units);
  m.events_ = events;
  return m;
}

HeatMapSet::HeatMapSet(int width, int height) {
  for (HeatKind k : kHeatKinds) (*this)[k] = HeatMap(width, height, k);
}

void HeatMapSet::merge(const HeatMapSet& other) {
  for (HeatKind k : kHeatKinds) (*this)[k].merge(other[k]);
}

// ---------------------------------------------------------------------------

void AnalyticsConfig::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw Error(ErrorKind::ConfigError, std::string(name) + " must be positive");
  };
  positive(speed_limit_mph, "speed_limit_mph");
  positive(park_speed_mph, "park_speed_mph");
  positive(park_seconds, "park_seconds");
  positive(park_border_m, "park_border_m");
  positive(proximity_risk_m, "proximity_risk_m");
  positive(congestion_distance_m, "congestion_distance_m");
  positive(congestion_speed_mph, "congestion_speed_mph");
}

bool StateSets::contains(const std::vector<int>& set, int id) { return std::binary_search(set.begin(), set.end(), id); }

StateClassifier::StateClassifier(AnalyticsConfig cfg, GroundScale scale, double fps, const BoundaryIndex* road)
    : cfg_(cfg), iota_(scale.meters_per_px), fps_(fps), road_(road) {
  cfg_.validate();
  if (!(iota_ > 0.0) || !std::isfinite(iota_)) throw Error(ErrorKind::MissingCalibration, "no ground scale");
  if (!(fps_ > 0.0)) throw Error(ErrorKind::ConfigError, "fps must be positive");
}

StateSets StateClassifier::classify(int frame, std::span<const FrameObject> objects) {
  if (last_frame_ && frame <= *last_frame_) throw Error(ErrorKind::InvalidArgument, "frames must increase");
  last_frame_ = frame;

  StateSets out;
  std::map<int, int> streaks;
  for (const auto& o : objects) {
    if (is_pedestrian(o.cls) || road_ == nullptr || road_->empty()) continue;
    if (o.speed_mph >= cfg_.park_speed_mph) continue;
    if (road_->nearest(o.bev).distance * iota_ >= cfg_.park_border_m) continue;
    const auto it = streak_start_.find(o.id);
    const int start = it == streak_start_.end() ? frame : it->second;
    streaks[o.id] = start;
    if ((frame - start) / fps_ >= cfg_.park_seconds) out.parking.push_back(o.id);
  }
  streak_start_ = std::move(streaks);
  std::sort(out.parking.begin(), out.parking.end());

  const auto parked = [&](int id) { return StateSets::contains(out.parking, id); };
  const auto meters = [&](const FrameObject& a, const FrameObject& b) { return distance(a.bev, b.bev) * iota_; };

  for (const auto& o : objects) {
    if (is_pedestrian(o.cls)) {
      for (const auto& v : objects) {
        if (is_pedestrian(v.cls) || parked(v.id)) continue;
        if (meters(o, v) < cfg_.proximity_risk_m) {
          out.collision_risk.push_back(o.id);
          break;
        }
      }
      continue;
    }
    if (o.speed_mph > cfg_.speed_limit_mph) out.speeding.push_back(o.id);
    if (parked(o.id) || o.speed_mph >= cfg_.congestion_speed_mph) continue;
    for (const auto& v : objects) {
      if (v.id == o.id || is_pedestrian(v.cls) || parked(v.id)) continue;
      if (meters(o, v) < cfg_.congestion_distance_m) {
        out.congestion.push_back(o.id);
        break;
      }
    }
  }
  std::sort(out.speeding.begin(), out.speeding.end());
  std::sort(out.collision_risk.begin(), out.collision_risk.end());
  std::sort(out.congestion.begin(), out.congestion.end());
  return out;
}

void update_heatmaps(HeatMapSet& maps, std::span<const FrameObject> objects, const StateSets& states) {
  for (const auto& o : objects) {
    if (is_pedestrian(o.cls)) {
      maps[HeatKind::Pedestrian].bump(o.bev);
      if (StateSets::contains(states.collision_risk, o.id)) maps[HeatKind::Proximity].bump(o.bev);
      continue;
    }
    if (!StateSets::contains(states.parking, o.id)) maps[HeatKind::Vehicle].bump(o.bev);
    if (StateSets::contains(states.speeding, o.id)) maps[HeatKind::Speeding].bump(o.bev);
    if (StateSets::contains(states.congestion, o.id)) maps[HeatKind::Congestion].bump(o.bev);
  }
}

std::optional<double> average_speed(std::span<const FrameObject> objects, const StateSets& states) {
  double sum = 0.0;
  int n = 0;
  for (const auto& o : objects) {
    if (is_pedestrian(o.cls) || StateSets::contains(states.parking, o.id)) continue;
    sum += o.speed_mph;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

FrameStats frame_stats(int frame, std::span<const FrameObject> objects, const StateSets& states) {
  FrameStats s;
  s.frame = frame;
  for (const auto& o : objects) (is_pedestrian(o.cls) ? s.pedestrians : s.vehicles)++;
  s.avg_speed_mph = average_speed(objects, states);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

struct Overlay {
  std::vector<std::uint8_t> rgb;
  std::vector<std::uint8_t> alpha;
};

Overlay colorize_map(const HeatMap& map, const RenderOptions& options) {
  if (map.events() == 0) {
    throw Error(ErrorKind::EmptyHeatMap, std::string(heat_kind_name(map.kind())) + " heat map has no events");
  }
  const std::vector<double> v = map.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  Overlay o{std::vector<std::uint8_t>(v.size() * 3), std::vector<std::uint8_t>(v.size())};
  kernels::parallel::colorize(v, *lo, *hi, options.floor, o.rgb, o.alpha);
  return o;
}

ImageBuffer composite(const Overlay& o, int width, int height, const ImageBuffer* base, double alpha) {
  ImageBuffer out(width, height, 3, 0);
  if (base) {
    if (base->width() != width || base->height() != height) {
      throw Error(ErrorKind::ShapeMismatch, "base image does not match the overlay size");
    }
    out = to_rgb(*base);
  }
  auto px = out.data();
  for (std::size_t i = 0; i < o.alpha.size(); ++i) {
    if (o.alpha[i] == 0) continue;
    for (int c = 0; c < 3; ++c) {
      const double under = base ? px[3 * i + c] : 0.0;
      const double mixed = base ? alpha * o.rgb[3 * i + c] + (1.0 - alpha) * under : o.rgb[3 * i + c];
      px[3 * i + c] = static_cast<std::uint8_t>(std::lround(mixed));
    }
  }
  return out;
}

}  // namespace

ImageBuffer render(const HeatMap& map, const ImageBuffer* base, const RenderOptions& options) {
  return composite(colorize_map(map, options), map.width(), map.height(), base, options.alpha);
}

ImageBuffer render_perspective(const HeatMap& map, const Homography& g, int width, int height,
                               const ImageBuffer* base, const RenderOptions& options) {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidArgument, "output size must be positive");
  const Overlay bev = colorize_map(map, options);
  Overlay warped{std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3),
                 std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height)};
  kernels::parallel::warp_nearest(bev.rgb, map.width(), map.height(), 3, g.matrix(), warped.rgb, width, height, 0);
  kernels::parallel::warp_nearest(bev.alpha, map.width(), map.height(), 1, g.matrix(), warped.alpha, width, height,
                                  0);
  return composite(warped, width, height, base, options.alpha);
}

}  // namespace trafficlens
