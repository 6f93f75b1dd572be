#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "trafficlens/detection.hpp"
#include "trafficlens/geometry.hpp"
#include "trafficlens/imaging.hpp"
#include "trafficlens/roadmodel.hpp"

namespace trafficlens {

enum class HeatKind { Pedestrian, Vehicle, Speeding, Congestion, Proximity };
inline constexpr std::array<HeatKind, 5> kHeatKinds = {HeatKind::Pedestrian, HeatKind::Vehicle, HeatKind::Speeding,
                                                       HeatKind::Congestion, HeatKind::Proximity};
std::string_view heat_kind_name(HeatKind kind);

/// Event-density grid over the BEV image.
///
/// Cells hold integer units; one event deposits exactly kUnitsPerEvent units
/// spread by the binomial 3x3 kernel. 144 is divisible by every clipped kernel
/// sum (4, 6, 8, 9, 12, 16), so border renormalisation is exact and merging
/// partial maps is plain integer addition.
class HeatMap {
 public:
  static constexpr std::int64_t kUnitsPerEvent = 144;

  HeatMap() = default;
  HeatMap(int width, int height, HeatKind kind);

  int width() const { return width_; }
  int height() const { return height_; }
  HeatKind kind() const { return kind_; }
  std::uint64_t events() const { return events_; }

  /// Deposits one event at round(p); points outside the grid are clamped to it.
  void bump(BevPoint p);
  void merge(const HeatMap& other);

  std::int64_t units(int x, int y) const { return cells_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return static_cast<double>(units(x, y)) / kUnitsPerEvent; }
  std::span<const std::int64_t> raw() const { return cells_; }
  std::vector<double> values() const;
  double sum() const;

  /// Rebuilds a map from raw units (for reloading shards). Validates the
  /// total against `events`.
  static HeatMap from_units(int width, int height, HeatKind kind, std::uint64_t events,
                            std::vector<std::int64_t> units);

  friend bool operator==(const HeatMap&, const HeatMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  HeatKind kind_ = HeatKind::Vehicle;
  std::uint64_t events_ = 0;
  std::vector<std::int64_t> cells_;
};

struct HeatMapSet {
  std::array<HeatMap, 5> maps;

  HeatMapSet() = default;
  HeatMapSet(int width, int height);
  HeatMap& operator[](HeatKind k) { return maps[static_cast<int>(k)]; }
  const HeatMap& operator[](HeatKind k) const { return maps[static_cast<int>(k)]; }
  void merge(const HeatMapSet& other);

  friend bool operator==(const HeatMapSet&, const HeatMapSet&) = default;
};

struct AnalyticsConfig {
  double speed_limit_mph = 30.0;
  double park_speed_mph = 0.5;
  double park_seconds = 60.0;
  double park_border_m = 1.0;
  double proximity_risk_m = 1.0;
  double congestion_distance_m = 2.0;
  double congestion_speed_mph = 5.0;

  void validate() const;
};

/// One object as seen in one frame, in BEV.
struct FrameObject {
  int id = 0;
  ObjectClass cls = ObjectClass::Car;
  BevPoint bev;
  double speed_mph = 0.0;
};

/// Track ids per state, each sorted ascending.
struct StateSets {
  std::vector<int> parking;
  std::vector<int> speeding;
  std::vector<int> collision_risk;
  std::vector<int> congestion;

  static bool contains(const std::vector<int>& set, int id);
};

/// Per-frame state classification. Stateful only for parking, which needs a
/// run of slow frames near the road edge; frames must be fed in order. With no
/// road boundary nothing is ever classified as parked.
class StateClassifier {
 public:
  StateClassifier(AnalyticsConfig cfg, GroundScale scale, double fps, const BoundaryIndex* road = nullptr);

  StateSets classify(int frame, std::span<const FrameObject> objects);

 private:
  AnalyticsConfig cfg_;
  double iota_;
  double fps_;
  const BoundaryIndex* road_;
  std::map<int, int> streak_start_;  // id -> first frame of the current slow run
  std::optional<int> last_frame_;
};

void update_heatmaps(HeatMapSet& maps, std::span<const FrameObject> objects, const StateSets& states);

/// Mean speed of vehicles not parked; nullopt when there are none.
std::optional<double> average_speed(std::span<const FrameObject> objects, const StateSets& states);

struct FrameStats {
  int frame = 0;
  int vehicles = 0;
  int pedestrians = 0;
  std::optional<double> avg_speed_mph;

  friend bool operator==(const FrameStats&, const FrameStats&) = default;
};

FrameStats frame_stats(int frame, std::span<const FrameObject> objects, const StateSets& states);

struct RenderOptions {
  double floor = 5.0;  // normalised levels below this stay transparent
  double alpha = 0.6;
};

/// Heat overlay in BEV. Without a base the transparent cells are black.
ImageBuffer render(const HeatMap& map, const ImageBuffer* base = nullptr, const RenderOptions& options = {});

/// The same overlay warped into the camera view: each output pixel samples the
/// BEV heat at G(x, y).
ImageBuffer render_perspective(const HeatMap& map, const Homography& g, int width, int height,
                               const ImageBuffer* base = nullptr, const RenderOptions& options = {});

}  // namespace trafficlens
