#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trafficlens/analytics.hpp"
#include "trafficlens/calibration.hpp"
#include "trafficlens/detection.hpp"
#include "trafficlens/geometry.hpp"
#include "trafficlens/imaging.hpp"
#include "trafficlens/roadmodel.hpp"

namespace trafficlens::pipeline {

using Json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path);
/// Writes the bytes exactly, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);

// Detections, one JSON object per line:
// {"frame":int,"bbox":[x,y,w,h],"score":s,"probs":[11 floats]}
// with optional "camera" (string) and "timestamp" (seconds).
struct DetectionRecord {
  Detection det;
  std::string camera;  // empty when absent
  std::optional<double> timestamp;
};

/// Rejects the first malformed line with "<source>:<line>: ..." as a SchemaError.
/// Frames must not decrease within one camera.
std::vector<DetectionRecord> parse_detections(std::istream& in, const std::string& source);
std::vector<DetectionRecord> read_detections(const std::filesystem::path& path);
std::string format_detection(const DetectionRecord& rec);

struct TrackRecord {
  int frame = 0;
  int id = 0;
  BBox bbox;
  ObjectClass cls = ObjectClass::Car;
  ImagePoint ref;
  BevPoint bev;
  double speed_mph = 0.0;
  std::optional<double> heading_deg;
  std::optional<std::array<ImagePoint, 8>> cuboid;
  bool predicted = false;  // coasting through an occlusion
};

std::string format_track(const TrackRecord& rec);
std::vector<TrackRecord> parse_tracks(std::istream& in, const std::string& source);
std::vector<TrackRecord> read_tracks(const std::filesystem::path& path);

struct Calibration {
  Homography g;                // image -> BEV
  double iota_m_per_px = 0.0;
  int image_width = 0;
  int image_height = 0;
  std::size_t matches = 0;
  std::size_t inliers = 0;
  std::size_t iterations = 0;
  double tau_z = 0.0;
  std::uint64_t seed = 0;
  double inlier_rmse_px = 0.0;  // refit residual over the inliers
  std::optional<DistortionParams> distortion;
  std::optional<std::array<std::uint8_t, 256>> histogram_mapping;

  GroundScale scale() const { return GroundScale{iota_m_per_px}; }
  /// Perspective pixel (as detected) -> BEV, undoing lens distortion first.
  BevPoint to_bev(ImagePoint p) const;
};

Json to_json(const Calibration& c);
Calibration calibration_from_json(const Json& j, const std::string& source);
Calibration read_calibration(const std::filesystem::path& path);

/// JSON array of {"cam":[x,y],"sat":[x,y]}.
std::vector<Correspondence> read_matches(const std::filesystem::path& path);
Json matches_to_json(std::span<const Correspondence> matches);

/// Sparse heat-map dump: per kind the event count and the non-zero cells as
/// [x, y, units].
Json heatmaps_to_json(const HeatMapSet& maps);
HeatMapSet heatmaps_from_json(const Json& j, const std::string& source);

/// Road boundary: {"width","height","chains":[[[x,y],...],...]}.
Json boundary_to_json(const BoundarySet& b, int width, int height);
BoundarySet boundary_from_json(const Json& j, const std::string& source);

/// Homography as 9 row-major numbers.
Json homography_to_json(const Homography& g);
Homography homography_from_json(const Json& j);

}  // namespace trafficlens::pipeline
