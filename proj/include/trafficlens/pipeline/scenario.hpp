#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trafficlens/calibration.hpp"
#include "trafficlens/detection.hpp"
#include "trafficlens/geometry.hpp"
#include "trafficlens/imaging.hpp"
#include "trafficlens/pipeline/records.hpp"

namespace trafficlens::pipeline {

/// One scripted object: a class and a piecewise-linear ground path of
/// (t seconds, X meters, Y meters) knots. The actor exists between the first
/// and last knot.
struct ActorScript {
  ObjectClass cls = ObjectClass::Car;
  std::vector<std::array<double, 3>> path;
};

struct Occlusion {
  int actor = 0;
  int from = 0;  // first hidden frame
  int to = 0;    // last hidden frame
};

struct Flicker {
  int actor = 0;
  ObjectClass to = ObjectClass::WorkVan;
  double probability = 0.0;
};

struct NoiseSpec {
  double detection_sigma_px = 0.0;
  double dropout = 0.0;
  int match_count = 200;
  double match_sigma_px = 0.5;
  double outlier_fraction = 0.4;
};

/// BEV raster: pixel (x, y) covers world (origin + (x, y) * iota).
struct BevSpec {
  int width = 600;
  int height = 400;
  double origin_x = -30.0;
  double origin_y = -32.0;
};

struct Marking {
  GroundPoint a, b;
  bool dashed = true;
};

struct ScenarioSpec {
  CameraModel camera;
  double iota = 0.1;
  double fps = 25.0;
  int frames = 1;
  BevSpec bev;
  std::vector<std::vector<GroundPoint>> roads;  // polygons
  std::vector<Marking> markings;
  std::vector<ActorScript> actors;
  NoiseSpec noise;
  std::vector<Occlusion> occlusions;
  std::vector<Flicker> flicker;
  std::optional<std::array<double, 2>> distortion;  // k1, k2
  int camera_frames = 0;  // perspective PGM frames to render

  void validate() const;
};

/// Throws InvalidSpec naming the offending field.
ScenarioSpec parse_scenario(const Json& j, const std::string& source);
ScenarioSpec load_scenario(const std::filesystem::path& path);

BevPoint world_to_bev(const ScenarioSpec& spec, GroundPoint p);
GroundPoint bev_to_world(const ScenarioSpec& spec, BevPoint p);
/// True image -> BEV homography of the scene.
Homography truth_homography(const ScenarioSpec& spec);

struct ActorState {
  GroundPoint pos;
  double speed_mps = 0.0;
  double heading_deg = 0.0;  // of the current (or last moving) segment
};

/// State at time t, or nullopt outside the scripted interval.
std::optional<ActorState> actor_state(const ActorScript& actor, double t);

/// Object height in meters used to size synthetic boxes.
double nominal_height(ObjectClass cls);

struct Simulation {
  std::vector<DetectionRecord> detections;
  Json truth;
  std::vector<Correspondence> matches;
  std::vector<bool> match_inlier;
  ImageBuffer satellite;
  std::vector<ImageBuffer> camera_frames;
};

Simulation simulate(const ScenarioSpec& spec, std::uint64_t seed);

/// Per-actor truth samples read back from `truth.json`.
struct TruthSample {
  int frame = 0;
  bool in_view = false;   // projects inside the image, not occluded
  bool detected = false;  // in view and not dropped
  BevPoint bev;
  ImagePoint image_ref;
  double speed_mph = 0.0;
  double heading_deg = 0.0;
  ObjectClass cls = ObjectClass::Car;
};

std::vector<std::vector<TruthSample>> truth_samples(const Json& truth);

}  // namespace trafficlens::pipeline
