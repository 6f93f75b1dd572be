#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "trafficlens/pipeline/config.hpp"
#include "trafficlens/pipeline/records.hpp"

// One function per CLI subcommand. Each reads its inputs, writes its outputs
// under `out`, and throws trafficlens::Error on failure.

namespace trafficlens::pipeline {

namespace fs = std::filesystem;

/// detections.jsonl, truth.json, matches.json, satellite.pgm and, when the
/// scenario asks for them, frames/frame_NNNNN.pgm.
void cmd_simulate(const fs::path& scenario, const fs::path& out, std::uint64_t seed);

struct CalibrateInputs {
  fs::path matches;
  std::optional<fs::path> detections;  // trajectories for the lens fit
  std::optional<fs::path> frames;      // directory of camera PGMs
  std::optional<fs::path> satellite;   // reference for histogram matching
};

/// Writes calibration.json (and background.pgm when frames are given).
Calibration cmd_calibrate(const CalibrateInputs& in, const Config& cfg, const fs::path& out);

struct TrackInputs {
  fs::path detections;
  fs::path calibration;
  std::optional<fs::path> boundary;  // road edge for headings of still objects
};

/// Writes tracks.jsonl.
void cmd_track(const TrackInputs& in, const Config& cfg, const fs::path& out);

/// Writes road_mask.pgm and boundary.json.
void cmd_segment(const fs::path& tracks, const fs::path& satellite, const Config& cfg, const fs::path& out);

struct AnalyzeInputs {
  fs::path tracks;
  fs::path calibration;
  fs::path satellite;                // sizes the heat maps
  std::optional<fs::path> boundary;  // enables parking detection
  std::optional<int> from_frame;
  std::optional<int> to_frame;
};

/// Writes stats.csv, states.jsonl and heatmaps.json for the frame range.
void cmd_analyze(const AnalyzeInputs& in, const Config& cfg, const fs::path& out);

struct RenderInputs {
  fs::path heatmaps;
  std::optional<fs::path> calibration;  // enables the camera-view renders
  std::optional<fs::path> satellite;    // BEV base image
  std::optional<fs::path> background;   // camera-view base image
};

/// Writes heat_<kind>_bev.ppm and heat_<kind>_camera.ppm. Empty maps are
/// skipped; their names are returned.
std::vector<std::string> cmd_render(const RenderInputs& in, const Config& cfg, const fs::path& out);

/// Combines analyze outputs of disjoint frame ranges.
void cmd_merge(const std::vector<fs::path>& shards, const fs::path& out);

}  // namespace trafficlens::pipeline
