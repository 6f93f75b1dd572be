#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "trafficlens/analytics.hpp"
#include "trafficlens/box3d.hpp"
#include "trafficlens/calibration.hpp"
#include "trafficlens/motion.hpp"
#include "trafficlens/roadmodel.hpp"
#include "trafficlens/tracking.hpp"

namespace trafficlens::pipeline {

/// Every tunable of the pipeline. Loaded from a flat `key = value` file; keys
/// that are absent keep these defaults.
struct Config {
  double fps = 25.0;
  double iota_m_per_px = 0.1;
  int image_width = 1280;
  int image_height = 720;

  TrackerConfig tracker;
  RansacParams ransac;
  MotionConfig motion;  // fps mirrors `fps`
  SrgParams srg;
  AnalyticsConfig analytics;
  DimensionPriors priors;
  double beta = kDefaultHeightCoefficient;
  double boundary_radius_px = 5.0;

  double background_alpha = BackgroundAccumulator::kDefaultAlpha;
  int background_frames = BackgroundAccumulator::kDefaultFrames;
  EsOptions es;

  RenderOptions render;
  std::uint64_t seed = 0;

  GroundScale scale() const { return GroundScale{iota_m_per_px}; }
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Errors name the source
/// and line: "<source>:<line>: ...".
Config parse_config(std::string_view text, const std::string& source = "config");
Config load_config(const std::filesystem::path& path);

/// Canonical text form listing every key. Formatting the parse of this text
/// gives the same text back.
std::string format_config(const Config& cfg);

}  // namespace trafficlens::pipeline
