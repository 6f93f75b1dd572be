// trafficlens: command-line front end for the calibration, tracking and
// analytics pipeline.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trafficlens/error.hpp"
#include "trafficlens/pipeline/commands.hpp"

namespace tp = trafficlens::pipeline;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Config file (key = value)");
  cmd->add_option("--seed", c.seed, "Run seed; overrides the config");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

tp::Config load(const Common& c) {
  tp::Config cfg = c.config.empty() ? tp::Config{} : tp::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic camera calibration, tracking and analytics"};
  app.require_subcommand(1);

  Common common;
  std::string scenario, matches, detections, frames, satellite, calibration, tracks, boundary, heatmaps,
      background;
  std::optional<int> from_frame, to_frame;
  std::vector<std::string> shards;

  auto* simulate = app.add_subcommand("simulate", "Render a scripted scene into detections and truth");
  simulate->add_option("scenario", scenario, "Scenario JSON")->required();
  add_common(simulate, common);

  auto* calibrate = app.add_subcommand("calibrate", "Estimate the camera-to-BEV homography");
  calibrate->add_option("--matches", matches, "Putative correspondences JSON")->required();
  calibrate->add_option("--detections", detections, "Detections used as trajectories for the lens fit");
  calibrate->add_option("--frames", frames, "Directory of camera PGM frames for the background");
  calibrate->add_option("--satellite", satellite, "Satellite image for histogram matching");
  add_common(calibrate, common);

  auto* track = app.add_subcommand("track", "Track detections and estimate motion in BEV");
  track->add_option("--detections", detections, "Detections JSON Lines")->required();
  track->add_option("--calibration", calibration, "calibration.json")->required();
  track->add_option("--boundary", boundary, "Road boundary JSON from segment");
  add_common(track, common);

  auto* segment = app.add_subcommand("segment", "Grow the road region from vehicle positions");
  segment->add_option("--tracks", tracks, "Tracks JSON Lines")->required();
  segment->add_option("--satellite", satellite, "Satellite PGM/PPM")->required();
  add_common(segment, common);

  auto* analyze = app.add_subcommand("analyze", "Classify states and accumulate heat maps");
  analyze->add_option("--tracks", tracks, "Tracks JSON Lines")->required();
  analyze->add_option("--calibration", calibration, "calibration.json")->required();
  analyze->add_option("--satellite", satellite, "Satellite image (sets the heat-map size)")->required();
  analyze->add_option("--boundary", boundary, "Road boundary JSON; enables parking");
  analyze->add_option("--from-frame", from_frame, "First reported frame");
  analyze->add_option("--to-frame", to_frame, "Last reported frame");
  add_common(analyze, common);

  auto* render = app.add_subcommand("render", "Draw heat maps in BEV and camera view");
  render->add_option("--heatmaps", heatmaps, "heatmaps.json")->required();
  render->add_option("--calibration", calibration, "calibration.json; adds camera-view renders");
  render->add_option("--satellite", satellite, "BEV base image");
  render->add_option("--background", background, "Camera-view base image");
  add_common(render, common);

  auto* merge = app.add_subcommand("merge", "Combine analyze outputs of disjoint frame ranges");
  merge->add_option("shards", shards, "Shard directories")->required();
  add_common(merge, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const std::filesystem::path out = common.out;
    if (*simulate) {
      const tp::Config cfg = load(common);
      tp::cmd_simulate(scenario, out, cfg.seed);
    } else if (*calibrate) {
      const tp::Calibration cal =
          tp::cmd_calibrate({matches, opt_path(detections), opt_path(frames), opt_path(satellite)}, load(common), out);
      std::cout << "inliers " << cal.inliers << "/" << cal.matches << ", rmse " << cal.inlier_rmse_px << " px\n";
    } else if (*track) {
      tp::cmd_track({detections, calibration, opt_path(boundary)}, load(common), out);
    } else if (*segment) {
      tp::cmd_segment(tracks, satellite, load(common), out);
    } else if (*analyze) {
      tp::cmd_analyze({tracks, calibration, satellite, opt_path(boundary), from_frame, to_frame}, load(common), out);
    } else if (*render) {
      const auto skipped =
          tp::cmd_render({heatmaps, opt_path(calibration), opt_path(satellite), opt_path(background)}, load(common), out);
      for (const auto& name : skipped) std::cerr << "EmptyHeatMap: " << name << " heat map has no events, skipped\n";
    } else if (*merge) {
      std::vector<std::filesystem::path> dirs(shards.begin(), shards.end());
      tp::cmd_merge(dirs, out);
    }
  } catch (const trafficlens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return trafficlens::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
