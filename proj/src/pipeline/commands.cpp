#include "trafficlens/pipeline/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "trafficlens/pipeline/scenario.hpp"
#include "trafficlens/pipeline/seeds.hpp"

namespace trafficlens::pipeline {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<fs::path> pgm_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::IoError, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Detections grouped by frame. Only one camera stream is supported.
std::map<int, std::vector<Detection>> by_frame(const std::vector<DetectionRecord>& records, const fs::path& source) {
  std::map<int, std::vector<Detection>> out;
  for (const auto& r : records) {
    if (r.camera != records.front().camera) {
      throw Error(ErrorKind::SchemaError, source.string() + ": detections from more than one camera");
    }
    out[r.det.frame].push_back(r.det);
  }
  return out;
}

std::optional<BoundarySet> load_boundary(const std::optional<fs::path>& path) {
  if (!path) return std::nullopt;
  return boundary_from_json(read_json(*path), path->string());
}

double cuboid_heading(const std::optional<double>& moving, ObjectClass cls, BevPoint at, const BoundaryIndex* road,
                      double radius) {
  if (moving) return *moving;
  if (is_pedestrian(cls) || !road || road->empty()) return 0.0;
  try {
    return boundary_heading(at, *road, radius);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientIntersection) throw;
    return 0.0;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_simulate(const fs::path& scenario, const fs::path& out, std::uint64_t seed) {
  fs::create_directories(out);
  const ScenarioSpec spec = load_scenario(scenario);
  const Simulation sim = simulate(spec, seed);

  std::string lines;
  for (const auto& d : sim.detections) lines += format_detection(d) + "\n";
  write_text(out / "detections.jsonl", lines);
  write_text(out / "truth.json", dump(sim.truth));
  write_text(out / "matches.json", dump(matches_to_json(sim.matches)));
  write_pnm(out / "satellite.pgm", sim.satellite);
  for (std::size_t i = 0; i < sim.camera_frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.pgm", i);
    fs::create_directories(out / "frames");
    write_pnm(out / "frames" / name, sim.camera_frames[i]);
  }
}

Calibration cmd_calibrate(const CalibrateInputs& in, const Config& cfg, const fs::path& out) {
  fs::create_directories(out);
  std::vector<Correspondence> matches = read_matches(in.matches);
  Calibration cal;
  cal.iota_m_per_px = cfg.iota_m_per_px;
  cal.image_width = cfg.image_width;
  cal.image_height = cfg.image_height;
  cal.seed = cfg.seed;
  cal.tau_z = cfg.ransac.tau_z;
  cal.matches = matches.size();

  if (in.detections) {
    const auto records = read_detections(*in.detections);
    MomctTracker tracker(cfg.tracker);
    std::map<int, std::vector<ImagePoint>> paths;
    for (const auto& [frame, dets] : by_frame(records, *in.detections)) {
      for (const auto& snap : tracker.step(frame, dets)) paths[snap.id].push_back(snap.ref);
    }
    std::vector<std::vector<ImagePoint>> trajectories;
    for (auto& [id, p] : paths) trajectories.push_back(std::move(p));
    const EsResult es = fit_distortion_es(trajectories, cfg.image_width, cfg.image_height,
                                          derive_seed(cfg.seed, seed_label::kDistortion), cfg.es);
    cal.distortion = es.params;
    for (auto& m : matches) m.cam = undistort_point(m.cam, es.params, cfg.es.undistort_rounds);
  }

  if (in.frames) {
    const auto files = pgm_files(*in.frames);
    if (files.empty()) throw Error(ErrorKind::EmptyImage, "no PGM frames in " + in.frames->string());
    std::optional<BackgroundAccumulator> acc;
    const std::size_t n = std::min(files.size(), static_cast<std::size_t>(cfg.background_frames));
    for (std::size_t i = 0; i < n; ++i) {
      const ImageBuffer frame = to_gray(read_pnm(files[i]));
      if (!acc) acc.emplace(frame.width(), frame.height(), 1, cfg.background_alpha);
      acc->accumulate(frame);
    }
    const ImageBuffer background = acc->export_image();
    write_pnm(out / "background.pgm", background);
    if (in.satellite) {
      const HistogramMatch hm = histogram_match(background, to_gray(read_pnm(*in.satellite)));
      cal.histogram_mapping = hm.mapping;
      write_pnm(out / "background_matched.pgm", hm.image);
    }
  }

  const RansacResult r = ransac_homography(matches, cfg.ransac, derive_seed(cfg.seed, seed_label::kRansac));
  cal.g = r.h;
  cal.inliers = r.votes;
  cal.iterations = r.iterations_run;
  double sq = 0.0;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (!r.inlier_mask[i]) continue;
    const BevPoint p = r.h(matches[i].cam);
    sq += std::pow(p.x - matches[i].sat.x, 2) + std::pow(p.y - matches[i].sat.y, 2);
  }
  cal.inlier_rmse_px = r.votes ? std::sqrt(sq / static_cast<double>(r.votes)) : 0.0;

  write_text(out / "calibration.json", dump(to_json(cal)));
  return cal;
}

void cmd_track(const TrackInputs& in, const Config& cfg, const fs::path& out) {
  const Calibration cal = read_calibration(in.calibration);
  const auto records = read_detections(in.detections);
  const auto boundary = load_boundary(in.boundary);
  std::optional<BoundaryIndex> road;
  if (boundary) road.emplace(*boundary);
  const InverseHomography g_inv = invert(cal.g);
  const GroundScale scale = cal.scale();

  std::string lines;
  if (!records.empty()) {
    const auto frames = by_frame(records, in.detections);
    MomctTracker tracker(cfg.tracker);
    std::map<int, MotionTrack> motion;
    const std::vector<Detection> none;

    const auto lift = [&](TrackRecord& rec, const MotionEstimate& est) {
      const double hd = cuboid_heading(est.heading_deg, rec.cls, est.position, road ? &*road : nullptr,
                                       cfg.boundary_radius_px);
      const Footprint fp = make_footprint(est.position, rec.cls, hd, cfg.priors, scale);
      Cuboid c = lift_to_3d(fp, g_inv, rec.bbox, rec.cls, cfg.beta);
      if (cal.distortion && !cal.distortion->is_identity()) {
        for (auto& p : c.corners) p = distort_point(p, *cal.distortion);
      }
      rec.cuboid = c.corners;
    };

    for (int frame = frames.begin()->first; frame <= frames.rbegin()->first; ++frame) {
      const auto it = frames.find(frame);
      const auto snaps = tracker.step(frame, it == frames.end() ? none : it->second);

      // Every updated track feeds its motion filter, confirmed or not, so the
      // filter is warm by the time the track is reported.
      std::map<int, MotionEstimate> observed;
      for (const Track& t : tracker.tracks()) {
        if (t.time_since_update() != 0) continue;
        const BevPoint z = cal.to_bev(t.trajectory().back().ref);
        auto& mt = motion.try_emplace(t.id(), cfg.motion, scale).first->second;
        observed.emplace(t.id(), mt.observe(frame, z));
      }

      std::vector<TrackRecord> recs;
      for (const auto& s : snaps) {
        const MotionEstimate& est = observed.at(s.id);
        TrackRecord rec;
        rec.frame = frame;
        rec.id = s.id;
        rec.bbox = s.bbox;
        rec.cls = s.cls;
        rec.ref = s.ref;
        rec.bev = est.position;
        rec.speed_mph = est.speed_mph;
        rec.heading_deg = est.heading_deg;
        lift(rec, est);
        recs.push_back(std::move(rec));
      }
      for (const Track& t : tracker.tracks()) {
        if (t.time_since_update() == 0 || t.hits() < cfg.tracker.min_hits) continue;
        auto mt = motion.find(t.id());
        if (mt == motion.end()) continue;
        MotionEstimate est;
        try {
          est = mt->second.coast(frame);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::BufferExceeded) throw;
          continue;
        }
        // Coast only through occlusions; an object whose prediction has left
        // the picture is simply gone.
        ImagePoint seen = g_inv(est.position);
        if (cal.distortion && !cal.distortion->is_identity()) seen = distort_point(seen, *cal.distortion);
        if (!(seen.x >= 0 && seen.y >= 0 && seen.x < cal.image_width && seen.y < cal.image_height)) continue;
        TrackRecord rec;
        rec.frame = frame;
        rec.id = t.id();
        rec.bbox = t.bbox();
        rec.cls = t.object_class();
        rec.ref = reference_point(rec.bbox);
        rec.bev = est.position;
        rec.speed_mph = est.speed_mph;
        rec.heading_deg = est.heading_deg;
        rec.predicted = true;
        lift(rec, est);
        recs.push_back(std::move(rec));
      }
      std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
      for (const auto& r : recs) lines += format_track(r) + "\n";

      std::erase_if(motion, [&](const auto& kv) {
        return std::none_of(tracker.tracks().begin(), tracker.tracks().end(),
                            [&](const Track& t) { return t.id() == kv.first; });
      });
    }
  }
  write_text(out / "tracks.jsonl", lines);
}

void cmd_segment(const fs::path& tracks, const fs::path& satellite, const Config& cfg, const fs::path& out) {
  fs::create_directories(out);
  const auto records = read_tracks(tracks);
  const ImageBuffer gray = to_gray(read_pnm(satellite));
  std::vector<BevPoint> seeds;
  for (const auto& r : records) {
    if (!r.predicted && !is_pedestrian(r.cls)) seeds.push_back(r.bev);
  }
  const ImageBuffer mask = refine_mask(srg_segment(gray, seeds, cfg.srg));
  const BoundarySet boundary = extract_boundary(mask);
  write_pnm(out / "road_mask.pgm", mask);
  write_text(out / "boundary.json", dump(boundary_to_json(boundary, mask.width(), mask.height())));
}

void cmd_analyze(const AnalyzeInputs& in, const Config& cfg, const fs::path& out) {
  const Calibration cal = read_calibration(in.calibration);
  const auto records = read_tracks(in.tracks);
  const ImageBuffer sat = read_pnm(in.satellite);
  const auto boundary = load_boundary(in.boundary);
  std::optional<BoundaryIndex> road;
  if (boundary) road.emplace(*boundary);
  if (in.from_frame && in.to_frame && *in.to_frame < *in.from_frame) {
    throw Error(ErrorKind::InvalidArgument, "--to-frame is before --from-frame");
  }

  std::map<int, std::vector<FrameObject>> frames;
  for (const auto& r : records) frames[r.frame].push_back({r.id, r.cls, r.bev, r.speed_mph});

  HeatMapSet maps(sat.width(), sat.height());
  std::string csv = "frame,vehicles,pedestrians,avg_speed_mph\n";
  std::string states;
  if (!frames.empty()) {
    StateClassifier classifier(cfg.analytics, cal.scale(), cfg.fps, road ? &*road : nullptr);
    const int first = frames.begin()->first;
    const int last = frames.rbegin()->first;
    const int lo = std::max(first, in.from_frame.value_or(first));
    const int hi = std::min(last, in.to_frame.value_or(last));
    const std::vector<FrameObject> none;
    // Parking depends on history, so classification always starts at the
    // first frame even when only a later range is reported.
    for (int frame = first; frame <= hi; ++frame) {
      const auto it = frames.find(frame);
      const auto& objects = it == frames.end() ? none : it->second;
      const StateSets s = classifier.classify(frame, objects);
      if (frame < lo) continue;
      update_heatmaps(maps, objects, s);
      const FrameStats st = frame_stats(frame, objects, s);
      csv += std::to_string(st.frame) + "," + std::to_string(st.vehicles) + "," + std::to_string(st.pedestrians) +
             "," + (st.avg_speed_mph ? fmt(*st.avg_speed_mph) : std::string()) + "\n";
      const std::pair<const char*, const std::vector<int>*> sets[] = {
          {"parking", &s.parking}, {"speeding", &s.speeding}, {"collision_risk", &s.collision_risk},
          {"congestion", &s.congestion}};
      for (const auto& [name, ids] : sets) {
        for (int id : *ids) {
          Json j;
          j["frame"] = frame;
          j["id"] = id;
          j["state"] = name;
          states += j.dump() + "\n";
        }
      }
    }
  }
  write_text(out / "stats.csv", csv);
  write_text(out / "states.jsonl", states);
  write_text(out / "heatmaps.json", dump(heatmaps_to_json(maps)));
}

std::vector<std::string> cmd_render(const RenderInputs& in, const Config& cfg, const fs::path& out) {
  fs::create_directories(out);
  const HeatMapSet maps = heatmaps_from_json(read_json(in.heatmaps), in.heatmaps.string());
  std::optional<ImageBuffer> sat, bg;
  if (in.satellite) sat = to_rgb(read_pnm(*in.satellite));
  if (in.background) bg = to_rgb(read_pnm(*in.background));
  std::optional<Calibration> cal;
  if (in.calibration) cal = read_calibration(*in.calibration);
  if (sat && (sat->width() != maps.maps[0].width() || sat->height() != maps.maps[0].height())) {
    throw Error(ErrorKind::ShapeMismatch, "satellite image size differs from the heat maps");
  }

  std::vector<std::string> skipped;
  for (HeatKind k : kHeatKinds) {
    const std::string name(heat_kind_name(k));
    const HeatMap& m = maps[k];
    if (m.events() == 0) {
      skipped.push_back(name);
      continue;
    }
    write_pnm(out / ("heat_" + name + "_bev.ppm"), render(m, sat ? &*sat : nullptr, cfg.render));
    if (cal) {
      const int w = cal->image_width > 0 ? cal->image_width : cfg.image_width;
      const int h = cal->image_height > 0 ? cal->image_height : cfg.image_height;
      if (bg && (bg->width() != w || bg->height() != h)) {
        throw Error(ErrorKind::ShapeMismatch, "background size differs from the camera image");
      }
      write_pnm(out / ("heat_" + name + "_camera.ppm"),
                render_perspective(m, cal->g, w, h, bg ? &*bg : nullptr, cfg.render));
    }
  }
  return skipped;
}

void cmd_merge(const std::vector<fs::path>& shards, const fs::path& out) {
  if (shards.empty()) throw Error(ErrorKind::InvalidArgument, "merge needs at least one shard");
  std::optional<HeatMapSet> maps;
  std::string header;
  std::vector<std::pair<int, std::string>> rows, states;
  for (const auto& dir : shards) {
    const HeatMapSet m = heatmaps_from_json(read_json(dir / "heatmaps.json"), (dir / "heatmaps.json").string());
    if (!maps) maps = m;
    else maps->merge(m);

    std::istringstream csv(read_text(dir / "stats.csv"));
    std::string line;
    std::getline(csv, line);
    if (header.empty()) header = line;
    else if (line != header) throw Error(ErrorKind::SchemaError, (dir / "stats.csv").string() + ": header differs");
    while (std::getline(csv, line)) {
      if (!line.empty()) rows.emplace_back(std::stoi(line), line);
    }
    std::istringstream st(read_text(dir / "states.jsonl"));
    while (std::getline(st, line)) {
      if (!line.empty()) states.emplace_back(Json::parse(line).at("frame").get<int>(), line);
    }
  }
  const auto by_frame_key = [](const auto& a, const auto& b) { return a.first < b.first; };
  std::stable_sort(rows.begin(), rows.end(), by_frame_key);
  std::stable_sort(states.begin(), states.end(), by_frame_key);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw Error(ErrorKind::InvalidArgument, "shards overlap at frame " + std::to_string(rows[i].first));
    }
  }
  std::string csv = header + "\n", st;
  for (const auto& r : rows) csv += r.second + "\n";
  for (const auto& s : states) st += s.second + "\n";
  write_text(out / "stats.csv", csv);
  write_text(out / "states.jsonl", st);
  write_text(out / "heatmaps.json", dump(heatmaps_to_json(*maps)));
}

}  // namespace trafficlens::pipeline
