#include "trafficlens/pipeline/records.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace trafficlens::pipeline {

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::SchemaError, where + ": " + what);
}

double number_at(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) schema(where, std::string("missing \"") + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number()) schema(where, std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

int int_at(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) schema(where, std::string("missing \"") + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number_integer()) schema(where, std::string("\"") + key + "\" must be an integer");
  return v.get<int>();
}

template <std::size_t N>
std::array<double, N> numbers_at(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) schema(where, std::string("missing \"") + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_array() || v.size() != N) {
    schema(where, std::string("\"") + key + "\" must be an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) schema(where, std::string("\"") + key + "\" must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

Json point(double x, double y) { return Json::array({x, y}); }

template <class F>
void for_each_line(std::istream& in, const std::string& source, F&& f) {
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(n);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      schema(where, "not valid JSON");
    }
    if (!j.is_object()) schema(where, "expected a JSON object");
    f(j, where);
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return in;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::IoError, "short write to " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, path.string() + ": not valid JSON (byte " + std::to_string(e.byte) + ")");
  }
}

// ---------------------------------------------------------------------------

std::vector<DetectionRecord> parse_detections(std::istream& in, const std::string& source) {
  std::vector<DetectionRecord> out;
  std::map<std::string, int> last_frame;
  for_each_line(in, source, [&](const Json& j, const std::string& where) {
    DetectionRecord r;
    r.det.frame = int_at(j, "frame", where);
    if (r.det.frame < 0) schema(where, "\"frame\" must be non-negative");
    const auto b = numbers_at<4>(j, "bbox", where);
    r.det.bbox = {b[0], b[1], b[2], b[3]};
    r.det.objectness = number_at(j, "score", where);
    const auto p = numbers_at<kNumClasses>(j, "probs", where);
    std::copy(p.begin(), p.end(), r.det.class_probs.begin());
    if (j.contains("camera")) {
      if (!j["camera"].is_string()) schema(where, "\"camera\" must be a string");
      r.camera = j["camera"].get<std::string>();
    }
    if (j.contains("timestamp")) r.timestamp = number_at(j, "timestamp", where);
    try {
      r.det.validate();
    } catch (const Error& e) {
      schema(where, e.detail());
    }
    auto [it, fresh] = last_frame.emplace(r.camera, r.det.frame);
    if (!fresh) {
      if (r.det.frame < it->second) schema(where, "frame numbers went backwards");
      it->second = r.det.frame;
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<DetectionRecord> read_detections(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_detections(in, path.string());
}

std::string format_detection(const DetectionRecord& r) {
  Json j;
  j["frame"] = r.det.frame;
  j["bbox"] = Json::array({r.det.bbox.x, r.det.bbox.y, r.det.bbox.w, r.det.bbox.h});
  j["score"] = r.det.objectness;
  j["probs"] = r.det.class_probs;
  if (!r.camera.empty()) j["camera"] = r.camera;
  if (r.timestamp) j["timestamp"] = *r.timestamp;
  return j.dump();
}

// ---------------------------------------------------------------------------

std::string format_track(const TrackRecord& r) {
  Json j;
  j["frame"] = r.frame;
  j["id"] = r.id;
  j["bbox"] = Json::array({r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h});
  j["class"] = class_name(r.cls);
  j["ref"] = point(r.ref.x, r.ref.y);
  j["bev"] = point(r.bev.x, r.bev.y);
  j["speed_mph"] = r.speed_mph;
  j["heading_deg"] = r.heading_deg ? Json(*r.heading_deg) : Json(nullptr);
  if (r.cuboid) {
    Json c = Json::array();
    for (const auto& p : *r.cuboid) c.push_back(point(p.x, p.y));
    j["cuboid"] = std::move(c);
  }
  if (r.predicted) j["predicted"] = true;
  return j.dump();
}

std::vector<TrackRecord> parse_tracks(std::istream& in, const std::string& source) {
  std::vector<TrackRecord> out;
  for_each_line(in, source, [&](const Json& j, const std::string& where) {
    TrackRecord r;
    r.frame = int_at(j, "frame", where);
    r.id = int_at(j, "id", where);
    const auto b = numbers_at<4>(j, "bbox", where);
    r.bbox = {b[0], b[1], b[2], b[3]};
    if (!j.contains("class") || !j["class"].is_string()) schema(where, "missing \"class\"");
    const auto cls = class_from_name(j["class"].get<std::string>());
    if (!cls) schema(where, "unknown class '" + j["class"].get<std::string>() + "'");
    r.cls = *cls;
    const auto ref = numbers_at<2>(j, "ref", where);
    r.ref = {ref[0], ref[1]};
    const auto bev = numbers_at<2>(j, "bev", where);
    r.bev = {bev[0], bev[1]};
    r.speed_mph = number_at(j, "speed_mph", where);
    if (j.contains("heading_deg") && !j["heading_deg"].is_null()) r.heading_deg = number_at(j, "heading_deg", where);
    if (j.contains("cuboid")) {
      const Json& c = j["cuboid"];
      if (!c.is_array() || c.size() != 8) schema(where, "\"cuboid\" must hold 8 points");
      std::array<ImagePoint, 8> corners;
      for (int i = 0; i < 8; ++i) {
        if (!c[i].is_array() || c[i].size() != 2 || !c[i][0].is_number() || !c[i][1].is_number()) {
          schema(where, "\"cuboid\" points must be [x, y]");
        }
        corners[i] = {c[i][0].get<double>(), c[i][1].get<double>()};
      }
      r.cuboid = corners;
    }
    if (j.contains("predicted")) {
      if (!j["predicted"].is_boolean()) schema(where, "\"predicted\" must be a boolean");
      r.predicted = j["predicted"].get<bool>();
    }
    if (!out.empty() && r.frame < out.back().frame) schema(where, "frame numbers went backwards");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<TrackRecord> read_tracks(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_tracks(in, path.string());
}

// ---------------------------------------------------------------------------

Json homography_to_json(const Homography& g) { return g.row_major(); }

Homography homography_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 9) throw Error(ErrorKind::SchemaError, "homography must hold 9 numbers");
  std::array<double, 9> v{};
  for (int i = 0; i < 9; ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::SchemaError, "homography must hold 9 numbers");
    v[i] = j[i].get<double>();
  }
  return Homography::from_row_major(v);
}

BevPoint Calibration::to_bev(ImagePoint p) const {
  if (distortion && !distortion->is_identity()) p = undistort_point(p, *distortion);
  return g(p);
}

Json to_json(const Calibration& c) {
  Json j;
  j["homography"] = homography_to_json(c.g);
  j["iota_m_per_px"] = c.iota_m_per_px;
  j["image"] = {{"width", c.image_width}, {"height", c.image_height}};
  j["matches"] = c.matches;
  j["inliers"] = c.inliers;
  j["inlier_ratio"] = c.matches ? static_cast<double>(c.inliers) / static_cast<double>(c.matches) : 0.0;
  j["iterations"] = c.iterations;
  j["tau_z"] = c.tau_z;
  j["seed"] = c.seed;
  j["inlier_rmse_px"] = c.inlier_rmse_px;
  if (c.distortion) {
    j["distortion"] = {{"k1", c.distortion->k1},
                       {"k2", c.distortion->k2},
                       {"center", point(c.distortion->center.x, c.distortion->center.y)},
                       {"norm_radius", c.distortion->norm_radius}};
  }
  if (c.histogram_mapping) j["histogram_mapping"] = format_mapping(*c.histogram_mapping);
  return j;
}

Calibration calibration_from_json(const Json& j, const std::string& source) {
  if (!j.is_object()) schema(source, "calibration must be a JSON object");
  Calibration c;
  if (!j.contains("homography")) schema(source, "missing \"homography\"");
  try {
    c.g = homography_from_json(j["homography"]);
  } catch (const Error& e) {
    schema(source, e.detail());
  }
  c.iota_m_per_px = number_at(j, "iota_m_per_px", source);
  if (j.contains("image")) {
    c.image_width = int_at(j["image"], "width", source);
    c.image_height = int_at(j["image"], "height", source);
  }
  if (j.contains("matches")) c.matches = j["matches"].get<std::size_t>();
  if (j.contains("inliers")) c.inliers = j["inliers"].get<std::size_t>();
  if (j.contains("iterations")) c.iterations = j["iterations"].get<std::size_t>();
  if (j.contains("tau_z")) c.tau_z = number_at(j, "tau_z", source);
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("inlier_rmse_px")) c.inlier_rmse_px = number_at(j, "inlier_rmse_px", source);
  if (j.contains("distortion")) {
    const Json& d = j["distortion"];
    DistortionParams p;
    p.k1 = number_at(d, "k1", source);
    p.k2 = number_at(d, "k2", source);
    const auto ctr = numbers_at<2>(d, "center", source);
    p.center = {ctr[0], ctr[1]};
    p.norm_radius = number_at(d, "norm_radius", source);
    c.distortion = p;
  }
  return c;
}

Calibration read_calibration(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::MissingCalibration, "calibration file " + path.string() + " not found");
  }
  return calibration_from_json(read_json(path), path.string());
}

std::vector<Correspondence> read_matches(const std::filesystem::path& path) {
  const Json j = read_json(path);
  if (!j.is_array()) schema(path.string(), "matches must be a JSON array");
  std::vector<Correspondence> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = path.string() + ": match " + std::to_string(i);
    if (!j[i].is_object()) schema(where, "expected {\"cam\":[x,y],\"sat\":[x,y]}");
    const auto cam = numbers_at<2>(j[i], "cam", where);
    const auto sat = numbers_at<2>(j[i], "sat", where);
    out.push_back({{cam[0], cam[1]}, {sat[0], sat[1]}});
  }
  return out;
}

Json matches_to_json(std::span<const Correspondence> matches) {
  Json j = Json::array();
  for (const auto& m : matches) j.push_back({{"cam", point(m.cam.x, m.cam.y)}, {"sat", point(m.sat.x, m.sat.y)}});
  return j;
}

// ---------------------------------------------------------------------------

Json heatmaps_to_json(const HeatMapSet& maps) {
  const HeatMap& first = maps.maps[0];
  Json j;
  j["width"] = first.width();
  j["height"] = first.height();
  j["units_per_event"] = HeatMap::kUnitsPerEvent;
  Json all;
  for (HeatKind k : kHeatKinds) {
    const HeatMap& m = maps[k];
    Json cells = Json::array();
    const auto raw = m.raw();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == 0) continue;
      cells.push_back(Json::array({static_cast<int>(i % m.width()), static_cast<int>(i / m.width()), raw[i]}));
    }
    all[std::string(heat_kind_name(k))] = {{"events", m.events()}, {"cells", std::move(cells)}};
  }
  j["maps"] = std::move(all);
  return j;
}

HeatMapSet heatmaps_from_json(const Json& j, const std::string& source) {
  if (!j.is_object()) schema(source, "heat maps must be a JSON object");
  const int w = int_at(j, "width", source), h = int_at(j, "height", source);
  if (w < 1 || h < 1) schema(source, "heat map size must be positive");
  if (int_at(j, "units_per_event", source) != HeatMap::kUnitsPerEvent) schema(source, "unsupported units_per_event");
  if (!j.contains("maps") || !j["maps"].is_object()) schema(source, "missing \"maps\"");
  HeatMapSet out(w, h);
  for (HeatKind k : kHeatKinds) {
    const std::string name(heat_kind_name(k));
    const std::string where = source + ": " + name;
    if (!j["maps"].contains(name)) schema(where, "missing map");
    const Json& m = j["maps"][name];
    if (!m.contains("events") || !m["events"].is_number_unsigned()) schema(where, "missing \"events\"");
    std::vector<std::int64_t> units(static_cast<std::size_t>(w) * h, 0);
    if (!m.contains("cells") || !m["cells"].is_array()) schema(where, "missing \"cells\"");
    for (const Json& c : m["cells"]) {
      if (!c.is_array() || c.size() != 3 || !c[0].is_number_integer() || !c[1].is_number_integer() ||
          !c[2].is_number_integer()) {
        schema(where, "cells must be [x, y, units]");
      }
      const int x = c[0].get<int>(), y = c[1].get<int>();
      if (x < 0 || y < 0 || x >= w || y >= h) schema(where, "cell outside the map");
      units[static_cast<std::size_t>(y) * w + x] += c[2].get<std::int64_t>();
    }
    try {
      out[k] = HeatMap::from_units(w, h, k, m["events"].get<std::uint64_t>(), std::move(units));
    } catch (const Error& e) {
      schema(where, e.detail());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Json boundary_to_json(const BoundarySet& b, int width, int height) {
  Json chains = Json::array();
  for (const auto& chain : b.chains) {
    Json c = Json::array();
    for (const Pixel& p : chain) c.push_back(Json::array({p.x, p.y}));
    chains.push_back(std::move(c));
  }
  return {{"width", width}, {"height", height}, {"chains", std::move(chains)}};
}

BoundarySet boundary_from_json(const Json& j, const std::string& source) {
  if (!j.is_object() || !j.contains("chains") || !j["chains"].is_array()) schema(source, "missing \"chains\"");
  BoundarySet b;
  for (const Json& c : j["chains"]) {
    if (!c.is_array()) schema(source, "chains must be arrays of [x, y]");
    std::vector<Pixel> chain;
    for (const Json& p : c) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
        schema(source, "chain pixels must be integer [x, y]");
      }
      chain.push_back({p[0].get<int>(), p[1].get<int>()});
    }
    b.chains.push_back(std::move(chain));
  }
  return b;
}

}  // namespace trafficlens::pipeline
