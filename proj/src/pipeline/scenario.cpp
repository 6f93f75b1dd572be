#include "trafficlens/pipeline/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "trafficlens/box3d.hpp"
#include "trafficlens/kernels.hpp"
#include "trafficlens/motion.hpp"
#include "trafficlens/pipeline/seeds.hpp"

namespace trafficlens::pipeline {

namespace {

constexpr std::uint8_t kGrass = 150;
constexpr std::uint8_t kAsphalt = 80;
constexpr std::uint8_t kPaint = 230;
constexpr std::uint8_t kSky = 200;
constexpr std::uint8_t kVehicleShade = 40;
constexpr double kMinDepth = 0.5;  // meters in front of the camera

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::InvalidSpec, where + ": " + what);
}

double num(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) invalid(where, std::string("missing \"") + key + "\"");
  if (!j[key].is_number()) invalid(where, std::string("\"") + key + "\" must be a number");
  return j[key].get<double>();
}

double num_or(const Json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? num(j, key, where) : fallback;
}

int integer(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) invalid(where, std::string("missing \"") + key + "\"");
  if (!j[key].is_number_integer()) invalid(where, std::string("\"") + key + "\" must be an integer");
  return j[key].get<int>();
}

GroundPoint ground(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    invalid(where, "expected [X, Y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

ObjectClass class_of(const Json& j, const std::string& where) {
  if (!j.is_string()) invalid(where, "class must be a string");
  const auto cls = class_from_name(j.get<std::string>());
  if (!cls) invalid(where, "unknown class '" + j.get<std::string>() + "'");
  return *cls;
}

bool inside_polygon(const std::vector<GroundPoint>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

ImageBuffer render_satellite(const ScenarioSpec& spec) {
  ImageBuffer img(spec.bev.width, spec.bev.height, 1, kGrass);
  for (int y = 0; y < spec.bev.height; ++y) {
    for (int x = 0; x < spec.bev.width; ++x) {
      const GroundPoint w = bev_to_world(spec, {double(x), double(y)});
      for (const auto& poly : spec.roads) {
        if (inside_polygon(poly, w.x, w.y)) {
          img.at(x, y) = kAsphalt;
          break;
        }
      }
    }
  }
  for (const auto& m : spec.markings) {
    const double len = distance(m.a, m.b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / (spec.iota * 0.25))));
    for (int i = 0; i <= steps; ++i) {
      const double s = static_cast<double>(i) / steps;
      if (m.dashed && std::fmod(s * len, 6.0) >= 3.0) continue;  // 3 m paint, 3 m gap
      const BevPoint p = world_to_bev(spec, {m.a.x + s * (m.b.x - m.a.x), m.a.y + s * (m.b.y - m.a.y)});
      const long px = std::lround(p.x), py = std::lround(p.y);
      if (img.contains(px, py)) img.at(px, py) = kPaint;
    }
  }
  return img;
}

struct ProjectedBox {
  ImagePoint ref;
  double w = 0.0;
  double h = 0.0;
};

// Image box of the object's cuboid, anchored so its bottom centre is the
// projection of the ground position.
std::optional<ProjectedBox> project_actor(const ScenarioSpec& spec, const Eigen::Matrix<double, 3, 4>& p,
                                          const PlanarMap<GroundFrame, ImageFrame>& to_image, ObjectClass cls,
                                          const ActorState& st) {
  if (camera_depth(spec.camera, st.pos) < kMinDepth) return std::nullopt;
  static const DimensionPriors priors;
  const Dimensions dim = priors.at(cls);
  const double t = deg_to_rad(st.heading_deg);
  const double dx = std::cos(t), dy = std::sin(t);
  double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
  for (double along : {-0.5, 0.5}) {
    for (double across : {-0.5, 0.5}) {
      const double X = st.pos.x + along * dim.length * dx - across * dim.width * dy;
      const double Y = st.pos.y + along * dim.length * dy + across * dim.width * dx;
      for (double Z : {0.0, -nominal_height(cls)}) {  // -Z is up
        const Eigen::Vector3d q = p * Eigen::Vector4d(X, Y, Z, 1.0);
        if (q.z() < kMinDepth) return std::nullopt;
        umin = std::min(umin, q.x() / q.z());
        umax = std::max(umax, q.x() / q.z());
        vmin = std::min(vmin, q.y() / q.z());
        vmax = std::max(vmax, q.y() / q.z());
      }
    }
  }
  return ProjectedBox{to_image(st.pos), umax - umin, vmax - vmin};
}

Json pt(double x, double y) { return Json::array({x, y}); }

}  // namespace

// ---------------------------------------------------------------------------

void ScenarioSpec::validate() const {
  try {
    camera.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidSpec, "camera: " + e.detail());
  }
  if (camera.width < 1 || camera.height < 1) throw Error(ErrorKind::InvalidSpec, "camera: image size must be positive");
  if (!(iota > 0.0)) throw Error(ErrorKind::InvalidSpec, "iota must be positive");
  if (!(fps > 0.0)) throw Error(ErrorKind::InvalidSpec, "fps must be positive");
  if (frames < 1) throw Error(ErrorKind::InvalidSpec, "frames must be at least 1");
  if (bev.width < 1 || bev.height < 1) throw Error(ErrorKind::InvalidSpec, "bev size must be positive");
  const double bound = 1e5;
  for (std::size_t i = 0; i < actors.size(); ++i) {
    const std::string where = "actors[" + std::to_string(i) + "]";
    const auto& path = actors[i].path;
    if (path.empty()) throw Error(ErrorKind::InvalidSpec, where + ": empty path");
    for (std::size_t k = 0; k < path.size(); ++k) {
      for (double v : path[k]) {
        if (!std::isfinite(v) || std::abs(v) > bound) {
          throw Error(ErrorKind::InvalidSpec, where + ": path values must be finite and bounded");
        }
      }
      if (k > 0 && !(path[k][0] > path[k - 1][0])) {
        throw Error(ErrorKind::InvalidSpec, where + ": path times must increase");
      }
    }
  }
  const auto check_actor = [&](int a, const std::string& where) {
    if (a < 0 || a >= static_cast<int>(actors.size())) throw Error(ErrorKind::InvalidSpec, where + ": no such actor");
  };
  for (const auto& o : occlusions) {
    check_actor(o.actor, "occlusions");
    if (o.to < o.from) throw Error(ErrorKind::InvalidSpec, "occlusions: 'to' before 'from'");
  }
  for (const auto& f : flicker) {
    check_actor(f.actor, "flicker");
    if (!(f.probability >= 0.0 && f.probability <= 1.0)) {
      throw Error(ErrorKind::InvalidSpec, "flicker: probability must lie in [0, 1]");
    }
  }
  const auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidSpec, std::string("noise.") + name + " must lie in [0, 1]");
  };
  prob(noise.dropout, "dropout");
  prob(noise.outlier_fraction, "outlier_fraction");
  if (!(noise.detection_sigma_px >= 0.0) || !(noise.match_sigma_px >= 0.0)) {
    throw Error(ErrorKind::InvalidSpec, "noise sigmas must be non-negative");
  }
  if (noise.match_count < 0) throw Error(ErrorKind::InvalidSpec, "noise.matches must be non-negative");
  for (const auto& poly : roads) {
    if (poly.size() < 3) throw Error(ErrorKind::InvalidSpec, "roads: polygons need at least 3 points");
  }
  if (camera_frames < 0) throw Error(ErrorKind::InvalidSpec, "camera_frames must be non-negative");
}

ScenarioSpec parse_scenario(const Json& j, const std::string& source) {
  if (!j.is_object()) invalid(source, "scenario must be a JSON object");
  ScenarioSpec s;
  if (!j.contains("camera")) invalid(source, "missing \"camera\"");
  const Json& c = j["camera"];
  const std::string cw = source + ": camera";
  s.camera.f = num(c, "f", cw);
  s.camera.kx = num_or(c, "kx", 1.0, cw);
  s.camera.ky = num_or(c, "ky", 1.0, cw);
  s.camera.shear = num_or(c, "shear", 0.0, cw);
  s.camera.cx = num(c, "cx", cw);
  s.camera.cy = num(c, "cy", cw);
  s.camera.theta_c = num(c, "theta_c", cw);
  s.camera.h_c = num(c, "h_c", cw);
  s.camera.width = integer(c, "width", cw);
  s.camera.height = integer(c, "height", cw);

  s.iota = num(j, "iota", source);
  s.fps = num(j, "fps", source);
  s.frames = integer(j, "frames", source);
  if (j.contains("bev")) {
    const std::string bw = source + ": bev";
    s.bev.width = integer(j["bev"], "width", bw);
    s.bev.height = integer(j["bev"], "height", bw);
    if (!j["bev"].contains("origin")) invalid(bw, "missing \"origin\"");
    const GroundPoint o = ground(j["bev"]["origin"], bw + ".origin");
    s.bev.origin_x = o.x;
    s.bev.origin_y = o.y;
  }
  if (j.contains("roads")) {
    for (const Json& poly : j["roads"]) {
      std::vector<GroundPoint> pts;
      for (const Json& p : poly) pts.push_back(ground(p, source + ": roads"));
      s.roads.push_back(std::move(pts));
    }
  }
  if (j.contains("markings")) {
    for (const Json& m : j["markings"]) {
      const std::string mw = source + ": markings";
      if (!m.contains("from") || !m.contains("to")) invalid(mw, "need \"from\" and \"to\"");
      Marking mk{ground(m["from"], mw), ground(m["to"], mw), true};
      if (m.contains("dashed")) {
        if (!m["dashed"].is_boolean()) invalid(mw, "\"dashed\" must be a boolean");
        mk.dashed = m["dashed"].get<bool>();
      }
      s.markings.push_back(mk);
    }
  }
  if (j.contains("actors")) {
    for (std::size_t i = 0; i < j["actors"].size(); ++i) {
      const Json& a = j["actors"][i];
      const std::string aw = source + ": actors[" + std::to_string(i) + "]";
      if (!a.is_object() || !a.contains("class") || !a.contains("path")) invalid(aw, "need \"class\" and \"path\"");
      ActorScript actor;
      actor.cls = class_of(a["class"], aw);
      for (const Json& k : a["path"]) {
        if (!k.is_array() || k.size() != 3 || !k[0].is_number() || !k[1].is_number() || !k[2].is_number()) {
          invalid(aw, "path knots must be [t, X, Y]");
        }
        actor.path.push_back({k[0].get<double>(), k[1].get<double>(), k[2].get<double>()});
      }
      s.actors.push_back(std::move(actor));
    }
  }
  if (j.contains("noise")) {
    const Json& n = j["noise"];
    const std::string nw = source + ": noise";
    s.noise.detection_sigma_px = num_or(n, "sigma_px", s.noise.detection_sigma_px, nw);
    s.noise.dropout = num_or(n, "dropout", s.noise.dropout, nw);
    if (n.contains("matches")) s.noise.match_count = integer(n, "matches", nw);
    s.noise.match_sigma_px = num_or(n, "match_sigma_px", s.noise.match_sigma_px, nw);
    s.noise.outlier_fraction = num_or(n, "outlier_fraction", s.noise.outlier_fraction, nw);
  }
  if (j.contains("occlusions")) {
    for (const Json& o : j["occlusions"]) {
      const std::string ow = source + ": occlusions";
      s.occlusions.push_back({integer(o, "actor", ow), integer(o, "from", ow), integer(o, "to", ow)});
    }
  }
  if (j.contains("flicker")) {
    for (const Json& f : j["flicker"]) {
      const std::string fw = source + ": flicker";
      if (!f.contains("to")) invalid(fw, "missing \"to\"");
      s.flicker.push_back({integer(f, "actor", fw), class_of(f["to"], fw), num(f, "probability", fw)});
    }
  }
  if (j.contains("distortion")) {
    const std::string dw = source + ": distortion";
    s.distortion = std::array<double, 2>{num(j["distortion"], "k1", dw), num_or(j["distortion"], "k2", 0.0, dw)};
  }
  if (j.contains("camera_frames")) s.camera_frames = integer(j, "camera_frames", source);
  try {
    s.validate();
  } catch (const Error& e) {
    invalid(source, e.detail());
  }
  return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json(path);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SchemaError) throw Error(ErrorKind::InvalidSpec, e.detail());
    throw;
  }
  return parse_scenario(j, path.string());
}

BevPoint world_to_bev(const ScenarioSpec& spec, GroundPoint p) {
  return {(p.x - spec.bev.origin_x) / spec.iota, (p.y - spec.bev.origin_y) / spec.iota};
}

GroundPoint bev_to_world(const ScenarioSpec& spec, BevPoint p) {
  return {spec.bev.origin_x + p.x * spec.iota, spec.bev.origin_y + p.y * spec.iota};
}

Homography truth_homography(const ScenarioSpec& spec) {
  Eigen::Matrix3d s;
  s << 1.0 / spec.iota, 0, -spec.bev.origin_x / spec.iota,  //
      0, 1.0 / spec.iota, -spec.bev.origin_y / spec.iota,   //
      0, 0, 1;
  const auto to_image = compose_from_camera(spec.camera);
  return Homography::from_matrix(s * to_image.matrix().inverse());
}

std::optional<ActorState> actor_state(const ActorScript& actor, double t) {
  const auto& path = actor.path;
  if (path.empty() || t < path.front()[0] || t > path.back()[0]) return std::nullopt;
  if (path.size() == 1) return ActorState{{path[0][1], path[0][2]}, 0.0, 0.0};

  std::size_t seg = 0;
  while (seg + 2 < path.size() && t > path[seg + 1][0]) ++seg;
  const auto& a = path[seg];
  const auto& b = path[seg + 1];
  const double s = (t - a[0]) / (b[0] - a[0]);
  ActorState st;
  st.pos = {a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])};
  st.speed_mps = std::hypot(b[1] - a[1], b[2] - a[2]) / (b[0] - a[0]);
  // Heading of this segment, or of the last segment that moved.
  for (std::size_t k = seg + 1; k-- > 0;) {
    const double dx = path[k + 1][1] - path[k][1], dy = path[k + 1][2] - path[k][2];
    if (dx != 0.0 || dy != 0.0) {
      st.heading_deg = rad_to_deg(std::atan2(dy, dx));
      break;
    }
  }
  return st;
}

double nominal_height(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::ArticulatedTruck: return 3.8;
    case ObjectClass::Bicycle: return 1.6;
    case ObjectClass::Bus: return 3.0;
    case ObjectClass::Car: return 1.5;
    case ObjectClass::Motorcycle: return 1.4;
    case ObjectClass::MotorisedVehicle: return 1.6;
    case ObjectClass::NonMotorisedVehicle: return 1.5;
    case ObjectClass::Pedestrian: return 1.7;
    case ObjectClass::PickupTruck: return 1.8;
    case ObjectClass::SingleUnitTruck: return 3.2;
    case ObjectClass::WorkVan: return 2.2;
  }
  return 1.5;
}

// ---------------------------------------------------------------------------

Simulation simulate(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  Simulation sim;
  const auto to_image = compose_from_camera(spec.camera);
  const Eigen::Matrix<double, 3, 4> proj = projection_matrix(spec.camera);
  const Homography g = truth_homography(spec);
  const auto w = spec.camera.width, h = spec.camera.height;
  std::optional<DistortionParams> lens;
  if (spec.distortion) lens = DistortionParams::for_image(w, h, (*spec.distortion)[0], (*spec.distortion)[1]);
  const auto lens_map = [&](ImagePoint p) { return lens ? distort_point(p, *lens) : p; };

  // Detections. Every (frame, actor) pair consumes the same draws whether or
  // not it ends up visible, so editing one actor leaves the others' noise alone.
  std::mt19937_64 rng(derive_seed(seed, seed_label::kDetectionNoise));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Json actors_truth = Json::array();
  std::vector<Json> samples(spec.actors.size(), Json::array());
  for (int frame = 0; frame < spec.frames; ++frame) {
    const double t = frame / spec.fps;
    for (std::size_t a = 0; a < spec.actors.size(); ++a) {
      const double u_drop = unit(rng), u_flicker = unit(rng);
      const double n[4] = {gauss(rng), gauss(rng), gauss(rng), gauss(rng)};

      const ActorScript& actor = spec.actors[a];
      const auto st = actor_state(actor, t);
      if (!st) continue;
      const auto box = project_actor(spec, proj, to_image, actor.cls, *st);
      bool in_view = box && box->ref.x >= 0 && box->ref.y >= 0 && box->ref.x < w && box->ref.y < h;
      for (const auto& o : spec.occlusions) {
        if (o.actor == static_cast<int>(a) && frame >= o.from && frame <= o.to) in_view = false;
      }
      const bool detected = in_view && u_drop >= spec.noise.dropout;

      const BevPoint bev = world_to_bev(spec, st->pos);
      Json sample;
      sample["frame"] = frame;
      sample["in_view"] = in_view;
      sample["detected"] = detected;
      sample["world"] = pt(st->pos.x, st->pos.y);
      sample["bev"] = pt(bev.x, bev.y);
      const ImagePoint ref = to_image(st->pos);
      sample["image_ref"] = pt(ref.x, ref.y);
      sample["speed_mps"] = st->speed_mps;
      sample["speed_mph"] = st->speed_mps * kMpsToMph;
      sample["heading_deg"] = st->heading_deg;
      samples[a].push_back(std::move(sample));
      if (!detected) continue;

      const double sigma = spec.noise.detection_sigma_px;
      ImagePoint noisy{box->ref.x + sigma * n[0], box->ref.y + sigma * n[1]};
      noisy = lens_map(noisy);
      const double bw = std::max(1.0, box->w + sigma * n[2]);
      const double bh = std::max(1.0, box->h + sigma * n[3]);

      ObjectClass shown = actor.cls;
      for (const auto& f : spec.flicker) {
        if (f.actor == static_cast<int>(a) && u_flicker < f.probability) shown = f.to;
      }
      DetectionRecord rec;
      rec.det.frame = frame;
      rec.det.bbox = {noisy.x, noisy.y - bh / 2.0, bw, bh};
      rec.det.objectness = 0.9;
      rec.det.class_probs.fill(0.014);
      rec.det.class_probs[class_index(shown)] = 0.86;
      rec.timestamp = t;
      sim.detections.push_back(rec);
    }
  }
  for (std::size_t a = 0; a < spec.actors.size(); ++a) {
    actors_truth.push_back(
        {{"index", a}, {"class", class_name(spec.actors[a].cls)}, {"samples", std::move(samples[a])}});
  }

  // Putative correspondences: road-plane points seen by the camera, a fixed
  // share of them replaced by random pairs.
  std::mt19937_64 mrng(derive_seed(seed, seed_label::kMatches));
  const auto ground_of = invert(to_image);
  const int n_matches = spec.noise.match_count;
  const int n_out = static_cast<int>(std::floor(n_matches * spec.noise.outlier_fraction));
  std::vector<int> order(n_matches);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), mrng);
  sim.match_inlier.assign(n_matches, true);
  for (int i = 0; i < n_out; ++i) sim.match_inlier[order[i]] = false;
  std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h);
  std::uniform_real_distribution<double> bx(0.0, spec.bev.width), by(0.0, spec.bev.height);
  for (int i = 0; i < n_matches; ++i) {
    Correspondence c;
    if (sim.match_inlier[i]) {
      for (int tries = 0;; ++tries) {
        if (tries > 100000) throw Error(ErrorKind::InvalidSpec, "camera sees too little of the BEV area");
        const ImagePoint cam{ux(mrng), uy(mrng)};
        const GroundPoint gp = ground_of(cam);
        if (camera_depth(spec.camera, gp) < kMinDepth) continue;
        const BevPoint sat = g(cam);
        if (sat.x < 0 || sat.y < 0 || sat.x >= spec.bev.width || sat.y >= spec.bev.height) continue;
        c.cam = cam;
        c.sat = {sat.x + spec.noise.match_sigma_px * gauss(mrng), sat.y + spec.noise.match_sigma_px * gauss(mrng)};
        break;
      }
    } else {
      c.cam = {ux(mrng), uy(mrng)};
      c.sat = {bx(mrng), by(mrng)};
    }
    c.cam = lens_map(c.cam);
    sim.matches.push_back(c);
  }

  sim.satellite = render_satellite(spec);

  // Perspective frames: the satellite seen through the camera plus flat boxes.
  for (int frame = 0; frame < std::min(spec.camera_frames, spec.frames); ++frame) {
    ImageBuffer img(w, h, 1, kSky);
    kernels::parallel::warp_nearest(sim.satellite.data(), spec.bev.width, spec.bev.height, 1, g.matrix(),
                                    img.data(), w, h, kSky);
    const double t = frame / spec.fps;
    for (const auto& actor : spec.actors) {
      const auto st = actor_state(actor, t);
      if (!st) continue;
      const auto box = project_actor(spec, proj, to_image, actor.cls, *st);
      if (!box) continue;
      const int x0 = std::max(0, static_cast<int>(std::floor(box->ref.x - box->w / 2)));
      const int x1 = std::min(w - 1, static_cast<int>(std::ceil(box->ref.x + box->w / 2)));
      const int y0 = std::max(0, static_cast<int>(std::floor(box->ref.y - box->h)));
      const int y1 = std::min(h - 1, static_cast<int>(std::ceil(box->ref.y)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) img.at(x, y) = kVehicleShade;
    }
    sim.camera_frames.push_back(std::move(img));
  }

  Json truth;
  truth["homography"] = homography_to_json(g);
  truth["iota_m_per_px"] = spec.iota;
  truth["fps"] = spec.fps;
  truth["frames"] = spec.frames;
  truth["image"] = {{"width", w}, {"height", h}};
  truth["bev"] = {{"width", spec.bev.width}, {"height", spec.bev.height}};
  if (lens) truth["distortion"] = {{"k1", lens->k1}, {"k2", lens->k2}};
  truth["match_inliers"] = sim.match_inlier;
  truth["actors"] = std::move(actors_truth);
  sim.truth = std::move(truth);
  return sim;
}

std::vector<std::vector<TruthSample>> truth_samples(const Json& truth) {
  std::vector<std::vector<TruthSample>> out;
  for (const Json& a : truth.at("actors")) {
    const ObjectClass cls = *class_from_name(a.at("class").get<std::string>());
    std::vector<TruthSample> v;
    for (const Json& s : a.at("samples")) {
      TruthSample t;
      t.frame = s.at("frame").get<int>();
      t.in_view = s.at("in_view").get<bool>();
      t.detected = s.at("detected").get<bool>();
      t.bev = {s.at("bev")[0].get<double>(), s.at("bev")[1].get<double>()};
      t.image_ref = {s.at("image_ref")[0].get<double>(), s.at("image_ref")[1].get<double>()};
      t.speed_mph = s.at("speed_mph").get<double>();
      t.heading_deg = s.at("heading_deg").get<double>();
      t.cls = cls;
      v.push_back(t);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace trafficlens::pipeline
