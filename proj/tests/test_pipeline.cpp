#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "support.hpp"
#include "trafficlens/error.hpp"
#include "trafficlens/pipeline/config.hpp"
#include "trafficlens/pipeline/records.hpp"
#include "trafficlens/pipeline/seeds.hpp"

using namespace trafficlens;
using namespace trafficlens::pipeline;
using tl_test::for_all;
using tl_test::Gen;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::string detection_line(int frame, double score = 0.9) {
  DetectionRecord r;
  r.det.frame = frame;
  r.det.bbox = {100, 200, 40, 30};
  r.det.objectness = score;
  r.det.class_probs.fill(0.01);
  r.det.class_probs[3] = 0.9;
  return format_detection(r);
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const Config c = parse_config("# comment\n\nfps = 30\nmin_hits=5   # trailing\nspeed_axis = x_only\n"
                                "prior.bus = 12 x 2.5\n");
  EXPECT_EQ(c.fps, 30.0);
  EXPECT_EQ(c.motion.fps, 30.0);
  EXPECT_EQ(c.tracker.min_hits, 5);
  EXPECT_TRUE(c.motion.x_only_speed);
  EXPECT_EQ(c.priors.at(ObjectClass::Bus).length, 12.0);
  EXPECT_EQ(c.tracker.iou_min, 0.3);
  EXPECT_EQ(c.analytics.speed_limit_mph, 30.0);
  EXPECT_EQ(c.beta, 0.6);
}

TEST(Config, FormatRoundTrips) {
  const std::string text = format_config(Config{});
  EXPECT_EQ(format_config(parse_config(text)), text);
  const std::string custom = format_config(parse_config("iou_min = 0.45\nseed = 99\nsrg_tau = 20\n"));
  EXPECT_EQ(format_config(parse_config(custom)), custom);
}

TEST(Config, ErrorsNameTheLine) {
  const auto check = [](const std::string& text, const std::string& want) {
    const std::string msg = error_of([&] { parse_config(text, "my.conf"); });
    EXPECT_NE(msg.find("ConfigError"), std::string::npos) << msg;
    EXPECT_NE(msg.find(want), std::string::npos) << msg;
  };
  check("fps = 25\nbogus = 1\n", "my.conf:2: unknown key 'bogus'");
  check("fps = fast\n", "my.conf:1: fps");
  check("\n\nfps 25\n", "my.conf:3: expected");
  check("fps = 25\nfps = 30\n", "my.conf:2: duplicate key 'fps'");
  check("fps =\n", "my.conf:1: missing value");
  check("min_hits = 2.5\n", "my.conf:1: min_hits");
  check("fps = -1\n", "fps must be positive");
  check("background_alpha = 1.5\n", "background_alpha");
  check("prior.car = 4\n", "prior.car");
  check("speed_axis = diagonal\n", "speed_axis");
}

TEST(Config, ShippedDefaultsMatchBuiltIns) {
  const Config c = load_config(std::filesystem::path(TL_SOURCE_DIR) / "configs" / "default.conf");
  EXPECT_EQ(format_config(c), format_config(Config{}));
}

TEST(Config, ExitCodeIsValidation) { EXPECT_EQ(exit_code_for(ErrorKind::ConfigError), 2); }

TEST(Seeds, KnownVectors) {
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(derive_seed(7, "x"), splitmix64(7 ^ fnv1a64("x")));
}

TEST(Seeds, LabelsSeparateStreams) {
  const std::uint64_t s = 12345;
  const std::uint64_t a = derive_seed(s, seed_label::kRansac), b = derive_seed(s, seed_label::kDistortion),
                      c = derive_seed(s, seed_label::kDetectionNoise), d = derive_seed(s, seed_label::kMatches),
                      e = derive_seed(s, seed_label::kFrames);
  const std::set<std::uint64_t> all = {a, b, c, d, e};
  EXPECT_EQ(all.size(), 5u);
  EXPECT_EQ(a, derive_seed(s, seed_label::kRansac));
  EXPECT_NE(a, derive_seed(s + 1, seed_label::kRansac));
}

TEST(Detections, RoundTrip) {
  std::stringstream ss;
  for (int f = 0; f < 5; ++f) ss << detection_line(f) << "\n";
  ss << "\n";
  const auto recs = parse_detections(ss, "d.jsonl");
  ASSERT_EQ(recs.size(), 5u);
  EXPECT_EQ(recs[3].det.frame, 3);
  EXPECT_EQ(recs[3].det.bbox, (BBox{100, 200, 40, 30}));
  EXPECT_EQ(format_detection(recs[2]), detection_line(2));
}

TEST(Detections, RejectWithLineNumbers) {
  const auto check = [](const std::string& bad, const std::string& want) {
    std::stringstream ss;
    ss << detection_line(0) << "\n" << detection_line(1) << "\n" << bad << "\n";
    const std::string msg = error_of([&] { parse_detections(ss, "d.jsonl"); });
    EXPECT_NE(msg.find("SchemaError"), std::string::npos) << msg;
    EXPECT_NE(msg.find("d.jsonl:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find(want), std::string::npos) << msg;
  };
  check("{not json", "not valid JSON");
  check("[1,2]", "JSON object");
  check(R"({"bbox":[1,2,3,4],"score":0.5,"probs":[0,0,0,1,0,0,0,0,0,0,0]})", "frame");
  check(R"({"frame":2,"bbox":[1,2,3],"score":0.5,"probs":[0,0,0,1,0,0,0,0,0,0,0]})", "bbox");
  check(R"({"frame":2,"bbox":[1,2,3,4],"score":0.5,"probs":[0,0,1]})", "probs");
  check(R"({"frame":2.5,"bbox":[1,2,3,4],"score":0.5,"probs":[0,0,0,1,0,0,0,0,0,0,0]})", "integer");
  check(detection_line(0), "backwards");
  check(detection_line(5, 2.0), "");
}

TEST(Detections, FramesOrderedPerCamera) {
  std::stringstream ss;
  ss << R"({"frame":5,"bbox":[1,2,3,4],"score":0.5,"probs":[0,0,0,1,0,0,0,0,0,0,0],"camera":"a"})" << "\n"
     << R"({"frame":2,"bbox":[1,2,3,4],"score":0.5,"probs":[0,0,0,1,0,0,0,0,0,0,0],"camera":"b"})" << "\n";
  EXPECT_EQ(parse_detections(ss, "d").size(), 2u);
}

TEST(Tracks, RoundTrip) {
  TrackRecord r;
  r.frame = 4;
  r.id = 2;
  r.bbox = {1.5, 2.5, 3, 4};
  r.cls = ObjectClass::PickupTruck;
  r.ref = {1.5, 4.5};
  r.bev = {100.25, 200.125};
  r.speed_mph = 31.7;
  r.heading_deg = -12.5;
  r.cuboid = std::array<ImagePoint, 8>{};
  for (int i = 0; i < 8; ++i) (*r.cuboid)[i] = {i * 1.0, i * 2.0};
  r.predicted = true;
  std::stringstream ss(format_track(r) + "\n");
  const auto back = parse_tracks(ss, "t");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(format_track(back[0]), format_track(r));
  std::stringstream bad(format_track(r) + "\n" + R"({"frame":1,"id":1})" + "\n");
  EXPECT_NE(error_of([&] { parse_tracks(bad, "t"); }).find("t:2"), std::string::npos);
}

TEST(Calibration, JsonRoundTrip) {
  Gen g(51);
  Calibration c;
  c.g = Homography::from_matrix(g.homography());
  c.iota_m_per_px = 0.1;
  c.image_width = 1280;
  c.image_height = 720;
  c.matches = 200;
  c.inliers = 120;
  c.iterations = 72;
  c.tau_z = 3.0;
  c.seed = 9;
  c.inlier_rmse_px = 0.5;
  c.distortion = DistortionParams{-0.2, 0.01, {640, 360}, 1000};
  const Calibration back = calibration_from_json(to_json(c), "c");
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  EXPECT_EQ(back.g.matrix(), c.g.matrix());
}

TEST(HeatmapJson, RoundTrip) {
  HeatMapSet maps(30, 20);
  Gen g(52);
  for (int i = 0; i < 200; ++i) maps[kHeatKinds[g.integer(0, 4)]].bump({g.uniform(0, 30), g.uniform(0, 20)});
  EXPECT_EQ(heatmaps_from_json(heatmaps_to_json(maps), "h"), maps);
}

TEST(BoundaryJson, RoundTripAndErrors) {
  BoundarySet b;
  b.chains = {{{1, 2}, {2, 2}, {3, 3}}, {{10, 10}}};
  const Json j = boundary_to_json(b, 40, 30);
  EXPECT_EQ(boundary_from_json(j, "b").chains, b.chains);
  EXPECT_THROW(boundary_from_json(Json::parse(R"({"chains":[[[1]]]})"), "b"), Error);
}
