#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "support.hpp"
#include "trafficlens/analytics.hpp"
#include "trafficlens/error.hpp"

using namespace trafficlens;
using tl_test::for_all;
using tl_test::Gen;

namespace {

FrameObject vehicle(int id, double x, double y, double mph) { return {id, ObjectClass::Car, {x, y}, mph}; }
FrameObject walker(int id, double x, double y) { return {id, ObjectClass::Pedestrian, {x, y}, 3.0}; }

// Vertical road edge at x = 0, 200 px long.
BoundarySet edge() {
  BoundarySet b;
  b.chains.push_back({});
  for (int y = 0; y < 200; ++y) b.chains[0].push_back({0, y});
  return b;
}

// Position along the blue -> cyan -> green -> yellow -> red ramp, 0..1020.
int ramp_position(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (r == 0 && b == 255) return g;
  if (r == 0 && g == 255) return 255 + (255 - b);
  if (b == 0 && g == 255) return 510 + r;
  if (b == 0 && r == 255) return 765 + (255 - g);
  ADD_FAILURE() << "colour off the ramp: " << int(r) << "," << int(g) << "," << int(b);
  return -1;
}

}  // namespace

TEST(HeatMap, InteriorBumpHasUnitMass) {
  HeatMap m(10, 10, HeatKind::Vehicle);
  m.bump({5, 5});
  EXPECT_EQ(m.sum(), 1.0);
  EXPECT_EQ(m.at(5, 5), 4.0 / 16.0);
  EXPECT_EQ(m.at(4, 5), 2.0 / 16.0);
  EXPECT_EQ(m.at(4, 4), 1.0 / 16.0);
  EXPECT_EQ(m.events(), 1u);
}

TEST(HeatMap, CornerBumpRenormalised) {
  HeatMap m(10, 10, HeatKind::Vehicle);
  m.bump({0, 0});
  EXPECT_EQ(m.sum(), 1.0);
  EXPECT_EQ(m.at(0, 0), 4.0 / 9.0);
  m.bump({-40, 3.2});  // clamped onto the left edge
  EXPECT_EQ(m.sum(), 2.0);
  EXPECT_EQ(m.at(0, 3), 4.0 / 12.0);
}

TEST(HeatMap, MassConservedUnderRandomBumps) {
  for_all(3, 41, [](Gen& g) {
    HeatMap m(g.integer(1, 60), g.integer(1, 60), HeatKind::Pedestrian);
    for (int i = 0; i < 20000; ++i) m.bump({g.uniform(-5, 65), g.uniform(-5, 65)});
    EXPECT_NEAR(m.sum(), 20000.0, 1e-9);
    const auto v = m.values();
    EXPECT_GE(*std::min_element(v.begin(), v.end()), 0.0);
  });
}

TEST(HeatMap, MergeEqualsSinglePass) {
  for_all(5, 42, [](Gen& g) {
    HeatMap whole(40, 30, HeatKind::Speeding), a(40, 30, HeatKind::Speeding), b(40, 30, HeatKind::Speeding);
    for (int i = 0; i < 1000; ++i) {
      const BevPoint p{g.uniform(-2, 42), g.uniform(-2, 32)};
      whole.bump(p);
      (i < 400 ? a : b).bump(p);
    }
    HeatMap ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    EXPECT_EQ(ab, whole);
    EXPECT_EQ(ba, whole);
  });
  HeatMap x(4, 4, HeatKind::Vehicle), y(5, 4, HeatKind::Vehicle);
  EXPECT_THROW(x.merge(y), Error);
}

TEST(HeatMap, FromUnitsValidates) {
  HeatMap m(6, 6, HeatKind::Congestion);
  m.bump({2, 2});
  std::vector<std::int64_t> raw(m.raw().begin(), m.raw().end());
  EXPECT_EQ(HeatMap::from_units(6, 6, HeatKind::Congestion, 1, raw), m);
  EXPECT_THROW(HeatMap::from_units(6, 6, HeatKind::Congestion, 2, raw), Error);
  raw[0] = -1;
  EXPECT_THROW(HeatMap::from_units(6, 6, HeatKind::Congestion, 1, raw), Error);
}

TEST(States, ParkingAfterSixtySeconds) {
  const BoundaryIndex road(edge());
  StateClassifier sc({}, GroundScale{0.1}, 25.0, &road);
  const int frames = 61 * 25;
  bool ever = false;
  for (int f = 0; f <= frames; ++f) {
    const std::vector<FrameObject> objs = {vehicle(7, 5, 100, 0.0)};  // 0.5 m from the edge
    const auto s = sc.classify(f, objs);
    const bool parked = StateSets::contains(s.parking, 7);
    EXPECT_EQ(parked, f >= 60 * 25) << f;
    ever |= parked;
  }
  EXPECT_TRUE(ever);
}

TEST(States, ParkingStreakResetsOnMovement) {
  const BoundaryIndex road(edge());
  StateClassifier sc({}, GroundScale{0.1}, 1.0, &road);
  for (int f = 0; f < 60; ++f) sc.classify(f, std::vector<FrameObject>{vehicle(1, 5, 50, 0.0)});
  sc.classify(60, std::vector<FrameObject>{vehicle(1, 5, 50, 3.0)});
  for (int f = 61; f < 121; ++f) {
    const auto s = sc.classify(f, std::vector<FrameObject>{vehicle(1, 5, 50, 0.0)});
    EXPECT_TRUE(s.parking.empty()) << f;
  }
  EXPECT_EQ(sc.classify(121, std::vector<FrameObject>{vehicle(1, 5, 50, 0.0)}).parking, std::vector<int>{1});
}

TEST(States, NoRoadMeansNoParking) {
  StateClassifier sc({}, GroundScale{0.1}, 1.0);
  StateSets s;
  for (int f = 0; f < 100; ++f) s = sc.classify(f, std::vector<FrameObject>{vehicle(1, 5, 50, 0.0)});
  EXPECT_TRUE(s.parking.empty());
}

TEST(States, SpeedingExactlyAboveLimit) {
  StateClassifier sc({}, GroundScale{0.1}, 25.0);
  const std::vector<FrameObject> objs = {vehicle(1, 0, 0, 35.0), vehicle(2, 100, 0, 30.0),
                                         vehicle(3, 200, 0, 30.0001)};
  EXPECT_EQ(sc.classify(0, objs).speeding, (std::vector<int>{1, 3}));
}

TEST(States, CollisionRiskSkipsParkedVehicles) {
  const BoundaryIndex road(edge());
  StateClassifier sc({}, GroundScale{0.1}, 1.0, &road);
  StateSets s;
  for (int f = 0; f <= 60; ++f) {
    const std::vector<FrameObject> objs = {vehicle(1, 5, 50, 0.0), walker(2, 10, 50), vehicle(3, 100, 150, 20.0),
                                           walker(4, 100, 155)};
    s = sc.classify(f, objs);
    if (f < 60) {
      EXPECT_EQ(s.collision_risk, (std::vector<int>{2, 4})) << f;
    }
  }
  EXPECT_EQ(s.parking, std::vector<int>{1});
  EXPECT_EQ(s.collision_risk, std::vector<int>{4});
}

TEST(States, CongestionNeedsSlowNeighbour) {
  StateClassifier sc({}, GroundScale{0.1}, 25.0);
  const std::vector<FrameObject> objs = {vehicle(1, 0, 0, 2.0), vehicle(2, 15, 0, 3.0), vehicle(3, 30, 0, 20.0),
                                         vehicle(4, 100, 0, 1.0), walker(5, 101, 0)};
  // 1 and 2 are 1.5 m apart and slow; 3 is near 2 but fast; 4 has only a pedestrian nearby.
  EXPECT_EQ(sc.classify(0, objs).congestion, (std::vector<int>{1, 2}));
}

TEST(States, ParkedAndCongestedDisjoint) {
  const BoundaryIndex road(edge());
  for_all(10, 43, [&](Gen& g) {
    StateClassifier sc({}, GroundScale{0.1}, 1.0, &road);
    std::vector<FrameObject> objs;
    for (int i = 0; i < 8; ++i) objs.push_back(vehicle(i, g.uniform(0, 30), g.uniform(0, 60), g.uniform(0, 1)));
    for (int f = 0; f < 80; ++f) {
      const auto s = sc.classify(f, objs);
      for (int id : s.parking) EXPECT_FALSE(StateSets::contains(s.congestion, id));
    }
  });
}

TEST(States, Errors) {
  EXPECT_THROW(StateClassifier({}, GroundScale{0.0}, 25.0), Error);
  StateClassifier sc({}, GroundScale{0.1}, 25.0);
  sc.classify(3, {});
  EXPECT_THROW(sc.classify(3, {}), Error);
}

TEST(Heatmaps, UpdateRules) {
  HeatMapSet maps(50, 50);
  StateSets s;
  s.parking = {1};
  s.speeding = {2};
  s.congestion = {3};
  s.collision_risk = {5};
  const std::vector<FrameObject> objs = {vehicle(1, 10, 10, 0), vehicle(2, 20, 20, 40), vehicle(3, 30, 30, 1),
                                         walker(4, 5, 5), walker(5, 6, 6), walker(6, 7, 7)};
  update_heatmaps(maps, objs, s);
  EXPECT_EQ(maps[HeatKind::Pedestrian].events(), 3u);
  EXPECT_EQ(maps[HeatKind::Vehicle].events(), 2u);
  EXPECT_EQ(maps[HeatKind::Vehicle].units(10, 10), 0);
  EXPECT_EQ(maps[HeatKind::Speeding].events(), 1u);
  EXPECT_EQ(maps[HeatKind::Congestion].events(), 1u);
  EXPECT_EQ(maps[HeatKind::Proximity].events(), 1u);
}

TEST(Stats, AverageSpeed) {
  StateSets none;
  const std::vector<FrameObject> three = {vehicle(1, 0, 0, 10), vehicle(2, 0, 0, 20), vehicle(3, 0, 0, 30),
                                          walker(4, 0, 0)};
  EXPECT_EQ(average_speed(three, none), 20.0);
  StateSets all;
  all.parking = {1, 2, 3};
  EXPECT_FALSE(average_speed(three, all).has_value());
  const std::vector<FrameObject> one = {vehicle(9, 0, 0, 17.5)};
  EXPECT_EQ(average_speed(one, none), 17.5);
  const FrameStats fs = frame_stats(4, three, none);
  EXPECT_EQ(fs.vehicles, 3);
  EXPECT_EQ(fs.pedestrians, 1);
  EXPECT_EQ(fs.frame, 4);
}

TEST(Render, EmptyMapThrows) {
  const HeatMap m(8, 8, HeatKind::Proximity);
  try {
    render(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyHeatMap);
  }
}

TEST(Render, PeakIsRed) {
  HeatMap m(9, 9, HeatKind::Vehicle);
  m.bump({4, 4});
  const ImageBuffer img = render(m);
  EXPECT_EQ(img.channels(), 3);
  EXPECT_EQ(img.at(4, 4, 0), 255);
  EXPECT_EQ(img.at(4, 4, 1), 0);
  EXPECT_EQ(img.at(4, 4, 2), 0);
  EXPECT_EQ(img.at(0, 0, 0), 0);  // transparent over black
  EXPECT_EQ(img.at(0, 0, 2), 0);
}

TEST(Render, MonotoneInHeat) {
  for_all(5, 44, [](Gen& g) {
    HeatMap m(30, 30, HeatKind::Vehicle);
    for (int i = 0; i < 300; ++i) m.bump({g.normal(5) + 15, g.normal(5) + 15});
    const ImageBuffer img = render(m, nullptr, {0.0, 1.0});
    std::vector<std::pair<double, int>> cells;
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 30; ++x)
        if (m.units(x, y) > 0) cells.push_back({m.at(x, y), ramp_position(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2))});
    std::sort(cells.begin(), cells.end());
    for (std::size_t i = 1; i < cells.size(); ++i) EXPECT_GE(cells[i].second, cells[i - 1].second);
  });
}

TEST(Render, BlendsOverBase) {
  HeatMap m(5, 5, HeatKind::Vehicle);
  m.bump({2, 2});
  const ImageBuffer base(5, 5, 1, 100);
  const ImageBuffer img = render(m, &base, {5.0, 0.6});
  EXPECT_EQ(img.at(2, 2, 0), std::lround(0.6 * 255 + 0.4 * 100));
  EXPECT_EQ(img.at(2, 2, 1), 40);
  EXPECT_EQ(img.at(0, 0, 0), 100);  // outside the kernel
}

TEST(Render, PerspectiveIdentityMatchesBev) {
  HeatMap m(20, 12, HeatKind::Pedestrian);
  for (int i = 0; i < 5; ++i) m.bump({3.0 + 3 * i, 6.0});
  EXPECT_EQ(render_perspective(m, Homography::identity(), 20, 12), render(m));
}
