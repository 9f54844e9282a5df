#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "flexglove/error.hpp"
#include "flexglove/layout.hpp"
#include "flexglove/routing.hpp"
#include "support/copper_audit.hpp"
#include "support/fixture.hpp"
#include "support/raster_oracle.hpp"

using namespace flexglove;
using namespace flexglove::routing;
using flexglove::testing::audit_copper;
using flexglove::testing::distance_to_path;
using flexglove::testing::distance_to_rings;
using flexglove::testing::golden_hand;
using flexglove::testing::ring_gap;

namespace {

const layout::Layout& golden_layout() {
  static const layout::Layout l = layout::synthesize(golden_hand(), {});
  return l;
}

const Routing& golden_routing() {
  static const Routing r = route(golden_layout(), {});
  return r;
}

Polygon square(double side) {
  Polygon p;
  p.exterior = {{0, 0}, {side, 0}, {side, side}, {0, side}};
  return p;
}

Polyline line(Point2 a, Point2 b) { return {{a, b}, 0.1}; }

// brute force nearest point on a closed ring
Point2 nearest_on_ring(const Ring& ring, Point2 p) {
  Point2 best;
  double bd = 1e300;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point2 a = ring[i], b = ring[(i + 1) % ring.size()];
    const Point2 d = b - a;
    const double t = std::clamp(geom::dot(p - a, d) / geom::dot(d, d), 0.0, 1.0);
    const Point2 q = a + d * t;
    if (geom::dist(p, q) < bd) {
      bd = geom::dist(p, q);
      best = q;
    }
  }
  return best;
}

struct TwoNetBoard {
  Polygon contour = square(60);
  RoutingConfig cfg;
  std::vector<Ring> rings = build_rings(contour, cfg);
  Connector conn = place_connector(contour, {0, 1}, {1, 0}, 30.0, Side::Front, cfg);

  std::vector<RingRoute> run(double y_a, double y_b) const {
    const std::vector<RingNet> nets = {{1, {line({25, y_a}, {40, y_a})}}, {2, {line({32, y_b}, {45, y_b})}}};
    return assign_and_drop(nets, rings, conn, {0, 1}, {1, 0}, cfg);
  }
};

}  // namespace

// --- rings ----------------------------------------------------------------------

TEST(Rings, CircleRingsAreConcentricAtThePitch) {
  const Polygon c = geom::circle({0, 0}, 50.0, 1e-5);
  const RoutingConfig cfg;
  const auto rings = build_rings(c, cfg);
  ASSERT_EQ(rings.size(), 16u);
  for (int k = 1; k <= 16; ++k) {
    const double r = 50.0 - cfg.ring_inset(k);
    for (const Point2& p : rings[k - 1]) ASSERT_NEAR(geom::norm(p), r, 1e-3) << "ring " << k;
  }
  for (int k = 1; k < 16; ++k) {
    double gap = 1e300;
    for (const Point2& p : rings[k - 1]) gap = std::min(gap, distance_to_rings({rings[k]}, p));
    EXPECT_NEAR(gap - cfg.trace_width_mm, cfg.clearance_mm, 1e-3) << "rings " << k << "/" << k + 1;
  }
}

TEST(Rings, GoldenAdjacentRingsKeepAFullPitch) {
  // polylines that do not cross are closest at a vertex of one of them
  const auto& rings = golden_routing().rings;
  const double pitch = RoutingConfig{}.ring_pitch_mm;
  for (std::size_t k = 0; k + 1 < rings.size(); ++k) {
    const double gap = std::min(ring_gap(rings[k], rings[k + 1], 0.3), ring_gap(rings[k + 1], rings[k], 0.3));
    EXPECT_GE(gap, pitch) << "rings " << k + 1 << "/" << k + 2;
    EXPECT_LT(gap, pitch + 1e-4) << "rings " << k + 1 << "/" << k + 2;
  }
}

TEST(Rings, SmallContourIsRejected) {
  try {
    build_rings(geom::circle({0, 0}, 3.0), {});
    FAIL();
  } catch (const RoutingError& e) {
    EXPECT_NE(std::string(e.what()).find("inradius"), std::string::npos);
  }
}

TEST(Rings, NarrowNeckSplitsARing) {
  Polygon p;
  p.exterior = {{0, 0}, {30, 0}, {30, 12.5}, {40, 12.5}, {40, 0}, {70, 0},
                {70, 30}, {40, 30}, {40, 17.5}, {30, 17.5}, {30, 30}, {0, 30}};
  try {
    build_rings(p, {});
    FAIL();
  } catch (const RoutingError& e) {
    EXPECT_NE(std::string(e.what()).find("splits"), std::string::npos);
  }
}

TEST(Rings, OpenRingStartsAtTheGapAndHeadsToward) {
  const Ring r = square(10).exterior;
  const auto path = open_ring(r, {5, 5}, {0, 1}, {1, 0});
  EXPECT_LT(geom::dist(path.front(), {5, 0}), 1e-9);
  EXPECT_LT(geom::dist(path.back(), {5, 0}), 1e-9);
  EXPECT_GT(path[1].x, 5.0);
  EXPECT_NEAR(geom::length(path), 40.0, 1e-9);
  const auto back = open_ring(r, {5, 5}, {0, 1}, {-1, 0});
  EXPECT_LT(back[1].x, 5.0);
}

// --- ring assignment ------------------------------------------------------------

TEST(AssignAndDrop, FarthestNetTakesTheOuterRing) {
  const TwoNetBoard b;
  const auto routes = b.run(45, 15);
  ASSERT_EQ(routes.size(), 2u);
  EXPECT_EQ(routes[0].net, 1);
  EXPECT_EQ(routes[0].ring, 1);
  EXPECT_EQ(routes[0].pad, 0);
  EXPECT_EQ(routes[1].ring, 2);
  EXPECT_EQ(routes[1].pad, 1);
  EXPECT_LT(geom::dist(routes[0].terminal, {40, 45}), 1e-9);
  EXPECT_LT(geom::dist(routes[1].terminal, {32, 15}), 1e-9);
}

TEST(AssignAndDrop, SwappingNetsSwapsRings) {
  const TwoNetBoard b;
  const auto routes = b.run(15, 45);
  EXPECT_EQ(routes[0].ring, 2);
  EXPECT_EQ(routes[1].ring, 1);
}

TEST(AssignAndDrop, DropPointIsTheNearestRingPoint) {
  const TwoNetBoard b;
  for (const auto& r : b.run(45, 15)) {
    const Point2 oracle = nearest_on_ring(b.rings[r.ring - 1], r.terminal);
    EXPECT_LT(geom::dist(r.drop_point, oracle), 1e-6) << "net " << r.net;
    EXPECT_LT(geom::dist(r.main.vertices.back(), r.terminal), 1e-6);
    EXPECT_LT(geom::dist(r.main.vertices.front(), b.conn.pads[r.pad].low), 1e-6);
  }
}

// --- verification ---------------------------------------------------------------

TEST(Verification, SingleNetBoardPasses) {
  const RoutingConfig cfg;
  const Connector conn = place_connector(square(60), {0, 1}, {1, 0}, 30, Side::Front, cfg);
  SideCopper c;
  c.areas.push_back({0, conn.pads[0].shape});
  c.traces.push_back({0, line(conn.pads[0].high, conn.pads[0].high + Point2{0, 10})});
  const auto rep = verify_clearance(c, 0.1, 1e-3);
  EXPECT_TRUE(rep.ok);
  EXPECT_TRUE(std::isinf(rep.min_clearance_mm));
  EXPECT_NO_THROW(verify_connectivity(c, 1e-3));
  EXPECT_NO_THROW(verify_edge_clearance(c, square(60), 0.5, 1e-3));
}

TEST(Verification, ParallelTracesMeasureEdgeGap) {
  SideCopper c;
  c.traces.push_back({1, line({0, 0}, {10, 0})});
  c.traces.push_back({2, line({0, 0.25}, {10, 0.25})});
  auto rep = verify_clearance(c, 0.1, 1e-3);
  EXPECT_TRUE(rep.ok);
  EXPECT_NEAR(rep.min_clearance_mm, 0.15, 1e-9);
  c.traces[1].line = line({0, 0.15}, {10, 0.15});
  rep = verify_clearance(c, 0.1, 1e-3);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.net_a, 1);
  EXPECT_EQ(rep.net_b, 2);
}

TEST(Verification, EdgeViolationNamesTheNet) {
  SideCopper c;
  c.traces.push_back({7, line({0.3, 5}, {0.3, 20})});
  try {
    verify_edge_clearance(c, square(60), 0.5, 1e-3);
    FAIL();
  } catch (const RoutingError& e) {
    EXPECT_NE(std::string(e.what()).find("net 7"), std::string::npos);
  }
}

// --- golden fixture ---------------------------------------------------------------

TEST(GoldenRouting, RingsAndPinsAreBijective) {
  const Routing& r = golden_routing();
  std::set<int> front_rings, front_pads, back_rings, back_pads;
  int front = 0, back = 0;
  for (const auto& n : r.nets) {
    if (n.side == Side::Front) {
      ++front;
      EXPECT_EQ(n.kind, NetKind::Ring);
      front_rings.insert(n.ring);
      front_pads.insert(n.pad);
    } else {
      ++back;
      if (n.kind == NetKind::Ring) back_rings.insert(n.ring);
      back_pads.insert(n.pad);
    }
  }
  EXPECT_EQ(front, 16);
  EXPECT_EQ(back, 16);
  EXPECT_EQ(front_rings.size(), 16u);
  EXPECT_EQ(*front_rings.begin(), 1);
  EXPECT_EQ(*front_rings.rbegin(), 16);
  EXPECT_EQ(front_pads.size(), 16u);
  EXPECT_EQ(back_rings, (std::set<int>{1, 2, 3, 4, 5}));
  EXPECT_EQ(back_pads.size(), 16u);
}

TEST(GoldenRouting, ThumbRowsLinkIntoThePalm) {
  const auto links = direct_connect(golden_layout(), {});
  int into_palm = 0;
  for (const auto& lk : links)
    if (lk.side == Side::Front && lk.from == "thumb_proximal" && lk.to == "palm") ++into_palm;
  EXPECT_EQ(into_palm, 4);
}

TEST(GoldenRouting, FingerColumnsLandOnPalmColumns) {
  const auto& l = golden_layout();
  std::map<int, Point2> palm_tops;
  for (const auto& t : l.electrodes.cols)
    if (l.regions[t.region].kind == layout::RegionKind::Palm) palm_tops[t.net] = t.line.vertices.back();
  int n = 0;
  std::set<int> nets;
  for (const auto& lk : direct_connect(l, {})) {
    if (lk.side != Side::Back || lk.to != "palm") continue;
    ++n;
    ASSERT_TRUE(palm_tops.count(lk.net)) << "net " << lk.net;
    EXPECT_LT(geom::dist(lk.line.vertices.back(), palm_tops[lk.net]), 1e-6);
    nets.insert(lk.net);
  }
  EXPECT_EQ(n, 8);
  EXPECT_EQ(nets.size(), 8u);
}

TEST(GoldenRouting, MiddleFingerLinksFollowTheColumns) {
  const auto& l = golden_layout();
  std::map<std::string, Point2> axis;
  for (const auto& r : l.regions) axis[r.id] = r.axis;
  int checked = 0;
  for (const auto& lk : direct_connect(l, {})) {
    if (lk.from.rfind("middle_", 0) != 0 || lk.to == "palm") continue;
    const Point2 d = geom::normalized(lk.line.vertices.front() - lk.line.vertices.back());
    const double deg = std::acos(std::clamp(geom::dot(d, axis[lk.from]), -1.0, 1.0)) * 180 / std::numbers::pi;
    EXPECT_LT(deg, 1.0) << lk.from << " -> " << lk.to;
    ++checked;
  }
  EXPECT_EQ(checked, 4);
}

TEST(GoldenRouting, IndependentAuditAgreesWithVerification) {
  const Routing& r = golden_routing();
  const auto& l = golden_layout();
  for (Side s : {Side::Front, Side::Back}) {
    const auto audit = audit_copper(r.copper(s), l.contour, 1e-3);
    const auto& rep = s == Side::Front ? r.front_clearance : r.back_clearance;
    EXPECT_GE(audit.min_clearance_mm, 0.1 - 1e-3) << side_name(s);
    EXPECT_NEAR(audit.min_clearance_mm, rep.min_clearance_mm, 1e-6) << side_name(s);
    EXPECT_TRUE(audit.disconnected.empty()) << side_name(s) << " net " << audit.disconnected.front();
    EXPECT_GE(audit.min_edge_mm, 0.5 - 1e-3) << side_name(s) << " net " << audit.edge_net;
  }
}

TEST(GoldenRouting, ShiftedRingIsCaught) {
  const Routing& r = golden_routing();
  const RoutingConfig cfg;
  int net = -1;
  for (const auto& n : r.nets)
    if (n.side == Side::Front && n.ring == 3) net = n.net;
  ASSERT_GE(net, 0);
  SideCopper c = r.copper(Side::Front);
  const auto moved = geom::offset_polygon(golden_layout().contour, -(cfg.ring_inset(3) + 0.15), 2e-4);
  ASSERT_EQ(moved.size(), 1u);
  c.traces.push_back({net, {moved.front().exterior, cfg.trace_width_mm}});
  const auto rep = verify_clearance(c, cfg.clearance_mm, cfg.clearance_tolerance_mm);
  EXPECT_FALSE(rep.ok);
  EXPECT_TRUE(rep.net_a == net || rep.net_b == net);
  EXPECT_FALSE(audit_copper(c, golden_layout().contour, 1e-3).min_clearance_mm >= 0.1 - 1e-3);
}

TEST(GoldenRouting, MissingLinkBreaksConnectivity) {
  Routing r = golden_routing();
  int net = -1;
  for (auto& n : r.nets)
    if (n.side == Side::Back && !n.links.empty() && net < 0) {
      n.links.erase(n.links.begin());
      net = n.net;
    }
  ASSERT_GE(net, 0);
  try {
    verify_connectivity(r.copper(Side::Back), 1e-3);
    FAIL();
  } catch (const RoutingError& e) {
    EXPECT_NE(std::string(e.what()).find("net " + std::to_string(net)), std::string::npos);
  }
  const auto audit = audit_copper(r.copper(Side::Back), golden_layout().contour, 1e-3);
  EXPECT_EQ(audit.disconnected, std::vector<int>{net});
}

TEST(GoldenRouting, RoutingIsDeterministic) {
  EXPECT_EQ(report_json(route(golden_layout(), {})), report_json(golden_routing()));
}

TEST(GoldenRouting, LeftHandRoutes) {
  const auto l = layout::synthesize(flexglove::testing::mirrored(golden_hand()), {});
  Routing r;
  ASSERT_NO_THROW(r = route(l, {}));
  EXPECT_TRUE(r.front_clearance.ok);
  EXPECT_TRUE(r.back_clearance.ok);
}
