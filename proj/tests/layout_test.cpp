#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "flexglove/error.hpp"
#include "flexglove/layout.hpp"
#include "flexglove/readout.hpp"
#include "support/fixture.hpp"
#include "support/raster_oracle.hpp"

using namespace flexglove;
using namespace flexglove::layout;
using flexglove::testing::distance_to_rings;
using flexglove::testing::golden_hand;
using flexglove::testing::inside_rings;

namespace {

const Layout& golden_layout() {
  static const Layout l = synthesize(golden_hand(), {});
  return l;
}

std::vector<geom::Ring> rings_of(const Polygon& p) {
  std::vector<geom::Ring> r{p.exterior};
  r.insert(r.end(), p.holes.begin(), p.holes.end());
  return r;
}

Point2 dir(const Polyline& l) { return geom::normalized(l.vertices.back() - l.vertices.front()); }

double seg_dist(Point2 p, const Polyline& l) {
  return geom::point_segment_distance(p, l.vertices.front(), l.vertices.back());
}

SensingRegion square_region(Grid g) {
  SensingRegion r;
  r.id = "square";
  r.outline.exterior = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  r.axis = {0, 1};
  r.lateral = {1, 0};
  r.origin = {5, 5};
  r.grid = g;
  return r;
}

}  // namespace

// --- segment rectangles -----------------------------------------------------

TEST(SegmentRectangle, AxisAlignedIsLengthByHalfLength) {
  const SensingRegion r = segment_rectangle({0, 0}, {20, 0}, "seg", 2.0);
  EXPECT_NEAR(geom::area(r.outline), 200.0, 1e-9);
  const geom::Box b = geom::bounds(r.outline);
  EXPECT_NEAR(b.min.x, 0.0, 1e-9);
  EXPECT_NEAR(b.max.x, 20.0, 1e-9);
  EXPECT_NEAR(b.min.y, -5.0, 1e-9);
  EXPECT_NEAR(b.max.y, 5.0, 1e-9);
}

TEST(SegmentRectangle, DiagonalCornersMatchHandComputation) {
  const SensingRegion r = segment_rectangle({0, 0}, {10, 10}, "seg", 2.0);
  const double L = std::sqrt(200.0);
  const Point2 a{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)}, p{-a.y, a.x};
  const std::vector<Point2> expected = {p * (L / 4), p * (-L / 4), Point2{10, 10} + p * (L / 4),
                                        Point2{10, 10} + p * (-L / 4)};
  for (const Point2& e : expected) {
    double best = 1e9;
    for (const Point2& q : r.outline.exterior) best = std::min(best, geom::dist(e, q));
    EXPECT_LT(best, 1e-6);
  }
}

TEST(SegmentRectangle, DegenerateSegmentIsRejected) {
  try {
    segment_rectangle({0, 0}, {1, 0}, "index_distal", 2.0);
    FAIL();
  } catch (const SynthesisError& e) {
    EXPECT_NE(std::string(e.what()).find("index_distal"), std::string::npos);
  }
}

// --- electrode sampling -------------------------------------------------------

TEST(RegionElectrodes, SquareThreeByTwo) {
  const RegionElectrodes e = region_electrodes(square_region({3, 2}), {});
  ASSERT_EQ(e.rows.size(), 3u);
  ASSERT_EQ(e.cols.size(), 2u);
  const double ry[] = {7.5, 5.0, 2.5};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(e.rows[i].vertices.front().y, ry[i], 1e-9);
    EXPECT_NEAR(e.rows[i].vertices.back().y, ry[i], 1e-9);
  }
  EXPECT_NEAR(e.cols[0].vertices.front().x, 10.0 / 3, 1e-9);
  EXPECT_NEAR(e.cols[1].vertices.front().x, 20.0 / 3, 1e-9);
  ASSERT_EQ(e.taxels.size(), 6u);
  EXPECT_NEAR(e.taxels[0].x, 10.0 / 3, 1e-9);
  EXPECT_NEAR(e.taxels[0].y, 7.5, 1e-9);
}

TEST(RegionElectrodes, SingleTaxelIsCentred) {
  const RegionElectrodes e = region_electrodes(square_region({1, 1}), {});
  ASSERT_EQ(e.taxels.size(), 1u);
  EXPECT_NEAR(e.taxels[0].x, 5.0, 1e-9);
  EXPECT_NEAR(e.taxels[0].y, 5.0, 1e-9);
}

TEST(RegionElectrodes, DenseGridFailsWithRegionName) {
  try {
    region_electrodes(square_region({40, 2}), {});
    FAIL();
  } catch (const SynthesisError& e) {
    EXPECT_NE(std::string(e.what()).find("square"), std::string::npos);
  }
}

// --- golden fixture -----------------------------------------------------------

TEST(GoldenLayout, CountsMatchDefaultResolution) {
  const Layout& l = golden_layout();
  EXPECT_EQ(l.regions.size(), 15u);
  EXPECT_EQ(l.electrodes.taxels.size(), 169u);
  EXPECT_EQ(l.row_nets, 16);
  EXPECT_EQ(l.col_nets, 16);
  std::set<std::pair<int, int>> pairs;
  for (const Taxel& t : l.electrodes.taxels) pairs.insert({t.row_net, t.col_net});
  EXPECT_EQ(pairs.size(), l.electrodes.taxels.size()) << "two taxels share a row/column crossing";
}

TEST(GoldenLayout, PalmPolygonIsConvexHeptagonAroundLandmarks) {
  const auto& h = golden_hand();
  const Polygon p = palm_polygon(h, {});
  ASSERT_EQ(p.exterior.size(), 7u);
  const auto& v = p.exterior;
  int sign = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = geom::cross(v[(i + 1) % 7] - v[i], v[(i + 2) % 7] - v[(i + 1) % 7]);
    const int s = c > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    EXPECT_EQ(s, sign) << "reflex vertex at " << (i + 1) % 7;
  }
  for (int k : {0, 1, 5, 9, 13, 17}) {
    const Point2 q = h.landmarks[k];
    EXPECT_TRUE(inside_rings({v}, q) || distance_to_rings({v}, q) < 1e-6) << "landmark " << k;
  }
}

TEST(GoldenLayout, RegionsDoNotOverlap) {
  const Layout& l = golden_layout();
  const geom::Box b = geom::bounds(l.contour);
  int overlaps = 0;
  for (double y = b.min.y; y < b.max.y; y += 0.25)
    for (double x = b.min.x; x < b.max.x; x += 0.25) {
      int hits = 0;
      for (const auto& r : l.regions) hits += inside_rings(rings_of(r.outline), {x, y}) ? 1 : 0;
      overlaps += hits > 1 ? 1 : 0;
    }
  EXPECT_EQ(overlaps, 0);
}

TEST(GoldenLayout, ElectrodesStayInsideEdgeClearance) {
  const Layout& l = golden_layout();
  const auto contour = rings_of(l.contour);
  auto check = [&](const Trace& t) {
    const Point2 a = t.line.vertices.front(), b = t.line.vertices.back();
    const int steps = std::max(2, static_cast<int>(geom::dist(a, b) / 0.1));
    for (int i = 0; i <= steps; ++i) {
      const Point2 p = a + (b - a) * (static_cast<double>(i) / steps);
      ASSERT_TRUE(inside_rings(contour, p));
      ASSERT_GE(distance_to_rings(contour, p), 0.5 + t.line.width / 2);
    }
  };
  for (const auto& t : l.electrodes.rows) check(t);
  for (const auto& t : l.electrodes.cols) check(t);
}

TEST(GoldenLayout, EveryTaxelSitsOnOneRowAndOneColumn) {
  const Layout& l = golden_layout();
  for (const Taxel& t : l.electrodes.taxels) {
    int rows = 0, cols = 0;
    for (const auto& r : l.electrodes.rows)
      if (seg_dist(t.p, r.line) < 1e-6) {
        ++rows;
        EXPECT_EQ(r.net, t.row_net);
      }
    for (const auto& c : l.electrodes.cols)
      if (seg_dist(t.p, c.line) < 1e-6) {
        ++cols;
        EXPECT_EQ(c.net, t.col_net);
      }
    EXPECT_EQ(rows, 1);
    EXPECT_EQ(cols, 1);
  }
}

TEST(GoldenLayout, RowsParallelAndColumnsPerpendicular) {
  const Layout& l = golden_layout();
  for (std::size_t ri = 0; ri < l.regions.size(); ++ri) {
    std::vector<Point2> rows, cols;
    for (const auto& t : l.electrodes.rows)
      if (t.region == ri) rows.push_back(dir(t.line));
    for (const auto& t : l.electrodes.cols)
      if (t.region == ri) cols.push_back(dir(t.line));
    ASSERT_FALSE(rows.empty());
    ASSERT_FALSE(cols.empty());
    for (const Point2& r : rows) {
      EXPECT_LT(std::abs(std::asin(std::clamp(geom::cross(r, rows[0]), -1.0, 1.0))), 1e-9) << l.regions[ri].id;
      for (const Point2& c : cols)
        EXPECT_LT(std::abs(std::asin(std::clamp(geom::dot(r, c), -1.0, 1.0))), 1e-9) << l.regions[ri].id;
    }
  }
}

TEST(GoldenLayout, ThumbRowsJoinLowestPalmRows) {
  const Layout& l = golden_layout();
  std::set<int> nets;
  for (const auto& t : l.electrodes.rows)
    if (l.regions[t.region].kind == RegionKind::Thumb) nets.insert(t.net);
  EXPECT_EQ(nets, (std::set<int>{3, 4, 5, 6}));
}

TEST(GoldenLayout, SynthesisIsDeterministic) {
  const Layout again = synthesize(golden_hand(), {});
  EXPECT_EQ(to_json(again), to_json(golden_layout()));
}

TEST(GoldenLayout, JsonFeedsTheReadoutTaxelMap) {
  const Layout& l = golden_layout();
  const readout::TaxelMap m = readout::parse_taxel_map(to_json(l));
  EXPECT_EQ(m.rows, 16);
  EXPECT_EQ(m.cols, 16);
  EXPECT_EQ(m.regions.size(), l.regions.size());
  std::size_t n = 0;
  for (const auto& [id, cells] : m.regions) n += cells.size();
  EXPECT_EQ(n, 169u);
}

TEST(GoldenLayout, MirroredHandGivesMirroredTaxels) {
  const auto& h = golden_hand();
  const Layout a = golden_layout();
  const Layout b = synthesize(flexglove::testing::mirrored(h), {});
  ASSERT_EQ(a.electrodes.taxels.size(), b.electrodes.taxels.size());
  std::map<std::tuple<std::string, int, int>, Point2> pos;
  for (const Taxel& t : b.electrodes.taxels) pos[{b.regions[t.region].id, t.row, t.col}] = t.p;
  for (const Taxel& t : a.electrodes.taxels) {
    const auto it = pos.find({a.regions[t.region].id, t.row, t.col});
    ASSERT_NE(it, pos.end());
    EXPECT_LT(geom::dist(flexglove::testing::mirror_point(h, t.p), it->second), 1e-3) << a.regions[t.region].id;
  }
}
