#pragma once

// Coverlay, adhesive and edge-cut layers, assembled into one board per side.
//
// The coverlay mask is the set of openings in the coverlay film: copper is
// exposed inside it. Adhesive fills the rest of the outline. Inner cuts are
// slits inside the openings; they pass through both boards, so both share
// one cut set kept clear of front and back copper alike.

#include <string>
#include <vector>

#include "flexglove/geometry.hpp"
#include "flexglove/layout.hpp"
#include "flexglove/routing.hpp"

namespace flexglove::board {

using geom::Point2;
using geom::Polygon;
using geom::PolygonSet;
using routing::Side;

struct BoardConfig {
  double coverlay_inset_mm = 6.0;
  double cut_clearance_mm = 0.5;
  double sliver_area_mm2 = 0.5;
  double kerf_mm = 0.1;
  /// Arc tolerance for stroked copper and its clearance zone.
  double copper_chord_tol_mm = 5e-4;
  double audit_tolerance_mm = 1e-3;
};

struct Footprint {
  Point2 position;            // centre of the pad row
  double rotation_deg = 0.0;  // pad long axis along w; 0 when w is +y
  std::vector<routing::Pad> pads;
  std::vector<Polygon> anchors;
};

struct BoardDesign {
  Side side = Side::Front;
  int nets = 0;
  /// Centerlines and pads; spare pads and anchors carry their own net ids.
  routing::SideCopper copper_features;
  PolygonSet copper;  // stroked and unioned
  PolygonSet coverlay_mask;
  PolygonSet adhesive;
  Polygon outline;
  PolygonSet inner_cuts;
  Footprint connector;
};

PolygonSet coverlay_mask(const std::vector<layout::SensingRegion>& regions, const Polygon& contour,
                         const BoardConfig& cfg);

/// contour - mask; an empty result is legal.
PolygonSet adhesive_layer(const Polygon& contour, const PolygonSet& mask);

/// Copper dilated by `margin` (traces by half their width plus margin).
PolygonSet copper_zone(const routing::SideCopper& copper, double margin, double chord_tol);

PolygonSet inner_cuts(const PolygonSet& mask, const routing::SideCopper& copper, const BoardConfig& cfg);

/// Front and back copper merged, for cut construction and audits.
routing::SideCopper all_copper(const routing::Routing& r);

struct Boards {
  BoardDesign front, back;
  const BoardDesign& side(Side s) const { return s == Side::Front ? front : back; }
};

/// Builds every layer for both sides and checks the board invariants.
Boards assemble(const layout::Layout& l, const routing::Routing& r, const BoardConfig& cfg);

/// Throws LayerError naming the first violated invariant of either side.
void check_invariants(const Boards& b, const layout::Layout& l, const BoardConfig& cfg);

std::string to_json(const BoardDesign& d);

}  // namespace flexglove::board
