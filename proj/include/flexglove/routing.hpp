#pragma once

// Connects every net to a connector pad: direct links between neighbouring
// regions, contour-following rings for the rest, then clearance checks.
//
// Front copper carries the row nets, back copper the column nets. Ring k
// (1-based) is the contour inset by edge_clearance + k * ring_pitch.

#include <string>
#include <vector>

#include "flexglove/geometry.hpp"
#include "flexglove/layout.hpp"

namespace flexglove::routing {

using geom::Point2;
using geom::Polygon;
using geom::Polyline;
using geom::Ring;

enum class Side { Front, Back };
const char* side_name(Side s);

struct ConnectorConfig {
  int pads = 16;
  double pitch_mm = 0.5;
  double pad_width_mm = 0.3;
  double pad_length_mm = 1.5;
  /// Pad edge nearest the wrist, measured from the lowest contour point.
  double depth_mm = 4.25;
  /// Straight lead-in above a pad for fanned nets.
  double stub_mm = 1.0;
  double anchor_width_mm = 1.0;
  double anchor_length_mm = 1.5;
  /// Gap between the outermost pad and its anchor.
  double anchor_gap_mm = 0.6;
};

struct RoutingConfig {
  double edge_clearance_mm = 0.5;
  double ring_pitch_mm = 0.2;
  int rings = 16;
  double trace_width_mm = 0.1;
  double clearance_mm = 0.1;
  double clearance_tolerance_mm = 1e-3;
  double front_connector_offset_mm = 6.0;
  /// Height of the bend point above a palm column when a straight finger
  /// link would leave the contour.
  double link_bend_mm = 1.5;
  ConnectorConfig connector;

  double ring_inset(int k) const { return edge_clearance_mm + ring_pitch_mm * k; }
};

// --- connector ---------------------------------------------------------------

struct Pad {
  int index = 0;  // 0-based, ascending along n
  Polygon shape;
  Point2 center;
  Point2 low;   // wrist-side edge midpoint
  Point2 high;  // palm-side edge midpoint
};

struct Connector {
  Side side = Side::Front;
  Point2 w, n;
  std::vector<Pad> pads;
  std::vector<Polygon> anchors;
};

/// Footprint centred at `lateral` (coordinate along n) at the wrist end.
Connector place_connector(const Polygon& contour, Point2 w, Point2 n, double lateral, Side side,
                          const RoutingConfig& cfg);

// --- rings ---------------------------------------------------------------------

/// Closed rings 1..cfg.rings (index 0 holds ring 1).
std::vector<Ring> build_rings(const Polygon& contour, const RoutingConfig& cfg);

/// Ring opened at its lowest crossing (along w) with the line through `gap`
/// and traversed so the path first heads along `toward`.
std::vector<Point2> open_ring(const Ring& ring, Point2 gap, Point2 w, Point2 toward);

// --- net graph -----------------------------------------------------------------

struct Link {
  Side side = Side::Front;
  int net = 0;
  Polyline line;
  std::string from, to;  // region ids
};

/// Finger column chains joined to palm columns, thumb row chains joined to
/// the lowest palm rows.
std::vector<Link> direct_connect(const layout::Layout& l, const RoutingConfig& cfg);

/// A net still needing a ring: its electrode traces eligible for drops.
struct RingNet {
  int net = 0;
  std::vector<Polyline> segments;
};

struct RingRoute {
  int net = 0;
  int ring = 0;  // 1-based
  int pad = 0;   // 0-based
  Point2 terminal;
  Point2 drop_point;
  Polyline main;                // pad -> ring -> drop -> terminal
  std::vector<Polyline> arcs;   // ring arcs bridging neighbouring segments
};

/// Orders nets by how far their first electrode endpoint lies along the
/// ring from the connector (farthest -> ring 1), assigns pads from `slots`
/// (ascending along n) so rings never cross at the connector, and cuts each
/// ring down to the arcs it uses.
std::vector<RingRoute> assign_and_drop(const std::vector<RingNet>& nets, const std::vector<Ring>& rings,
                                       const Connector& conn, const std::vector<int>& slots, Point2 toward,
                                       const RoutingConfig& cfg);

// --- verification --------------------------------------------------------------

struct CopperTrace {
  int net = 0;
  Polyline line;
};
struct CopperArea {
  int net = 0;
  Polygon shape;
};
struct SideCopper {
  std::vector<CopperTrace> traces;
  std::vector<CopperArea> areas;
};

struct ClearanceReport {
  bool ok = true;
  double min_clearance_mm = 0.0;  // +inf with fewer than two nets
  int net_a = -1, net_b = -1;
  Point2 where;
  int violations = 0;
};

/// Pairwise edge-to-edge distance between copper of distinct nets.
ClearanceReport verify_clearance(const SideCopper& copper, double min_clearance_mm, double tolerance_mm);

/// Throws RoutingError naming the first net whose copper is not a single
/// component touching exactly one pad (areas of that net).
void verify_connectivity(const SideCopper& copper, double tolerance_mm);

/// Throws RoutingError when copper comes closer than `edge_mm` to the outline.
void verify_edge_clearance(const SideCopper& copper, const Polygon& contour, double edge_mm, double tolerance_mm);

// --- full routing ----------------------------------------------------------------

enum class NetKind { Ring, Direct };

struct RoutedNet {
  Side side = Side::Front;
  int net = 0;
  NetKind kind = NetKind::Ring;
  int ring = 0;  // 0 for direct nets
  int pad = 0;
  std::vector<Polyline> electrodes;
  std::vector<Polyline> links;
  std::vector<Polyline> routes;
  double routed_length_mm() const;
};

struct Routing {
  std::vector<Ring> rings;
  Connector front, back;
  std::vector<RoutedNet> nets;  // front nets by id, then back nets by id
  ClearanceReport front_clearance, back_clearance;

  SideCopper copper(Side s) const;
  const Connector& connector(Side s) const { return s == Side::Front ? front : back; }
};

/// Runs every stage, then the verification passes unless `verify` is false
/// (clearance is still measured and reported).
Routing route(const layout::Layout& l, const RoutingConfig& cfg, bool verify = true);

std::string report_text(const Routing& r);
std::string report_json(const Routing& r);

}  // namespace flexglove::routing
