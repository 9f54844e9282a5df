#pragma once

// Sensing-region synthesis and electrode placement.
//
// Frame conventions: w is the palm axis (wrist -> middle MCP), n is the
// lateral unit pointing from the thumb side to the little-finger side.
// Rows are front-side nets, columns back-side nets.
//
// Net scheme with the default resolutions (16 row nets, 16 column nets):
//   rows 0..6    palm rows, distal to proximal; thumb rows join rows 3..6
//   rows 7..15   finger levels 3*segment + row, shared by all four fingers
//   cols 0..10   palm columns in lateral order; finger columns join these
//   cols 11..15  thumb columns, distal segment first

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "flexglove/geometry.hpp"
#include "flexglove/hand_capture.hpp"

namespace flexglove::layout {

using geom::Point2;
using geom::Polygon;
using geom::Polyline;

enum class RegionKind { FingerSegment, Thumb, Palm };
const char* kind_name(RegionKind k);

struct Grid {
  int rows = 1;
  int cols = 1;
  int count() const { return rows * cols; }
};

struct ResolutionConfig {
  Grid finger_pad{3, 2};
  Grid thumb_top{4, 3};
  Grid thumb_mid{4, 2};
  Grid palm{7, 11};
};

/// Outward projection fraction of each palm vertex toward the contour.
struct PalmProjection {
  double wrist = 0.85;       // landmark 0 toward the thumb side
  double ulnar = 0.85;       // landmark 0 toward the little-finger side
  double little_mcp = 0.85;  // landmark 17, lateral
  double ring_mcp = 0.0;     // landmark 13, distal
  double middle_mcp = 0.0;   // landmark 9, distal
  double index_mcp = 0.85;   // landmark 5, lateral
  double thumb_mcp = 0.0;    // landmark 2, toward the thumb side
};

struct LayoutConfig {
  ResolutionConfig resolution;
  /// Proximal finger region length as a fraction of the MCP->PIP segment,
  /// index..little, anchored at the PIP end.
  std::array<double, 4> mcp_pip_ratio{0.45, 0.46, 0.46, 0.44};
  PalmProjection palm_projection;
  double min_segment_mm = 2.0;
  double trace_width_mm = 0.1;
  double min_pitch_mm = 0.3;
  /// Regions are clipped to the contour inset by this much, leaving room
  /// for the routing rings.
  double routing_band_mm = 4.0;
  double region_gap_mm = 1.0;
  /// Palm columns stop this far past the last palm row.
  double palm_column_tail_mm = 1.0;
};

struct SensingRegion {
  std::string id;
  RegionKind kind = RegionKind::FingerSegment;
  int digit = 0;    // 0..3 fingers index..little, 4 thumb, -1 palm
  int segment = 0;  // 0 distal .. 2 proximal
  Polygon outline;
  Grid grid;
  Point2 axis;      // unit, pointing distally
  Point2 lateral;   // unit, perpendicular to axis, toward the little-finger side
  Point2 origin;    // segment midpoint
};

struct Trace {
  Polyline line;
  int net = 0;
  std::size_t region = 0;  // index into Layout::regions
  int index = 0;           // row or column index within the region
};

struct Taxel {
  Point2 p;
  std::size_t region = 0;
  int row = 0;
  int col = 0;
  int row_net = 0;
  int col_net = 0;
};

struct ElectrodeSet {
  std::vector<Trace> rows;
  std::vector<Trace> cols;
  std::vector<Taxel> taxels;
};

struct HandFrame {
  Point2 w;
  Point2 n;
  Point2 wrist;  // landmark 0
};

HandFrame hand_frame(const std::array<Point2, 21>& landmarks);

struct Layout {
  HandFrame frame;
  Polygon contour;
  std::vector<SensingRegion> regions;  // fingers (distal first), thumb, palm
  ElectrodeSet electrodes;
  int row_nets = 0;
  int col_nets = 0;
};

/// Unclipped rectangle for a skeleton segment, length L and width L/2.
SensingRegion segment_rectangle(Point2 proximal, Point2 distal, const std::string& id, double min_segment_mm);

std::vector<SensingRegion> finger_regions(const capture::HandModel& hand, const LayoutConfig& cfg);
std::vector<SensingRegion> thumb_regions(const capture::HandModel& hand, const LayoutConfig& cfg);
/// The raw 7-vertex palm polygon before contour clipping.
Polygon palm_polygon(const capture::HandModel& hand, const LayoutConfig& cfg);
SensingRegion palm_region(const capture::HandModel& hand, const LayoutConfig& cfg);

/// Clips every region to the routing-band inset and resolves overlaps:
/// the palm wins, then distal segments over proximal ones.
void resolve_regions(std::vector<SensingRegion>& regions, const Polygon& contour, const LayoutConfig& cfg);

/// Row/column traces and taxels for one region in its own index space.
struct RegionElectrodes {
  std::vector<Polyline> rows;  // distal first (thumb: lateral order)
  std::vector<Polyline> cols;  // lateral order (thumb: distal first)
  std::vector<Point2> taxels;  // row-major
};
RegionElectrodes region_electrodes(const SensingRegion& r, const LayoutConfig& cfg, bool trim_cols_to_rows = false);

ElectrodeSet place_electrodes(const std::vector<SensingRegion>& regions, const LayoutConfig& cfg);

/// Full synthesis: regions, clipping, electrodes.
Layout synthesize(const capture::HandModel& hand, const LayoutConfig& cfg);

std::string to_json(const Layout& l);

}  // namespace flexglove::layout
