#pragma once

// Fabrication outputs: SVG previews, RS-274X Gerbers, connector placement,
// manifest and bill of materials. Everything renders to bytes in memory;
// callers decide where files land.

#include <string>
#include <vector>

#include "flexglove/board.hpp"

namespace flexglove::fab {

using board::BoardDesign;
using geom::Point2;

struct ExportConfig {
  std::string hand_id = "hand";
  /// Page area in mm; every emitted coordinate must lie within it plus the
  /// margin. An empty box disables the check.
  geom::Box page{};
  double page_margin_mm = 5.0;
  double edge_line_width_mm = 0.1;
  double silk_line_width_mm = 0.15;
  double silk_clearance_mm = 0.5;  // courtyard gap around connector copper
  double pin1_mark_mm = 0.4;
};

// --- layers -----------------------------------------------------------------------

enum class Layer { Copper, Coverlay, Adhesive, EdgeCuts, Silkscreen };
const char* layer_name(Layer l);
/// Board-house extension: gtl/gbl, gts/gbs, gto/gbo, gm2, gm1.
const char* gerber_extension(Layer l, routing::Side side);

/// Connector courtyard and pin-1 mark for the silkscreen layer.
struct Silkscreen {
  std::vector<geom::Polyline> lines;
  std::vector<Point2> marks;  // round flashes, pin1_mark_mm across
};
Silkscreen silkscreen(const BoardDesign& d, const ExportConfig& cfg);

struct OutputFile {
  std::string name;  // <hand-id>_<side>_<layer>.<ext>
  std::string side;  // front, back or empty for shared files
  std::string kind;  // gerber, svg, csv, json, text
  std::string layer;
  std::string bytes;
};

/// One RS-274X file (mm, 4.6). Throws ExportError for out-of-range geometry.
std::string gerber(const BoardDesign& d, Layer layer, const ExportConfig& cfg);
std::vector<OutputFile> gerber_set(const BoardDesign& d, const ExportConfig& cfg);

/// SVG 1.1 preview in mm with one group per layer. The SVG y axis points
/// down, so y is negated.
std::string svg(const BoardDesign& d, const ExportConfig& cfg);

std::string placement_csv(const board::Boards& b, const ExportConfig& cfg);

// --- bill of materials -------------------------------------------------------------

struct BomLine {
  std::string item;
  double quantity = 1.0;
  double unit_cost_usd = 0.0;
};

struct CostTable {
  std::string currency = "USD";
  std::vector<BomLine> lines;
};

/// Per-glove costs matching the published breakdown.
CostTable default_costs();
CostTable parse_costs(const std::string& json_text);

/// Line cost and total in whole cents, so the total is the exact sum of
/// the printed lines.
long long line_cents(const BomLine& l);
long long total_cents(const CostTable& t);

std::string bom_csv(const CostTable& t);
std::string bom_text(const CostTable& t);

// --- package -----------------------------------------------------------------------

/// Every fabrication file for both boards plus the manifest. Extra files
/// (reports) are listed in the manifest after the generated ones.
std::vector<OutputFile> package(const board::Boards& b, const CostTable& costs, const ExportConfig& cfg,
                                std::vector<OutputFile> extra = {});

std::string manifest_json(const std::vector<OutputFile>& files, const ExportConfig& cfg);

}  // namespace flexglove::fab
