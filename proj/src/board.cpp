#include "flexglove/board.hpp"

#include <cmath>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <numbers>
#include <set>

#include "flexglove/error.hpp"

namespace flexglove::board {

using geom::BoolOp;
using layout::RegionKind;

namespace {

constexpr int kFirstAuxNet = 1000;  // anchors and spare pads

double overlap_area(const PolygonSet& a, const PolygonSet& b) {
  if (a.empty() || b.empty()) return 0.0;
  return geom::area(geom::boolean(a, b, BoolOp::Intersection));
}

}  // namespace

PolygonSet coverlay_mask(const std::vector<layout::SensingRegion>& regions, const Polygon& contour,
                         const BoardConfig& cfg) {
  const layout::SensingRegion* palm = nullptr;
  PolygonSet parts;
  for (const auto& r : regions) {
    if (r.kind == RegionKind::Palm) {
      palm = &r;
      continue;
    }
    parts.push_back(geom::convex_hull(r.outline.exterior));
  }
  const PolygonSet inset = geom::offset({contour}, -cfg.coverlay_inset_mm);
  if (palm) {
    bool open = false;
    for (const auto& p : inset) open = open || geom::contains(p, palm->origin);
    if (!open)
      throw LayerError(fmt::format("coverlay inset {:.2f} mm closes the palm opening", cfg.coverlay_inset_mm));
  }
  parts.insert(parts.end(), inset.begin(), inset.end());
  return geom::boolean(geom::unite(parts), {contour}, BoolOp::Intersection);
}

PolygonSet adhesive_layer(const Polygon& contour, const PolygonSet& mask) {
  if (mask.empty()) return {contour};
  return geom::boolean({contour}, mask, BoolOp::Difference);
}

PolygonSet copper_zone(const routing::SideCopper& copper, double margin, double chord_tol) {
  // one buffer per trace: a single multi-line buffer is far slower once the
  // dilated ring traces overlap each other
  PolygonSet parts;
  for (const auto& t : copper.traces) {
    const auto z = geom::dilate_polylines(std::span(&t.line, 1), t.line.width / 2.0 + margin, chord_tol);
    parts.insert(parts.end(), z.begin(), z.end());
  }
  for (const auto& a : copper.areas) {
    if (margin > 0.0) {
      const auto z = geom::offset_polygon(a.shape, margin, chord_tol);
      parts.insert(parts.end(), z.begin(), z.end());
    } else {
      parts.push_back(a.shape);
    }
  }
  return geom::unite(parts);
}

PolygonSet inner_cuts(const PolygonSet& mask, const routing::SideCopper& copper, const BoardConfig& cfg) {
  if (mask.empty()) return {};
  PolygonSet free = mask;
  if (!copper.traces.empty() || !copper.areas.empty())
    free = geom::boolean(mask, copper_zone(copper, cfg.cut_clearance_mm, cfg.copper_chord_tol_mm),
                         BoolOp::Difference);
  PolygonSet kept;
  for (auto& p : free)
    if (geom::area(p) >= cfg.sliver_area_mm2) kept.push_back(std::move(p));
  PolygonSet cuts;
  for (const auto& p : kept)
    for (auto& q : geom::offset_polygon(p, -cfg.kerf_mm, cfg.copper_chord_tol_mm)) cuts.push_back(std::move(q));
  std::sort(cuts.begin(), cuts.end(), [](const Polygon& a, const Polygon& b) {
    const auto ba = geom::bounds(a), bb = geom::bounds(b);
    return ba.min.y != bb.min.y ? ba.min.y < bb.min.y : ba.min.x < bb.min.x;
  });
  return cuts;
}

routing::SideCopper all_copper(const routing::Routing& r) {
  routing::SideCopper c = r.copper(Side::Front);
  routing::SideCopper back = r.copper(Side::Back);
  c.traces.insert(c.traces.end(), back.traces.begin(), back.traces.end());
  c.areas.insert(c.areas.end(), back.areas.begin(), back.areas.end());
  return c;
}

Boards assemble(const layout::Layout& l, const routing::Routing& r, const BoardConfig& cfg) {
  const PolygonSet mask = coverlay_mask(l.regions, l.contour, cfg);
  const PolygonSet adhesive = adhesive_layer(l.contour, mask);
  const PolygonSet cuts = inner_cuts(mask, all_copper(r), cfg);

  Boards b;
  for (Side side : {Side::Front, Side::Back}) {
    BoardDesign& d = side == Side::Front ? b.front : b.back;
    d.side = side;
    d.outline = l.contour;
    d.copper_features = r.copper(side);
    std::set<int> nets;
    for (const auto& t : d.copper_features.traces) nets.insert(t.net);
    d.nets = static_cast<int>(std::count_if(nets.begin(), nets.end(), [](int n) { return n < kFirstAuxNet; }));
    d.copper = copper_zone(d.copper_features, 0.0, cfg.copper_chord_tol_mm);
    d.coverlay_mask = mask;
    d.adhesive = adhesive;
    d.inner_cuts = cuts;

    const routing::Connector& c = r.connector(side);
    Point2 centre;
    for (const auto& p : c.pads) centre = centre + p.center;
    d.connector.position = centre * (1.0 / static_cast<double>(c.pads.size()));
    d.connector.rotation_deg = std::atan2(c.w.y, c.w.x) * 180.0 / std::numbers::pi - 90.0;
    d.connector.pads = c.pads;
    d.connector.anchors = c.anchors;
  }
  check_invariants(b, l, cfg);
  return b;
}

void check_invariants(const Boards& b, const layout::Layout& l, const BoardConfig& cfg) {
  const double tol = cfg.audit_tolerance_mm;
  if (b.front.outline.exterior != b.back.outline.exterior) throw LayerError("front and back outlines differ");
  const PolygonSet keepout = geom::offset({b.front.outline}, -(0.5 - tol));
  for (const BoardDesign* d : {&b.front, &b.back}) {
    const char* side = routing::side_name(d->side);
    const double outside = geom::area(geom::boolean(d->copper, keepout, BoolOp::Difference));
    if (outside > 1e-6)
      throw LayerError(fmt::format("{}: {:.6f} mm^2 of copper lies within 0.5 mm of the outline", side, outside));

    if (!d->inner_cuts.empty()) {
      const PolygonSet zone = copper_zone(d->copper_features, cfg.cut_clearance_mm - tol, cfg.copper_chord_tol_mm);
      if (overlap_area(d->inner_cuts, zone) > 0.0)
        throw LayerError(
            fmt::format("{}: an inner cut comes within {} mm of copper", side, cfg.cut_clearance_mm));
    }

    if (overlap_area(d->adhesive, d->coverlay_mask) > 1e-6)
      throw LayerError(fmt::format("{}: adhesive overlaps the coverlay openings", side));

    const double a_contour = geom::area(d->outline);
    const double a_mask = overlap_area(d->coverlay_mask, {d->outline});
    if (std::abs(geom::area(d->adhesive) + a_mask - a_contour) > 1e-3 * a_contour)
      throw LayerError(fmt::format("{}: adhesive and coverlay openings do not tile the outline", side));

    for (const auto& t : l.electrodes.taxels)
      if (!geom::contains(d->coverlay_mask, t.p))
        throw LayerError(fmt::format("{}: taxel at ({:.3f}, {:.3f}) is covered by coverlay", side, t.p.x, t.p.y));
  }
}

std::string to_json(const BoardDesign& d) {
  using nlohmann::ordered_json;
  auto ring = [](const geom::Ring& r) {
    ordered_json a = ordered_json::array();
    for (Point2 p : r) a.push_back({p.x, p.y});
    return a;
  };
  auto poly = [&](const Polygon& p) {
    ordered_json a = ordered_json::array();
    a.push_back(ring(p.exterior));
    for (const auto& h : p.holes) a.push_back(ring(h));
    return a;
  };
  auto set = [&](const PolygonSet& ps) {
    ordered_json a = ordered_json::array();
    for (const auto& p : ps) a.push_back(poly(p));
    return a;
  };

  ordered_json j;
  j["side"] = routing::side_name(d.side);
  j["nets"] = d.nets;
  j["outline"] = poly(d.outline);
  ordered_json traces = ordered_json::array();
  for (const auto& t : d.copper_features.traces)
    traces.push_back({{"net", t.net}, {"width", t.line.width}, {"path", ring(t.line.vertices)}});
  j["traces"] = std::move(traces);
  ordered_json areas = ordered_json::array();
  for (const auto& a : d.copper_features.areas) areas.push_back({{"net", a.net}, {"shape", poly(a.shape)}});
  j["pads"] = std::move(areas);
  j["copper"] = set(d.copper);
  j["coverlay_mask"] = set(d.coverlay_mask);
  j["adhesive"] = set(d.adhesive);
  j["inner_cuts"] = set(d.inner_cuts);
  ordered_json conn;
  conn["position"] = {d.connector.position.x, d.connector.position.y};
  conn["rotation_deg"] = d.connector.rotation_deg;
  ordered_json pads = ordered_json::array();
  for (const auto& p : d.connector.pads)
    pads.push_back({{"pin", p.index + 1}, {"center", {p.center.x, p.center.y}}, {"shape", poly(p.shape)}});
  conn["pads"] = std::move(pads);
  ordered_json anchors = ordered_json::array();
  for (const auto& a : d.connector.anchors) anchors.push_back(poly(a));
  conn["anchors"] = std::move(anchors);
  j["connector"] = std::move(conn);
  return j.dump();
}

}  // namespace flexglove::board
