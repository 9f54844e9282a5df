#include "flexglove/layout.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <nlohmann/json.hpp>

#include "flexglove/error.hpp"

namespace flexglove::layout {

namespace lm = capture::lm;
using geom::dot;
using geom::normalized;
using geom::perp;

namespace {

constexpr const char* kFingerNames[4] = {"index", "middle", "ring", "little"};
constexpr const char* kSegmentNames[3] = {"distal", "middle", "proximal"};

Point2 oriented_lateral(Point2 axis, Point2 n) {
  Point2 l = perp(axis);
  return dot(l, n) < 0.0 ? l * -1.0 : l;
}

geom::PolygonSet as_set(const Polygon& p) { return {p}; }

const Polygon* largest(const geom::PolygonSet& ps) {
  const Polygon* best = nullptr;
  double best_area = 0.0;
  for (const auto& p : ps) {
    const double a = geom::area(p);
    if (a > best_area) {
      best_area = a;
      best = &p;
    }
  }
  return best;
}

/// Longest chord of the line through `o` along `dir`.
std::optional<std::pair<double, double>> longest_chord(const Polygon& p, Point2 o, Point2 dir) {
  std::optional<std::pair<double, double>> best;
  for (const auto& c : geom::clip_line(p, o, dir))
    if (!best || c.second - c.first > best->second - best->first) best = c;
  return best;
}

}  // namespace

const char* kind_name(RegionKind k) {
  switch (k) {
    case RegionKind::FingerSegment: return "finger";
    case RegionKind::Thumb: return "thumb";
    case RegionKind::Palm: return "palm";
  }
  return "?";
}

HandFrame hand_frame(const std::array<Point2, 21>& L) {
  const Point2 axis = L[lm::kMiddleMcp] - L[lm::kWrist];
  if (geom::norm(axis) < 1e-6) throw SynthesisError("palm axis is degenerate (wrist and middle MCP coincide)");
  HandFrame f;
  f.wrist = L[lm::kWrist];
  f.w = normalized(axis);
  f.n = perp(f.w);
  if (dot(L[lm::kLittleMcp] - L[lm::kIndexMcp], f.n) < 0.0) f.n = f.n * -1.0;
  return f;
}

SensingRegion segment_rectangle(Point2 proximal, Point2 distal, const std::string& id, double min_segment_mm) {
  const double len = geom::dist(proximal, distal);
  if (len < min_segment_mm)
    throw SynthesisError(fmt::format("segment {} is degenerate ({:.3f} mm < {:.3f} mm)", id, len, min_segment_mm));
  SensingRegion r;
  r.id = id;
  r.axis = normalized(distal - proximal);
  r.lateral = perp(r.axis);
  r.origin = (proximal + distal) * 0.5;
  r.outline = geom::rectangle(r.origin, r.axis, len, len / 2.0);
  return r;
}

std::vector<SensingRegion> finger_regions(const capture::HandModel& hand, const LayoutConfig& cfg) {
  const auto& L = hand.landmarks;
  const HandFrame fr = hand_frame(L);
  std::vector<SensingRegion> out;
  for (int f = 0; f < 4; ++f) {
    const int mcp = lm::mcp(f);
    const Point2 joints[4] = {L[mcp], L[mcp + 1], L[mcp + 2], L[mcp + 3]};
    for (int s = 0; s < 3; ++s) {
      const Point2 prox = joints[2 - s], dist = joints[3 - s];
      const std::string id = fmt::format("{}_{}", kFingerNames[f], kSegmentNames[s]);
      SensingRegion r = segment_rectangle(prox, dist, id, cfg.min_segment_mm);
      if (s == 2) {
        // proximal phalanx: only the part above the palm, anchored at the PIP
        const double len = geom::dist(prox, dist);
        const double ratio = cfg.mcp_pip_ratio[static_cast<std::size_t>(f)];
        if (ratio <= 0.0 || ratio > 1.0)
          throw SynthesisError(fmt::format("MCP->PIP ratio for {} must be in (0, 1]", kFingerNames[f]));
        r.origin = dist - r.axis * (ratio * len / 2.0);
        r.outline = geom::rectangle(r.origin, r.axis, ratio * len, len / 2.0);
      }
      r.kind = RegionKind::FingerSegment;
      r.digit = f;
      r.segment = s;
      r.grid = cfg.resolution.finger_pad;
      r.lateral = oriented_lateral(r.axis, fr.n);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<SensingRegion> thumb_regions(const capture::HandModel& hand, const LayoutConfig& cfg) {
  const auto& L = hand.landmarks;
  const HandFrame fr = hand_frame(L);
  std::vector<SensingRegion> out;
  SensingRegion top = segment_rectangle(L[lm::kThumbIp], L[lm::kThumbTip], "thumb_distal", cfg.min_segment_mm);
  top.segment = 0;
  top.grid = cfg.resolution.thumb_top;
  SensingRegion mid = segment_rectangle(L[lm::kThumbMcp], L[lm::kThumbIp], "thumb_proximal", cfg.min_segment_mm);
  mid.segment = 1;
  mid.grid = cfg.resolution.thumb_mid;
  for (SensingRegion* r : {&top, &mid}) {
    r->kind = RegionKind::Thumb;
    r->digit = 4;
    r->lateral = oriented_lateral(r->axis, fr.n);
    out.push_back(std::move(*r));
  }
  return out;
}

Polygon palm_polygon(const capture::HandModel& hand, const LayoutConfig& cfg) {
  const auto& L = hand.landmarks;
  const HandFrame fr = hand_frame(L);
  const auto& pp = cfg.palm_projection;

  auto project = [&](int idx, Point2 dir, double frac, const char* name) {
    const Point2 b = L[idx];
    if (frac < 0.0 || frac > 1.0) throw SynthesisError(fmt::format("palm projection for {} must be in [0, 1]", name));
    if (frac == 0.0) return b;
    for (const auto& [t0, t1] : geom::clip_line(hand.contour, b, dir))
      if (t0 <= 1e-9 && t1 >= -1e-9) return b + dir * (frac * t1);
    throw SynthesisError(fmt::format("palm vertex {} lies outside the hand contour", name));
  };

  Polygon p;
  p.exterior = {
      project(lm::kWrist, fr.n * -1.0, pp.wrist, "wrist"),
      project(lm::kWrist, fr.n, pp.ulnar, "ulnar"),
      project(lm::kLittleMcp, fr.n, pp.little_mcp, "little_mcp"),
      project(lm::kRingMcp, fr.w, pp.ring_mcp, "ring_mcp"),
      project(lm::kMiddleMcp, fr.w, pp.middle_mcp, "middle_mcp"),
      project(lm::kIndexMcp, fr.n * -1.0, pp.index_mcp, "index_mcp"),
      project(lm::kThumbMcp, fr.n * -1.0, pp.thumb_mcp, "thumb_mcp"),
  };
  for (auto& v : p.exterior) v = geom::snap(v);
  p = geom::normalize_orientation(std::move(p));
  try {
    geom::validate(p);
  } catch (const GeometryError& e) {
    throw SynthesisError(fmt::format("palm polygon is invalid: {}", e.what()));
  }
  return p;
}

SensingRegion palm_region(const capture::HandModel& hand, const LayoutConfig& cfg) {
  const HandFrame fr = hand_frame(hand.landmarks);
  SensingRegion r;
  r.id = "palm";
  r.kind = RegionKind::Palm;
  r.digit = -1;
  r.outline = palm_polygon(hand, cfg);
  r.grid = cfg.resolution.palm;
  r.axis = fr.w;
  r.lateral = fr.n;
  r.origin = (hand.landmarks[lm::kWrist] + hand.landmarks[lm::kMiddleMcp]) * 0.5;
  return r;
}

void resolve_regions(std::vector<SensingRegion>& regions, const Polygon& contour, const LayoutConfig& cfg) {
  const geom::PolygonSet inset = geom::offset(as_set(contour), -cfg.routing_band_mm);
  if (inset.empty()) throw SynthesisError("hand contour vanishes inside the routing band");

  // palm first, then distal segments before proximal ones
  std::vector<std::size_t> order(regions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rank = [&](const SensingRegion& r) { return r.kind == RegionKind::Palm ? -1 : r.segment; };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rank(regions[a]) < rank(regions[b]); });

  geom::PolygonSet taken;
  for (std::size_t idx : order) {
    SensingRegion& r = regions[idx];
    geom::PolygonSet clipped = geom::boolean(as_set(r.outline), inset, geom::BoolOp::Intersection);
    if (!taken.empty())
      clipped = geom::boolean(clipped, geom::offset(taken, cfg.region_gap_mm), geom::BoolOp::Difference);
    const Polygon* keep = largest(clipped);
    if (!keep) throw SynthesisError(fmt::format("region {} vanishes after clipping to the hand", r.id));
    r.outline = *keep;
    taken.push_back(r.outline);
    taken = geom::unite(taken);
  }
}

RegionElectrodes region_electrodes(const SensingRegion& r, const LayoutConfig& cfg, bool trim_cols_to_rows) {
  const bool thumb = r.kind == RegionKind::Thumb;
  // "long" traces run along the axis, "cross" traces across it
  const int n_long = thumb ? r.grid.rows : r.grid.cols;
  const int n_cross = thumb ? r.grid.cols : r.grid.rows;
  if (n_long < 1 || n_cross < 1) throw SynthesisError(fmt::format("region {} has an empty grid", r.id));

  const Point2 o = r.origin, ax = r.axis, lat = r.lateral;
  double umin = std::numeric_limits<double>::infinity(), umax = -umin;
  for (const Point2& p : r.outline.exterior) {
    umin = std::min(umin, dot(p - o, lat));
    umax = std::max(umax, dot(p - o, lat));
  }
  const double span = umax - umin;

  struct Candidate {
    std::vector<double> u, v;
    std::vector<std::pair<double, double>> long_chords, cross_chords;
    double score = -1.0;
  } best;

  // largest grid-aligned rectangle whose sampled traces all cross each other
  constexpr int kSteps = 40;
  for (int a = 0; a < kSteps / 2; ++a) {
    for (int b = 0; b < kSteps / 2; ++b) {
      const double u0 = umin + span * a / kSteps, u1 = umax - span * b / kSteps;
      if (u1 - u0 < 1e-6) continue;
      Candidate c;
      double v0 = -std::numeric_limits<double>::infinity(), v1 = -v0;
      bool ok = true;
      for (int i = 0; i < n_long && ok; ++i) {
        const double u = u0 + (u1 - u0) * (i + 1) / (n_long + 1);
        const auto ch = longest_chord(r.outline, o + lat * u, ax);
        if (!ch) {
          ok = false;
          break;
        }
        c.u.push_back(u);
        c.long_chords.push_back(*ch);
        v0 = std::max(v0, ch->first);
        v1 = std::min(v1, ch->second);
      }
      if (!ok || v1 - v0 < 1e-6) continue;
      const double score = (u1 - u0) * (v1 - v0);
      if (score <= best.score) continue;
      for (int j = 0; j < n_cross && ok; ++j) {
        const double v = v0 + (v1 - v0) * (j + 1) / (n_cross + 1);
        ok = false;
        for (const auto& ch : geom::clip_line(r.outline, o + ax * v, lat)) {
          if (ch.first <= c.u.front() && ch.second >= c.u.back()) {
            c.v.push_back(v);
            c.cross_chords.push_back(ch);
            ok = true;
            break;
          }
        }
      }
      if (!ok) continue;
      c.score = score;
      best = std::move(c);
    }
  }
  if (best.score < 0.0)
    throw SynthesisError(fmt::format("region {} cannot host a {}x{} grid", r.id, r.grid.rows, r.grid.cols));

  const double pitch_u = n_long > 1 ? best.u[1] - best.u[0] : std::numeric_limits<double>::infinity();
  const double pitch_v = n_cross > 1 ? best.v[1] - best.v[0] : std::numeric_limits<double>::infinity();
  if (std::min(pitch_u, pitch_v) < cfg.min_pitch_mm)
    throw SynthesisError(fmt::format("region {} is too small for a {}x{} grid (pitch {:.3f} mm < {:.3f} mm)", r.id,
                                     r.grid.rows, r.grid.cols, std::min(pitch_u, pitch_v), cfg.min_pitch_mm));

  auto at = [&](double u, double v) { return o + lat * u + ax * v; };
  std::vector<Polyline> longs, crosses;
  for (int i = 0; i < n_long; ++i) {
    double v_lo = best.long_chords[i].first;
    if (trim_cols_to_rows) v_lo = std::max(v_lo, best.v.front() - cfg.palm_column_tail_mm);
    longs.push_back({{at(best.u[i], v_lo), at(best.u[i], best.long_chords[i].second)}, cfg.trace_width_mm});
  }
  for (int j = 0; j < n_cross; ++j)
    crosses.push_back(
        {{at(best.cross_chords[j].first, best.v[j]), at(best.cross_chords[j].second, best.v[j])}, cfg.trace_width_mm});
  // cross traces distal first
  std::reverse(crosses.begin(), crosses.end());
  std::vector<double> v_desc(best.v.rbegin(), best.v.rend());

  RegionElectrodes e;
  if (thumb) {
    e.rows = std::move(longs);
    e.cols = std::move(crosses);
    for (int i = 0; i < n_long; ++i)
      for (int j = 0; j < n_cross; ++j) e.taxels.push_back(at(best.u[i], v_desc[j]));
  } else {
    e.rows = std::move(crosses);
    e.cols = std::move(longs);
    for (int j = 0; j < n_cross; ++j)
      for (int i = 0; i < n_long; ++i) e.taxels.push_back(at(best.u[i], v_desc[j]));
  }
  return e;
}

ElectrodeSet place_electrodes(const std::vector<SensingRegion>& regions, const LayoutConfig& cfg) {
  std::optional<std::size_t> palm, thumb_top, thumb_mid;
  std::size_t fingers[4][3];
  bool have[4][3] = {};
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    if (r.kind == RegionKind::Palm) palm = i;
    if (r.kind == RegionKind::Thumb) (r.segment == 0 ? thumb_top : thumb_mid) = i;
    if (r.kind == RegionKind::FingerSegment) {
      fingers[r.digit][r.segment] = i;
      have[r.digit][r.segment] = true;
    }
  }
  if (!palm || !thumb_top || !thumb_mid) throw SynthesisError("layout needs a palm and two thumb regions");
  for (int f = 0; f < 4; ++f)
    for (int s = 0; s < 3; ++s)
      if (!have[f][s]) throw SynthesisError(fmt::format("missing region {}_{}", kFingerNames[f], kSegmentNames[s]));

  std::vector<RegionElectrodes> el(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) el[i] = region_electrodes(regions[i], cfg, i == *palm);

  const Grid pg = regions[*palm].grid;
  const Grid tt = regions[*thumb_top].grid, tm = regions[*thumb_mid].grid;
  const Grid fg = regions[fingers[0][0]].grid;
  for (int f = 0; f < 4; ++f)
    for (int s = 0; s < 3; ++s)
      if (regions[fingers[f][s]].grid.rows != fg.rows || regions[fingers[f][s]].grid.cols != fg.cols)
        throw SynthesisError("all finger regions must share one grid");
  if (tt.rows != tm.rows) throw SynthesisError("thumb regions must have the same number of rows");
  if (tt.rows > pg.rows) throw SynthesisError("thumb has more rows than the palm");
  if (4 * fg.cols > pg.cols) throw SynthesisError("finger columns outnumber palm columns");

  ElectrodeSet out;
  std::vector<std::vector<int>> row_net(regions.size()), col_net(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    row_net[i].assign(el[i].rows.size(), -1);
    col_net[i].assign(el[i].cols.size(), -1);
  }
  for (int k = 0; k < pg.rows; ++k) row_net[*palm][k] = k;
  for (int k = 0; k < pg.cols; ++k) col_net[*palm][k] = k;
  // thumb rows in lateral order meet the lowest palm rows, outermost lowest
  for (int k = 0; k < tt.rows; ++k) row_net[*thumb_top][k] = row_net[*thumb_mid][k] = pg.rows - 1 - k;
  for (int k = 0; k < tt.cols; ++k) col_net[*thumb_top][k] = pg.cols + k;
  for (int k = 0; k < tm.cols; ++k) col_net[*thumb_mid][k] = pg.cols + tt.cols + k;
  for (int f = 0; f < 4; ++f)
    for (int s = 0; s < 3; ++s)
      for (int k = 0; k < fg.rows; ++k) row_net[fingers[f][s]][k] = pg.rows + s * fg.rows + k;

  // finger columns chain down to palm columns: monotone, injective, nearest
  std::vector<Point2> base;
  for (int f = 0; f < 4; ++f)
    for (int c = 0; c < fg.cols; ++c) base.push_back(el[fingers[f][2]].cols[c].vertices.front());
  std::vector<Point2> tops;
  for (const auto& c : el[*palm].cols) tops.push_back(c.vertices.back());
  const std::size_t m = base.size(), n = tops.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(m + 1, std::vector<double>(n + 1, inf));
  for (std::size_t j = 0; j <= n; ++j) cost[0][j] = 0.0;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = i; j <= n; ++j)
      cost[i][j] = std::min(cost[i][j - 1], cost[i - 1][j - 1] + geom::dist(base[i - 1], tops[j - 1]));
  std::vector<int> match(m);
  for (std::size_t i = m, j = n; i > 0; --j) {
    if (j > i && cost[i][j] == cost[i][j - 1]) continue;
    match[i - 1] = static_cast<int>(j - 1);
    --i;
  }
  for (int f = 0; f < 4; ++f)
    for (int s = 0; s < 3; ++s)
      for (int c = 0; c < fg.cols; ++c) col_net[fingers[f][s]][c] = match[f * fg.cols + c];

  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& e = el[i];
    for (std::size_t k = 0; k < e.rows.size(); ++k)
      out.rows.push_back({e.rows[k], row_net[i][k], i, static_cast<int>(k)});
    for (std::size_t k = 0; k < e.cols.size(); ++k)
      out.cols.push_back({e.cols[k], col_net[i][k], i, static_cast<int>(k)});
    const int nc = regions[i].grid.cols;
    for (std::size_t t = 0; t < e.taxels.size(); ++t) {
      const int row = static_cast<int>(t) / nc, col = static_cast<int>(t) % nc;
      out.taxels.push_back({e.taxels[t], i, row, col, row_net[i][row], col_net[i][col]});
    }
  }
  return out;
}

Layout synthesize(const capture::HandModel& hand, const LayoutConfig& cfg) {
  Layout l;
  l.frame = hand_frame(hand.landmarks);
  l.contour = hand.contour;
  l.regions = finger_regions(hand, cfg);
  for (auto& r : thumb_regions(hand, cfg)) l.regions.push_back(std::move(r));
  l.regions.push_back(palm_region(hand, cfg));
  resolve_regions(l.regions, hand.contour, cfg);
  l.electrodes = place_electrodes(l.regions, cfg);
  const auto& res = cfg.resolution;
  l.row_nets = res.palm.rows + 3 * res.finger_pad.rows;
  l.col_nets = res.palm.cols + res.thumb_top.cols + res.thumb_mid.cols;
  return l;
}

std::string to_json(const Layout& l) {
  using nlohmann::ordered_json;
  auto pt = [](Point2 p) { return ordered_json::array({p.x, p.y}); };
  auto path = [&](const std::vector<Point2>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& p : v) a.push_back(pt(p));
    return a;
  };
  ordered_json j;
  j["frame"] = {{"w", pt(l.frame.w)}, {"n", pt(l.frame.n)}, {"wrist", pt(l.frame.wrist)}};
  j["row_nets"] = l.row_nets;
  j["col_nets"] = l.col_nets;
  j["regions"] = ordered_json::array();
  for (const auto& r : l.regions)
    j["regions"].push_back({{"id", r.id},
                            {"kind", kind_name(r.kind)},
                            {"rows", r.grid.rows},
                            {"cols", r.grid.cols},
                            {"axis", pt(r.axis)},
                            {"lateral", pt(r.lateral)},
                            {"outline", path(r.outline.exterior)}});
  auto traces = [&](const std::vector<Trace>& ts) {
    ordered_json a = ordered_json::array();
    for (const auto& t : ts)
      a.push_back({{"net", t.net},
                   {"region", l.regions[t.region].id},
                   {"index", t.index},
                   {"width", t.line.width},
                   {"vertices", path(t.line.vertices)}});
    return a;
  };
  j["row_traces"] = traces(l.electrodes.rows);
  j["col_traces"] = traces(l.electrodes.cols);
  j["taxels"] = ordered_json::array();
  for (const auto& t : l.electrodes.taxels)
    j["taxels"].push_back({{"region", l.regions[t.region].id},
                           {"row", t.row},
                           {"col", t.col},
                           {"row_net", t.row_net},
                           {"col_net", t.col_net},
                           {"x", t.p.x},
                           {"y", t.p.y}});
  return j.dump(2) + "\n";
}

}  // namespace flexglove::layout
