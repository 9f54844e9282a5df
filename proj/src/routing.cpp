#include "flexglove/routing.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <map>
#include <numeric>
#include <nlohmann/json.hpp>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "flexglove/error.hpp"

namespace flexglove::routing {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using geom::dot;
using layout::RegionKind;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kAnchorNetBase = 1000;
// every ring shares one arc resolution so nested arcs stay parallel
constexpr int kRingPointsPerCircle = 512;
constexpr int kSparePadNetBase = 2000;

std::vector<Point2> snapped(std::vector<Point2> v) {
  std::vector<Point2> out;
  out.reserve(v.size());
  for (auto p : v) {
    p = geom::snap(p);
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  return out;
}

Polyline make_line(std::vector<Point2> v, double width) { return {snapped(std::move(v)), width}; }

std::string net_name(Side s, int net) { return fmt::format("{}{:02d}", s == Side::Front ? "R" : "C", net); }

// --- spatial index over copper primitives -----------------------------------

using BPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;

struct Prim {
  int net = 0;
  std::size_t feature = 0;  // owning trace or area
  bool area = false;
  Point2 a, b;  // segment endpoints
  double half = 0.0;
  const Polygon* shape = nullptr;
};

std::vector<Prim> primitives(const SideCopper& c) {
  std::vector<Prim> out;
  for (std::size_t i = 0; i < c.traces.size(); ++i) {
    const auto& t = c.traces[i];
    const auto& v = t.line.vertices;
    if (v.size() == 1) out.push_back({t.net, i, false, v[0], v[0], t.line.width / 2.0, nullptr});
    for (std::size_t k = 0; k + 1 < v.size(); ++k)
      out.push_back({t.net, i, false, v[k], v[k + 1], t.line.width / 2.0, nullptr});
  }
  for (std::size_t i = 0; i < c.areas.size(); ++i)
    out.push_back({c.areas[i].net, c.traces.size() + i, true, {}, {}, 0.0, &c.areas[i].shape});
  return out;
}

BBox prim_box(const Prim& p, double grow) {
  geom::Box b;
  if (p.area) {
    b = geom::bounds(*p.shape);
  } else {
    b = {{std::min(p.a.x, p.b.x), std::min(p.a.y, p.b.y)}, {std::max(p.a.x, p.b.x), std::max(p.a.y, p.b.y)}};
  }
  const double g = p.half + grow;
  return {{b.min.x - g, b.min.y - g}, {b.max.x + g, b.max.y + g}};
}

double seg_poly_distance(Point2 a, Point2 b, const Polygon& poly) {
  if (geom::contains(poly, a) || geom::contains(poly, b)) return 0.0;
  double d = kInf;
  const auto& r = poly.exterior;
  for (std::size_t i = 0; i < r.size(); ++i)
    d = std::min(d, geom::segment_segment_distance(a, b, r[i], r[(i + 1) % r.size()]));
  return d;
}

double poly_poly_distance(const Polygon& p, const Polygon& q) {
  double d = kInf;
  const auto& r = p.exterior;
  for (std::size_t i = 0; i < r.size(); ++i) d = std::min(d, seg_poly_distance(r[i], r[(i + 1) % r.size()], q));
  return d;
}

/// Edge-to-edge distance and a point near the gap.
std::pair<double, Point2> prim_distance(const Prim& p, const Prim& q) {
  if (p.area && q.area) return {poly_poly_distance(*p.shape, *q.shape), p.shape->exterior.front()};
  if (p.area) return prim_distance(q, p);
  if (q.area) return {seg_poly_distance(p.a, p.b, *q.shape) - p.half, p.a};
  const double d = geom::segment_segment_distance(p.a, p.b, q.a, q.b) - p.half - q.half;
  // location: the endpoint of q nearest to p, projected onto p
  const Point2 qa = geom::closest_on_segment(q.a, p.a, p.b), qb = geom::closest_on_segment(q.b, p.a, p.b);
  return {d, geom::dist(qa, q.a) < geom::dist(qb, q.b) ? qa : qb};
}

template <typename Fn>
void for_each_near_pair(const std::vector<Prim>& prims, double grow, Fn&& fn) {
  using Entry = std::pair<BBox, std::size_t>;
  std::vector<Entry> entries;
  entries.reserve(prims.size());
  for (std::size_t i = 0; i < prims.size(); ++i) entries.emplace_back(prim_box(prims[i], grow / 2.0), i);
  bgi::rtree<Entry, bgi::quadratic<16>> tree(entries.begin(), entries.end());
  std::vector<Entry> hits;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    hits.clear();
    tree.query(bgi::intersects(entries[i].first), std::back_inserter(hits));
    std::sort(hits.begin(), hits.end(), [](const Entry& a, const Entry& b) { return a.second < b.second; });
    for (const auto& h : hits)
      if (h.second > i) fn(prims[i], prims[h.second]);
  }
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

const char* side_name(Side s) { return s == Side::Front ? "front" : "back"; }

// --- connector ------------------------------------------------------------------

Connector place_connector(const Polygon& contour, Point2 w, Point2 n, double lateral, Side side,
                          const RoutingConfig& cfg) {
  const auto& cc = cfg.connector;
  if (cc.pads < 1) throw RoutingError("connector needs at least one pad");
  double bottom = kInf;
  for (const Point2& p : contour.exterior) bottom = std::min(bottom, dot(p, w));
  const double ax0 = bottom + cc.depth_mm, ax1 = ax0 + cc.pad_length_mm;
  auto at = [&](double lat, double ax) { return geom::snap(n * lat + w * ax); };

  Connector c;
  c.side = side;
  c.w = w;
  c.n = n;
  for (int i = 0; i < cc.pads; ++i) {
    const double lat = lateral + (i - (cc.pads - 1) / 2.0) * cc.pitch_mm;
    Pad p;
    p.index = i;
    p.center = at(lat, (ax0 + ax1) / 2.0);
    p.low = at(lat, ax0);
    p.high = at(lat, ax1);
    p.shape = geom::rectangle(p.center, w, cc.pad_length_mm, cc.pad_width_mm);
    c.pads.push_back(std::move(p));
  }
  const double edge = (cc.pads - 1) / 2.0 * cc.pitch_mm + cc.pad_width_mm / 2.0 + cc.anchor_gap_mm +
                      cc.anchor_width_mm / 2.0;
  for (double sgn : {-1.0, 1.0})
    c.anchors.push_back(geom::rectangle(at(lateral + sgn * edge, (ax0 + ax1) / 2.0), w, cc.anchor_length_mm,
                                        cc.anchor_width_mm));
  return c;
}

// --- rings ----------------------------------------------------------------------

std::vector<Ring> build_rings(const Polygon& contour, const RoutingConfig& cfg) {
  const double need = cfg.ring_inset(cfg.rings) + 1.0 - cfg.edge_clearance_mm;
  if (geom::offset_polygon(contour, -need).empty())
    throw RoutingError(fmt::format("contour inradius is too small for {} rings (needs more than {:.2f} mm)",
                                   cfg.rings, need));
  // arc chords sag toward the contour by up to r(1 - cos(pi/n)) and snapping
  // moves each vertex by up to half a grid diagonal; each inset is raised so a
  // ring's chords stay one full pitch from the previous ring's vertices
  const double sag = std::cos(std::numbers::pi / kRingPointsPerCircle);
  const double step = cfg.ring_pitch_mm + geom::kGridMm * std::numbers::sqrt2;
  std::vector<Ring> rings;
  double inset = 0.0;
  for (int k = 1; k <= cfg.rings; ++k) {
    inset = k == 1 ? cfg.ring_inset(1) : std::max(cfg.ring_inset(k), (inset + step) / sag);
    auto pieces = geom::offset_polygon_steps(contour, -inset, kRingPointsPerCircle);
    if (pieces.size() != 1)
      throw RoutingError(fmt::format("ring {} splits into {} pieces", k, pieces.size()));
    rings.push_back(std::move(pieces.front().exterior));
  }
  return rings;
}

std::vector<Point2> open_ring(const Ring& ring, Point2 gap, Point2 w, Point2 toward) {
  std::vector<Point2> closed(ring.begin(), ring.end());
  closed.push_back(ring.front());
  const auto xs = geom::line_crossings(closed, gap, w);
  if (xs.empty()) throw RoutingError("ring does not pass the connector gap");
  double s_gap = xs.front(), lowest = kInf;
  for (double s : xs) {
    const double h = dot(geom::point_at(closed, s), w);
    if (h < lowest) {
      lowest = h;
      s_gap = s;
    }
  }
  const double total = geom::length(closed);
  std::vector<Point2> path = geom::subpath(closed, s_gap, total);
  const auto head = geom::subpath(closed, 0.0, s_gap);
  path.insert(path.end(), head.begin() + 1, head.end());
  const Point2 ahead = geom::point_at(path, std::min(0.5, total / 4.0));
  if (dot(ahead - path.front(), toward) < 0.0) std::reverse(path.begin(), path.end());
  return path;
}

// --- direct links -----------------------------------------------------------------

std::vector<Link> direct_connect(const layout::Layout& l, const RoutingConfig& cfg) {
  const geom::PolygonSet inset =
      geom::offset({l.contour}, -(cfg.edge_clearance_mm + cfg.trace_width_mm / 2.0));
  const auto& regions = l.regions;
  std::map<std::size_t, std::vector<const layout::Trace*>> rows, cols;
  for (const auto& t : l.electrodes.rows) rows[t.region].push_back(&t);
  for (const auto& t : l.electrodes.cols) cols[t.region].push_back(&t);
  for (auto* m : {&rows, &cols})
    for (auto& [_, v] : *m)
      std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->index < b->index; });

  auto find_region = [&](RegionKind kind, int digit, int segment) -> std::size_t {
    for (std::size_t i = 0; i < regions.size(); ++i)
      if (regions[i].kind == kind && (kind == RegionKind::Palm || (regions[i].digit == digit && regions[i].segment == segment)))
        return i;
    throw RoutingError("layout is missing a region");
  };
  const std::size_t palm = find_region(RegionKind::Palm, -1, 0);
  auto palm_trace = [&](const std::map<std::size_t, std::vector<const layout::Trace*>>& m, int net) {
    for (const auto* t : m.at(palm))
      if (t->net == net) return t;
    throw RoutingError(fmt::format("no palm trace carries net {}", net));
  };

  std::vector<Link> out;
  auto link = [&](Side side, int net, std::vector<Point2> path, std::size_t from, std::size_t to) {
    Polyline line = make_line(std::move(path), cfg.trace_width_mm);
    if (!geom::covers(inset, line.vertices))
      throw RoutingError(fmt::format("link {} -> {} would leave the contour", regions[from].id, regions[to].id));
    out.push_back({side, net, std::move(line), regions[from].id, regions[to].id});
  };

  // thumb rows: tip -> base -> lowest palm rows
  const std::size_t t_top = find_region(RegionKind::Thumb, 4, 0), t_mid = find_region(RegionKind::Thumb, 4, 1);
  for (std::size_t k = 0; k < rows[t_top].size(); ++k) {
    const auto* a = rows[t_top][k];
    const auto* b = rows[t_mid].at(k);
    link(Side::Front, a->net, {a->line.vertices.front(), b->line.vertices.back()}, t_top, t_mid);
    const auto* p = palm_trace(rows, b->net);
    link(Side::Front, b->net, {b->line.vertices.front(), p->line.vertices.front()}, t_mid, palm);
  }

  // finger columns: distal -> middle -> proximal -> palm
  for (int f = 0; f < 4; ++f) {
    std::size_t seg[3];
    for (int s = 0; s < 3; ++s) seg[s] = find_region(RegionKind::FingerSegment, f, s);
    const std::size_t ncols = cols[seg[0]].size();
    for (std::size_t c = 0; c < ncols; ++c) {
      for (int s = 0; s < 2; ++s) {
        const auto* a = cols[seg[s]][c];
        const auto* b = cols[seg[s + 1]].at(c);
        link(Side::Back, a->net, {a->line.vertices.front(), b->line.vertices.back()}, seg[s], seg[s + 1]);
      }
    }
    // into the palm: straight when every column allows it, otherwise all
    // columns of the finger bend together so their links stay parallel
    std::vector<std::vector<Point2>> paths;
    bool straight = true;
    for (std::size_t c = 0; c < ncols; ++c) {
      const Point2 base = cols[seg[2]][c]->line.vertices.front();
      const Point2 top = palm_trace(cols, cols[seg[2]][c]->net)->line.vertices.back();
      paths.push_back({base, top});
      straight = straight && geom::covers(inset, paths.back());
    }
    if (!straight) {
      const Point2 axis = regions[seg[2]].axis;
      for (auto& p : paths) {
        const double drop = (dot(p[0] - p[1], l.frame.w) - cfg.link_bend_mm) / dot(axis, l.frame.w);
        if (drop > 0.0) p = {p[0], p[0] - axis * drop, p[1]};
      }
    }
    for (std::size_t c = 0; c < ncols; ++c) link(Side::Back, cols[seg[2]][c]->net, paths[c], seg[2], palm);
  }
  return out;
}

// --- ring assignment ----------------------------------------------------------------

std::vector<RingRoute> assign_and_drop(const std::vector<RingNet>& nets, const std::vector<Ring>& rings,
                                       const Connector& conn, const std::vector<int>& slots, Point2 toward,
                                       const RoutingConfig& cfg) {
  const std::size_t m = nets.size();
  if (m == 0) return {};
  if (m > rings.size()) throw RoutingError(fmt::format("{} nets need rings but only {} exist", m, rings.size()));
  if (slots.size() != m) throw RoutingError("pad slot count does not match ring nets");
  for (int s : slots)
    if (s < 0 || s >= static_cast<int>(conn.pads.size())) throw RoutingError("pad slot out of range");

  const Point2 w = conn.w, n = conn.n;
  const bool plus = dot(toward, n) > 0.0;
  auto lat = [&](int slot) { return dot(conn.pads[slot].low, n); };
  const double half = cfg.connector.pitch_mm / 2.0;
  const double gap_lat = plus ? lat(slots.front()) - half : lat(slots.back()) + half;
  const Point2 gap = n * gap_lat + w * dot(conn.pads[slots.front()].low, w);
  const auto ref = open_ring(rings.front(), gap, w, toward);

  struct Order {
    std::size_t idx;
    std::vector<Point2> ends;  // sorted along the ring
    double s;
  };
  std::vector<Order> order;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& net = nets[i];
    if (net.segments.empty()) throw RoutingError(fmt::format("net {} has no electrodes", net.net));
    struct End {
      Point2 p;
      double s;
      std::size_t seg;
    };
    std::vector<End> ends;
    for (std::size_t k = 0; k < net.segments.size(); ++k) {
      const auto& v = net.segments[k].vertices;
      for (Point2 p : {v.front(), v.back()}) ends.push_back({p, geom::project_onto_path(ref, p).s, k});
    }
    std::stable_sort(ends.begin(), ends.end(), [](const End& a, const End& b) { return a.s < b.s; });
    for (std::size_t k = 0; k + 1 < ends.size(); k += 2)
      if (ends[k].seg != ends[k + 1].seg)
        throw RoutingError(fmt::format("net {}: electrode ends interleave along the ring", net.net));
    Order o{i, {}, ends.front().s};
    for (const auto& e : ends) o.ends.push_back(e.p);
    order.push_back(std::move(o));
  }
  // farthest first; ties put the bottom-most, then little-finger-most, innermost
  std::sort(order.begin(), order.end(), [&](const Order& a, const Order& b) {
    if (a.s != b.s) return a.s > b.s;
    const double ha = dot(a.ends.front(), w), hb = dot(b.ends.front(), w);
    if (ha != hb) return ha > hb;
    const double la = dot(a.ends.front(), n), lb = dot(b.ends.front(), n);
    if (la != lb) return la < lb;
    return nets[a.idx].net < nets[b.idx].net;
  });

  std::vector<RingRoute> out;
  for (std::size_t k = 0; k < m; ++k) {
    const Order& o = order[k];
    RingRoute r;
    r.net = nets[o.idx].net;
    r.ring = static_cast<int>(k) + 1;
    r.pad = plus ? slots[k] : slots[m - 1 - k];
    const auto path = open_ring(rings[k], gap, w, toward);
    const Pad& pad = conn.pads[r.pad];
    const auto turns = geom::line_crossings(path, pad.low, w);
    if (turns.empty()) throw RoutingError(fmt::format("ring {} does not pass pad {}", r.ring, r.pad + 1));
    const double s_turn = turns.front();
    r.terminal = o.ends.front();
    const auto drop = geom::project_onto_path(path, r.terminal);
    r.drop_point = drop.point;
    if (drop.s <= s_turn)
      throw RoutingError(fmt::format("net {} ends before the connector on ring {}", r.net, r.ring));
    std::vector<Point2> main{pad.low};
    const auto along = geom::subpath(path, s_turn, drop.s);
    main.insert(main.end(), along.begin(), along.end());
    main.push_back(r.terminal);
    r.main = make_line(std::move(main), cfg.trace_width_mm);
    for (std::size_t e = 1; e + 1 < o.ends.size(); e += 2) {
      Point2 a = o.ends[e], b = o.ends[e + 1];
      double sa = geom::project_onto_path(path, a).s, sb = geom::project_onto_path(path, b).s;
      if (sa > sb) {
        std::swap(a, b);
        std::swap(sa, sb);
      }
      std::vector<Point2> arc{a};
      const auto mid = geom::subpath(path, sa, sb);
      arc.insert(arc.end(), mid.begin(), mid.end());
      arc.push_back(b);
      r.arcs.push_back(make_line(std::move(arc), cfg.trace_width_mm));
    }
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const RingRoute& a, const RingRoute& b) { return a.net < b.net; });
  return out;
}

// --- verification ---------------------------------------------------------------------

ClearanceReport verify_clearance(const SideCopper& copper, double min_clearance_mm, double tolerance_mm) {
  ClearanceReport rep;
  rep.min_clearance_mm = kInf;
  const auto prims = primitives(copper);
  for_each_near_pair(prims, min_clearance_mm + 0.4, [&](const Prim& p, const Prim& q) {
    if (p.net == q.net) return;
    const auto [d, where] = prim_distance(p, q);
    if (d < min_clearance_mm - tolerance_mm) ++rep.violations;
    if (d < rep.min_clearance_mm) {
      rep.min_clearance_mm = d;
      rep.net_a = std::min(p.net, q.net);
      rep.net_b = std::max(p.net, q.net);
      rep.where = where;
    }
  });
  rep.ok = rep.violations == 0;
  return rep;
}

void verify_connectivity(const SideCopper& copper, double tolerance_mm) {
  const auto prims = primitives(copper);
  const std::size_t nf = copper.traces.size() + copper.areas.size();
  UnionFind uf(nf);
  for_each_near_pair(prims, tolerance_mm, [&](const Prim& p, const Prim& q) {
    if (p.net != q.net || p.feature == q.feature) return;
    if (prim_distance(p, q).first <= tolerance_mm) uf.unite(p.feature, q.feature);
  });
  std::map<int, std::vector<std::size_t>> by_net;
  for (std::size_t i = 0; i < copper.traces.size(); ++i) by_net[copper.traces[i].net].push_back(i);
  std::map<int, int> pads;
  for (std::size_t i = 0; i < copper.areas.size(); ++i) {
    by_net[copper.areas[i].net].push_back(copper.traces.size() + i);
    ++pads[copper.areas[i].net];
  }
  for (const auto& [net, feats] : by_net) {
    std::vector<std::size_t> roots;
    for (auto f : feats) roots.push_back(uf.find(f));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    if (roots.size() != 1)
      throw RoutingError(fmt::format("net {}: copper splits into {} pieces", net, roots.size()));
    if (pads[net] != 1) throw RoutingError(fmt::format("net {}: reaches {} connector pads", net, pads[net]));
  }
}

void verify_edge_clearance(const SideCopper& copper, const Polygon& contour, double edge_mm, double tolerance_mm) {
  std::map<double, geom::PolygonSet> insets;
  auto inset = [&](double d) -> const geom::PolygonSet& {
    auto it = insets.find(d);
    if (it == insets.end()) it = insets.emplace(d, geom::offset({contour}, -d)).first;
    return it->second;
  };
  for (const auto& t : copper.traces)
    if (!geom::covers(inset(edge_mm + t.line.width / 2.0 - tolerance_mm), t.line.vertices))
      throw RoutingError(fmt::format("net {}: copper is closer than {} mm to the board edge", t.net, edge_mm));
  for (const auto& a : copper.areas) {
    std::vector<Point2> ring = a.shape.exterior;
    ring.push_back(ring.front());
    if (!geom::covers(inset(edge_mm - tolerance_mm), ring))
      throw RoutingError(fmt::format("net {}: pad is closer than {} mm to the board edge", a.net, edge_mm));
  }
}

// --- full routing --------------------------------------------------------------------

double RoutedNet::routed_length_mm() const {
  double len = 0.0;
  for (const auto* set : {&links, &routes})
    for (const auto& l : *set) len += geom::length(l.vertices);
  return len;
}

SideCopper Routing::copper(Side s) const {
  SideCopper c;
  const Connector& conn = connector(s);
  std::vector<bool> used(conn.pads.size(), false);
  for (const auto& n : nets) {
    if (n.side != s) continue;
    for (const auto* set : {&n.electrodes, &n.links, &n.routes})
      for (const auto& l : *set) c.traces.push_back({n.net, l});
    c.areas.push_back({n.net, conn.pads[n.pad].shape});
    used[n.pad] = true;
  }
  for (std::size_t i = 0; i < conn.pads.size(); ++i)
    if (!used[i]) c.areas.push_back({kSparePadNetBase + static_cast<int>(i), conn.pads[i].shape});
  for (std::size_t i = 0; i < conn.anchors.size(); ++i)
    c.areas.push_back({kAnchorNetBase + static_cast<int>(i), conn.anchors[i]});
  return c;
}

Routing route(const layout::Layout& l, const RoutingConfig& cfg, bool verify) {
  Routing r;
  r.rings = build_rings(l.contour, cfg);
  const auto links = direct_connect(l, cfg);
  const Point2 w = l.frame.w, n = l.frame.n;
  const double wrist = dot(l.frame.wrist, n);
  r.front = place_connector(l.contour, w, n, wrist + cfg.front_connector_offset_mm, Side::Front, cfg);
  r.back = place_connector(l.contour, w, n, wrist, Side::Back, cfg);

  auto region_kind = [&](const layout::Trace& t) { return l.regions[t.region].kind; };
  std::map<int, RoutedNet> front, back;
  for (const auto& t : l.electrodes.rows) front[t.net].electrodes.push_back(t.line);
  for (const auto& t : l.electrodes.cols) back[t.net].electrodes.push_back(t.line);
  for (const auto& lk : links) (lk.side == Side::Front ? front : back)[lk.net].links.push_back(lk.line);

  // front: every row net rides a ring from the little-finger side
  std::vector<RingNet> front_nets;
  for (const auto& [net, _] : front) {
    RingNet rn{net, {}};
    for (const auto& t : l.electrodes.rows)
      if (t.net == net && region_kind(t) != RegionKind::Thumb) rn.segments.push_back(t.line);
    front_nets.push_back(std::move(rn));
  }
  const int pads = cfg.connector.pads;
  if (static_cast<int>(front_nets.size()) > pads)
    throw RoutingError(fmt::format("{} row nets exceed {} connector pads", front_nets.size(), pads));
  std::vector<int> slots(front_nets.size());
  std::iota(slots.begin(), slots.end(), 0);
  for (auto& rr : assign_and_drop(front_nets, r.rings, r.front, slots, n, cfg)) {
    RoutedNet& rn = front[rr.net];
    rn.ring = rr.ring;
    rn.pad = rr.pad;
    rn.routes.push_back(std::move(rr.main));
    for (auto& a : rr.arcs) rn.routes.push_back(std::move(a));
  }

  // back: thumb columns ride rings from the thumb side, palm columns fan in
  std::vector<RingNet> thumb_nets;
  std::vector<const layout::Trace*> palm_cols;
  for (const auto& [net, _] : back) {
    RingNet rn{net, {}};
    const layout::Trace* palm_col = nullptr;
    for (const auto& t : l.electrodes.cols) {
      if (t.net != net) continue;
      if (region_kind(t) == RegionKind::Thumb) rn.segments.push_back(t.line);
      if (region_kind(t) == RegionKind::Palm) palm_col = &t;
    }
    if (palm_col)
      palm_cols.push_back(palm_col);
    else
      thumb_nets.push_back(std::move(rn));
  }
  std::sort(palm_cols.begin(), palm_cols.end(), [](auto* a, auto* b) { return a->index < b->index; });
  if (static_cast<int>(thumb_nets.size() + palm_cols.size()) > pads)
    throw RoutingError(fmt::format("{} column nets exceed {} connector pads", thumb_nets.size() + palm_cols.size(),
                                   pads));
  slots.resize(thumb_nets.size());
  std::iota(slots.begin(), slots.end(), 0);
  for (auto& rr : assign_and_drop(thumb_nets, r.rings, r.back, slots, n * -1.0, cfg)) {
    RoutedNet& rn = back[rr.net];
    rn.ring = rr.ring;
    rn.pad = rr.pad;
    rn.routes.push_back(std::move(rr.main));
    for (auto& a : rr.arcs) rn.routes.push_back(std::move(a));
  }
  for (std::size_t k = 0; k < palm_cols.size(); ++k) {
    RoutedNet& rn = back[palm_cols[k]->net];
    rn.kind = NetKind::Direct;
    rn.pad = static_cast<int>(thumb_nets.size() + k);
    const Pad& pad = r.back.pads[rn.pad];
    rn.routes.push_back(make_line(
        {palm_cols[k]->line.vertices.front(), pad.high + w * cfg.connector.stub_mm, pad.high}, cfg.trace_width_mm));
  }

  for (auto& [net, rn] : front) {
    rn.side = Side::Front;
    rn.net = net;
    r.nets.push_back(std::move(rn));
  }
  for (auto& [net, rn] : back) {
    rn.side = Side::Back;
    rn.net = net;
    r.nets.push_back(std::move(rn));
  }

  for (Side s : {Side::Front, Side::Back}) {
    const SideCopper c = r.copper(s);
    ClearanceReport rep = verify_clearance(c, cfg.clearance_mm, cfg.clearance_tolerance_mm);
    (s == Side::Front ? r.front_clearance : r.back_clearance) = rep;
    if (!verify) continue;
    if (!rep.ok)
      throw RoutingError(fmt::format("{}: nets {} and {} are {:.4f} mm apart near ({:.3f}, {:.3f})", side_name(s),
                                     rep.net_a, rep.net_b, rep.min_clearance_mm, rep.where.x, rep.where.y));
    verify_connectivity(c, cfg.clearance_tolerance_mm);
    verify_edge_clearance(c, l.contour, cfg.edge_clearance_mm, cfg.clearance_tolerance_mm);
  }
  return r;
}

std::string report_text(const Routing& r) {
  std::string out;
  for (Side s : {Side::Front, Side::Back}) {
    const ClearanceReport& c = s == Side::Front ? r.front_clearance : r.back_clearance;
    out += fmt::format("{} copper: worst clearance {:.4f} mm between nets {} and {}\n", side_name(s),
                       c.min_clearance_mm, c.net_a, c.net_b);
    out += fmt::format("  {:<5} {:<7} {:>4} {:>4} {:>10}\n", "net", "kind", "ring", "pin", "length_mm");
    for (const auto& n : r.nets) {
      if (n.side != s) continue;
      out += fmt::format("  {:<5} {:<7} {:>4} {:>4} {:>10.2f}\n", net_name(s, n.net),
                         n.kind == NetKind::Ring ? "ring" : "direct", n.kind == NetKind::Ring ? fmt::format("{}", n.ring) : "-",
                         n.pad + 1, n.routed_length_mm());
    }
  }
  return out;
}

std::string report_json(const Routing& r) {
  nlohmann::ordered_json j;
  for (Side s : {Side::Front, Side::Back}) {
    const ClearanceReport& c = s == Side::Front ? r.front_clearance : r.back_clearance;
    nlohmann::ordered_json side;
    side["min_clearance_mm"] = c.min_clearance_mm;
    side["worst_pair"] = {c.net_a, c.net_b};
    side["worst_at"] = {c.where.x, c.where.y};
    side["nets"] = nlohmann::ordered_json::array();
    for (const auto& n : r.nets) {
      if (n.side != s) continue;
      side["nets"].push_back({{"net", n.net},
                              {"name", net_name(s, n.net)},
                              {"kind", n.kind == NetKind::Ring ? "ring" : "direct"},
                              {"ring", n.kind == NetKind::Ring ? nlohmann::ordered_json(n.ring) : nlohmann::ordered_json()},
                              {"pin", n.pad + 1},
                              {"length_mm", n.routed_length_mm()}});
    }
    j[side_name(s)] = std::move(side);
  }
  return j.dump(2) + "\n";
}

}  // namespace flexglove::routing
