#include "flexglove/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>

#include "flexglove/error.hpp"

namespace bg = boost::geometry;

namespace flexglove::geom {
namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BRing = bg::model::ring<BPoint, false, false>;
using BPolygon = bg::model::polygon<BPoint, false, false>;
using BMulti = bg::model::multi_polygon<BPolygon>;
using BLine = bg::model::linestring<BPoint>;
using BMultiLine = bg::model::multi_linestring<BLine>;

BPoint to_b(Point2 p) { return {p.x, p.y}; }
Point2 from_b(const BPoint& p) { return {p.x(), p.y()}; }

template <typename R>
void fill_ring(R& out, const Ring& in) {
  out.clear();
  out.reserve(in.size());
  for (auto p : in) out.push_back(to_b(p));
}

BPolygon to_b(const Polygon& p) {
  BPolygon out;
  fill_ring(out.outer(), p.exterior);
  for (const auto& h : p.holes) {
    out.inners().emplace_back();
    fill_ring(out.inners().back(), h);
  }
  return out;
}

BMulti to_b(const PolygonSet& ps) {
  BMulti out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(to_b(p));
  return out;
}

// Snaps to the grid, drops consecutive duplicates and collinear spikes.
Ring clean_ring(const auto& in) {
  Ring r;
  r.reserve(in.size());
  for (const auto& bp : in) {
    Point2 p = snap(from_b(bp));
    if (r.empty() || !(r.back() == p)) r.push_back(p);
  }
  while (r.size() > 1 && r.front() == r.back()) r.pop_back();
  // remove zero-area spikes (a, b, a)
  bool changed = true;
  while (changed && r.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < r.size() && r.size() >= 3; ++i) {
      const std::size_t n = r.size();
      const Point2 a = r[(i + n - 1) % n];
      const Point2 c = r[(i + 1) % n];
      if (a == c) {
        r.erase(r.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return r;
}

PolygonSet from_b(const BMulti& m, double sliver = kSliverAreaMm2) {
  PolygonSet out;
  out.reserve(m.size());
  for (const auto& bp : m) {
    Polygon p;
    p.exterior = clean_ring(bp.outer());
    if (p.exterior.size() < 3 || std::abs(signed_area(p.exterior)) < sliver) continue;
    for (const auto& h : bp.inners()) {
      Ring hr = clean_ring(h);
      if (hr.size() < 3 || std::abs(signed_area(hr)) < sliver) continue;
      p.holes.push_back(std::move(hr));
    }
    out.push_back(normalize_orientation(std::move(p)));
  }
  return out;
}

}  // namespace

int points_per_circle(double radius, double chord_tol) {
  const double r = std::abs(radius);
  if (r <= chord_tol) return 32;
  const double half_angle = std::acos(1.0 - chord_tol / r);
  const int n = static_cast<int>(std::ceil(std::numbers::pi / half_angle));
  return std::clamp(n, 32, 8192);
}

namespace {

template <typename Geometry>
BMulti buffer_n(const Geometry& g, double delta, int n) {
  bg::strategy::buffer::distance_symmetric<double> distance(delta);
  bg::strategy::buffer::join_round join(n);
  bg::strategy::buffer::end_round end(n);
  bg::strategy::buffer::point_circle point(n);
  bg::strategy::buffer::side_straight side;
  BMulti out;
  bg::buffer(g, out, distance, side, join, end, point);
  return out;
}

template <typename Geometry>
BMulti buffer(const Geometry& g, double delta, double chord_tol) {
  return buffer_n(g, delta, points_per_circle(delta, chord_tol));
}

}  // namespace

Point2 normalized(Point2 a) {
  const double n = norm(a);
  if (n == 0.0) return {0.0, 0.0};
  return {a.x / n, a.y / n};
}

double snap(double v) {
  const double s = std::round(v / kGridMm) * kGridMm;
  return s == 0.0 ? 0.0 : s;  // no negative zero
}

Point2 snap(Point2 p) { return {snap(p.x), snap(p.y)}; }

double signed_area(const Ring& ring) {
  const std::size_t n = ring.size();
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) a += cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * a;
}

double area(const Polygon& p) {
  double a = std::abs(signed_area(p.exterior));
  for (const auto& h : p.holes) a -= std::abs(signed_area(h));
  return a;
}

double area(const PolygonSet& ps) {
  double a = 0.0;
  for (const auto& p : ps) a += area(p);
  return a;
}

double perimeter(const Ring& ring) {
  double l = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) l += dist(ring[i], ring[(i + 1) % ring.size()]);
  return l;
}

double length(std::span<const Point2> path) {
  double l = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) l += dist(path[i - 1], path[i]);
  return l;
}

Box bounds(std::span<const Point2> pts) {
  Box b{{INFINITY, INFINITY}, {-INFINITY, -INFINITY}};
  for (auto p : pts) {
    b.min.x = std::min(b.min.x, p.x);
    b.min.y = std::min(b.min.y, p.y);
    b.max.x = std::max(b.max.x, p.x);
    b.max.y = std::max(b.max.y, p.y);
  }
  return b;
}

Box bounds(const Polygon& p) { return bounds(p.exterior); }

Box bounds(const PolygonSet& ps) {
  Box b{{INFINITY, INFINITY}, {-INFINITY, -INFINITY}};
  for (const auto& p : ps) {
    const Box pb = bounds(p);
    b.min.x = std::min(b.min.x, pb.min.x);
    b.min.y = std::min(b.min.y, pb.min.y);
    b.max.x = std::max(b.max.x, pb.max.x);
    b.max.y = std::max(b.max.y, pb.max.y);
  }
  return b;
}

void validate(const Polygon& p) {
  auto check_ring = [](const Ring& r, const char* what) {
    if (r.size() < 3) throw GeometryError(std::string(what) + " ring has fewer than 3 vertices");
    for (auto q : r)
      if (!std::isfinite(q.x) || !std::isfinite(q.y))
        throw GeometryError(std::string(what) + " ring has a non-finite coordinate");
  };
  check_ring(p.exterior, "exterior");
  if (signed_area(p.exterior) <= 0.0) throw GeometryError("exterior ring is not counter-clockwise");
  for (const auto& h : p.holes) {
    check_ring(h, "hole");
    if (signed_area(h) >= 0.0) throw GeometryError("hole ring is not clockwise");
  }
  std::string reason;
  if (!bg::is_valid(to_b(p), reason)) throw GeometryError("invalid polygon: " + reason);
}

Polygon normalize_orientation(Polygon p) {
  if (signed_area(p.exterior) < 0.0) std::reverse(p.exterior.begin(), p.exterior.end());
  for (auto& h : p.holes)
    if (signed_area(h) > 0.0) std::reverse(h.begin(), h.end());
  return p;
}

bool contains(const Polygon& p, Point2 q, double tol) {
  auto on_ring = [&](const Ring& r) {
    for (std::size_t i = 0; i < r.size(); ++i)
      if (point_segment_distance(q, r[i], r[(i + 1) % r.size()]) <= tol) return true;
    return false;
  };
  auto inside_ring = [&](const Ring& r) {
    bool in = false;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
      if ((r[i].y > q.y) != (r[j].y > q.y)) {
        const double x = r[j].x + (q.y - r[j].y) * (r[i].x - r[j].x) / (r[i].y - r[j].y);
        if (q.x < x) in = !in;
      }
    }
    return in;
  };
  if (on_ring(p.exterior)) return true;
  if (!inside_ring(p.exterior)) return false;
  for (const auto& h : p.holes) {
    if (on_ring(h)) return true;
    if (inside_ring(h)) return false;
  }
  return true;
}

bool contains(const PolygonSet& ps, Point2 q, double tol) {
  return std::any_of(ps.begin(), ps.end(), [&](const Polygon& p) { return contains(p, q, tol); });
}

bool covers(const PolygonSet& ps, std::span<const Point2> path) {
  BLine line;
  for (auto p : path) line.push_back(to_b(p));
  if (line.size() == 1) line.push_back(line.front());
  return bg::covered_by(line, to_b(ps));
}

Polygon rectangle(Point2 center, Point2 axis, double length, double width) {
  const Point2 u = normalized(axis);
  const Point2 v = perp(u);
  const Point2 hu = u * (length / 2.0);
  const Point2 hv = v * (width / 2.0);
  Polygon r;
  r.exterior = {snap(center - hu - hv), snap(center + hu - hv), snap(center + hu + hv),
                snap(center - hu + hv)};
  return normalize_orientation(std::move(r));
}

Polygon circle(Point2 center, double radius, double chord_tol) {
  const int n = points_per_circle(radius, chord_tol);
  Polygon c;
  c.exterior.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    c.exterior.push_back(snap(center + Point2{std::cos(a), std::sin(a)} * radius));
  }
  return c;
}

std::vector<Polygon> offset_polygon(const Polygon& p, double delta, double chord_tol) {
  validate(p);
  if (delta == 0.0) return {p};
  return from_b(buffer(to_b(p), delta, chord_tol));
}

std::vector<Polygon> offset_polygon_steps(const Polygon& p, double delta, int points_per_circle) {
  validate(p);
  if (points_per_circle < 4) throw GeometryError("offset needs at least 4 points per circle");
  if (delta == 0.0) return {p};
  return from_b(buffer_n(to_b(p), delta, points_per_circle));
}

PolygonSet offset(const PolygonSet& ps, double delta, double chord_tol) {
  if (ps.empty()) return {};
  for (const auto& p : ps) validate(p);
  if (delta == 0.0) return ps;
  return from_b(buffer(to_b(ps), delta, chord_tol));
}

PolygonSet boolean(const PolygonSet& a, const PolygonSet& b, BoolOp op) {
  for (const auto& p : a) validate(p);
  for (const auto& p : b) validate(p);
  BMulti ba = to_b(a);
  BMulti bb = to_b(b);
  BMulti out;
  switch (op) {
    case BoolOp::Union:
      bg::union_(ba, bb, out);
      break;
    case BoolOp::Difference:
      bg::difference(ba, bb, out);
      break;
    case BoolOp::Intersection:
      bg::intersection(ba, bb, out);
      break;
  }
  return from_b(out);
}

PolygonSet unite(const PolygonSet& ps) {
  if (ps.size() <= 1) return ps;
  for (const auto& p : ps) validate(p);
  // pairwise tree reduction keeps intermediate sizes balanced; snapping waits
  // for the final result so rounding cannot stack up between levels
  std::vector<BMulti> level;
  level.reserve(ps.size());
  for (const auto& p : ps) level.push_back(BMulti{to_b(p)});
  while (level.size() > 1) {
    std::vector<BMulti> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      BMulti out;
      bg::union_(level[i], level[i + 1], out);
      next.push_back(std::move(out));
    }
    if (level.size() % 2) next.push_back(std::move(level.back()));
    level = std::move(next);
  }
  return from_b(level.front());
}

Polygon stroke_polyline(const Polyline& line, double chord_tol) {
  if (line.vertices.size() < 2) throw GeometryError("polyline needs at least 2 vertices");
  if (!(line.width > 0.0)) throw GeometryError("polyline width must be positive");
  if (length(line.vertices) <= kGridMm) throw GeometryError("zero-length polyline");
  BLine bl;
  for (auto p : line.vertices) bl.push_back(to_b(p));
  PolygonSet out = from_b(buffer(bl, line.width / 2.0, chord_tol));
  if (out.empty()) throw GeometryError("stroke produced no polygon");
  // A self-overlapping path can still only yield one connected component.
  std::sort(out.begin(), out.end(),
            [](const Polygon& a, const Polygon& b) { return area(a) > area(b); });
  return out.front();
}

PolygonSet stroke_polylines(std::span<const Polyline> lines, double chord_tol) {
  PolygonSet parts;
  parts.reserve(lines.size());
  for (const auto& l : lines) parts.push_back(stroke_polyline(l, chord_tol));
  return unite(parts);
}

PolygonSet dilate_polylines(std::span<const Polyline> lines, double radius, double chord_tol) {
  if (lines.empty()) return {};
  BMultiLine ml;
  for (const auto& l : lines) {
    if (l.vertices.size() < 2) throw GeometryError("polyline needs at least 2 vertices");
    BLine bl;
    for (auto p : l.vertices) bl.push_back(to_b(p));
    ml.push_back(std::move(bl));
  }
  return from_b(buffer(ml, radius, chord_tol));
}

Polygon convex_hull(std::span<const Point2> points) {
  if (points.size() < 3) throw GeometryError("convex hull needs at least 3 points");
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(),
            [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  // Andrew's monotone chain, collinear points dropped
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k > 0 ? k - 1 : 0);
  if (hull.size() < 3 || signed_area(hull) <= 0.0)
    throw GeometryError("convex hull of collinear points");
  Polygon out;
  out.exterior = std::move(hull);
  return out;
}

double min_clearance(const PolygonSet& a, const PolygonSet& b) {
  if (a.empty() || b.empty()) throw GeometryError("min_clearance of an empty set");
  const BMulti ba = to_b(a);
  const BMulti bb = to_b(b);
  if (bg::intersects(ba, bb)) return 0.0;
  // Boundary-to-boundary distance with bounding-box pruning.
  struct Seg {
    Point2 a, b;
    double xmin, xmax;
  };
  auto segments = [](const PolygonSet& ps) {
    std::vector<Seg> segs;
    auto add = [&](const Ring& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        const Point2 p = r[i], q = r[(i + 1) % r.size()];
        segs.push_back({p, q, std::min(p.x, q.x), std::max(p.x, q.x)});
      }
    };
    for (const auto& p : ps) {
      add(p.exterior);
      for (const auto& h : p.holes) add(h);
    }
    std::sort(segs.begin(), segs.end(), [](const Seg& l, const Seg& r) { return l.xmin < r.xmin; });
    return segs;
  };
  const auto sa = segments(a);
  const auto sb = segments(b);
  double best = INFINITY;
  for (const auto& s : sa) {
    for (const auto& t : sb) {
      if (t.xmin > s.xmax + best) break;
      if (t.xmax < s.xmin - best) continue;
      const double ylo_s = std::min(s.a.y, s.b.y), yhi_s = std::max(s.a.y, s.b.y);
      const double ylo_t = std::min(t.a.y, t.b.y), yhi_t = std::max(t.a.y, t.b.y);
      if (ylo_t > yhi_s + best || yhi_t < ylo_s - best) continue;
      best = std::min(best, segment_segment_distance(s.a, s.b, t.a, t.b));
    }
  }
  return best;
}

Ring simplify_ring(const Ring& ring, double max_deviation) {
  if (ring.size() <= 4) return ring;
  // Split at vertex 0 and the vertex farthest from it, simplify both chains.
  std::size_t far = 0;
  double far_d = -1.0;
  for (std::size_t i = 1; i < ring.size(); ++i) {
    const double d = dist(ring[0], ring[i]);
    if (d > far_d) {
      far_d = d;
      far = i;
    }
  }
  std::vector<bool> keep(ring.size(), false);
  keep[0] = keep[far] = true;
  auto dp = [&](auto&& self, std::size_t i0, std::size_t i1) -> void {
    // indices modulo ring size, i1 may exceed size
    const std::size_t n = ring.size();
    double worst = -1.0;
    std::size_t worst_i = i0;
    for (std::size_t i = i0 + 1; i < i1; ++i) {
      const double d = point_segment_distance(ring[i % n], ring[i0 % n], ring[i1 % n]);
      if (d > worst) {
        worst = d;
        worst_i = i;
      }
    }
    if (worst > max_deviation) {
      keep[worst_i % n] = true;
      self(self, i0, worst_i);
      self(self, worst_i, i1);
    }
  };
  dp(dp, 0, far);
  dp(dp, far, ring.size());
  Ring out;
  for (std::size_t i = 0; i < ring.size(); ++i)
    if (keep[i]) out.push_back(ring[i]);
  return out;
}

Ring densify_ring(const Ring& ring, double max_spacing) {
  Ring out;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point2 a = ring[i], b = ring[(i + 1) % ring.size()];
    out.push_back(a);
    const int pieces = static_cast<int>(std::ceil(dist(a, b) / max_spacing));
    for (int k = 1; k < pieces; ++k) out.push_back(snap(a + (b - a) * (double(k) / pieces)));
  }
  return out;
}

Point2 closest_on_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  return dist(p, closest_on_segment(p, a, b));
}

double segment_segment_distance(Point2 a0, Point2 a1, Point2 b0, Point2 b1) {
  auto orient = [](Point2 p, Point2 q, Point2 r) { return cross(q - p, r - p); };
  const double d1 = orient(a0, a1, b0), d2 = orient(a0, a1, b1);
  const double d3 = orient(b0, b1, a0), d4 = orient(b0, b1, a1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

PathProjection project_onto_path(std::span<const Point2> path, Point2 q) {
  PathProjection best{path.front(), 0.0, dist(path.front(), q)};
  double s = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Point2 c = closest_on_segment(q, path[i - 1], path[i]);
    const double d = dist(c, q);
    if (d < best.distance) best = {c, s + dist(path[i - 1], c), d};
    s += dist(path[i - 1], path[i]);
  }
  return best;
}

Point2 point_at(std::span<const Point2> path, double s) {
  if (s <= 0.0) return path.front();
  double acc = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double l = dist(path[i - 1], path[i]);
    if (acc + l >= s && l > 0.0) return path[i - 1] + (path[i] - path[i - 1]) * ((s - acc) / l);
    acc += l;
  }
  return path.back();
}

std::vector<Point2> subpath(std::span<const Point2> path, double s0, double s1) {
  if (s1 < s0) std::swap(s0, s1);
  std::vector<Point2> out{point_at(path, s0)};
  double acc = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    acc += dist(path[i - 1], path[i]);
    if (acc > s0 && acc < s1) out.push_back(path[i]);
  }
  const Point2 end = point_at(path, s1);
  if (!(out.back() == end)) out.push_back(end);
  return out;
}

std::vector<double> line_crossings(std::span<const Point2> path, Point2 origin, Point2 dir) {
  const Point2 n = perp(normalized(dir));
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double da = dot(path[i - 1] - origin, n);
    const double db = dot(path[i] - origin, n);
    const double l = dist(path[i - 1], path[i]);
    if ((da <= 0.0 && db > 0.0) || (da >= 0.0 && db < 0.0)) out.push_back(acc + l * da / (da - db));
    acc += l;
  }
  return out;
}

std::vector<std::pair<double, double>> clip_line(const Polygon& p, Point2 origin, Point2 dir) {
  const Point2 u = normalized(dir);
  const Point2 n = perp(u);
  std::vector<double> ts;
  auto scan = [&](const Ring& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Point2 a = r[i], b = r[(i + 1) % r.size()];
      const double da = dot(a - origin, n), db = dot(b - origin, n);
      if ((da < 0.0) != (db < 0.0)) {
        const Point2 x = a + (b - a) * (da / (da - db));
        ts.push_back(dot(x - origin, u));
      }
    }
  };
  scan(p.exterior);
  for (const auto& h : p.holes) scan(h);
  std::sort(ts.begin(), ts.end());
  std::vector<std::pair<double, double>> chords;
  for (std::size_t i = 0; i + 1 < ts.size(); i += 2) chords.emplace_back(ts[i], ts[i + 1]);
  return chords;
}

}  // namespace flexglove::geom
