#pragma once

// Planar polygon/polyline kernel. All coordinates are millimeters in the page
// frame: origin at the page's bottom-left corner, y increasing upward.
// Results of every constructive operation are snapped to a 1 nm grid.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace flexglove::geom {

inline constexpr double kGridMm = 1e-6;           // 1 nm
inline constexpr double kChordToleranceMm = 0.02;  // arc polygonization
inline constexpr double kSliverAreaMm2 = 1e-6;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend Point2 operator*(double s, Point2 a) { return {a.x * s, a.y * s}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }
Point2 normalized(Point2 a);
/// Counter-clockwise perpendicular.
inline Point2 perp(Point2 a) { return {-a.y, a.x}; }

double snap(double v);
Point2 snap(Point2 p);

/// Open ring: the closing edge back to the first vertex is implicit.
using Ring = std::vector<Point2>;

/// Exterior counter-clockwise, holes clockwise, all rings simple.
struct Polygon {
  Ring exterior;
  std::vector<Ring> holes;
};

using PolygonSet = std::vector<Polygon>;

struct Polyline {
  std::vector<Point2> vertices;
  double width = 0.1;
};

struct Box {
  Point2 min{};
  Point2 max{};
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
};

enum class BoolOp { Union, Difference, Intersection };

// --- measures --------------------------------------------------------------

double signed_area(const Ring& ring);
double area(const Polygon& p);
double area(const PolygonSet& ps);
double perimeter(const Ring& ring);
double length(std::span<const Point2> path);
Box bounds(std::span<const Point2> pts);
Box bounds(const Polygon& p);
Box bounds(const PolygonSet& ps);

/// Throws GeometryError describing the first violated invariant.
void validate(const Polygon& p);

/// Reorients rings to the kernel convention (CCW exterior, CW holes).
Polygon normalize_orientation(Polygon p);

/// Inside or on the boundary (within `tol`).
bool contains(const Polygon& p, Point2 q, double tol = 1e-9);
bool contains(const PolygonSet& ps, Point2 q, double tol = 1e-9);
/// True when the whole open path lies inside or on the boundary of `ps`.
bool covers(const PolygonSet& ps, std::span<const Point2> path);

Polygon rectangle(Point2 center, Point2 axis, double length, double width);
Polygon circle(Point2 center, double radius, double chord_tol = kChordToleranceMm);

// --- constructive operations ----------------------------------------------

/// Round-joined offset. Negative `delta` insets; the result may split or
/// vanish (empty list).
std::vector<Polygon> offset_polygon(const Polygon& p, double delta,
                                    double chord_tol = kChordToleranceMm);
PolygonSet offset(const PolygonSet& ps, double delta, double chord_tol = kChordToleranceMm);
/// Offset with a fixed arc resolution. Offsets of one polygon that share
/// `points_per_circle` place arc vertices at identical angles, so nested
/// offsets keep their exact spacing up to cos(step / 2).
std::vector<Polygon> offset_polygon_steps(const Polygon& p, double delta, int points_per_circle);
/// Arc resolution that keeps the chord sagitta at `radius` under `chord_tol`.
int points_per_circle(double radius, double chord_tol);

PolygonSet boolean(const PolygonSet& a, const PolygonSet& b, BoolOp op);
PolygonSet unite(const PolygonSet& ps);

/// Round caps and joins. Throws on a zero-length path.
Polygon stroke_polyline(const Polyline& line, double chord_tol = kChordToleranceMm);
/// Union of many strokes.
PolygonSet stroke_polylines(std::span<const Polyline> lines,
                            double chord_tol = kChordToleranceMm);
/// Dilates the centerlines by `radius` (round), unioned.
PolygonSet dilate_polylines(std::span<const Polyline> lines, double radius,
                            double chord_tol = kChordToleranceMm);

Polygon convex_hull(std::span<const Point2> points);

/// Minimum Euclidean distance between two polygon sets, 0 when they overlap.
double min_clearance(const PolygonSet& a, const PolygonSet& b);

/// Douglas-Peucker simplification of a closed ring.
Ring simplify_ring(const Ring& ring, double max_deviation);
/// Inserts vertices so no edge is longer than `max_spacing`.
Ring densify_ring(const Ring& ring, double max_spacing);

// --- polyline helpers ------------------------------------------------------

double point_segment_distance(Point2 p, Point2 a, Point2 b);
Point2 closest_on_segment(Point2 p, Point2 a, Point2 b);
double segment_segment_distance(Point2 a0, Point2 a1, Point2 b0, Point2 b1);

/// Nearest point on an open path, with its arc-length parameter.
struct PathProjection {
  Point2 point;
  double s = 0.0;
  double distance = 0.0;
};
PathProjection project_onto_path(std::span<const Point2> path, Point2 q);

/// Point at arc length `s` (clamped).
Point2 point_at(std::span<const Point2> path, double s);
/// Sub-path between two arc-length parameters, inclusive of the cut points.
std::vector<Point2> subpath(std::span<const Point2> path, double s0, double s1);

/// Arc-length parameters at which `path` crosses the infinite line through
/// `origin` with direction `dir`, ascending.
std::vector<double> line_crossings(std::span<const Point2> path, Point2 origin, Point2 dir);

/// Clips the infinite line through `origin` along `dir` to the polygon;
/// returns the chords as (t0, t1) parameters along `dir`, ascending.
std::vector<std::pair<double, double>> clip_line(const Polygon& p, Point2 origin, Point2 dir);

}  // namespace flexglove::geom
