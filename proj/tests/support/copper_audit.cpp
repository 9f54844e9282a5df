#include "copper_audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "raster_oracle.hpp"

namespace flexglove::testing {

namespace {

using geom::Point2;

struct Seg {
  Point2 a, b;
  double r;
  int net;
  int feature;
};

double pt_seg(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double orient(Point2 a, Point2 b, Point2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

double seg_seg(const Seg& s, const Seg& t) {
  const double d1 = orient(s.a, s.b, t.a), d2 = orient(s.a, s.b, t.b);
  const double d3 = orient(t.a, t.b, s.a), d4 = orient(t.a, t.b, s.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return 0.0;
  return std::min({pt_seg(s.a, t.a, t.b), pt_seg(s.b, t.a, t.b), pt_seg(t.a, s.a, s.b), pt_seg(t.b, s.a, s.b)});
}

class Grid {
 public:
  explicit Grid(double cell) : cell_(cell) {}

  void insert(int id, const Seg& s, double grow) {
    for_cells(s, grow, [&](long long key) { cells_[key].push_back(id); });
  }

  template <typename Fn>
  void query(const Seg& s, double grow, std::vector<int>& stamp, int tag, Fn&& fn) const {
    for_cells(s, grow, [&](long long key) {
      const auto it = cells_.find(key);
      if (it == cells_.end()) return;
      for (int j : it->second) {
        if (stamp[j] == tag) continue;
        stamp[j] = tag;
        fn(j);
      }
    });
  }

 private:
  template <typename Fn>
  void for_cells(const Seg& s, double grow, Fn&& fn) const {
    const long long x0 = static_cast<long long>(std::floor((std::min(s.a.x, s.b.x) - grow) / cell_));
    const long long x1 = static_cast<long long>(std::floor((std::max(s.a.x, s.b.x) + grow) / cell_));
    const long long y0 = static_cast<long long>(std::floor((std::min(s.a.y, s.b.y) - grow) / cell_));
    const long long y1 = static_cast<long long>(std::floor((std::max(s.a.y, s.b.y) + grow) / cell_));
    for (long long y = y0; y <= y1; ++y)
      for (long long x = x0; x <= x1; ++x) fn(x * 1000003LL + y);
  }

  double cell_;
  std::unordered_map<long long, std::vector<int>> cells_;
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

CopperAudit audit_copper(const routing::SideCopper& copper, const geom::Polygon& outline, double touch_tol_mm) {
  constexpr double kReach = 1.0;
  std::vector<Seg> segs;
  std::vector<int> feature_net;
  std::vector<const geom::Ring*> area_ring;  // per feature, null for traces
  for (const auto& t : copper.traces) {
    const int f = static_cast<int>(feature_net.size());
    feature_net.push_back(t.net);
    area_ring.push_back(nullptr);
    const auto& v = t.line.vertices;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) segs.push_back({v[i], v[i + 1], t.line.width / 2, t.net, f});
    if (v.size() == 1) segs.push_back({v[0], v[0], t.line.width / 2, t.net, f});
  }
  for (const auto& a : copper.areas) {
    const int f = static_cast<int>(feature_net.size());
    feature_net.push_back(a.net);
    area_ring.push_back(&a.shape.exterior);
    const auto& v = a.shape.exterior;
    for (std::size_t i = 0; i < v.size(); ++i) segs.push_back({v[i], v[(i + 1) % v.size()], 0.0, a.net, f});
  }

  Grid grid(0.5);
  for (int i = 0; i < static_cast<int>(segs.size()); ++i) grid.insert(i, segs[i], segs[i].r + kReach / 2);

  auto inside_area = [&](Point2 p, int feature) {
    const geom::Ring* r = area_ring[feature];
    return r && inside_rings({*r}, p);
  };

  CopperAudit out;
  out.min_clearance_mm = std::numeric_limits<double>::infinity();
  UnionFind uf(static_cast<int>(feature_net.size()));
  std::vector<int> stamp(segs.size(), -1);
  for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
    const Seg& s = segs[i];
    grid.query(s, s.r + kReach / 2, stamp, i, [&](int j) {
      if (j <= i) return;
      const Seg& t = segs[j];
      if (s.feature == t.feature) return;
      double d = std::max(0.0, seg_seg(s, t) - s.r - t.r);
      if (inside_area(s.a, t.feature) || inside_area(t.a, s.feature)) d = 0.0;
      if (s.net == t.net) {
        if (d <= touch_tol_mm) uf.unite(s.feature, t.feature);
      } else if (d < out.min_clearance_mm) {
        out.min_clearance_mm = d;
        out.net_a = std::min(s.net, t.net);
        out.net_b = std::max(s.net, t.net);
      }
    });
  }

  std::map<int, std::vector<int>> by_net;
  std::map<int, int> pads;
  for (int f = 0; f < static_cast<int>(feature_net.size()); ++f) {
    by_net[feature_net[f]].push_back(f);
    if (area_ring[f]) ++pads[feature_net[f]];
  }
  for (const auto& [net, feats] : by_net) {
    const int root = uf.find(feats.front());
    bool one = std::all_of(feats.begin(), feats.end(), [&](int f) { return uf.find(f) == root; });
    if (!one || pads[net] != 1) out.disconnected.push_back(net);
  }

  // outline: distance from every copper edge, plus one inside test per feature
  Grid edges(0.5);
  std::vector<Seg> outline_segs;
  const auto& ov = outline.exterior;
  for (std::size_t i = 0; i < ov.size(); ++i) outline_segs.push_back({ov[i], ov[(i + 1) % ov.size()], 0.0, -1, -1});
  for (int i = 0; i < static_cast<int>(outline_segs.size()); ++i) edges.insert(i, outline_segs[i], kReach);
  out.min_edge_mm = kReach;
  std::vector<int> estamp(outline_segs.size(), -1);
  for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
    const Seg& s = segs[i];
    edges.query(s, s.r, estamp, i, [&](int j) {
      const double d = seg_seg(s, outline_segs[j]) - s.r;
      if (d < out.min_edge_mm) {
        out.min_edge_mm = d;
        out.edge_net = s.net;
      }
    });
  }
  std::vector<bool> seen(feature_net.size(), false);
  for (const Seg& s : segs) {
    if (seen[s.feature]) continue;
    seen[s.feature] = true;
    if (!inside_rings({ov}, s.a)) {
      out.min_edge_mm = -1.0;
      out.edge_net = s.net;
    }
  }
  return out;
}

double copper_to_rings(const routing::SideCopper& copper, const std::vector<geom::Ring>& rings, double reach_mm) {
  std::vector<Seg> segs;
  for (const auto& t : copper.traces) {
    const auto& v = t.line.vertices;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) segs.push_back({v[i], v[i + 1], t.line.width / 2, t.net, 0});
  }
  for (const auto& a : copper.areas) {
    const auto& v = a.shape.exterior;
    for (std::size_t i = 0; i < v.size(); ++i) segs.push_back({v[i], v[(i + 1) % v.size()], 0.0, a.net, 0});
  }
  std::vector<Seg> edges;
  for (const auto& r : rings)
    for (std::size_t i = 0; i < r.size(); ++i) edges.push_back({r[i], r[(i + 1) % r.size()], 0.0, -1, 0});

  Grid grid(1.0);
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) grid.insert(i, edges[i], reach_mm);
  double best = reach_mm;
  std::vector<int> stamp(edges.size(), -1);
  for (int i = 0; i < static_cast<int>(segs.size()); ++i)
    grid.query(segs[i], segs[i].r, stamp, i,
               [&](int j) { best = std::min(best, std::max(0.0, seg_seg(segs[i], edges[j]) - segs[i].r)); });
  // copper swallowed whole by a ring never comes near its edges
  std::vector<Point2> probes;
  for (const auto& t : copper.traces) probes.push_back(t.line.vertices.front());
  for (const auto& a : copper.areas) probes.push_back(a.shape.exterior.front());
  for (Point2 p : probes)
    for (const auto& r : rings)
      if (inside_rings({r}, p)) return 0.0;
  return best;
}

}  // namespace flexglove::testing
