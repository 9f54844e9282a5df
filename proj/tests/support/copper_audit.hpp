#pragma once

// Independent copper checks over a SideCopper: own segment distances and a
// uniform grid hash, no polygon kernel.

#include <string>
#include <vector>

#include "flexglove/routing.hpp"

namespace flexglove::testing {

struct CopperAudit {
  double min_clearance_mm = 0.0;  // copper edge to copper edge, distinct nets
  int net_a = -1, net_b = -1;
  /// Nets whose copper is split or does not touch exactly one pad.
  std::vector<int> disconnected;
  /// Smallest distance from a trace edge or pad to the outline, and the net.
  double min_edge_mm = 0.0;
  int edge_net = -1;
};

/// Smallest distance from any copper edge to the given rings (0 if a ring
/// edge touches copper or copper lies inside a ring). Distances beyond
/// `reach_mm` report as `reach_mm`.
double copper_to_rings(const routing::SideCopper& copper, const std::vector<geom::Ring>& rings, double reach_mm);

CopperAudit audit_copper(const routing::SideCopper& copper, const geom::Polygon& outline, double touch_tol_mm);

}  // namespace flexglove::testing
