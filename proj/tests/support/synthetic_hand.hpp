#pragma once

// Analytic right/left hand for fixtures: finger and thumb capsules, a palm
// polygon, and a forearm strip running off the bottom of the page. Ground
// truth landmarks are known exactly.

#include <array>
#include <opencv2/core.hpp>
#include <string>
#include <vector>

#include "flexglove/geometry.hpp"

namespace flexglove::testing {

using geom::Point2;

struct Capsule {
  Point2 a, b;
  double radius;
};

struct SyntheticHand {
  std::array<Point2, 21> landmarks{};  // page mm
  std::vector<Capsule> capsules;
  geom::Ring palm;
  bool left = false;

  bool inside(Point2 p) const;
};

inline constexpr double kPageWidthMm = 215.9;
inline constexpr double kPageHeightMm = 279.4;

/// The golden hand; `left` mirrors it about the page's vertical center line.
SyntheticHand default_hand(bool left = false);

struct Render {
  cv::Mat bgr;
  int margin_px = 0;
  double px_per_mm = 0.0;
};

/// White sheet on a gray surface with the hand in a skin tone.
Render render(const SyntheticHand& h, double px_per_mm, int margin_px);

/// Landmark JSON in the capture schema for a rendered image.
std::string landmark_json(const SyntheticHand& h, const Render& r);

}  // namespace flexglove::testing
