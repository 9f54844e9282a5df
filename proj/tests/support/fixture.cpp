#include "fixture.hpp"

#include <algorithm>
#include <opencv2/core.hpp>

namespace flexglove::testing {

const capture::HandModel& golden_hand() {
  static const capture::HandModel hand = capture::capture_hand(std::filesystem::path(kFixtureImage), std::filesystem::path(kFixtureLandmarks), {});
  return hand;
}

geom::Point2 mirror_point(const capture::HandModel& h, geom::Point2 p) { return {h.page_width_mm - p.x, p.y}; }

capture::HandModel mirrored(const capture::HandModel& h) {
  capture::HandModel m = h;
  for (auto& p : m.landmarks) p = mirror_point(h, p);
  for (auto& p : m.contour.exterior) p = mirror_point(h, p);
  std::reverse(m.contour.exterior.begin(), m.contour.exterior.end());
  m.handedness = h.handedness == capture::Handedness::Right ? capture::Handedness::Left : capture::Handedness::Right;
  if (!h.mask.empty()) cv::flip(h.mask, m.mask, 1);
  return m;
}

}  // namespace flexglove::testing
