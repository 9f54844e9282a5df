#pragma once

// The checked-in golden hand, captured once per test binary.

#include "flexglove/hand_capture.hpp"

namespace flexglove::testing {

inline constexpr const char* kFixtureImage = "tests/fixtures/hand.png";
inline constexpr const char* kFixtureLandmarks = "tests/fixtures/hand_landmarks.json";

const capture::HandModel& golden_hand();

/// Reflection about the vertical page centre line, with handedness flipped.
capture::HandModel mirrored(const capture::HandModel& h);

geom::Point2 mirror_point(const capture::HandModel& h, geom::Point2 p);

}  // namespace flexglove::testing
