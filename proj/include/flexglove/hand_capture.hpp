#pragma once

// Photo + landmark file -> calibrated HandModel in the page frame (mm).

#include <array>
#include <filesystem>
#include <opencv2/core.hpp>
#include <string>
#include <vector>

#include "flexglove/geometry.hpp"

namespace flexglove::capture {

using geom::Point2;
using geom::Polygon;

enum class Handedness { Left, Right };

const char* handedness_name(Handedness h);

/// Standard 21-point hand topology.
namespace lm {
inline constexpr int kWrist = 0;
inline constexpr int kThumbCmc = 1, kThumbMcp = 2, kThumbIp = 3, kThumbTip = 4;
inline constexpr int kIndexMcp = 5, kMiddleMcp = 9, kRingMcp = 13, kLittleMcp = 17;
/// MCP landmark of finger f (0 = index .. 3 = little); +1 PIP, +2 DIP, +3 tip.
inline constexpr int mcp(int finger) { return 5 + 4 * finger; }
}  // namespace lm

struct CaptureConfig {
  double sheet_width_in = 8.5;
  double sheet_height_in = 11.0;
  std::array<int, 3> hsv_lo{0, 40, 60};     // OpenCV 8-bit HSV (H in 0..179)
  std::array<int, 3> hsv_hi{25, 255, 255};
  double min_mask_area_mm2 = 2000.0;
  double sheet_threshold = 0.8;             // fraction of the 90th-percentile luminance
  double max_scale_disagreement = 0.02;
  double simplify_mm = 0.1;
  double max_vertex_spacing_mm = 1.0;
  int close_kernel_px = 3;

  void validate() const;
};

/// Sheet detection result. Quad corners are image coordinates with pixel
/// edges on integers, ordered top-left, top-right, bottom-right, bottom-left.
struct Calibration {
  double px_per_mm = 0.0;
  double scale_from_width = 0.0;
  double scale_from_height = 0.0;
  std::array<Point2, 4> quad{};
  cv::Size image_size;
  cv::Size page_size;        // rectified raster, px
  double page_width_mm = 0.0;
  double page_height_mm = 0.0;
  cv::Matx33d homography;    // image edge coords -> page raster edge coords
};

Calibration calibrate_scale(const cv::Mat& bgr, const CaptureConfig& cfg);

/// Perspective-rectified page raster at the calibrated scale.
cv::Mat rectify(const cv::Mat& bgr, const Calibration& cal);

/// Binary (0/255) mask of the hand on a rectified page raster.
cv::Mat segment_hand(const cv::Mat& page_bgr, double px_per_mm, const CaptureConfig& cfg);

/// Outer boundary of a page-raster mask as a dense polygon in mm.
Polygon extract_contour(const cv::Mat& mask, double px_per_mm, const CaptureConfig& cfg = {});

/// Page raster pixel-edge coordinates -> page mm (y up).
Point2 raster_to_mm(double u, double v, int raster_height_px, double px_per_mm);

struct LandmarkFile {
  Handedness handedness = Handedness::Right;
  int image_width = 0;
  int image_height = 0;
  std::vector<Point2> normalized;  // [0,1], y down
};

LandmarkFile parse_landmarks(const std::string& json_text);
LandmarkFile load_landmarks(const std::filesystem::path& path);

/// Normalized landmark coordinates -> page mm via the calibration homography.
std::array<Point2, 21> landmarks_to_page(const LandmarkFile& f, const Calibration& cal);

struct HandModel {
  double px_per_mm = 0.0;
  double page_width_mm = 0.0;
  double page_height_mm = 0.0;
  std::array<Point2, 21> landmarks{};
  Handedness handedness = Handedness::Right;
  cv::Mat mask;  // page raster, 0/255
  Polygon contour;
};

/// Full capture from an in-memory image.
HandModel capture_hand(const cv::Mat& bgr, const LandmarkFile& landmarks, const CaptureConfig& cfg);
HandModel capture_hand(const std::filesystem::path& image, const std::filesystem::path& landmarks,
                  const CaptureConfig& cfg);

/// Throws CaptureError when a HandModel invariant does not hold.
void check_invariants(const HandModel& h);

}  // namespace flexglove::capture
