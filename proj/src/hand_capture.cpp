#include "flexglove/hand_capture.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "flexglove/error.hpp"
#include "flexglove/io.hpp"

namespace flexglove::capture {

namespace {

constexpr double kMmPerInch = 25.4;
constexpr int kMinSheetLuminance = 128;

// Largest 8-connected foreground component of a 0/255 mask, as 0/255.
cv::Mat largest_component(const cv::Mat& bin, int* area_out) {
  cv::Mat labels, stats, centroids;
  const int n = cv::connectedComponentsWithStats(bin, labels, stats, centroids, 8, CV_32S);
  int best = 0, best_area = 0;
  for (int i = 1; i < n; ++i) {
    const int a = stats.at<int>(i, cv::CC_STAT_AREA);
    if (a > best_area) {
      best_area = a;
      best = i;
    }
  }
  if (area_out) *area_out = best_area;
  if (best == 0) return cv::Mat::zeros(bin.size(), CV_8U);
  cv::Mat out = labels == best;
  return out;
}

std::array<Point2, 4> order_corners(const std::vector<cv::Point>& pts) {
  // top-left minimizes x+y, bottom-right maximizes it; top-right minimizes y-x
  std::array<Point2, 4> q{};
  auto key_best = [&](auto key) {
    return *std::min_element(pts.begin(), pts.end(), [&](cv::Point a, cv::Point b) { return key(a) < key(b); });
  };
  const cv::Point tl = key_best([](cv::Point p) { return p.x + p.y; });
  const cv::Point br = key_best([](cv::Point p) { return -(p.x + p.y); });
  const cv::Point tr = key_best([](cv::Point p) { return p.y - p.x; });
  const cv::Point bl = key_best([](cv::Point p) { return p.x - p.y; });
  q = {Point2{double(tl.x), double(tl.y)}, Point2{double(tr.x), double(tr.y)}, Point2{double(br.x), double(br.y)},
       Point2{double(bl.x), double(bl.y)}};
  return q;
}

}  // namespace

const char* handedness_name(Handedness h) { return h == Handedness::Left ? "left" : "right"; }

void CaptureConfig::validate() const {
  if (!(sheet_width_in > 0.0) || !(sheet_height_in > 0.0))
    throw SchemaError(Stage::Config, "capture: sheet dimensions must be > 0");
  for (int k = 0; k < 3; ++k)
    if (hsv_lo[k] > hsv_hi[k]) throw SchemaError(Stage::Config, "capture: hsv_lo must be <= hsv_hi componentwise");
  if (!(sheet_threshold > 0.0 && sheet_threshold <= 1.0))
    throw SchemaError(Stage::Config, "capture: sheet_threshold must be in (0, 1]");
  if (!(simplify_mm > 0.0) || !(max_vertex_spacing_mm > 0.0) || close_kernel_px < 1)
    throw SchemaError(Stage::Config, "capture: contour parameters must be positive");
}

Calibration calibrate_scale(const cv::Mat& bgr, const CaptureConfig& cfg) {
  cfg.validate();
  if (bgr.empty() || bgr.type() != CV_8UC3) throw CaptureError("calibration: expected an 8-bit 3-channel image");
  cv::Mat gray;
  cv::cvtColor(bgr, gray, cv::COLOR_BGR2GRAY);

  int hist[256] = {0};
  for (int y = 0; y < gray.rows; ++y) {
    const auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) ++hist[row[x]];
  }
  const long long total = static_cast<long long>(gray.rows) * gray.cols;
  long long acc = 0;
  int p90 = 255;
  for (int v = 0; v < 256; ++v) {
    acc += hist[v];
    if (acc * 10 >= total * 9) {
      p90 = v;
      break;
    }
  }
  if (p90 < kMinSheetLuminance) throw CaptureError("calibration: no bright sheet found (90th-percentile luminance too low)");
  cv::Mat bright = gray >= std::ceil(cfg.sheet_threshold * p90);
  int area = 0;
  const cv::Mat sheet = largest_component(bright, &area);
  if (area < total / 20) throw CaptureError("calibration: no quadrilateral sheet region found");

  std::vector<std::vector<cv::Point>> contours;
  cv::findContours(sheet, contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_SIMPLE);
  std::vector<cv::Point> all;
  for (const auto& c : contours) all.insert(all.end(), c.begin(), c.end());
  std::vector<cv::Point> hull;
  cv::convexHull(all, hull);
  std::vector<cv::Point> quad;
  const double peri = cv::arcLength(hull, true);
  for (double eps = 0.005; eps <= 0.1; eps += 0.005) {
    cv::approxPolyDP(hull, quad, eps * peri, true);
    if (quad.size() <= 4) break;
  }
  if (quad.size() != 4) throw CaptureError("calibration: sheet outline is not a quadrilateral");
  const double hull_area = cv::contourArea(hull), quad_area = cv::contourArea(quad);
  if (quad_area < 0.9 * hull_area) throw CaptureError("calibration: sheet outline is not a quadrilateral");

  Calibration cal;
  cal.image_size = bgr.size();
  cal.quad = order_corners(quad);
  // pixel centers -> outer pixel edges
  Point2 c{};
  for (auto p : cal.quad) c = c + p * 0.25;
  for (auto& p : cal.quad) p = p + Point2{p.x < c.x ? -0.5 : 0.5, p.y < c.y ? -0.5 : 0.5} + Point2{0.5, 0.5};

  const double w_px = 0.5 * (geom::dist(cal.quad[0], cal.quad[1]) + geom::dist(cal.quad[3], cal.quad[2]));
  const double h_px = 0.5 * (geom::dist(cal.quad[0], cal.quad[3]) + geom::dist(cal.quad[1], cal.quad[2]));
  double w_mm = cfg.sheet_width_in * kMmPerInch, h_mm = cfg.sheet_height_in * kMmPerInch;
  if ((w_px > h_px) != (w_mm > h_mm)) std::swap(w_mm, h_mm);
  cal.scale_from_width = w_px / w_mm;
  cal.scale_from_height = h_px / h_mm;
  const double mean = 0.5 * (cal.scale_from_width + cal.scale_from_height);
  if (std::abs(cal.scale_from_width - cal.scale_from_height) > cfg.max_scale_disagreement * mean)
    throw CaptureError(fmt::format(
        "calibration: width and height scales disagree ({:.4f} vs {:.4f} px/mm); photo is skewed or the sheet size "
        "is wrong",
        cal.scale_from_width, cal.scale_from_height));
  cal.px_per_mm = mean;
  cal.page_width_mm = w_mm;
  cal.page_height_mm = h_mm;
  cal.page_size = cv::Size(static_cast<int>(std::lround(w_mm * mean)), static_cast<int>(std::lround(h_mm * mean)));

  const cv::Point2f src[4] = {{float(cal.quad[0].x), float(cal.quad[0].y)},
                              {float(cal.quad[1].x), float(cal.quad[1].y)},
                              {float(cal.quad[2].x), float(cal.quad[2].y)},
                              {float(cal.quad[3].x), float(cal.quad[3].y)}};
  const float W = float(cal.page_size.width), H = float(cal.page_size.height);
  const cv::Point2f dst[4] = {{0, 0}, {W, 0}, {W, H}, {0, H}};
  cal.homography = cv::Matx33d(cv::getPerspectiveTransform(src, dst));
  return cal;
}

cv::Mat rectify(const cv::Mat& bgr, const Calibration& cal) {
  // warpPerspective works on pixel centers; shift edge coords by half a pixel
  const cv::Matx33d to_edge(1, 0, 0.5, 0, 1, 0.5, 0, 0, 1), to_center(1, 0, -0.5, 0, 1, -0.5, 0, 0, 1);
  const cv::Matx33d h = to_center * cal.homography * to_edge;
  cv::Mat page;
  cv::warpPerspective(bgr, page, cv::Mat(h), cal.page_size, cv::INTER_LINEAR, cv::BORDER_REPLICATE);
  return page;
}

cv::Mat segment_hand(const cv::Mat& page_bgr, double px_per_mm, const CaptureConfig& cfg) {
  cfg.validate();
  cv::Mat hsv, band;
  cv::cvtColor(page_bgr, hsv, cv::COLOR_BGR2HSV);
  cv::inRange(hsv, cv::Scalar(cfg.hsv_lo[0], cfg.hsv_lo[1], cfg.hsv_lo[2]),
              cv::Scalar(cfg.hsv_hi[0], cfg.hsv_hi[1], cfg.hsv_hi[2]), band);
  const cv::Mat kernel = cv::getStructuringElement(cv::MORPH_RECT, {cfg.close_kernel_px, cfg.close_kernel_px});
  cv::morphologyEx(band, band, cv::MORPH_CLOSE, kernel);
  int area_px = 0;
  cv::Mat comp = largest_component(band, &area_px);
  const double area_mm2 = area_px / (px_per_mm * px_per_mm);
  if (area_px == 0 || area_mm2 < cfg.min_mask_area_mm2)
    throw CaptureError(fmt::format("segmentation: no hand region above {:.0f} mm^2 (largest {:.1f} mm^2)",
                                   cfg.min_mask_area_mm2, area_mm2));
  std::vector<std::vector<cv::Point>> outer;
  cv::findContours(comp.clone(), outer, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_NONE);
  cv::Mat filled = cv::Mat::zeros(comp.size(), CV_8U);
  cv::drawContours(filled, outer, -1, cv::Scalar(255), cv::FILLED, cv::LINE_8);
  return filled;
}

Point2 raster_to_mm(double u, double v, int raster_height_px, double px_per_mm) {
  return {u / px_per_mm, (raster_height_px - v) / px_per_mm};
}

Polygon extract_contour(const cv::Mat& mask, double px_per_mm, const CaptureConfig& cfg) {
  if (mask.empty() || cv::countNonZero(mask) == 0) throw CaptureError("contour: empty mask");
  std::vector<std::vector<cv::Point>> contours;
  cv::findContours(mask.clone(), contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_NONE);
  const auto it = std::max_element(contours.begin(), contours.end(), [](const auto& a, const auto& b) {
    return std::abs(cv::contourArea(a)) < std::abs(cv::contourArea(b));
  });
  if (it == contours.end() || it->size() < 3) throw CaptureError("contour: mask region too small to trace");
  geom::Ring ring;
  ring.reserve(it->size());
  for (const cv::Point& p : *it) ring.push_back(raster_to_mm(p.x + 0.5, p.y + 0.5, mask.rows, px_per_mm));
  ring = geom::simplify_ring(ring, cfg.simplify_mm);
  Polygon poly = geom::normalize_orientation(Polygon{ring, {}});
  // boundary pixel centers sit half a pixel inside the true edge
  auto grown = geom::offset_polygon(poly, 0.5 / px_per_mm);
  if (grown.empty()) throw CaptureError("contour: offset collapsed the outline");
  const auto largest = std::max_element(grown.begin(), grown.end(),
                                        [](const Polygon& a, const Polygon& b) { return geom::area(a) < geom::area(b); });
  Polygon out{geom::densify_ring(largest->exterior, cfg.max_vertex_spacing_mm), {}};
  for (auto& p : out.exterior) p = geom::snap(p);
  geom::validate(out);
  return out;
}

LandmarkFile parse_landmarks(const std::string& json_text) {
  using nlohmann::json;
  auto fail = [](const std::string& why) { return SchemaError(Stage::Landmarks, "landmarks: " + why); };
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception&) {
    throw fail("not valid JSON");
  }
  if (!j.is_object()) throw fail("expected an object");
  LandmarkFile f;
  if (!j.contains("handedness") || !j["handedness"].is_string()) throw fail("missing handedness");
  const std::string h = j["handedness"].get<std::string>();
  if (h == "left")
    f.handedness = Handedness::Left;
  else if (h == "right")
    f.handedness = Handedness::Right;
  else
    throw fail("unknown handedness '" + h + "'");
  for (const char* k : {"image_width", "image_height"})
    if (!j.contains(k) || !j[k].is_number_integer() || j[k].get<long long>() <= 0)
      throw fail(std::string(k) + " must be a positive integer");
  f.image_width = j["image_width"].get<int>();
  f.image_height = j["image_height"].get<int>();
  if (!j.contains("landmarks") || !j["landmarks"].is_array()) throw fail("missing landmarks array");
  if (j["landmarks"].size() != 21) throw fail(fmt::format("expected 21 landmarks, got {}", j["landmarks"].size()));
  for (std::size_t i = 0; i < 21; ++i) {
    const auto& p = j["landmarks"][i];
    if (!p.is_object() || !p.contains("x") || !p.contains("y") || !p["x"].is_number() || !p["y"].is_number())
      throw fail(fmt::format("landmark {} needs numeric x and y", i));
    const double x = p["x"].get<double>(), y = p["y"].get<double>();
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
      throw fail(fmt::format("landmark {} outside [0,1]: ({}, {})", i, x, y));
    f.normalized.push_back({x, y});
  }
  return f;
}

LandmarkFile load_landmarks(const std::filesystem::path& path) {
  return parse_landmarks(io::read_text(path, Stage::Landmarks, "landmarks"));
}

std::array<Point2, 21> landmarks_to_page(const LandmarkFile& f, const Calibration& cal) {
  std::array<Point2, 21> out{};
  for (std::size_t i = 0; i < 21; ++i) {
    const cv::Vec3d src(f.normalized[i].x * cal.image_size.width, f.normalized[i].y * cal.image_size.height, 1.0);
    const cv::Vec3d d = cal.homography * src;
    out[i] = geom::snap(raster_to_mm(d[0] / d[2], d[1] / d[2], cal.page_size.height, cal.px_per_mm));
  }
  return out;
}

void check_invariants(const HandModel& h) {
  geom::validate(h.contour);
  geom::Box b = geom::bounds(h.contour);
  for (std::size_t i = 0; i < h.landmarks.size(); ++i) {
    const Point2 p = h.landmarks[i];
    if (p.x < b.min.x - 5 || p.x > b.max.x + 5 || p.y < b.min.y - 5 || p.y > b.max.y + 5)
      throw CaptureError(fmt::format("landmark {} at ({:.2f}, {:.2f}) mm lies outside the hand outline", i, p.x, p.y));
  }
}

HandModel capture_hand(const cv::Mat& bgr, const LandmarkFile& landmarks, const CaptureConfig& cfg) {
  const Calibration cal = calibrate_scale(bgr, cfg);
  const cv::Mat page = rectify(bgr, cal);
  HandModel h;
  h.px_per_mm = cal.px_per_mm;
  h.page_width_mm = cal.page_size.width / cal.px_per_mm;
  h.page_height_mm = cal.page_size.height / cal.px_per_mm;
  h.mask = segment_hand(page, cal.px_per_mm, cfg);
  h.contour = extract_contour(h.mask, cal.px_per_mm, cfg);
  h.landmarks = landmarks_to_page(landmarks, cal);
  h.handedness = landmarks.handedness;
  check_invariants(h);
  return h;
}

HandModel capture_hand(const std::filesystem::path& image, const std::filesystem::path& landmarks,
                  const CaptureConfig& cfg) {
  const LandmarkFile lf = load_landmarks(landmarks);
  if (!std::filesystem::exists(image)) throw SchemaError(Stage::Capture, "image: file not found: " + image.string());
  const cv::Mat bgr = cv::imread(image.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw CaptureError("image: cannot decode " + image.string());
  return capture_hand(bgr, lf, cfg);
}

}  // namespace flexglove::capture
