#pragma once

// Resistive crossbar readout: piezoresistive response, ideal zero-potential
// scan, scripted press streams, and press-window analytics.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace flexglove::readout {

enum class Phase { Loading, Unloading };

/// Two log-linear segments in ln(1 + F/F_ref). Defaults are read off the
/// characterization plot axes and are approximate.
struct ResponseModel {
  double r0_ohm = 1200.0;          // F = 0
  double f_break_n = 20.0;         // segment boundary
  double r_break_ohm = 700.0;
  double f_max_n = 200.0;
  double r_max_ohm = 500.0;        // F = f_max
  double f_ref_n = 1.0;
  double hysteresis_ohm = 30.0;    // added on unloading
  double contact_area_cm2 = 9.0;

  void validate() const;
};

struct Resistance {
  double ohm = 0.0;
  bool clamped = false;  // F was outside [0, f_max]
};

Resistance r_of_f(const ResponseModel& model, double force_n, Phase phase = Phase::Loading);

struct CircuitParams {
  double v_drive = 1.0;
  double r_feedback_ohm = 1000.0;
  int adc_bits = 12;
  double full_scale_v = 2.2;

  double lsb() const;
  int max_count() const;
};

struct CrossbarState {
  int rows = 16;
  int cols = 16;
  std::vector<double> r;  // row-major, ohms

  CrossbarState() = default;
  CrossbarState(int rows, int cols, double r_off);
  double& at(int i, int j) { return r[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return r[static_cast<std::size_t>(i) * cols + j]; }
};

struct PressureFrame {
  double t = 0.0;
  int rows = 0;
  int cols = 0;
  std::vector<int> counts;  // row-major

  int at(int i, int j) const { return counts[static_cast<std::size_t>(i) * cols + j]; }
  double mean() const;
};

/// Transimpedance output magnitude at every node before clamping, volts.
std::vector<double> ideal_voltages(const CrossbarState& s, const CircuitParams& c);

PressureFrame scan(const CrossbarState& s, const CircuitParams& c, double t = 0.0);

/// Which crossbar cells belong to each named sensing region.
struct TaxelMap {
  int rows = 16;
  int cols = 16;
  std::map<std::string, std::vector<std::pair<int, int>>> regions;
};

struct PressStep {
  std::string region;
  double force_n = 0.0;
  double start_s = 0.0;
  double period_s = 4.0;
  double hold_s = 1.5;
  double ramp_s = 0.5;
  int cycles = 1;
};

struct PressScript {
  double rate_hz = 50.0 / 1.3;
  double duration_s = 0.0;  // 0: end of last step
  double noise_ohm = 0.0;   // Gaussian, seeded
  std::vector<PressStep> steps;
};

std::vector<PressureFrame> press_script(const TaxelMap& map, const PressScript& script, const ResponseModel& model,
                                        const CircuitParams& circuit, std::uint64_t seed = 0);

struct Peak {
  std::size_t frame = 0;
  double value = 0.0;
};

/// Peaks of the per-frame mean count: maximal runs above the midpoint between
/// the stream minimum and maximum, one peak per run.
std::vector<Peak> detect_peaks(const std::vector<PressureFrame>& frames);

struct PressWindow {
  double start_s = 0.0;
  double end_s = 0.0;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> px;  // row-major

  double at(int x, int y) const { return px[static_cast<std::size_t>(y) * width + x]; }
};

/// Half-pixel-center bilinear resampling with edge clamping.
Image resize_bilinear(const Image& in, int width, int height);

struct PressImage {
  std::size_t peak_frame = 0;
  bool truncated = false;
  Image image;  // out_size × out_size, values in [0, 255]
};

struct WindowStats {
  std::vector<PressImage> presses;
  Image variance;
  double total_variance = 0.0;
};

WindowStats press_window_stats(const std::vector<PressureFrame>& frames, const std::vector<PressWindow>& presses,
                               int window = 50, int out_size = 64);

// Documents

std::string frame_to_json(const PressureFrame& f);
std::string frames_to_jsonl(const std::vector<PressureFrame>& frames);
std::vector<PressureFrame> parse_frames_jsonl(const std::string& text);

PressScript parse_script(const std::string& json_text);
std::vector<PressWindow> parse_presses(const std::string& json_text);
TaxelMap parse_taxel_map(const std::string& json_text);

std::string stats_csv(const WindowStats& s);
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace flexglove::readout
