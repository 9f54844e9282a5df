#include "flexglove/readout.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <optional>
#include <random>

#include "flexglove/error.hpp"
#include "flexglove/io.hpp"

namespace flexglove::readout {

using nlohmann::json;

void ResponseModel::validate() const {
  const bool ok = r0_ohm > r_break_ohm && r_break_ohm > r_max_ohm && r_max_ohm > 0.0 && f_break_n > 0.0 &&
                  f_max_n > f_break_n && f_ref_n > 0.0 && hysteresis_ohm >= 0.0 && contact_area_cm2 > 0.0;
  if (!ok) throw ReadoutError("response model must satisfy r0 > r_break > r_max > 0 and 0 < f_break < f_max");
}

Resistance r_of_f(const ResponseModel& m, double force_n, Phase phase) {
  Resistance out;
  double f = force_n;
  if (!(f >= 0.0)) {
    f = 0.0;
    out.clamped = true;
  } else if (f > m.f_max_n) {
    f = m.f_max_n;
    out.clamped = true;
  }
  const double x = std::log1p(f / m.f_ref_n);
  const double xb = std::log1p(m.f_break_n / m.f_ref_n);
  const double xm = std::log1p(m.f_max_n / m.f_ref_n);
  if (x <= xb)
    out.ohm = m.r0_ohm - (m.r0_ohm - m.r_break_ohm) * x / xb;
  else
    out.ohm = m.r_break_ohm - (m.r_break_ohm - m.r_max_ohm) * (x - xb) / (xm - xb);
  if (phase == Phase::Unloading) out.ohm += m.hysteresis_ohm;
  return out;
}

double CircuitParams::lsb() const { return full_scale_v / static_cast<double>(max_count()); }
int CircuitParams::max_count() const { return (1 << adc_bits) - 1; }

CrossbarState::CrossbarState(int rows_, int cols_, double r_off)
    : rows(rows_), cols(cols_), r(static_cast<std::size_t>(rows_) * cols_, r_off) {}

double PressureFrame::mean() const {
  if (counts.empty()) return 0.0;
  double s = 0.0;
  for (int c : counts) s += c;
  return s / static_cast<double>(counts.size());
}

std::vector<double> ideal_voltages(const CrossbarState& s, const CircuitParams& c) {
  // Column j driven, all other columns grounded, rows at virtual ground: the
  // only current into row i comes through R(i,j).
  std::vector<double> v(s.r.size());
  for (std::size_t k = 0; k < s.r.size(); ++k) {
    if (!(s.r[k] > 0.0)) throw ReadoutError("crossbar resistances must be > 0", false);
    v[k] = c.v_drive * c.r_feedback_ohm / s.r[k];
  }
  return v;
}

PressureFrame scan(const CrossbarState& s, const CircuitParams& c, double t) {
  PressureFrame f{t, s.rows, s.cols, {}};
  const double lsb = c.lsb();
  f.counts.reserve(s.r.size());
  for (double v : ideal_voltages(s, c)) {
    const double clamped = std::clamp(v, 0.0, c.full_scale_v);
    f.counts.push_back(static_cast<int>(std::lround(clamped / lsb)));
  }
  return f;
}

std::vector<PressureFrame> press_script(const TaxelMap& map, const PressScript& script, const ResponseModel& model,
                                        const CircuitParams& circuit, std::uint64_t seed) {
  model.validate();
  if (!(script.rate_hz > 0.0)) throw ReadoutError("script rate_hz must be > 0");
  struct Cells {
    const PressStep* step;
    const std::vector<std::pair<int, int>>* cells;
  };
  std::vector<Cells> active;
  double end = script.duration_s;
  for (const auto& st : script.steps) {
    const auto it = map.regions.find(st.region);
    if (it == map.regions.end()) throw ReadoutError("press script: unknown region '" + st.region + "'");
    if (st.cycles < 1 || !(st.period_s > 0.0) || st.ramp_s < 0.0 || st.hold_s < 0.0 ||
        2 * st.ramp_s + st.hold_s > st.period_s)
      throw ReadoutError("press script: step on '" + st.region + "' needs cycles >= 1 and 2*ramp + hold <= period");
    active.push_back({&st, &it->second});
    if (script.duration_s <= 0.0) end = std::max(end, st.start_s + st.cycles * st.period_s);
  }
  const auto n = static_cast<std::size_t>(std::llround(std::floor(end * script.rate_hz + 1e-9)));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, script.noise_ohm > 0.0 ? script.noise_ohm : 1.0);
  const Resistance rest = r_of_f(model, 0.0);

  std::vector<PressureFrame> frames;
  frames.reserve(n);
  std::vector<double> force(static_cast<std::size_t>(map.rows) * map.cols);
  std::vector<Phase> phase(force.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / script.rate_hz;
    std::fill(force.begin(), force.end(), 0.0);
    std::fill(phase.begin(), phase.end(), Phase::Loading);
    for (const auto& a : active) {
      const PressStep& st = *a.step;
      const double rel = t - st.start_s;
      if (rel < 0.0 || rel >= st.cycles * st.period_s) continue;
      const double u = std::fmod(rel, st.period_s);
      double f = 0.0;
      Phase ph = Phase::Loading;
      if (u < st.ramp_s) {
        f = st.force_n * u / st.ramp_s;
      } else if (u < st.ramp_s + st.hold_s) {
        f = st.force_n;
      } else if (u < 2 * st.ramp_s + st.hold_s) {
        f = st.force_n * (1.0 - (u - st.ramp_s - st.hold_s) / st.ramp_s);
        ph = Phase::Unloading;
      }
      for (auto [i, j] : *a.cells) {
        const std::size_t idx = static_cast<std::size_t>(i) * map.cols + j;
        if (f > force[idx]) {
          force[idx] = f;
          phase[idx] = ph;
        }
      }
    }
    CrossbarState s(map.rows, map.cols, rest.ohm);
    for (std::size_t idx = 0; idx < force.size(); ++idx) {
      if (force[idx] > 0.0) s.r[idx] = r_of_f(model, force[idx], phase[idx]).ohm;
      if (script.noise_ohm > 0.0) s.r[idx] = std::max(1.0, s.r[idx] + noise(rng));
    }
    frames.push_back(scan(s, circuit, t));
  }
  return frames;
}

std::vector<Peak> detect_peaks(const std::vector<PressureFrame>& frames) {
  std::vector<Peak> peaks;
  if (frames.empty()) return peaks;
  std::vector<double> m(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) m[k] = frames[k].mean();
  const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
  if (*hi - *lo <= 0.0) return peaks;
  const double thr = 0.5 * (*lo + *hi);
  for (std::size_t k = 0; k < m.size();) {
    if (m[k] <= thr) {
      ++k;
      continue;
    }
    Peak p{k, m[k]};
    for (; k < m.size() && m[k] > thr; ++k)
      if (m[k] > p.value) p = {k, m[k]};
    peaks.push_back(p);
  }
  return peaks;
}

Image resize_bilinear(const Image& in, int width, int height) {
  if (in.width < 1 || in.height < 1 || width < 1 || height < 1) throw ReadoutError("resize: empty image", false);
  Image out{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
  const double sx = static_cast<double>(in.width) / width, sy = static_cast<double>(in.height) / height;
  auto axis = [](double src, int n, int& i0, int& i1, double& w) {
    src = std::clamp(src, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<int>(std::floor(src));
    i1 = std::min(i0 + 1, n - 1);
    w = src - i0;
  };
  for (int y = 0; y < height; ++y) {
    int y0, y1;
    double wy;
    axis((y + 0.5) * sy - 0.5, in.height, y0, y1, wy);
    for (int x = 0; x < width; ++x) {
      int x0, x1;
      double wx;
      axis((x + 0.5) * sx - 0.5, in.width, x0, x1, wx);
      const double top = in.at(x0, y0) * (1 - wx) + in.at(x1, y0) * wx;
      const double bot = in.at(x0, y1) * (1 - wx) + in.at(x1, y1) * wx;
      out.px[static_cast<std::size_t>(y) * width + x] = top * (1 - wy) + bot * wy;
    }
  }
  return out;
}

WindowStats press_window_stats(const std::vector<PressureFrame>& frames, const std::vector<PressWindow>& presses,
                               int window, int out_size) {
  if (presses.empty()) throw ReadoutError("press window stats need at least one press");
  if (window < 1 || out_size < 1) throw ReadoutError("window and output size must be >= 1");
  WindowStats st;
  for (const auto& pw : presses) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < frames.size(); ++k) {
      if (frames[k].t < pw.start_s || frames[k].t > pw.end_s) continue;
      if (!best || frames[k].mean() > frames[*best].mean()) best = k;
    }
    if (!best) throw ReadoutError(fmt::format("no frames inside press [{}, {}] s", pw.start_s, pw.end_s));
    const PressureFrame& ref = frames[*best];
    const long lo_wanted = static_cast<long>(*best) - window / 2;
    const long lo = std::max(0L, lo_wanted);
    const long hi = std::min(static_cast<long>(frames.size()), lo_wanted + window);
    PressImage pi;
    pi.peak_frame = *best;
    pi.truncated = lo != lo_wanted || hi != lo_wanted + window;

    Image avg{ref.cols, ref.rows, std::vector<double>(ref.counts.size(), 0.0)};
    for (long k = lo; k < hi; ++k) {
      const auto& f = frames[static_cast<std::size_t>(k)];
      if (f.rows != ref.rows || f.cols != ref.cols) throw ReadoutError("frame shape changes inside a press window");
      for (std::size_t i = 0; i < avg.px.size(); ++i) avg.px[i] += f.counts[i];
    }
    for (double& v : avg.px) v /= static_cast<double>(hi - lo);
    const auto [mn, mx] = std::minmax_element(avg.px.begin(), avg.px.end());
    const double a = *mn, b = *mx;
    for (double& v : avg.px) v = b > a ? 255.0 * (v - a) / (b - a) : 0.0;
    pi.image = resize_bilinear(avg, out_size, out_size);
    st.presses.push_back(std::move(pi));
  }

  const std::size_t npx = static_cast<std::size_t>(out_size) * out_size;
  st.variance = {out_size, out_size, std::vector<double>(npx, 0.0)};
  const double n = static_cast<double>(st.presses.size());
  for (std::size_t i = 0; i < npx; ++i) {
    // shifted by the first sample so identical presses give exactly zero
    const double x0 = st.presses.front().image.px[i];
    double s1 = 0.0, s2 = 0.0;
    for (const auto& p : st.presses) {
      const double d = p.image.px[i] - x0;
      s1 += d;
      s2 += d * d;
    }
    st.variance.px[i] = std::max(0.0, s2 / n - (s1 / n) * (s1 / n));
    st.total_variance += st.variance.px[i];
  }
  return st;
}

std::string frame_to_json(const PressureFrame& f) {
  std::string s = fmt::format("{{\"t\":{:.6f},\"counts\":[", f.t);
  for (int i = 0; i < f.rows; ++i) {
    s += i ? ",[" : "[";
    for (int j = 0; j < f.cols; ++j) {
      if (j) s += ',';
      s += std::to_string(f.at(i, j));
    }
    s += ']';
  }
  s += "]}";
  return s;
}

std::string frames_to_jsonl(const std::vector<PressureFrame>& frames) {
  std::string s;
  for (const auto& f : frames) s += frame_to_json(f) + "\n";
  return s;
}

std::vector<PressureFrame> parse_frames_jsonl(const std::string& text) {
  std::vector<PressureFrame> out;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return SchemaError(Stage::Readout, fmt::format("frames: line {}: {}", line_no, why));
    };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw fail("not valid JSON");
    }
    if (!j.is_object() || !j.contains("t") || !j["t"].is_number() || !j.contains("counts") || !j["counts"].is_array())
      throw fail("expected {\"t\": number, \"counts\": [[int]]}");
    PressureFrame f;
    f.t = j["t"].get<double>();
    f.rows = static_cast<int>(j["counts"].size());
    for (const auto& row : j["counts"]) {
      if (!row.is_array()) throw fail("counts must be a matrix");
      if (f.cols == 0) f.cols = static_cast<int>(row.size());
      if (static_cast<int>(row.size()) != f.cols || f.cols == 0) throw fail("ragged or empty counts row");
      for (const auto& v : row) {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw fail("counts must be non-negative integers");
        f.counts.push_back(v.get<int>());
      }
    }
    if (f.rows == 0) throw fail("empty counts");
    if (!out.empty() && (out.front().rows != f.rows || out.front().cols != f.cols))
      throw fail("frame shape differs from line 1");
    out.push_back(std::move(f));
  }
  return out;
}

PressScript parse_script(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    PressScript s;
    s.rate_hz = j.value("rate_hz", s.rate_hz);
    s.duration_s = j.value("duration_s", 0.0);
    s.noise_ohm = j.value("noise_ohm", 0.0);
    const double area = j.value("contact_area_cm2", ResponseModel{}.contact_area_cm2);
    for (const auto& js : j.at("steps")) {
      PressStep st;
      st.region = js.at("region").get<std::string>();
      if (js.contains("force_n"))
        st.force_n = js["force_n"].get<double>();
      else
        st.force_n = js.at("pressure_n_per_cm2").get<double>() * area;
      st.start_s = js.value("start_s", 0.0);
      st.period_s = js.value("period_s", st.period_s);
      st.hold_s = js.value("hold_s", st.hold_s);
      st.ramp_s = js.value("ramp_s", st.ramp_s);
      st.cycles = js.value("cycles", 1);
      s.steps.push_back(std::move(st));
    }
    return s;
  } catch (const json::exception& e) {
    throw SchemaError(Stage::Readout, std::string("script: ") + e.what());
  }
}

std::vector<PressWindow> parse_presses(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    std::vector<PressWindow> out;
    for (const auto& p : j.at("presses")) out.push_back({p.at("start_s").get<double>(), p.at("end_s").get<double>()});
    return out;
  } catch (const json::exception& e) {
    throw SchemaError(Stage::Readout, std::string("presses: ") + e.what());
  }
}

TaxelMap parse_taxel_map(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    TaxelMap m;
    m.rows = j.value("row_nets", j.value("rows", 16));
    m.cols = j.value("col_nets", j.value("cols", 16));
    if (j.contains("taxels")) {
      for (const auto& t : j["taxels"])
        m.regions[t.at("region").get<std::string>()].emplace_back(t.at("row_net").get<int>(),
                                                                  t.at("col_net").get<int>());
    } else {
      for (const auto& [name, cells] : j.at("regions").items())
        for (const auto& c : cells) m.regions[name].emplace_back(c.at(0).get<int>(), c.at(1).get<int>());
    }
    for (const auto& [name, cells] : m.regions)
      for (auto [r, c] : cells)
        if (r < 0 || r >= m.rows || c < 0 || c >= m.cols)
          throw SchemaError(Stage::Readout, fmt::format("taxel map: region '{}' cell ({}, {}) out of range", name, r, c));
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(Stage::Readout, std::string("taxel map: ") + e.what());
  }
}

std::string stats_csv(const WindowStats& s) {
  std::string out = "press,peak_frame,truncated,mean_intensity\n";
  for (std::size_t i = 0; i < s.presses.size(); ++i) {
    double m = 0.0;
    for (double v : s.presses[i].image.px) m += v;
    m /= static_cast<double>(s.presses[i].image.px.size());
    out += fmt::format("{},{},{},{:.6f}\n", i, s.presses[i].peak_frame, s.presses[i].truncated ? 1 : 0, m);
  }
  out += fmt::format("total_variance,,,{:.6f}\n", s.total_variance);
  return out;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  cv::Mat m(img.height, img.width, CV_8UC1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      m.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(std::lround(std::clamp(img.at(x, y), 0.0, 255.0)));
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", m, buf)) throw ExportError("PNG encode failed: " + path.string());
  io::write_atomic(path, std::string_view(reinterpret_cast<const char*>(buf.data()), buf.size()));
}

}  // namespace flexglove::readout
