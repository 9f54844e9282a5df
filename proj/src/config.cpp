#include "flexglove/config.hpp"

#include <charconv>
#include <fmt/format.h>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "flexglove/error.hpp"
#include "flexglove/io.hpp"

namespace flexglove::config {

namespace {

enum class Range { Positive, NonNegative, Fraction, Any };

using Setter = std::function<void(PipelineConfig&, const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Entry {
  std::string key;
  Setter set;
  Getter get;
};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(Stage::Config, fmt::format("config: {}: {}", where, what));
}

// A rejected value; set() adds the location and key.
struct BadValue {
  std::string what;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& s, Range r) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw BadValue{fmt::format("'{}' is not a number", s)};
  const bool ok = r == Range::Any || (r == Range::Positive && v > 0.0) || (r == Range::NonNegative && v >= 0.0) ||
                  (r == Range::Fraction && v >= 0.0 && v <= 1.0);
  if (!ok) {
    const char* want = r == Range::Positive ? "positive" : r == Range::NonNegative ? "non-negative" : "within [0, 1]";
    throw BadValue{fmt::format("{} must be {}", s, want)};
  }
  return v;
}

int parse_int(const std::string& s, int lo) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw BadValue{fmt::format("'{}' is not an integer", s)};
  if (v < lo) throw BadValue{fmt::format("{} must be at least {}", s, lo)};
  return v;
}

template <class F>
Entry real(std::string key, F ref, Range r = Range::Positive) {
  return {key,
          [ref, r](PipelineConfig& c, const std::string& v) { ref(c) = parse_double(v, r); },
          [ref](const PipelineConfig& c) { return fmt::format("{}", ref(const_cast<PipelineConfig&>(c))); }};
}

template <class F>
Entry integer(std::string key, F ref, int lo) {
  return {key, [ref, lo](PipelineConfig& c, const std::string& v) { ref(c) = parse_int(v, lo); },
          [ref](const PipelineConfig& c) { return fmt::format("{}", ref(const_cast<PipelineConfig&>(c))); }};
}

template <class F>
Entry grid(std::string key, F ref) {
  return {key,
          [ref](PipelineConfig& c, const std::string& v) {
            const auto x = v.find('x');
            if (x == std::string::npos) throw BadValue{fmt::format("'{}' is not a ROWSxCOLS grid", v)};
            ref(c) = {parse_int(trim(v.substr(0, x)), 1), parse_int(trim(v.substr(x + 1)), 1)};
          },
          [ref](const PipelineConfig& c) {
            const layout::Grid& g = ref(const_cast<PipelineConfig&>(c));
            return fmt::format("{}x{}", g.rows, g.cols);
          }};
}

template <std::size_t N, class T, class F>
Entry list(std::string key, F ref, std::function<T(const std::string&)> parse) {
  return {key,
          [ref, parse](PipelineConfig& c, const std::string& v) {
            const auto parts = split(v, ',');
            if (parts.size() != N) throw BadValue{fmt::format("expected {} comma-separated values, got {}", N, parts.size())};
            auto& arr = ref(c);
            for (std::size_t i = 0; i < N; ++i) arr[i] = parse(parts[i]);
          },
          [ref](const PipelineConfig& c) { return fmt::format("{}", fmt::join(ref(const_cast<PipelineConfig&>(c)), ",")); }};
}

const std::vector<Entry>& table() {
  using C = PipelineConfig;
  static const std::vector<Entry> t = [] {
    std::vector<Entry> e;
    // capture
    e.push_back(real("capture.sheet_width_in", [](C& c) -> double& { return c.capture.sheet_width_in; }));
    e.push_back(real("capture.sheet_height_in", [](C& c) -> double& { return c.capture.sheet_height_in; }));
    auto hsv = [](const std::string& s) {
      const int v = parse_int(s, 0);
      if (v > 255) throw BadValue{fmt::format("HSV component {} exceeds 255", v)};
      return v;
    };
    e.push_back(list<3, int>("capture.hsv_lo", [](C& c) -> std::array<int, 3>& { return c.capture.hsv_lo; }, hsv));
    e.push_back(list<3, int>("capture.hsv_hi", [](C& c) -> std::array<int, 3>& { return c.capture.hsv_hi; }, hsv));
    e.push_back(real("capture.min_mask_area_mm2", [](C& c) -> double& { return c.capture.min_mask_area_mm2; }));
    e.push_back(real("capture.sheet_threshold", [](C& c) -> double& { return c.capture.sheet_threshold; }, Range::Fraction));
    e.push_back(real("capture.max_scale_disagreement", [](C& c) -> double& { return c.capture.max_scale_disagreement; }));
    e.push_back(real("capture.simplify_mm", [](C& c) -> double& { return c.capture.simplify_mm; }, Range::NonNegative));
    e.push_back(real("capture.max_vertex_spacing_mm", [](C& c) -> double& { return c.capture.max_vertex_spacing_mm; }));
    e.push_back(integer("capture.close_kernel_px", [](C& c) -> int& { return c.capture.close_kernel_px; }, 0));
    // layout
    e.push_back(grid("layout.finger_grid", [](C& c) -> layout::Grid& { return c.layout.resolution.finger_pad; }));
    e.push_back(grid("layout.thumb_distal_grid", [](C& c) -> layout::Grid& { return c.layout.resolution.thumb_top; }));
    e.push_back(grid("layout.thumb_proximal_grid", [](C& c) -> layout::Grid& { return c.layout.resolution.thumb_mid; }));
    e.push_back(grid("layout.palm_grid", [](C& c) -> layout::Grid& { return c.layout.resolution.palm; }));
    e.push_back(list<4, double>(
        "layout.mcp_pip_ratio", [](C& c) -> std::array<double, 4>& { return c.layout.mcp_pip_ratio; },
        [](const std::string& s) { return parse_double(s, Range::Positive); }));
    e.push_back(real("layout.palm_projection.wrist", [](C& c) -> double& { return c.layout.palm_projection.wrist; }, Range::Fraction));
    e.push_back(real("layout.palm_projection.ulnar", [](C& c) -> double& { return c.layout.palm_projection.ulnar; }, Range::Fraction));
    e.push_back(real("layout.palm_projection.little_mcp", [](C& c) -> double& { return c.layout.palm_projection.little_mcp; }, Range::Fraction));
    e.push_back(real("layout.palm_projection.ring_mcp", [](C& c) -> double& { return c.layout.palm_projection.ring_mcp; }, Range::Fraction));
    e.push_back(real("layout.palm_projection.middle_mcp", [](C& c) -> double& { return c.layout.palm_projection.middle_mcp; }, Range::Fraction));
    e.push_back(real("layout.palm_projection.index_mcp", [](C& c) -> double& { return c.layout.palm_projection.index_mcp; }, Range::Fraction));
    e.push_back(real("layout.palm_projection.thumb_mcp", [](C& c) -> double& { return c.layout.palm_projection.thumb_mcp; }, Range::Fraction));
    e.push_back(real("layout.min_segment_mm", [](C& c) -> double& { return c.layout.min_segment_mm; }));
    e.push_back(real("layout.min_pitch_mm", [](C& c) -> double& { return c.layout.min_pitch_mm; }));
    e.push_back(real("layout.routing_band_mm", [](C& c) -> double& { return c.layout.routing_band_mm; }));
    e.push_back(real("layout.region_gap_mm", [](C& c) -> double& { return c.layout.region_gap_mm; }, Range::NonNegative));
    e.push_back(real("layout.palm_column_tail_mm", [](C& c) -> double& { return c.layout.palm_column_tail_mm; }, Range::NonNegative));
    // copper rules shared by layout and routing
    e.push_back({"trace_width_mm",
                 [](C& c, const std::string& v) {
                   c.layout.trace_width_mm = c.routing.trace_width_mm = parse_double(v, Range::Positive);
                 },
                 [](const C& c) { return fmt::format("{}", c.routing.trace_width_mm); }});
    e.push_back(real("routing.ring_pitch_mm", [](C& c) -> double& { return c.routing.ring_pitch_mm; }));
    e.push_back(integer("routing.rings", [](C& c) -> int& { return c.routing.rings; }, 1));
    e.push_back(real("routing.clearance_mm", [](C& c) -> double& { return c.routing.clearance_mm; }));
    e.push_back(real("routing.edge_clearance_mm", [](C& c) -> double& { return c.routing.edge_clearance_mm; }));
    e.push_back(real("routing.clearance_tolerance_mm", [](C& c) -> double& { return c.routing.clearance_tolerance_mm; }, Range::NonNegative));
    e.push_back(real("routing.front_connector_offset_mm", [](C& c) -> double& { return c.routing.front_connector_offset_mm; }, Range::Any));
    e.push_back(real("routing.link_bend_mm", [](C& c) -> double& { return c.routing.link_bend_mm; }));
    e.push_back(integer("connector.pads", [](C& c) -> int& { return c.routing.connector.pads; }, 1));
    e.push_back(real("connector.pitch_mm", [](C& c) -> double& { return c.routing.connector.pitch_mm; }));
    e.push_back(real("connector.pad_width_mm", [](C& c) -> double& { return c.routing.connector.pad_width_mm; }));
    e.push_back(real("connector.pad_length_mm", [](C& c) -> double& { return c.routing.connector.pad_length_mm; }));
    e.push_back(real("connector.depth_mm", [](C& c) -> double& { return c.routing.connector.depth_mm; }));
    e.push_back(real("connector.stub_mm", [](C& c) -> double& { return c.routing.connector.stub_mm; }));
    e.push_back(real("connector.anchor_width_mm", [](C& c) -> double& { return c.routing.connector.anchor_width_mm; }));
    e.push_back(real("connector.anchor_length_mm", [](C& c) -> double& { return c.routing.connector.anchor_length_mm; }));
    e.push_back(real("connector.anchor_gap_mm", [](C& c) -> double& { return c.routing.connector.anchor_gap_mm; }));
    // board layers
    e.push_back(real("board.coverlay_inset_mm", [](C& c) -> double& { return c.board.coverlay_inset_mm; }, Range::NonNegative));
    e.push_back(real("board.cut_clearance_mm", [](C& c) -> double& { return c.board.cut_clearance_mm; }));
    e.push_back(real("board.sliver_area_mm2", [](C& c) -> double& { return c.board.sliver_area_mm2; }, Range::NonNegative));
    e.push_back(real("board.kerf_mm", [](C& c) -> double& { return c.board.kerf_mm; }, Range::NonNegative));
    e.push_back(real("board.copper_chord_tol_mm", [](C& c) -> double& { return c.board.copper_chord_tol_mm; }));
    e.push_back(real("board.audit_tolerance_mm", [](C& c) -> double& { return c.board.audit_tolerance_mm; }, Range::NonNegative));
    // export
    e.push_back({"export.hand_id",
                 [](C& c, const std::string& v) {
                   if (v.empty() || v.find_first_of("/\\ \t") != std::string::npos)
                     throw BadValue{fmt::format("'{}' is not a plain file-name stem", v)};
                   c.fab.hand_id = v;
                 },
                 [](const C& c) { return c.fab.hand_id; }});
    e.push_back(real("export.page_margin_mm", [](C& c) -> double& { return c.fab.page_margin_mm; }, Range::NonNegative));
    e.push_back(real("export.edge_line_width_mm", [](C& c) -> double& { return c.fab.edge_line_width_mm; }));
    e.push_back(real("export.silk_line_width_mm", [](C& c) -> double& { return c.fab.silk_line_width_mm; }));
    e.push_back(real("export.silk_clearance_mm", [](C& c) -> double& { return c.fab.silk_clearance_mm; }, Range::NonNegative));
    e.push_back(real("export.pin1_mark_mm", [](C& c) -> double& { return c.fab.pin1_mark_mm; }));
    // readout
    e.push_back(real("response.r0_ohm", [](C& c) -> double& { return c.response.r0_ohm; }));
    e.push_back(real("response.f_break_n", [](C& c) -> double& { return c.response.f_break_n; }));
    e.push_back(real("response.r_break_ohm", [](C& c) -> double& { return c.response.r_break_ohm; }));
    e.push_back(real("response.f_max_n", [](C& c) -> double& { return c.response.f_max_n; }));
    e.push_back(real("response.r_max_ohm", [](C& c) -> double& { return c.response.r_max_ohm; }));
    e.push_back(real("response.f_ref_n", [](C& c) -> double& { return c.response.f_ref_n; }));
    e.push_back(real("response.hysteresis_ohm", [](C& c) -> double& { return c.response.hysteresis_ohm; }, Range::NonNegative));
    e.push_back(real("response.contact_area_cm2", [](C& c) -> double& { return c.response.contact_area_cm2; }));
    e.push_back(real("circuit.v_drive", [](C& c) -> double& { return c.circuit.v_drive; }));
    e.push_back(real("circuit.r_feedback_ohm", [](C& c) -> double& { return c.circuit.r_feedback_ohm; }));
    e.push_back(integer("circuit.adc_bits", [](C& c) -> int& { return c.circuit.adc_bits; }, 1));
    e.push_back(real("circuit.full_scale_v", [](C& c) -> double& { return c.circuit.full_scale_v; }));
    // mechanics
    e.push_back(real("mechanics.reference_radius_mm", [](C& c) -> double& { return c.reference_bend_radius_mm; }));
    return e;
  }();
  return t;
}

const Entry& find(const std::string& key, const std::string& where) {
  static const std::map<std::string, const Entry*> index = [] {
    std::map<std::string, const Entry*> m;
    for (const auto& e : table()) m[e.key] = &e;
    return m;
  }();
  const auto it = index.find(key);
  if (it == index.end()) fail(where, fmt::format("unknown key '{}'", key));
  return *it->second;
}

}  // namespace

std::vector<std::string> keys() {
  std::vector<std::string> out;
  for (const auto& e : table()) out.push_back(e.key);
  return out;
}

void set(PipelineConfig& c, const std::string& key, const std::string& value, const std::string& where) {
  const Entry& e = find(key, where);
  try {
    e.set(c, value);
  } catch (const BadValue& bad) {
    fail(where, fmt::format("{}: {}", key, bad.what));
  }
}

std::string get(const PipelineConfig& c, const std::string& key) { return find(key, "get").get(c); }

void apply_text(PipelineConfig& c, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = fmt::format("{}:{}", source, n);
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(where, fmt::format("expected 'key = value', got '{}'", line));
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) fail(where, fmt::format("duplicate key '{}'", key));
    set(c, key, trim(line.substr(eq + 1)), where);
  }
}

void apply_file(PipelineConfig& c, const std::filesystem::path& path) {
  apply_text(c, io::read_text(path, Stage::Config, "config"), path.filename().string());
}

void apply_override(PipelineConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const std::string where = fmt::format("--set {}", assignment);
  if (eq == std::string::npos) fail(where, "expected key=value");
  set(c, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), where);
}

std::string dump(const PipelineConfig& c) {
  std::string out;
  for (const auto& e : table()) out += fmt::format("{} = {}\n", e.key, e.get(c));
  return out;
}

}  // namespace flexglove::config
