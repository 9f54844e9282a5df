#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "flexglove/config.hpp"
#include "flexglove/error.hpp"

using namespace flexglove;
using namespace flexglove::config;

namespace {

std::string read(const char* path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_TRUE(e.is_input_error());
    EXPECT_EQ(e.stage(), Stage::Config);
    return e.what();
  }
  ADD_FAILURE() << "no error";
  return "";
}

}  // namespace

TEST(Config, ShippedDefaultsFileMatchesBuiltIns) {
  const std::string text = read("data/defaults.conf");
  ASSERT_FALSE(text.empty());
  // applying the file onto a config with every value disturbed restores the defaults
  PipelineConfig disturbed;
  apply_text(disturbed, dump(PipelineConfig{}), "self");
  disturbed.layout.resolution.palm = {3, 3};
  disturbed.routing.rings = 4;
  disturbed.board.coverlay_inset_mm = 1.0;
  disturbed.fab.hand_id = "other";
  apply_text(disturbed, text, "defaults.conf");
  EXPECT_EQ(dump(disturbed), dump(PipelineConfig{}));
  // and names every key exactly once
  std::set<std::string> in_file;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') in_file.insert(line.substr(0, line.find(' ')));
  const auto all = keys();
  EXPECT_EQ(in_file, std::set<std::string>(all.begin(), all.end()));
}

TEST(Config, PublishedConstantsAreTheDefaults) {
  const PipelineConfig c;
  EXPECT_EQ(get(c, "trace_width_mm"), "0.1");
  EXPECT_EQ(get(c, "routing.ring_pitch_mm"), "0.2");
  EXPECT_EQ(get(c, "routing.rings"), "16");
  EXPECT_EQ(get(c, "routing.edge_clearance_mm"), "0.5");
  EXPECT_EQ(get(c, "board.coverlay_inset_mm"), "6");
  EXPECT_EQ(get(c, "layout.finger_grid"), "3x2");
  EXPECT_EQ(get(c, "layout.thumb_distal_grid"), "4x3");
  EXPECT_EQ(get(c, "layout.thumb_proximal_grid"), "4x2");
  EXPECT_EQ(get(c, "layout.palm_grid"), "7x11");
}

TEST(Config, DumpRoundTrips) {
  PipelineConfig a;
  apply_override(a, "layout.palm_grid=5x9");
  apply_override(a, "capture.hsv_lo = 3, 50, 70");
  apply_override(a, "layout.mcp_pip_ratio=0.4,0.41,0.42,0.43");
  apply_override(a, "board.copper_chord_tol_mm=0.000123456789");
  PipelineConfig b;
  apply_text(b, dump(a), "dump");
  EXPECT_EQ(dump(a), dump(b));
  EXPECT_EQ(b.layout.resolution.palm.rows, 5);
  EXPECT_EQ(b.layout.resolution.palm.cols, 9);
  EXPECT_EQ(b.capture.hsv_lo[2], 70);
  EXPECT_DOUBLE_EQ(b.layout.mcp_pip_ratio[3], 0.43);
  EXPECT_EQ(b.board.copper_chord_tol_mm, 0.000123456789);
}

TEST(Config, FlagBeatsFileBeatsDefault) {
  PipelineConfig c;
  apply_text(c, "board.coverlay_inset_mm = 4\nrouting.rings = 12\n", "file.conf");
  apply_override(c, "routing.rings=10");
  EXPECT_EQ(c.board.coverlay_inset_mm, 4.0);  // file
  EXPECT_EQ(c.routing.rings, 10);             // flag
  EXPECT_EQ(c.routing.ring_pitch_mm, 0.2);    // default
}

TEST(Config, TraceWidthSetsLayoutAndRouting) {
  PipelineConfig c;
  apply_override(c, "trace_width_mm=0.12");
  EXPECT_EQ(c.layout.trace_width_mm, 0.12);
  EXPECT_EQ(c.routing.trace_width_mm, 0.12);
}

TEST(Config, CommentsAndBlankLines) {
  PipelineConfig c;
  apply_text(c, "# header\n\n  routing.rings = 8   # trailing\r\n", "x");
  EXPECT_EQ(c.routing.rings, 8);
}

TEST(Config, ErrorsNameTheLine) {
  PipelineConfig c;
  EXPECT_EQ(message_of([&] { apply_text(c, "routing.rings = 8\nnonsense\n", "a.conf"); }),
            "config: a.conf:2: expected 'key = value', got 'nonsense'");
  EXPECT_EQ(message_of([&] { apply_text(c, "\n\nfoo.bar = 1\n", "a.conf"); }), "config: a.conf:3: unknown key 'foo.bar'");
  EXPECT_EQ(message_of([&] { apply_text(c, "routing.rings = 1.5\n", "a.conf"); }),
            "config: a.conf:1: routing.rings: '1.5' is not an integer");
  EXPECT_EQ(message_of([&] { apply_text(c, "board.kerf_mm = -1\n", "a.conf"); }),
            "config: a.conf:1: board.kerf_mm: -1 must be non-negative");
  EXPECT_EQ(message_of([&] { apply_text(c, "routing.rings = 3\nrouting.rings = 4\n", "a.conf"); }),
            "config: a.conf:2: duplicate key 'routing.rings'");
  EXPECT_EQ(message_of([&] { apply_override(c, "layout.palm_grid=7by11"); }),
            "config: --set layout.palm_grid=7by11: layout.palm_grid: '7by11' is not a ROWSxCOLS grid");
  EXPECT_EQ(message_of([&] { apply_override(c, "capture.hsv_hi=1,2"); }),
            "config: --set capture.hsv_hi=1,2: capture.hsv_hi: expected 3 comma-separated values, got 2");
  EXPECT_EQ(message_of([&] { apply_override(c, "export.hand_id=a/b"); }),
            "config: --set export.hand_id=a/b: export.hand_id: 'a/b' is not a plain file-name stem");
}

TEST(Config, MissingFileIsInputError) {
  PipelineConfig c;
  const std::string msg = message_of([&] { apply_file(c, "no/such.conf"); });
  EXPECT_EQ(msg.rfind("config: file not found", 0), 0u) << msg;
}
