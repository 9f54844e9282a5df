#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("flexglove_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

Outcome run(const std::string& args) {
  static int counter = 0;
  const fs::path o = scratch("stdout" + std::to_string(counter));
  const fs::path e = scratch("stderr" + std::to_string(counter++));
  const std::string cmd = std::string(FLEXGLOVE_CLI) + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  Outcome r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

const std::string kFixture =
    "generate --image tests/fixtures/hand.png --landmarks tests/fixtures/hand_landmarks.json";

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST(Cli, VersionAndHelp) {
  const Outcome v = run("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out.rfind("flexglove ", 0), 0u);
  const Outcome h = run("--help");
  EXPECT_EQ(h.code, 0);
  for (const char* sub : {"generate", "analyze-stackup", "simulate", "analyze-frames"})
    EXPECT_NE(h.out.find(sub), std::string::npos) << sub;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("--bogus generate").code, 2);
  EXPECT_EQ(run("generate --image x.png").code, 2);  // missing required options
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST(Cli, GenerateGoldenAndRerunIsByteIdentical) {
  const fs::path a = scratch("gen_a"), b = scratch("gen_b");
  const Outcome r1 = run(kFixture + " --out " + a.string());
  ASSERT_EQ(r1.code, 0) << r1.err;
  const Outcome r2 = run("-q " + kFixture + " --out " + b.string());
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_TRUE(r2.err.empty());
  // stage-by-stage progress goes to stderr only
  EXPECT_TRUE(r1.out.empty());
  for (const char* stage : {"capture", "layout", "routing", "layers", "export"})
    EXPECT_NE(r1.err.find(stage), std::string::npos) << stage;

  const auto ta = tree(a), tb = tree(b);
  EXPECT_EQ(ta, tb);
  int gerbers = 0, svgs = 0;
  for (const auto& [name, bytes] : ta) {
    const std::string ext = fs::path(name).extension().string();
    gerbers += ext == ".gtl" || ext == ".gbl" || ext == ".gts" || ext == ".gbs" || ext == ".gto" || ext == ".gbo" ||
               ext == ".gm1" || ext == ".gm2";
    svgs += ext == ".svg";
  }
  EXPECT_EQ(gerbers, 10);
  EXPECT_EQ(svgs, 2);
  for (const char* f : {"hand_manifest.json", "hand_routing_report.txt", "hand_bom.csv", "hand_bom.txt",
                        "hand_placement.csv", "hand_layout.json"})
    EXPECT_EQ(ta.count(f), 1u) << f;
  EXPECT_NE(ta.at("hand_bom.csv").find("Total,,,126.70"), std::string::npos);

  // rerunning into the same directory leaves it unchanged
  const Outcome r3 = run("-q " + kFixture + " --out " + a.string());
  ASSERT_EQ(r3.code, 0);
  EXPECT_EQ(tree(a), tb);
}

TEST(Cli, MissingLandmarksExitsTwoWithoutOutput) {
  const fs::path out = scratch("missing");
  const Outcome r = run("generate --image tests/fixtures/hand.png --landmarks no_such.json --out " + out.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("landmarks: file not found"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, BadConfigNamesTheLine) {
  const fs::path cfg = scratch("bad.conf");
  std::ofstream(cfg) << "# ok\nrouting.rings = 16\nrouting.rings_typo = 3\n";
  const fs::path out = scratch("badcfg");
  const Outcome r = run(kFixture + " --config " + cfg.string() + " --out " + out.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error [config]"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("bad.conf:3: unknown key 'routing.rings_typo'"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, ConfigPrecedence) {
  const fs::path cfg = scratch("prec.conf");
  std::ofstream(cfg) << "routing.rings = 12\nboard.coverlay_inset_mm = 4\n";
  const Outcome r = run("show-config --config " + cfg.string() + " --set routing.rings=10");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("routing.rings = 10\n"), std::string::npos);
  EXPECT_NE(r.out.find("board.coverlay_inset_mm = 4\n"), std::string::npos);
  EXPECT_NE(r.out.find("routing.ring_pitch_mm = 0.2\n"), std::string::npos);
}

TEST(Cli, InternalFailureExitsOneAndRemovesOutput) {
  const fs::path out = scratch("internal");
  const Outcome r = run("-q " + kFixture + " --set board.coverlay_inset_mm=80 --out " + out.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error [layers]"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, FailedWriteRemovesPartialFiles) {
  const fs::path out = scratch("partial");
  // a directory where the manifest should go makes the last write fail
  fs::create_directories(out / "hand_manifest.json");
  const Outcome r = run("-q " + kFixture + " --out " + out.string());
  EXPECT_NE(r.code, 0);
  std::vector<std::string> left;
  for (const auto& e : fs::directory_iterator(out)) left.push_back(e.path().filename().string());
  EXPECT_EQ(left, std::vector<std::string>{"hand_manifest.json"});
}

TEST(Cli, AnalyzeStackup) {
  const fs::path csv = scratch("stackup.csv");
  const Outcome r = run("analyze-stackup --stackups data/stackups.json --materials data/materials.json --out " + csv.string());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"ED", "RA", "encapsulated-RA"}) EXPECT_NE(r.out.find(name), std::string::npos);
  EXPECT_FALSE(slurp(csv).empty());

  const fs::path empty = scratch("empty.json");
  std::ofstream(empty) << R"({"stackups": []})";
  EXPECT_EQ(run("analyze-stackup --stackups " + empty.string() + " --materials data/materials.json").code, 2);

  const fs::path one = scratch("one.json");
  std::ofstream(one) << R"({"stackups": [{"name": "solo", "layers": [
      {"material": "polyimide", "thickness_um": 25},
      {"material": "cu_ra", "thickness_um": 12, "conductor": true}]}]})";
  const Outcome single = run("analyze-stackup --stackups " + one.string() + " --materials data/materials.json");
  ASSERT_EQ(single.code, 0) << single.err;
  int rows = 0;
  std::istringstream lines(single.out);
  std::string line;
  while (std::getline(lines, line)) rows += line.rfind("solo", 0) == 0;
  EXPECT_EQ(rows, 1);
}

TEST(Cli, SimulateAndAnalyzeFrames) {
  const fs::path design = scratch("design.json");
  std::ofstream(design) << R"({"rows": 16, "cols": 16, "regions": {"palm": [[3, 3], [3, 4], [4, 3], [4, 4]]}})";
  const fs::path sim = scratch("sim");
  const Outcome r = run("simulate --design " + design.string() + " --script data/scripts/repeatability_100.json --out " +
                    sim.string());
  ASSERT_EQ(r.code, 0) << r.err;
  int peaks = -1;  // header line
  std::istringstream lines(slurp(sim / "peaks.csv"));
  std::string line;
  while (std::getline(lines, line)) ++peaks;
  EXPECT_EQ(peaks, 100);

  const fs::path an = scratch("an");
  const Outcome a = run("analyze-frames --frames " + (sim / "frames.jsonl").string() +
                    " --presses data/scripts/presses_example.json --out " + an.string());
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_TRUE(fs::exists(an / "stats.csv"));
  EXPECT_TRUE(fs::exists(an / "variance.png"));
  EXPECT_TRUE(fs::exists(an / "press_002.png"));

  const fs::path bad = scratch("bad.jsonl");
  std::ofstream(bad) << "{\"t\": 0, \"counts\": [[1]]}\nnot json\n";
  const Outcome b = run("analyze-frames --frames " + bad.string() + " --presses data/scripts/presses_example.json --out " +
                    scratch("an_bad").string());
  EXPECT_EQ(b.code, 2);
  EXPECT_NE(b.err.find("line 2"), std::string::npos) << b.err;
}

TEST(Cli, SeedControlsNoise) {
  const fs::path design = scratch("design_seed.json");
  std::ofstream(design) << R"({"rows": 4, "cols": 4, "regions": {"r": [[1, 1]]}})";
  const fs::path script = scratch("noisy.json");
  std::ofstream(script) << R"({"noise_ohm": 20, "steps": [{"region": "r", "force_n": 50, "cycles": 2}]})";
  auto frames = [&](const std::string& seed, const std::string& tag) {
    const fs::path out = scratch("seed_" + tag);
    const Outcome r = run("--seed " + seed + " simulate --design " + design.string() + " --script " + script.string() +
                      " --out " + out.string());
    EXPECT_EQ(r.code, 0) << r.err;
    return slurp(out / "frames.jsonl");
  };
  const std::string a = frames("7", "a"), b = frames("7", "b"), c = frames("8", "c");
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}
