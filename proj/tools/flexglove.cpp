// flexglove command-line interface.
//
// Exit codes: 0 success, 1 internal invariant failure, 2 input or usage error.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flexglove/config.hpp"
#include "flexglove/error.hpp"
#include "flexglove/io.hpp"
#include "flexglove/mechanics.hpp"
#include "flexglove/pipeline.hpp"
#include "flexglove/readout.hpp"

namespace fs = std::filesystem;
using namespace flexglove;

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kInput = 2;

struct Global {
  std::uint64_t seed = 0;
  bool quiet = false;
};

void log_line(const Global& g, const std::string& s) {
  if (!g.quiet) fmt::print(stderr, "{}\n", s);
}

config::PipelineConfig load_config(const std::optional<fs::path>& file, const std::vector<std::string>& sets) {
  config::PipelineConfig c;
  if (file) config::apply_file(c, *file);
  for (const auto& s : sets) config::apply_override(c, s);
  return c;
}

// --- generate --------------------------------------------------------------------------

struct GenerateArgs {
  fs::path image, landmarks, out;
  std::optional<fs::path> config, costs;
  std::vector<std::string> sets;
  std::optional<std::string> hand_id;
};

int run_generate(const Global& g, const GenerateArgs& a) {
  pipeline::GenerateInputs in;
  in.image = a.image;
  in.landmarks = a.landmarks;
  in.costs = a.costs;
  in.cfg = load_config(a.config, a.sets);
  if (a.hand_id) config::apply_override(in.cfg, "export.hand_id=" + *a.hand_id);
  const auto design = pipeline::generate(in, [&](const std::string& s) { log_line(g, s); });
  pipeline::write_outputs(design.files, a.out);
  log_line(g, fmt::format("wrote {} files to {}", design.files.size(), a.out.string()));
  return kOk;
}

// --- analyze-stackup -------------------------------------------------------------------

struct StackupArgs {
  fs::path stackups, materials;
  std::optional<fs::path> out;
  std::optional<fs::path> config;
  std::vector<std::string> sets;
};

int run_stackup(const Global&, const StackupArgs& a) {
  const auto cfg = load_config(a.config, a.sets);
  const auto stackups = mech::load_stackups(a.stackups);
  if (stackups.empty()) throw SchemaError(Stage::Mechanics, "stackups: the list is empty");
  const auto materials = mech::load_materials(a.materials);
  const auto cmp = mech::compare_stackups(stackups, materials, cfg.reference_bend_radius_mm);
  fmt::print("{}", mech::format_table(cmp));
  if (a.out) io::write_atomic(*a.out, mech::format_csv(cmp));
  return kOk;
}

// --- simulate ----------------------------------------------------------------------------

struct SimulateArgs {
  fs::path design, script, out;
  std::optional<fs::path> config;
  std::vector<std::string> sets;
};

int run_simulate(const Global& g, const SimulateArgs& a) {
  const auto cfg = load_config(a.config, a.sets);
  cfg.response.validate();
  const auto map = readout::parse_taxel_map(io::read_text(a.design, Stage::Readout, "design"));
  const auto script = readout::parse_script(io::read_text(a.script, Stage::Readout, "script"));
  const auto frames = readout::press_script(map, script, cfg.response, cfg.circuit, g.seed);
  const auto peaks = readout::detect_peaks(frames);
  std::string csv = "peak,frame,t,mean_count\n";
  for (std::size_t i = 0; i < peaks.size(); ++i)
    csv += fmt::format("{},{},{:.6f},{:.6f}\n", i, peaks[i].frame, frames[peaks[i].frame].t, peaks[i].value);
  pipeline::write_outputs({{"frames.jsonl", "", "jsonl", "frames", readout::frames_to_jsonl(frames)},
                           {"peaks.csv", "", "csv", "peaks", csv}},
                          a.out);
  log_line(g, fmt::format("{} frames, {} peaks -> {}", frames.size(), peaks.size(), a.out.string()));
  return kOk;
}

// --- analyze-frames ----------------------------------------------------------------------

struct FramesArgs {
  fs::path frames, presses, out;
  int window = 50;
  int size = 64;
};

int run_frames(const Global& g, const FramesArgs& a) {
  const auto frames = readout::parse_frames_jsonl(io::read_text(a.frames, Stage::Readout, "frames"));
  const auto presses = readout::parse_presses(io::read_text(a.presses, Stage::Readout, "presses"));
  const auto stats = readout::press_window_stats(frames, presses, a.window, a.size);
  std::error_code ec;
  const bool existed = fs::exists(a.out, ec);
  pipeline::write_outputs({{"stats.csv", "", "csv", "stats", readout::stats_csv(stats)}}, a.out);
  try {
    for (std::size_t i = 0; i < stats.presses.size(); ++i)
      readout::write_png(a.out / fmt::format("press_{:03d}.png", i), stats.presses[i].image);
    // variance scaled to the full 8-bit range for viewing
    readout::Image v = stats.variance;
    const double top = v.px.empty() ? 0.0 : *std::max_element(v.px.begin(), v.px.end());
    for (double& p : v.px) p = top > 0.0 ? p * 255.0 / top : 0.0;
    readout::write_png(a.out / "variance.png", v);
  } catch (...) {
    if (!existed) fs::remove_all(a.out, ec);
    throw;
  }
  for (const auto& p : stats.presses)
    if (p.truncated) log_line(g, fmt::format("warning: window around frame {} was truncated", p.peak_frame));
  log_line(g, fmt::format("{} presses, total variance {:.3f} -> {}", stats.presses.size(), stats.total_variance,
                          a.out.string()));
  return kOk;
}

// --- show-config -------------------------------------------------------------------------

int run_show_config(const std::optional<fs::path>& file, const std::vector<std::string>& sets) {
  fmt::print("{}", config::dump(load_config(file, sets)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalized tactile glove FPCB generator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("flexglove ") + pipeline::kVersion);
  Global g;
  app.add_option("--seed", g.seed, "Seed for randomized behaviour (sensor noise)");
  app.add_flag("-q,--quiet", g.quiet, "Suppress progress output on stderr");

  std::optional<fs::path> cfg_file;
  std::vector<std::string> sets;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", cfg_file, "Key-value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "Override one config key (key=value), repeatable");
  };

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Build a sensor design from a hand photo and landmark JSON");
  gen->add_option("--image", ga.image, "Photo of the hand on a letter sheet")->required();
  gen->add_option("--landmarks", ga.landmarks, "21-landmark JSON")->required();
  gen->add_option("--out", ga.out, "Output directory")->required();
  gen->add_option("--costs", ga.costs, "Cost table JSON for the BOM");
  gen->add_option("--hand-id", ga.hand_id, "File-name stem for outputs");
  add_config(gen);

  StackupArgs sa;
  auto* stk = app.add_subcommand("analyze-stackup", "Minimum bend radius of flex stackups");
  stk->add_option("--stackups", sa.stackups, "Stackup JSON")->required();
  stk->add_option("--materials", sa.materials, "Materials JSON")->required();
  stk->add_option("--out", sa.out, "CSV report path");
  add_config(stk);

  SimulateArgs sm;
  auto* sim = app.add_subcommand("simulate", "Synthesize a readout frame stream from a press script");
  sim->add_option("--design", sm.design, "Layout JSON from generate (taxel map)")->required();
  sim->add_option("--script", sm.script, "Press script JSON")->required();
  sim->add_option("--out", sm.out, "Output directory")->required();
  add_config(sim);

  FramesArgs fa;
  auto* frm = app.add_subcommand("analyze-frames", "Press-window images and variance map from a frame stream");
  frm->add_option("--frames", fa.frames, "Frame stream (JSON lines)")->required();
  frm->add_option("--presses", fa.presses, "Press windows JSON")->required();
  frm->add_option("--out", fa.out, "Output directory")->required();
  frm->add_option("--window", fa.window, "Frames averaged per press")->check(CLI::PositiveNumber);
  frm->add_option("--size", fa.size, "Output image size")->check(CLI::PositiveNumber);

  auto* show = app.add_subcommand("show-config", "Print the effective configuration");
  add_config(show);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  ga.config = sa.config = sm.config = cfg_file;
  ga.sets = sa.sets = sm.sets = sets;
  try {
    if (*gen) return run_generate(g, ga);
    if (*stk) return run_stackup(g, sa);
    if (*sim) return run_simulate(g, sm);
    if (*frm) return run_frames(g, fa);
    if (*show) return run_show_config(cfg_file, sets);
  } catch (const Error& e) {
    fmt::print(stderr, "error [{}]: {}\n", stage_name(e.stage()), e.what());
    return e.is_input_error() ? kInput : kInternal;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error [internal]: {}\n", e.what());
    return kInternal;
  }
  return kInput;
}
