#include "flexglove/pipeline.hpp"

#include <chrono>
#include <fmt/format.h>

#include "flexglove/error.hpp"
#include "flexglove/io.hpp"

namespace flexglove::pipeline {

namespace {

class Timer {
 public:
  Timer(std::vector<StageTime>& out, const Log& log, std::string stage)
      : out_(out), log_(log), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}

  void done(const std::string& summary) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    out_.push_back({stage_, s});
    if (log_) log_(fmt::format("{:<8} {:6.2f} s  {}", stage_, s, summary));
  }

 private:
  std::vector<StageTime>& out_;
  const Log& log_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

Design generate(const capture::HandModel& hand, const config::PipelineConfig& cfg, const fab::CostTable& costs,
                const Log& log) {
  Design d;
  d.hand = hand;

  Timer t_layout(d.timings, log, "layout");
  d.layout = layout::synthesize(d.hand, cfg.layout);
  t_layout.done(fmt::format("{} regions, {} taxels, {} row nets, {} column nets", d.layout.regions.size(),
                            d.layout.electrodes.taxels.size(), d.layout.row_nets, d.layout.col_nets));

  Timer t_route(d.timings, log, "routing");
  d.routing = routing::route(d.layout, cfg.routing);
  t_route.done(fmt::format("{} nets, min clearance front {:.4f} mm, back {:.4f} mm", d.routing.nets.size(),
                           d.routing.front_clearance.min_clearance_mm, d.routing.back_clearance.min_clearance_mm));

  Timer t_board(d.timings, log, "layers");
  d.boards = board::assemble(d.layout, d.routing, cfg.board);
  board::check_invariants(d.boards, d.layout, cfg.board);
  t_board.done(fmt::format("{} inner cuts", d.boards.front.inner_cuts.size()));

  Timer t_export(d.timings, log, "export");
  fab::ExportConfig ec = cfg.fab;
  ec.page = {{0.0, 0.0}, {d.hand.page_width_mm, d.hand.page_height_mm}};
  const std::string& id = ec.hand_id;
  std::vector<fab::OutputFile> extra;
  extra.push_back({id + "_layout.json", "", "json", "layout", layout::to_json(d.layout)});
  extra.push_back({id + "_routing_report.txt", "", "text", "routing", routing::report_text(d.routing)});
  extra.push_back({id + "_routing.json", "", "json", "routing", routing::report_json(d.routing)});
  for (const board::BoardDesign* b : {&d.boards.front, &d.boards.back}) {
    const std::string side = routing::side_name(b->side);
    extra.push_back({fmt::format("{}_{}_board.json", id, side), side, "json", "board", board::to_json(*b)});
  }
  extra.push_back({id + "_config.conf", "", "text", "config", config::dump(cfg)});
  d.files = fab::package(d.boards, costs, ec, std::move(extra));
  t_export.done(fmt::format("{} files", d.files.size()));
  return d;
}

Design generate(const GenerateInputs& in, const Log& log) {
  std::vector<StageTime> timings;
  Timer t_capture(timings, log, "capture");
  in.cfg.capture.validate();
  const capture::HandModel hand = capture::capture_hand(in.image, in.landmarks, in.cfg.capture);
  capture::check_invariants(hand);
  t_capture.done(fmt::format("{:.2f} px/mm, {} contour vertices, {} hand", hand.px_per_mm,
                             hand.contour.exterior.size(),
                             hand.handedness == capture::Handedness::Right ? "right" : "left"));
  const fab::CostTable costs =
      in.costs ? fab::parse_costs(io::read_text(*in.costs, Stage::Export, "costs")) : fab::default_costs();
  Design d = generate(hand, in.cfg, costs, log);
  d.timings.insert(d.timings.begin(), timings.begin(), timings.end());
  return d;
}

void write_outputs(const std::vector<fab::OutputFile>& files, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const bool existed = fs::exists(dir, ec);
  if (existed && !fs::is_directory(dir, ec)) throw SchemaError(Stage::Export, "output: not a directory: " + dir.string());
  if (!existed && !fs::create_directories(dir, ec))
    throw SchemaError(Stage::Export, "output: cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  try {
    for (const auto& f : files) {
      const fs::path p = dir / f.name;
      io::write_atomic(p, f.bytes);
      written.push_back(p);
    }
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    if (!existed) fs::remove_all(dir, ec);
    throw;
  }
}

}  // namespace flexglove::pipeline
