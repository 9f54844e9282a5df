#pragma once

// End-to-end design generation: capture, layout, routing, board layers and
// fabrication files, with every invariant audit run before anything is
// written.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flexglove/config.hpp"

namespace flexglove::pipeline {

inline constexpr const char* kVersion = "0.1.0";

using Log = std::function<void(const std::string&)>;

struct GenerateInputs {
  std::filesystem::path image;
  std::filesystem::path landmarks;
  config::PipelineConfig cfg;
  std::optional<std::filesystem::path> costs;  // default table when empty
};

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct Design {
  capture::HandModel hand;
  layout::Layout layout;
  routing::Routing routing;
  board::Boards boards;
  std::vector<fab::OutputFile> files;  // manifest last
  std::vector<StageTime> timings;
};

Design generate(const GenerateInputs& in, const Log& log = {});

/// Same pipeline from an already captured hand.
Design generate(const capture::HandModel& hand, const config::PipelineConfig& cfg, const fab::CostTable& costs,
                const Log& log = {});

/// Writes every file into `dir` (created if needed). On failure the files
/// written so far, and the directory if this call created it, are removed.
void write_outputs(const std::vector<fab::OutputFile>& files, const std::filesystem::path& dir);

}  // namespace flexglove::pipeline
