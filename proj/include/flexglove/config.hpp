#pragma once

// Layered pipeline configuration. Values come from built-in defaults, then
// a key-value file, then command-line overrides, each layer replacing the
// previous one key by key.
//
// File format: one `key = value` per line. `#` starts a comment. Lists are
// comma-separated, grids are written `ROWSxCOLS`.

#include <filesystem>
#include <string>
#include <vector>

#include "flexglove/board.hpp"
#include "flexglove/fab_export.hpp"
#include "flexglove/hand_capture.hpp"
#include "flexglove/layout.hpp"
#include "flexglove/mechanics.hpp"
#include "flexglove/readout.hpp"
#include "flexglove/routing.hpp"

namespace flexglove::config {

struct PipelineConfig {
  capture::CaptureConfig capture;
  layout::LayoutConfig layout;
  routing::RoutingConfig routing;
  board::BoardConfig board;
  fab::ExportConfig fab;
  readout::ResponseModel response;
  readout::CircuitParams circuit;
  double reference_bend_radius_mm = 2.5;
};

/// Every recognised key in canonical order.
std::vector<std::string> keys();

/// Sets one key. `where` prefixes error messages (file:line or flag).
void set(PipelineConfig& c, const std::string& key, const std::string& value, const std::string& where);
std::string get(const PipelineConfig& c, const std::string& key);

/// Applies a config file's text on top of `c`. Errors name the line.
void apply_text(PipelineConfig& c, const std::string& text, const std::string& source);
void apply_file(PipelineConfig& c, const std::filesystem::path& path);

/// Applies a `key=value` override.
void apply_override(PipelineConfig& c, const std::string& assignment);

/// Canonical `key = value` listing; parsing it reproduces `c`.
std::string dump(const PipelineConfig& c);

}  // namespace flexglove::config
