#include "flexglove/error.hpp"

namespace flexglove {

const char* stage_name(Stage stage) noexcept {
  switch (stage) {
    case Stage::Geometry: return "geometry";
    case Stage::Capture: return "capture";
    case Stage::Landmarks: return "landmarks";
    case Stage::Synthesis: return "layout";
    case Stage::Routing: return "routing";
    case Stage::Layers: return "layers";
    case Stage::Export: return "export";
    case Stage::Mechanics: return "mechanics";
    case Stage::Readout: return "readout";
    case Stage::Config: return "config";
  }
  return "unknown";
}

}  // namespace flexglove
