#pragma once

#include <stdexcept>
#include <string>

namespace flexglove {

/// Pipeline stage that raised an error. Used to tag CLI diagnostics.
enum class Stage {
  Geometry,
  Capture,
  Landmarks,
  Synthesis,
  Routing,
  Layers,
  Export,
  Mechanics,
  Readout,
  Config,
};

const char* stage_name(Stage stage) noexcept;

/// Base error. `is_input_error()` separates bad user input (exit 2) from
/// internal invariant failures (exit 1).
class Error : public std::runtime_error {
 public:
  Error(Stage stage, const std::string& what, bool input_error = false)
      : std::runtime_error(what), stage_(stage), input_error_(input_error) {}

  Stage stage() const noexcept { return stage_; }
  bool is_input_error() const noexcept { return input_error_; }

 private:
  Stage stage_;
  bool input_error_;
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error(Stage::Geometry, what) {}
};

class CaptureError : public Error {
 public:
  explicit CaptureError(const std::string& what) : Error(Stage::Capture, what, true) {}
};

/// Malformed input document (landmarks, frames, scripts, stackups, config).
class SchemaError : public Error {
 public:
  SchemaError(Stage stage, const std::string& what) : Error(stage, what, true) {}
};

class SynthesisError : public Error {
 public:
  explicit SynthesisError(const std::string& what) : Error(Stage::Synthesis, what) {}
};

class RoutingError : public Error {
 public:
  explicit RoutingError(const std::string& what) : Error(Stage::Routing, what) {}
};

class LayerError : public Error {
 public:
  explicit LayerError(const std::string& what) : Error(Stage::Layers, what) {}
};

class ExportError : public Error {
 public:
  explicit ExportError(const std::string& what) : Error(Stage::Export, what) {}
};

class MechanicsError : public Error {
 public:
  explicit MechanicsError(const std::string& what, bool input_error = true)
      : Error(Stage::Mechanics, what, input_error) {}
};

class ReadoutError : public Error {
 public:
  explicit ReadoutError(const std::string& what, bool input_error = true)
      : Error(Stage::Readout, what, input_error) {}
};

}  // namespace flexglove
