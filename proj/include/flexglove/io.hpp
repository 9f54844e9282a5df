#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "flexglove/error.hpp"

namespace flexglove::io {

/// Whole-file read. Missing or unreadable files raise an input error tagged
/// with `stage`, worded "<what>: file not found".
std::string read_text(const std::filesystem::path& path, Stage stage, std::string_view what);

/// Write through a sibling temp file and rename into place.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace flexglove::io
