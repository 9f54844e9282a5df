#include "flexglove/io.hpp"

#include <fstream>
#include <sstream>

namespace flexglove::io {

std::string read_text(const std::filesystem::path& path, Stage stage, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(stage, std::string(what) + ": file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ExportError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ExportError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ExportError("rename failed: " + path.string());
  }
}

}  // namespace flexglove::io
