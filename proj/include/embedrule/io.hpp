#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <system_error>
#include <unistd.h>

#include "embedrule/errors.hpp"

namespace embedrule {

namespace fs = std::filesystem;

// Writes through a sibling temp file and renames it into place, so readers
// observe either the previous file or the complete new one.
inline void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body,
                              bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    try {
      body(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

inline std::ifstream open_input(const fs::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace embedrule
