#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dpd/errors.hpp"

namespace dpd::detail {

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError(ModelErrc::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ModelError(ModelErrc::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw ModelError(ModelErrc::Io, "write failed for " + path.string());
}

} // namespace dpd::detail
