#pragma once

#include <filesystem>
#include <string>

namespace qdistill {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);

// Write-then-rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace qdistill
