#ifndef UKIT_IO_H_
#define UKIT_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace ukit {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place, creating parent
// directories as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace ukit

#endif  // UKIT_IO_H_
