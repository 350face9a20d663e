#pragma once

#include <string>
#include <string_view>

namespace chirality_lab {

// Writes to a sibling temporary file, then renames over the target.
void atomic_write(const std::string& path, std::string_view bytes);
std::string read_file(const std::string& path);

}  // namespace chirality_lab
