#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace medscribe {

// Files under core/data are compiled into the library. Paths are relative to
// that directory, e.g. "templates/diarization.txt".
std::string_view embedded_file(std::string_view relative_path);
std::vector<std::string> embedded_file_names();

std::string read_file(const std::string& path);

}  // namespace medscribe
