#include "medscribe/data.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <utility>

#include "medscribe/error.hpp"

namespace medscribe {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kEmbeddedFiles[];
extern const std::size_t kEmbeddedFileCount;
}  // namespace detail

std::string_view embedded_file(std::string_view relative_path) {
  for (std::size_t i = 0; i < detail::kEmbeddedFileCount; ++i) {
    if (detail::kEmbeddedFiles[i].first == relative_path) {
      return detail::kEmbeddedFiles[i].second;
    }
  }
  throw Error(ErrorCode::IoError,
              fmt::format("no embedded data file '{}'", relative_path));
}

std::vector<std::string> embedded_file_names() {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < detail::kEmbeddedFileCount; ++i) {
    names.emplace_back(detail::kEmbeddedFiles[i].first);
  }
  return names;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace medscribe
