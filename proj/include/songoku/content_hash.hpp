#pragma once

#include <string>
#include <string_view>

namespace songoku {

/// Git blob id: hex SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_hash(std::string_view content);

}  // namespace songoku
