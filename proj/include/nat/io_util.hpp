#ifndef NAT_IO_UTIL_HPP
#define NAT_IO_UTIL_HPP

#include <string>

namespace nat {

std::string read_file(const std::string& path);

// Writes to <path>.tmp first, then renames, so readers never see partial files.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace nat

#endif  // NAT_IO_UTIL_HPP
