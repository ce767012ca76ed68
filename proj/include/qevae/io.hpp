#pragma once

#include <string>

namespace qevae {

std::string read_file(const std::string &path);
/// Writes via a temp file in the same directory, then renames.
void atomic_write_file(const std::string &path, const std::string &content);

} // namespace qevae
