#pragma once

#include <string>

namespace nodality {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& data);

/// Lowercase hex SHA-256 of a file's contents. Throws if the file cannot
/// be opened.
std::string sha256_file(const std::string& path);

}  // namespace nodality
