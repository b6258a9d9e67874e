#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dlm::text {

// NFC-normalizes and lowercases a UTF-8 string. Throws dlm::Error on invalid UTF-8.
std::string normalize(std::string_view utf8);

// Splits a UTF-8 string into code points, each returned as its own UTF-8 string.
std::vector<std::string> code_points(std::string_view utf8);

// Number of code points.
std::size_t length(std::string_view utf8);

std::vector<std::string> split(std::string_view line, char delim);
std::string_view trim(std::string_view s);

}  // namespace dlm::text
