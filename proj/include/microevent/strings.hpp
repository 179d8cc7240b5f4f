#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace microevent {

std::string to_lower_ascii(std::string_view text);
std::string_view trim(std::string_view text);

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Decodes named (amp, lt, gt, quot, apos, nbsp) and numeric character
// references once. Unknown references are left untouched.
std::string decode_entities(std::string_view text);

void append_utf8(std::string& out, char32_t code_point);

// RFC 4180 style field splitting for a single line (quotes, doubled quotes).
std::vector<std::string> parse_csv_line(std::string_view line);

// Quotes a CSV field only when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Shortest decimal representation that round-trips (%.17g trimmed).
std::string format_double(double value);

}  // namespace microevent
