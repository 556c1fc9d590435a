#ifndef MSAT_UTIL_TEXT_H_
#define MSAT_UTIL_TEXT_H_

#include <string>
#include <vector>

namespace msat {

// Splits a UTF-8 string into one std::string per codepoint. Invalid bytes
// are kept as single-byte units rather than rejected.
std::vector<std::string> utf8_chars(const std::string& s);

// Whitespace-delimited tokens (space, tab, newline, CR).
std::vector<std::string> split_ws(const std::string& s);

std::vector<std::string> split(const std::string& s, char sep);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

// Trims trailing \r\n and spaces/tabs at both ends.
std::string trim(const std::string& s);

}  // namespace msat

#endif  // MSAT_UTIL_TEXT_H_
