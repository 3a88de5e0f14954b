#ifndef CROPDX_TEXT_HPP_
#define CROPDX_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace cropdx {

// Canonical text form used everywhere in the library: ASCII letters
// lowercased, ASCII punctuation and whitespace mapped to single spaces,
// runs of separators collapsed, no leading/trailing space. Bytes >= 0x80
// (UTF-8 continuation/lead bytes) pass through untouched.
std::string normalize(std::string_view text);

// normalize() followed by a whitespace split; order preserved.
std::vector<std::string> tokenize(std::string_view text);

// Number of Unicode scalar values in a UTF-8 string (continuation bytes
// are not counted).
std::size_t utf8_length(std::string_view text);

// True when `phrase` (already normalized, possibly multi-token) appears
// as a contiguous token run inside `tokens`.
bool contains_phrase(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& phrase);

}  // namespace cropdx

#endif  // CROPDX_TEXT_HPP_
