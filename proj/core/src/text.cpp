#include "cropdx/text.hpp"

namespace cropdx {

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    char mapped = static_cast<char>(c);
    bool keep = false;
    if (c >= 'A' && c <= 'Z') {
      mapped = static_cast<char>(c - 'A' + 'a');
      keep = true;
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80) {
      keep = true;
    }
    if (keep) {
      if (pending_space && !out.empty()) out.push_back(' ');
      out.push_back(mapped);
      pending_space = false;
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::string norm = normalize(text);
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    if (end > start) tokens.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool contains_phrase(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < phrase.size(); ++j) {
      if (tokens[i + j] != phrase[j]) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace cropdx
