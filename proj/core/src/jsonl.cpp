#include "cropdx/jsonl.hpp"

#include <fstream>

namespace cropdx {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t,
                                             const nlohmann::json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw JsonlError("cannot open file: " + path.string(), 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw JsonlError(path.string() + ":" + std::to_string(lineno) + ": " +
                           e.what(),
                       lineno);
    }
    fn(lineno, j);
  }
}

}  // namespace cropdx
