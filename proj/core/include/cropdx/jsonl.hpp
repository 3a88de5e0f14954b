#ifndef CROPDX_JSONL_HPP_
#define CROPDX_JSONL_HPP_

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace cropdx {

// Parse failure for line-delimited record files; carries the 1-based line.
class JsonlError : public std::runtime_error {
 public:
  JsonlError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Calls fn(line_number, parsed_object) for every non-empty line. Throws
// JsonlError on malformed lines or missing files.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t,
                                             const nlohmann::json&)>& fn);

}  // namespace cropdx

#endif  // CROPDX_JSONL_HPP_
