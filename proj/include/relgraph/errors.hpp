#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relgraph {

// Invalid parameters or inconsistent configuration (single-class training
// sets, empty grids, bad search spaces, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file. Carries the file path and 1-based line number
// (0 when the problem is not tied to a line).
class InputError : public std::runtime_error {
 public:
  InputError(std::string path, std::size_t line, const std::string& what)
      : std::runtime_error(format(path, line, what)),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& path, std::size_t line,
                            const std::string& what) {
    std::string out = path;
    if (line > 0) out += ":" + std::to_string(line);
    return out + ": " + what;
  }

  std::string path_;
  std::size_t line_;
};

}  // namespace relgraph
