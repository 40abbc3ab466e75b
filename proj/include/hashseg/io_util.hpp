// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef HASHSEG_IO_UTIL_HPP
#define HASHSEG_IO_UTIL_HPP

#include <fstream>
#include <stdexcept>
#include <string>

namespace hashseg {

// Unreadable or malformed data file. Carries the path and, when it refers to
// a specific line, the 1-based physical line number (0 otherwise).
class LoadError : public std::runtime_error {
 public:
  LoadError(std::string path, size_t line, const std::string& message)
      : std::runtime_error(line == 0 ? path + ": " + message
                                     : path + ":" + std::to_string(line) + ": " + message),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const { return path_; }
  size_t line() const { return line_; }

 private:
  std::string path_;
  size_t line_;
};

// Reads data lines from a UTF-8 text file. Lines starting with '#' and blank
// lines are skipped; a trailing '\r' is stripped. line_no() counts physical
// lines, 1-based, so errors can point at the offending line.
class LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw LoadError(path, 0, "cannot open file");
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  }

  size_t line_no() const { return line_no_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw LoadError(path_, line_no_, message);
  }

 private:
  std::string path_;
  std::ifstream in_;
  size_t line_no_ = 0;
};

}  // namespace hashseg

#endif
