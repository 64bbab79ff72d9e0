#pragma once

#include <fstream>
#include <iostream>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace rareword::io {

// getline that also strips a trailing CR.
inline bool read_line(std::istream& in, std::string& line)
{
  if (!std::getline(in, line))
    return false;
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  return true;
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Owns a file stream, or borrows stdin when the path is "-".
class Input {
public:
  explicit Input(const std::string& path)
    : path_(path)
  {
    if (path == "-") {
      stream_ = &std::cin;
      return;
    }
    file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*file_)
      throw DataError("cannot open input file '" + path + "'");
    stream_ = file_.get();
  }

  std::istream& stream() { return *stream_; }
  const std::string& path() const { return path_; }

private:
  std::string path_;
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class Output {
public:
  explicit Output(const std::string& path)
    : path_(path)
  {
    if (path == "-") {
      stream_ = &std::cout;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_)
      throw DataError("cannot open output file '" + path + "'");
    stream_ = file_.get();
  }

  ~Output()
  {
    if (stream_) stream_->flush();
  }

  Output(const Output&) = delete;
  Output& operator=(const Output&) = delete;

  std::ostream& stream() { return *stream_; }
  const std::string& path() const { return path_; }

  void close()
  {
    stream_->flush();
    if (!*stream_)
      throw DataError("write failed on '" + path_ + "'");
    if (file_) file_->close();
  }

private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

template <class Range>
void write_joined(std::ostream& out, const Range& tokens, char sep = ' ')
{
  bool first = true;
  for (const auto& t : tokens) {
    if (!first) out.put(sep);
    out << t;
    first = false;
  }
}

} // namespace rareword::io
