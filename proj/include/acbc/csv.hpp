#pragma once
// Minimal CSV writer; numbers always at 17 significant digits so a read-back is exact.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "acbc/errors.hpp"

namespace acbc {

inline std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  template <typename... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

 private:
  static std::string cell(double v) { return num17(v); }
  static std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  static std::string cell(const char* s) { return cell(std::string(s)); }
  template <typename T>
  static std::string cell(const T& v) requires std::is_integral_v<T> {
    return std::to_string(v);
  }

  std::ostream& os_;
};

/// Output sink: the named file, or the fallback stream when path is empty.
class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw IoError("cannot open output file '" + path + "'");
    os_ = &file_;
  }
  std::ostream& stream() { return *os_; }
  void close() {
    if (file_.is_open()) {
      file_.close();
      if (file_.fail()) throw IoError("write to output file failed");
    }
  }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

}  // namespace acbc
