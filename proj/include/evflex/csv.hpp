#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evflex/errors.hpp"

namespace evflex::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file: " + path);
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      t.header = split_line(line);
      first = false;
    } else {
      t.rows.push_back(split_line(line));
    }
  }
  if (first) throw ConfigError("empty CSV file: " + path);
  return t;
}

// Numbers are written with round-trip precision so that re-reading a report
// reproduces the exact doubles.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // trim to the shortest representation that round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path) {
    if (!out_) throw ConfigError("cannot open CSV file for writing: " + path);
  }
  void row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace evflex::csv
