#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <type_traits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmk/errors.hpp"

namespace rmkcli {

// Shortest round-trip formatting keeps reruns byte-identical.
inline std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, p);
}

template <class T, std::enable_if_t<std::is_integral_v<T>, int> = 0>
std::string num(T v) {
  return std::to_string(v);
}

// Tab-separated table with one header row.
class Table {
public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != rows_.front().size())
      throw std::runtime_error("table row width mismatch");
    rows_.push_back(std::move(cells));
  }

  std::string to_tsv() const {
    std::string out;
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += '\t';
        out += row[i];
      }
      out += '\n';
    }
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw rmk::DataError("cannot write " + path);
    os << to_tsv();
    if (!os) throw rmk::DataError("write failed: " + path);
  }

private:
  std::vector<std::vector<std::string>> rows_;
};

} // namespace rmkcli
