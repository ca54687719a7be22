#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace walklab {

/// "# key=value" lines written ahead of the column header.
using CsvMeta = std::vector<std::pair<std::string, std::string>>;

inline void write_csv_meta(std::ostream& out, const CsvMeta& meta) {
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
}

inline void write_csv_header(std::ostream& out, std::initializer_list<std::string_view> columns) {
  bool first = true;
  for (auto c : columns) {
    if (!first) out << ',';
    out << c;
    first = false;
  }
  out << '\n';
}

}  // namespace walklab
