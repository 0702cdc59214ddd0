#pragma once

#include <charconv>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "spinres/errors.hpp"
#include "spinres/state.hpp"
#include "spinres/topology.hpp"

namespace spinres {

/// Shortest-safe decimal for CSV output: 17 significant digits.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Parses a full decimal/scientific token; throws ConfigError otherwise.
inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

/// One row per line, comma separated, 17 significant digits.
inline void write_matrix_csv(std::ostream& os, const DenseMatrix& a) {
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      if (c) os << ',';
      os << format_double(a(r, c));
    }
    os << '\n';
  }
}

inline DenseMatrix read_matrix_csv(std::istream& is) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    if (rows == 0) cols = cells.size();
    if (cells.size() != cols)
      throw ConfigError("matrix CSV: ragged row, expected " + std::to_string(cols) + " columns",
                        rows + 1);
    for (auto cell : cells) values.push_back(parse_double(cell));
    ++rows;
  }
  DenseMatrix a(rows, cols);
  std::copy(values.begin(), values.end(), a.data().begin());
  return a;
}

inline void save_coupling_csv(std::ostream& os, const CouplingMatrix& w) { write_matrix_csv(os, w.entries()); }
inline CouplingMatrix load_coupling_csv(std::istream& is) { return CouplingMatrix(read_matrix_csv(is)); }
inline void save_input_weights_csv(std::ostream& os, const InputWeights& w) { write_matrix_csv(os, w.entries()); }
inline InputWeights load_input_weights_csv(std::istream& is) { return InputWeights(read_matrix_csv(is)); }

}  // namespace spinres
