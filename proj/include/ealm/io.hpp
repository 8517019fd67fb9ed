// Copyright 2026 The EALM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EALM_IO_HPP
#define EALM_IO_HPP

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ealm/error.hpp"
#include "ealm/grid.hpp"
#include "ealm/ids_cog.hpp"

/**
 * \file
 * \brief Text formats: CSV datasets, PGM (P2) rasters and narrow-path CSV.
 */

namespace ealm {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  if (s.empty()) {
    return false;
  }
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace detail

/// Reads rows of `x1,...,xn,y`. A first line that does not parse as numbers
/// is taken as a header. Blank lines are skipped.
inline Dataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<Dataset> ds;
  bool first = true;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) {
      continue;
    }
    const auto fields = detail::split(text, ',');
    values.clear();
    bool numeric = true;
    for (auto f : fields) {
      double v = 0.0;
      if (!detail::parse_double(f, v)) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      detail::fail(ErrorKind::kData, "line " + std::to_string(line_no) + ": malformed number");
    }
    first = false;
    if (values.size() < 2) {
      detail::fail(ErrorKind::kData, "line " + std::to_string(line_no) + ": need at least one input and one output");
    }
    if (!ds) {
      ds.emplace(values.size() - 1);
    }
    if (values.size() - 1 != ds->n_inputs()) {
      detail::fail(ErrorKind::kData, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(ds->n_inputs() + 1) + " columns, found " +
                                         std::to_string(values.size()));
    }
    try {
      ds->add(std::span<const double>(values.data(), values.size() - 1), values.back());
    } catch (const Error& e) {
      detail::fail(ErrorKind::kData, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!ds) {
    detail::fail(ErrorKind::kData, "empty dataset");
  }
  return *ds;
}

inline Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    detail::fail(ErrorKind::kData, "cannot open " + path.string());
  }
  return read_csv(in);
}

inline void write_csv(std::ostream& out, const Dataset& ds, bool header = true) {
  if (header) {
    for (std::size_t i = 0; i < ds.n_inputs(); ++i) {
      out << 'x' << (i + 1) << ',';
    }
    out << "y\n";
  }
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t i = 0; i < ds.n_inputs(); ++i) {
      out << format_double(ds.x(r, i)) << ',';
    }
    out << format_double(ds.y(r)) << '\n';
  }
}

/// P2 image, 0/255, top row of the file is the top (highest row) of the grid.
inline void write_pgm(std::ostream& out, const BinaryGrid& g) {
  out << "P2\n" << g.width() << ' ' << g.height() << "\n255\n";
  for (int r = g.height() - 1; r >= 0; --r) {
    for (int c = 0; c < g.width(); ++c) {
      out << (c ? " " : "") << (g.at(c, r) ? 255 : 0);
    }
    out << '\n';
  }
}

/// P2 image with intensities rescaled linearly so the maximum maps to 255.
inline void write_pgm(std::ostream& out, const DataPlane& p) {
  const double peak = p.max_value();
  out << "P2\n" << p.width() << ' ' << p.height() << "\n255\n";
  for (int r = p.height() - 1; r >= 0; --r) {
    for (int c = 0; c < p.width(); ++c) {
      const int v = peak > 0.0 ? static_cast<int>(std::lround(p.at(c, r) / peak * 255.0)) : 0;
      out << (c ? " " : "") << v;
    }
    out << '\n';
  }
}

template <class Image>
void write_pgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path);
  if (!out) {
    detail::fail(ErrorKind::kData, "cannot write " + path.string());
  }
  write_pgm(out, image);
}

/// Reads a P2 image; pixels above half the maximum value become foreground.
inline BinaryGrid read_pgm(std::istream& in) {
  std::vector<long> tokens;
  std::string magic;
  std::string line;
  bool have_magic = false;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (!have_magic) {
        magic = tok;
        have_magic = true;
        continue;
      }
      long v = 0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        detail::fail(ErrorKind::kData, "malformed PGM token '" + tok + "'");
      }
      tokens.push_back(v);
    }
  }
  if (magic != "P2") {
    detail::fail(ErrorKind::kData, "only plain PGM (P2) is supported");
  }
  if (tokens.size() < 3) {
    detail::fail(ErrorKind::kData, "truncated PGM header");
  }
  const long w = tokens[0];
  const long h = tokens[1];
  const long maxval = tokens[2];
  if (w < 1 || h < 1 || maxval < 1 || static_cast<long>(tokens.size()) != 3 + w * h) {
    detail::fail(ErrorKind::kData, "PGM size does not match its pixel data");
  }
  BinaryGrid g(static_cast<int>(w), static_cast<int>(h));
  for (long i = 0; i < w * h; ++i) {
    const int file_row = static_cast<int>(i / w);
    const int c = static_cast<int>(i % w);
    g.set(c, static_cast<int>(h) - 1 - file_row, 2 * tokens[static_cast<std::size_t>(3 + i)] > maxval);
  }
  return g;
}

inline BinaryGrid read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    detail::fail(ErrorKind::kData, "cannot open " + path.string());
  }
  return read_pgm(in);
}

/// `column_index,delegate_row,confidence`; absent delegates leave both
/// value fields empty.
inline void write_path_csv(std::ostream& out, const NarrowPath& path) {
  out << "column_index,delegate_row,confidence\n";
  for (std::size_t c = 0; c < path.delegate.size(); ++c) {
    out << c << ',';
    if (path.delegate[c]) {
      out << format_double(*path.delegate[c]) << ',' << format_double(path.confidence[c].value_or(0.0));
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace ealm

#endif  // EALM_IO_HPP
