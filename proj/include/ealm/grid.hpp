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

#ifndef EALM_GRID_HPP
#define EALM_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ealm/error.hpp"

/**
 * \file
 * \brief Raster data model: datasets, grid specifications, binary grids and
 * scalar data planes, and the projection of samples onto variable-pair planes.
 *
 * Grids are stored column-major in the sense of the modeling domain: column
 * `c` indexes the horizontal (input) axis and row `r` the vertical axis, with
 * row 0 holding the *smallest* vertical values. Image exports flip this so the
 * top of a file is the top of the plane.
 */

namespace ealm {

/// Closed interval of reals used to map values to bins.
struct Range {
  double min = 0.0;
  double max = 1.0;

  [[nodiscard]] double span() const noexcept { return max - min; }
  [[nodiscard]] bool valid() const noexcept { return std::isfinite(min) && std::isfinite(max) && max > min; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Multi-input single-output sample set.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t n_inputs) : n_inputs_{n_inputs} {
    detail::require(n_inputs >= 1, "dataset needs at least one input");
  }

  /// Appends one sample; throws on arity mismatch or non-finite values.
  void add(std::span<const double> x, double y) {
    if (x.size() != n_inputs_) {
      detail::fail(ErrorKind::kData, "row has " + std::to_string(x.size()) + " inputs, expected " +
                                         std::to_string(n_inputs_));
    }
    if (!std::isfinite(y) || !std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
      detail::fail(ErrorKind::kData, "non-finite value in row");
    }
    inputs_.insert(inputs_.end(), x.begin(), x.end());
    outputs_.push_back(y);
  }

  void add(std::initializer_list<double> x, double y) { add(std::span<const double>(x.begin(), x.size()), y); }

  [[nodiscard]] std::size_t n_inputs() const noexcept { return n_inputs_; }
  [[nodiscard]] std::size_t size() const noexcept { return outputs_.size(); }
  [[nodiscard]] bool empty() const noexcept { return outputs_.empty(); }

  [[nodiscard]] std::span<const double> x(std::size_t row) const {
    return {inputs_.data() + row * n_inputs_, n_inputs_};
  }
  [[nodiscard]] double x(std::size_t row, std::size_t input) const { return inputs_[row * n_inputs_ + input]; }
  [[nodiscard]] double y(std::size_t row) const { return outputs_[row]; }
  [[nodiscard]] const std::vector<double>& outputs() const noexcept { return outputs_; }

  [[nodiscard]] std::vector<double> input_column(std::size_t input) const {
    std::vector<double> out(size());
    for (std::size_t r = 0; r < size(); ++r) {
      out[r] = x(r, input);
    }
    return out;
  }

  /// Rows selected by index, in the given order.
  [[nodiscard]] Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out(n_inputs_);
    for (auto r : rows) {
      out.add(x(r), y(r));
    }
    return out;
  }

  [[nodiscard]] Range input_range(std::size_t input) const { return extent([&](std::size_t r) { return x(r, input); }); }
  [[nodiscard]] Range output_range() const { return extent([&](std::size_t r) { return y(r); }); }

 private:
  template <class Get>
  [[nodiscard]] Range extent(Get get) const {
    if (empty()) {
      detail::fail(ErrorKind::kData, "empty dataset");
    }
    Range r{get(0), get(0)};
    for (std::size_t i = 1; i < size(); ++i) {
      r.min = std::min(r.min, get(i));
      r.max = std::max(r.max, get(i));
    }
    return r;
  }

  std::size_t n_inputs_ = 1;
  std::vector<double> inputs_;
  std::vector<double> outputs_;
};

/// Widens a degenerate range so it can be binned.
inline Range padded(Range r) {
  if (r.max > r.min) {
    return r;
  }
  const double pad = std::max(1e-9, std::abs(r.min) * 1e-9);
  return {r.min - pad, r.max + pad};
}

/// Raster geometry: bin counts and the real intervals they cover.
struct GridSpec {
  int width = 64;
  int height = 64;
  Range x_range{};
  Range y_range{};

  void validate() const {
    detail::require(width >= 2 && height >= 2, "grid must be at least 2x2");
    detail::require(x_range.valid() && y_range.valid(), "grid ranges must satisfy max > min");
  }

  /// Half-open binning with the top edge folded into the last bin; values
  /// outside the range clip to the boundary bins.
  [[nodiscard]] static int bin(double v, Range range, int n) noexcept {
    const double t = std::floor((v - range.min) / range.span() * n);
    if (!(t >= 0.0)) {
      return 0;
    }
    return t >= n ? n - 1 : static_cast<int>(t);
  }

  [[nodiscard]] int column_of(double x) const noexcept { return bin(x, x_range, width); }
  [[nodiscard]] int row_of(double y) const noexcept { return bin(y, y_range, height); }

  /// Continuous bin coordinate of a value, with bin centres at integers.
  [[nodiscard]] double column_coord(double x) const noexcept { return (x - x_range.min) / x_range.span() * width - 0.5; }

  [[nodiscard]] double column_center(double c) const noexcept { return x_range.min + (c + 0.5) * x_range.span() / width; }
  [[nodiscard]] double row_center(double r) const noexcept { return y_range.min + (r + 0.5) * y_range.span() / height; }

  /// Left edge of column `c` in input units.
  [[nodiscard]] double column_edge(int c) const noexcept { return x_range.min + c * x_range.span() / width; }
  [[nodiscard]] double row_edge(int r) const noexcept { return y_range.min + r * y_range.span() / height; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// A set of cells on a bounded raster (foreground = member).
class BinaryGrid {
 public:
  BinaryGrid() = default;
  explicit BinaryGrid(GridSpec spec) : spec_{spec}, cells_(static_cast<std::size_t>(spec.width) * spec.height, 0) {
    detail::require(spec.width >= 1 && spec.height >= 1, "grid dimensions must be positive");
  }

  /// Grid with default unit ranges, for pure morphology work.
  BinaryGrid(int width, int height) : BinaryGrid(GridSpec{width, height, {0.0, 1.0}, {0.0, 1.0}}) {}

  [[nodiscard]] const GridSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] int width() const noexcept { return spec_.width; }
  [[nodiscard]] int height() const noexcept { return spec_.height; }

  [[nodiscard]] bool inside(int c, int r) const noexcept { return c >= 0 && r >= 0 && c < width() && r < height(); }

  [[nodiscard]] bool at(int c, int r) const noexcept { return cells_[index(c, r)] != 0; }

  /// Out-of-raster reads return `outside`.
  [[nodiscard]] bool get(int c, int r, bool outside = false) const noexcept { return inside(c, r) ? at(c, r) : outside; }

  void set(int c, int r, bool value = true) noexcept { cells_[index(c, r)] = value ? 1 : 0; }

  [[nodiscard]] std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
  }
  [[nodiscard]] bool empty() const noexcept { return count() == 0; }

  [[nodiscard]] bool column_empty(int c) const noexcept {
    for (int r = 0; r < height(); ++r) {
      if (at(c, r)) {
        return false;
      }
    }
    return true;
  }

  /// Same cells, regardless of the attached ranges.
  [[nodiscard]] bool same_cells(const BinaryGrid& other) const noexcept {
    return width() == other.width() && height() == other.height() && cells_ == other.cells_;
  }

  [[nodiscard]] bool is_subset_of(const BinaryGrid& other) const noexcept {
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (cells_[i] && !other.cells_[i]) {
        return false;
      }
    }
    return true;
  }

  [[nodiscard]] const std::vector<std::uint8_t>& raw() const noexcept { return cells_; }

  friend bool operator==(const BinaryGrid&, const BinaryGrid&) = default;

  friend BinaryGrid operator|(BinaryGrid a, const BinaryGrid& b) { return a.combine(b, [](bool x, bool y) { return x || y; }); }
  friend BinaryGrid operator&(BinaryGrid a, const BinaryGrid& b) { return a.combine(b, [](bool x, bool y) { return x && y; }); }
  /// Set difference a − b.
  friend BinaryGrid operator-(BinaryGrid a, const BinaryGrid& b) { return a.combine(b, [](bool x, bool y) { return x && !y; }); }

 private:
  [[nodiscard]] std::size_t index(int c, int r) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(spec_.width) + static_cast<std::size_t>(c);
  }

  template <class Op>
  BinaryGrid& combine(const BinaryGrid& b, Op op) {
    detail::require(width() == b.width() && height() == b.height(), "grid size mismatch");
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      cells_[i] = op(cells_[i] != 0, b.cells_[i] != 0) ? 1 : 0;
    }
    return *this;
  }

  GridSpec spec_{};
  std::vector<std::uint8_t> cells_;
};

/// Non-negative scalar intensities over a raster.
class DataPlane {
 public:
  DataPlane() = default;
  explicit DataPlane(GridSpec spec) : spec_{spec}, cells_(static_cast<std::size_t>(spec.width) * spec.height, 0.0) {}

  [[nodiscard]] const GridSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] int width() const noexcept { return spec_.width; }
  [[nodiscard]] int height() const noexcept { return spec_.height; }

  [[nodiscard]] double at(int c, int r) const noexcept { return cells_[index(c, r)]; }
  double& at(int c, int r) noexcept { return cells_[index(c, r)]; }

  [[nodiscard]] double total() const noexcept {
    double s = 0.0;
    for (double v : cells_) {
      s += v;
    }
    return s;
  }

  [[nodiscard]] double max_value() const noexcept {
    return cells_.empty() ? 0.0 : *std::max_element(cells_.begin(), cells_.end());
  }

 private:
  [[nodiscard]] std::size_t index(int c, int r) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(spec_.width) + static_cast<std::size_t>(c);
  }

  GridSpec spec_{};
  std::vector<double> cells_;
};

/// Which two variables a plane shows.
struct PlaneKind {
  enum class Tag { kInputOutput, kInputInput };

  Tag tag = Tag::kInputOutput;
  std::size_t first = 0;   ///< Horizontal input.
  std::size_t second = 0;  ///< Vertical input (input-input planes only).

  static PlaneKind input_output(std::size_t i) { return {Tag::kInputOutput, i, 0}; }
  static PlaneKind input_input(std::size_t i, std::size_t j) {
    detail::require(i != j, "input-input plane needs two distinct inputs");
    return {Tag::kInputInput, i, j};
  }

  [[nodiscard]] double horizontal(const Dataset& ds, std::size_t row) const { return ds.x(row, first); }
  [[nodiscard]] double vertical(const Dataset& ds, std::size_t row) const {
    return tag == Tag::kInputOutput ? ds.y(row) : ds.x(row, second);
  }
};

/// Grid specification spanning the data extent of `kind`.
inline GridSpec spec_for(const Dataset& ds, PlaneKind kind, int width = 64, int height = 64) {
  if (ds.empty()) {
    detail::fail(ErrorKind::kData, "empty dataset");
  }
  const Range xr = ds.input_range(kind.first);
  const Range yr = kind.tag == PlaneKind::Tag::kInputOutput ? ds.output_range() : ds.input_range(kind.second);
  return GridSpec{width, height, padded(xr), padded(yr)};
}

/// Marks every bin that receives at least one sample.
inline BinaryGrid quantize(const Dataset& ds, PlaneKind kind, const GridSpec& spec) {
  spec.validate();
  if (ds.empty()) {
    detail::fail(ErrorKind::kData, "empty dataset");
  }
  detail::require(kind.first < ds.n_inputs() && (kind.tag == PlaneKind::Tag::kInputOutput || kind.second < ds.n_inputs()),
                  "plane refers to a missing input");
  BinaryGrid g(spec);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    g.set(spec.column_of(kind.horizontal(ds, r)), spec.row_of(kind.vertical(ds, r)));
  }
  return g;
}

inline DataPlane to_scalar(const BinaryGrid& g) {
  DataPlane p(g.spec());
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      p.at(c, r) = g.at(c, r) ? 1.0 : 0.0;
    }
  }
  return p;
}

/// Foreground where intensity strictly exceeds `t`.
inline BinaryGrid threshold(const DataPlane& p, double t) {
  detail::require(t >= 0.0, "threshold must be non-negative");
  BinaryGrid g(p.spec());
  for (int r = 0; r < p.height(); ++r) {
    for (int c = 0; c < p.width(); ++c) {
      g.set(c, r, p.at(c, r) > t);
    }
  }
  return g;
}

/// Negation within the raster.
inline BinaryGrid complement(const BinaryGrid& g) {
  BinaryGrid out(g.spec());
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      out.set(c, r, !g.at(c, r));
    }
  }
  return out;
}

/// Maximal vertical run of foreground cells in one column, inclusive rows.
struct Run {
  int lo = 0;
  int hi = 0;
  [[nodiscard]] int length() const noexcept { return hi - lo + 1; }
  [[nodiscard]] double center() const noexcept { return 0.5 * (lo + hi); }
};

inline std::vector<Run> column_runs(const BinaryGrid& g, int c) {
  std::vector<Run> runs;
  int r = 0;
  while (r < g.height()) {
    if (!g.at(c, r)) {
      ++r;
      continue;
    }
    const int lo = r;
    while (r + 1 < g.height() && g.at(c, r + 1)) {
      ++r;
    }
    runs.push_back({lo, r});
    ++r;
  }
  return runs;
}

/// Number of vertical branches (runs) per column.
inline std::vector<int> branch_counts(const BinaryGrid& g) {
  std::vector<int> out(static_cast<std::size_t>(g.width()));
  for (int c = 0; c < g.width(); ++c) {
    out[static_cast<std::size_t>(c)] = static_cast<int>(column_runs(g, c).size());
  }
  return out;
}

/// Count of 8-connected foreground components.
inline int count_components(const BinaryGrid& g) {
  std::vector<std::uint8_t> seen(g.raw().size(), 0);
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      const auto idx = static_cast<std::size_t>(r) * g.width() + c;
      if (!g.at(c, r) || seen[idx]) {
        continue;
      }
      ++components;
      seen[idx] = 1;
      stack.emplace_back(c, r);
      while (!stack.empty()) {
        const auto [cc, rr] = stack.back();
        stack.pop_back();
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nc = cc + dc;
            const int nr = rr + dr;
            if (!g.inside(nc, nr) || !g.at(nc, nr)) {
              continue;
            }
            const auto nidx = static_cast<std::size_t>(nr) * g.width() + nc;
            if (!seen[nidx]) {
              seen[nidx] = 1;
              stack.emplace_back(nc, nr);
            }
          }
        }
      }
    }
  }
  return components;
}

}  // namespace ealm

#endif  // EALM_GRID_HPP
