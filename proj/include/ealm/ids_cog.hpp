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

#ifndef EALM_IDS_COG_HPP
#define EALM_IDS_COG_HPP

#include <cmath>
#include <cstdlib>
#include <optional>
#include <vector>

#include "ealm/error.hpp"
#include "ealm/grid.hpp"

namespace ealm {

enum class SpreadMode { kAdditive, kSupremum };

/// Ink-drop-spread settings. The kernel is a square pyramid of half-base
/// `radius` cells.
struct IdsParams {
  int radius = 2;
  SpreadMode mode = SpreadMode::kAdditive;
};

/// Pyramid weight at Chebyshev offset (dx, dy).
inline double ids_kernel(int dx, int dy, int radius) noexcept {
  const int d = std::max(std::abs(dx), std::abs(dy));
  return std::max(0.0, 1.0 - static_cast<double>(d) / (radius + 1));
}

/// Total kernel mass for a source far from the border.
inline double ids_kernel_mass(int radius) noexcept {
  double mass = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      mass += ids_kernel(dx, dy, radius);
    }
  }
  return mass;
}

/// Spreads every foreground cell into a pyramid of light.
inline DataPlane ids(const BinaryGrid& g, const IdsParams& p) {
  detail::require(p.radius >= 1, "ids radius must be at least 1");
  DataPlane out(g.spec());
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      if (!g.at(c, r)) {
        continue;
      }
      for (int dy = -p.radius; dy <= p.radius; ++dy) {
        for (int dx = -p.radius; dx <= p.radius; ++dx) {
          const int cc = c + dx;
          const int rr = r + dy;
          if (!g.inside(cc, rr)) {
            continue;
          }
          const double k = ids_kernel(dx, dy, p.radius);
          double& cell = out.at(cc, rr);
          cell = p.mode == SpreadMode::kAdditive ? cell + k : std::max(cell, k);
        }
      }
    }
  }
  return out;
}

/// exp(−variance): 1 for a perfectly thin column, towards 0 as spread grows.
inline double truth(double variance) {
  if (!(variance >= 0.0)) {
    detail::fail(ErrorKind::kInvalidArgument, "invalid variance");
  }
  return std::exp(-variance);
}

/// Per-column delegate row (fractional) with a confidence in [0, 1].
struct NarrowPath {
  GridSpec spec{};
  std::vector<std::optional<double>> delegate;
  std::vector<std::optional<double>> confidence;

  NarrowPath() = default;
  explicit NarrowPath(const GridSpec& s)
      : spec{s}, delegate(static_cast<std::size_t>(s.width)), confidence(static_cast<std::size_t>(s.width)) {}

  [[nodiscard]] std::size_t present() const noexcept {
    std::size_t n = 0;
    for (const auto& d : delegate) {
      n += d.has_value() ? 1 : 0;
    }
    return n;
  }

  /// Row at a continuous column coordinate: linear between neighbouring
  /// delegates, constant beyond the first and last one.
  [[nodiscard]] double row_at(double column) const {
    int left = -1;
    int right = -1;
    const int n = static_cast<int>(delegate.size());
    for (int c = 0; c < n; ++c) {
      if (!delegate[static_cast<std::size_t>(c)]) {
        continue;
      }
      if (c <= column) {
        left = c;
      } else if (right < 0) {
        right = c;
        break;
      }
    }
    if (left < 0 && right < 0) {
      detail::fail(ErrorKind::kFit, "narrow path has no delegates");
    }
    if (left < 0) {
      return *delegate[static_cast<std::size_t>(right)];
    }
    if (right < 0) {
      return *delegate[static_cast<std::size_t>(left)];
    }
    const double a = *delegate[static_cast<std::size_t>(left)];
    const double b = *delegate[static_cast<std::size_t>(right)];
    const double t = (column - left) / static_cast<double>(right - left);
    return a + t * (b - a);
  }

  /// Output value for an input value, in data units.
  [[nodiscard]] double value_at(double x) const { return spec.row_center(row_at(spec.column_coord(x))); }
};

/// Weighted mean row of every column, with exp(−weighted variance) as the
/// confidence.
inline NarrowPath cog_path(const DataPlane& p) {
  NarrowPath path(p.spec());
  for (int c = 0; c < p.width(); ++c) {
    double mass = 0.0;
    double moment = 0.0;
    for (int r = 0; r < p.height(); ++r) {
      mass += p.at(c, r);
      moment += r * p.at(c, r);
    }
    if (!(mass > 0.0)) {
      continue;
    }
    const double mean = moment / mass;
    double spread = 0.0;
    for (int r = 0; r < p.height(); ++r) {
      spread += p.at(c, r) * (r - mean) * (r - mean);
    }
    path.delegate[static_cast<std::size_t>(c)] = mean;
    path.confidence[static_cast<std::size_t>(c)] = truth(std::max(0.0, spread / mass));
  }
  return path;
}

/// Population variance of the foreground rows of column `c`, if any.
inline std::optional<double> column_variance(const BinaryGrid& g, int c) {
  double n = 0.0;
  double sum = 0.0;
  for (int r = 0; r < g.height(); ++r) {
    if (g.at(c, r)) {
      n += 1.0;
      sum += r;
    }
  }
  if (n == 0.0) {
    return std::nullopt;
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (int r = 0; r < g.height(); ++r) {
    if (g.at(c, r)) {
      ss += (r - mean) * (r - mean);
    }
  }
  return ss / n;
}

/// Truth of a whole plane: exp(−mean per-column variance over non-empty
/// columns), measured on the undiffused projection.
inline double plane_truth(const BinaryGrid& g) {
  double total = 0.0;
  int columns = 0;
  for (int c = 0; c < g.width(); ++c) {
    if (auto v = column_variance(g, c)) {
      total += *v;
      ++columns;
    }
  }
  if (columns == 0) {
    detail::fail(ErrorKind::kData, "no data in plane");
  }
  return truth(total / columns);
}

}  // namespace ealm

#endif  // EALM_IDS_COG_HPP
