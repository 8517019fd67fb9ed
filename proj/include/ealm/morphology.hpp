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

#ifndef EALM_MORPHOLOGY_HPP
#define EALM_MORPHOLOGY_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ealm/error.hpp"
#include "ealm/grid.hpp"

/**
 * \file
 * \brief Binary morphology on bounded rasters with 3x3 structuring elements.
 *
 * Border convention: probes that leave the raster read background for the
 * operand and foreground for its complement, so the universe of every set is
 * the raster itself. The hit-or-miss family takes a Border argument for the
 * case where the operand passed in already is a complement.
 *
 * Structuring-element masks are written the way they are printed, row 0 on
 * top. Since grid row indices grow upward, mask cell (mr, mc) probes the grid
 * offset (mc - 1, 1 - mr).
 */

namespace ealm {

/// Grid offset of a probe relative to the element origin.
struct Offset {
  int dc = 0;
  int dr = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

using OffsetSet = std::vector<Offset>;

/// What an out-of-raster probe reads as.
enum class Border { kBackground, kForeground };

/// The nine offsets of a full 3x3 square.
inline OffsetSet square3() {
  OffsetSet out;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      out.push_back({dc, dr});
    }
  }
  return out;
}

inline OffsetSet reflect(const OffsetSet& b) {
  OffsetSet out;
  out.reserve(b.size());
  for (auto o : b) {
    out.push_back({-o.dc, -o.dr});
  }
  return out;
}

namespace detail {

inline void check_offsets(const OffsetSet& b) {
  if (b.empty()) {
    fail(ErrorKind::kInvalidArgument, "empty structuring element");
  }
  for (auto o : b) {
    require(o.dc >= -1 && o.dc <= 1 && o.dr >= -1 && o.dr <= 1, "offsets must lie within the 3x3 window");
  }
}

}  // namespace detail

/// Cell c survives iff every probe c + o is foreground.
inline BinaryGrid erode(const BinaryGrid& a, const OffsetSet& b, Border outside = Border::kBackground) {
  detail::check_offsets(b);
  const bool out_value = outside == Border::kForeground;
  BinaryGrid out(a.spec());
  for (int r = 0; r < a.height(); ++r) {
    for (int c = 0; c < a.width(); ++c) {
      bool all = true;
      for (auto o : b) {
        if (!a.get(c + o.dc, r + o.dr, out_value)) {
          all = false;
          break;
        }
      }
      out.set(c, r, all);
    }
  }
  return out;
}

/// Cell c is set iff the reflected element placed at c meets `a`.
inline BinaryGrid dilate(const BinaryGrid& a, const OffsetSet& b) {
  detail::check_offsets(b);
  BinaryGrid out(a.spec());
  for (int r = 0; r < a.height(); ++r) {
    for (int c = 0; c < a.width(); ++c) {
      bool any = false;
      for (auto o : b) {
        if (a.get(c - o.dc, r - o.dr)) {
          any = true;
          break;
        }
      }
      out.set(c, r, any);
    }
  }
  return out;
}

/// One mask cell of a structuring element.
enum class Probe : std::uint8_t { kBackground, kForeground, kDontCare };

/// 3x3 hit-or-miss template with its origin at the centre.
class StructuringElement {
 public:
  StructuringElement() { mask_.fill(Probe::kDontCare); }

  explicit StructuringElement(const std::array<Probe, 9>& mask) : mask_{mask} {}

  /// Three rows of `1`, `0` or `*`, top row first.
  static StructuringElement from_rows(std::string_view top, std::string_view middle, std::string_view bottom) {
    std::array<Probe, 9> mask{};
    const std::array<std::string_view, 3> rows{top, middle, bottom};
    for (int mr = 0; mr < 3; ++mr) {
      const auto row = rows[static_cast<std::size_t>(mr)];
      if (row.size() != 3) {
        detail::fail(ErrorKind::kData, "structuring element rows must have exactly 3 characters");
      }
      for (int mc = 0; mc < 3; ++mc) {
        mask[static_cast<std::size_t>(mr * 3 + mc)] = parse_probe(row[static_cast<std::size_t>(mc)]);
      }
    }
    return StructuringElement(mask);
  }

  [[nodiscard]] Probe at(int mr, int mc) const noexcept { return mask_[static_cast<std::size_t>(mr * 3 + mc)]; }

  [[nodiscard]] OffsetSet offsets(Probe kind) const {
    OffsetSet out;
    for (int mr = 0; mr < 3; ++mr) {
      for (int mc = 0; mc < 3; ++mc) {
        if (at(mr, mc) == kind) {
          out.push_back({mc - 1, 1 - mr});
        }
      }
    }
    return out;
  }

  /// Foreground probe set (B1).
  [[nodiscard]] OffsetSet foreground() const { return offsets(Probe::kForeground); }
  /// Background probe set (B2).
  [[nodiscard]] OffsetSet background() const { return offsets(Probe::kBackground); }

  [[nodiscard]] bool degenerate() const noexcept {
    for (auto p : mask_) {
      if (p != Probe::kDontCare) {
        return false;
      }
    }
    return true;
  }

  /// The element turned one ring step (45 degrees) clockwise.
  [[nodiscard]] StructuringElement rotated() const {
    // Border cells of the 3x3 window in clockwise order from the top-left.
    static constexpr std::array<int, 8> kRing{0, 1, 2, 5, 8, 7, 6, 3};
    auto out = mask_;
    for (std::size_t k = 0; k < kRing.size(); ++k) {
      out[static_cast<std::size_t>(kRing[(k + 1) % kRing.size()])] = mask_[static_cast<std::size_t>(kRing[k])];
    }
    return StructuringElement(out);
  }

  /// Foreground and background probes interchanged; don't-cares kept.
  [[nodiscard]] StructuringElement swapped() const {
    auto out = mask_;
    for (auto& p : out) {
      if (p == Probe::kForeground) {
        p = Probe::kBackground;
      } else if (p == Probe::kBackground) {
        p = Probe::kForeground;
      }
    }
    return StructuringElement(out);
  }

  /// Bits of the 3x3 neighbourhood code (see neighbourhood_codes) that must be set / clear.
  [[nodiscard]] std::uint16_t must_set() const noexcept { return bits(Probe::kForeground); }
  [[nodiscard]] std::uint16_t must_clear() const noexcept { return bits(Probe::kBackground); }

  [[nodiscard]] std::string to_string() const {
    std::string s;
    for (int mr = 0; mr < 3; ++mr) {
      for (int mc = 0; mc < 3; ++mc) {
        const auto p = at(mr, mc);
        s += p == Probe::kForeground ? '1' : p == Probe::kBackground ? '0' : '*';
      }
      s += '\n';
    }
    return s;
  }

  friend bool operator==(const StructuringElement&, const StructuringElement&) = default;

 private:
  static Probe parse_probe(char ch) {
    switch (ch) {
      case '1':
        return Probe::kForeground;
      case '0':
        return Probe::kBackground;
      case '*':
        return Probe::kDontCare;
      default:
        detail::fail(ErrorKind::kData, std::string("invalid structuring element character '") + ch + "'");
    }
  }

  [[nodiscard]] std::uint16_t bits(Probe kind) const noexcept {
    std::uint16_t out = 0;
    for (std::size_t i = 0; i < mask_.size(); ++i) {
      if (mask_[i] == kind) {
        out = static_cast<std::uint16_t>(out | (1U << i));
      }
    }
    return out;
  }

  std::array<Probe, 9> mask_{};
};

/// Ordered sequence of elements applied one after another.
struct SEChain {
  std::vector<StructuringElement> elements;

  /// Eight elements, each the 45 degree rotation of the previous one.
  static SEChain rotations_of(const StructuringElement& seed) {
    SEChain chain;
    chain.elements.push_back(seed);
    for (int i = 1; i < 8; ++i) {
      chain.elements.push_back(chain.elements.back().rotated());
    }
    return chain;
  }

  [[nodiscard]] SEChain swapped() const {
    SEChain out;
    for (const auto& se : elements) {
      out.elements.push_back(se.swapped());
    }
    return out;
  }

  [[nodiscard]] std::size_t size() const noexcept { return elements.size(); }
  friend bool operator==(const SEChain&, const SEChain&) = default;
};

/// The two built-in chains.
struct ChainPair {
  SEChain thickening;
  SEChain thinning;
};

/// Thickening elements B1..B8 as printed in the reference mask table, and
/// the thinning chain obtained by interchanging 1s and 0s.
inline ChainPair fig14_chains() {
  const std::array<std::array<std::string_view, 3>, 8> printed{{
      {"111", "*0*", "000"},
      {"*11", "001", "00*"},
      {"0*1", "001", "0*1"},
      {"00*", "001", "*11"},
      {"000", "*0*", "111"},
      {"*00", "100", "11*"},
      {"1*0", "100", "1*0"},
      {"11*", "100", "*00"},
  }};
  ChainPair pair;
  for (const auto& rows : printed) {
    pair.thickening.elements.push_back(StructuringElement::from_rows(rows[0], rows[1], rows[2]));
  }
  pair.thinning = pair.thickening.swapped();
  return pair;
}

/// Parses one or more elements in the text format: 3 lines of 3 characters
/// from {1, 0, *} per element, elements separated by blank lines. Lines
/// starting with '#' are ignored. A single element expands to its 8
/// rotations; otherwise exactly 8 elements are required.
inline SEChain parse_chain(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    rows.push_back(line);
  }
  if (rows.empty() || rows.size() % 3 != 0) {
    detail::fail(ErrorKind::kData, "structuring element text must contain a multiple of 3 rows");
  }
  SEChain chain;
  for (std::size_t i = 0; i < rows.size(); i += 3) {
    chain.elements.push_back(StructuringElement::from_rows(rows[i], rows[i + 1], rows[i + 2]));
  }
  if (chain.size() == 1) {
    return SEChain::rotations_of(chain.elements.front());
  }
  if (chain.size() != 8) {
    detail::fail(ErrorKind::kData, "a chain needs 1 or 8 structuring elements");
  }
  return chain;
}

inline std::string format_chain(const SEChain& chain) {
  std::string out;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i != 0) {
      out += '\n';
    }
    out += chain.elements[i].to_string();
  }
  return out;
}

/// 9-bit neighbourhood code per cell: bit (mr * 3 + mc) is the value of the
/// cell under mask position (mr, mc). Outside the raster reads as `outside`.
inline std::vector<std::uint16_t> neighbourhood_codes(const BinaryGrid& a, Border outside = Border::kBackground) {
  const bool beyond = outside == Border::kForeground;
  std::vector<std::uint16_t> codes(static_cast<std::size_t>(a.width()) * a.height(), 0);
  for (int r = 0; r < a.height(); ++r) {
    for (int c = 0; c < a.width(); ++c) {
      std::uint16_t code = 0;
      for (int mr = 0; mr < 3; ++mr) {
        for (int mc = 0; mc < 3; ++mc) {
          if (a.get(c + mc - 1, r + 1 - mr, beyond)) {
            code = static_cast<std::uint16_t>(code | (1U << (mr * 3 + mc)));
          }
        }
      }
      codes[static_cast<std::size_t>(r) * a.width() + c] = code;
    }
  }
  return codes;
}

/// Cells where the foreground probes all hit `a` and the background probes
/// all miss it. Pass Border::kForeground when `a` is itself a complement.
inline BinaryGrid hit_or_miss(const BinaryGrid& a, const StructuringElement& se, Border outside = Border::kBackground) {
  if (se.degenerate()) {
    detail::fail(ErrorKind::kInvalidArgument, "degenerate structuring element");
  }
  const auto set = se.must_set();
  const auto clear = se.must_clear();
  const auto codes = neighbourhood_codes(a, outside);
  BinaryGrid out(a.spec());
  for (int r = 0; r < a.height(); ++r) {
    for (int c = 0; c < a.width(); ++c) {
      const auto code = codes[static_cast<std::size_t>(r) * a.width() + c];
      out.set(c, r, (code & set) == set && (code & clear) == 0);
    }
  }
  return out;
}

/// a − (a ⊛ se).
inline BinaryGrid thin_once(const BinaryGrid& a, const StructuringElement& se, Border outside = Border::kBackground) {
  return a - hit_or_miss(a, se, outside);
}

/// a ∪ (a ⊛ se).
inline BinaryGrid thicken_once(const BinaryGrid& a, const StructuringElement& se,
                               Border outside = Border::kBackground) {
  return a | hit_or_miss(a, se, outside);
}

/// Thins by every element in order, each step feeding the next.
inline BinaryGrid thin_pass(const BinaryGrid& a, const SEChain& chain, Border outside = Border::kBackground) {
  BinaryGrid out = a;
  for (const auto& se : chain.elements) {
    out = thin_once(out, se, outside);
  }
  return out;
}

inline BinaryGrid thicken_pass(const BinaryGrid& a, const SEChain& chain, Border outside = Border::kBackground) {
  BinaryGrid out = a;
  for (const auto& se : chain.elements) {
    out = thicken_once(out, se, outside);
  }
  return out;
}

/// `passes` sequential thickening passes over the chain.
inline BinaryGrid thicken(const BinaryGrid& a, const SEChain& chain, int passes, Border outside = Border::kBackground) {
  detail::require(passes >= 0, "thicken pass count must be non-negative");
  BinaryGrid out = a;
  for (int p = 0; p < passes; ++p) {
    out = thicken_pass(out, chain, outside);
  }
  return out;
}

struct SkeletonResult {
  BinaryGrid grid;
  bool converged = false;
  int passes = 0;  ///< Passes run, including the final no-change pass.
};

/// Repeats thin_pass until a pass changes nothing or `max_passes` is hit.
inline SkeletonResult thin_to_skeleton(const BinaryGrid& a, const SEChain& chain, int max_passes = 256,
                                       Border outside = Border::kBackground) {
  detail::require(max_passes >= 1, "max_passes must be at least 1");
  SkeletonResult result{a, false, 0};
  while (result.passes < max_passes) {
    BinaryGrid next = thin_pass(result.grid, chain, outside);
    ++result.passes;
    if (next == result.grid) {
      result.converged = true;
      break;
    }
    result.grid = std::move(next);
  }
  return result;
}

/// End-point detectors: a centre with exactly one foreground 8-neighbour, in
/// each of the eight neighbour positions.
inline const std::vector<StructuringElement>& end_point_detectors() {
  static const std::vector<StructuringElement> detectors = [] {
    std::vector<StructuringElement> out;
    out.push_back(StructuringElement::from_rows("100", "010", "000"));
    for (int i = 1; i < 8; ++i) {
      out.push_back(out.back().rotated());
    }
    return out;
  }();
  return detectors;
}

/// Foreground cells with exactly one foreground 8-neighbour.
inline BinaryGrid end_points(const BinaryGrid& a) {
  BinaryGrid out(a.spec());
  for (const auto& se : end_point_detectors()) {
    out = out | hit_or_miss(a, se);
  }
  return out;
}

/// Foreground cells with no foreground 8-neighbour.
inline BinaryGrid isolated_points(const BinaryGrid& a) {
  return hit_or_miss(a, StructuringElement::from_rows("000", "010", "000"));
}

namespace detail {

/// Number of background-to-foreground steps around the 8-ring of (c, r);
/// three or more marks a branch point.
inline int crossing_number(const BinaryGrid& a, int c, int r) {
  static constexpr std::array<std::array<int, 2>, 8> kRing{
      {{-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}}};
  int steps = 0;
  for (std::size_t k = 0; k < kRing.size(); ++k) {
    const auto& from = kRing[(k + kRing.size() - 1) % kRing.size()];
    const auto& to = kRing[k];
    steps += !a.get(c + from[0], r + from[1]) && a.get(c + to[0], r + to[1]) ? 1 : 0;
  }
  return steps;
}

/// Yokoi 8-connectivity number of (c, r). A foreground cell whose number is
/// 1 is simple: deleting it changes neither the foreground's 8-components
/// nor the background's 4-components.
inline int connectivity_number(const BinaryGrid& a, int c, int r) {
  // East, then counter-clockwise; x̄ is 1 on background.
  static constexpr std::array<std::array<int, 2>, 8> kRing{
      {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
  std::array<int, 8> bg{};
  for (std::size_t k = 0; k < kRing.size(); ++k) {
    bg[k] = a.get(c + kRing[k][0], r + kRing[k][1]) ? 0 : 1;
  }
  int n = 0;
  for (std::size_t k = 0; k < 8; k += 2) {
    n += bg[k] - bg[k] * bg[k + 1] * bg[(k + 2) % 8];
  }
  return n;
}

inline int neighbour_count(const BinaryGrid& a, int c, int r) {
  int n = 0;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      n += (dc != 0 || dr != 0) && a.get(c + dc, r + dr) ? 1 : 0;
    }
  }
  return n;
}

inline BinaryGrid pad(const BinaryGrid& g, int m) {
  const GridSpec& s = g.spec();
  const double cw = s.x_range.span() / s.width;
  const double rh = s.y_range.span() / s.height;
  BinaryGrid out(GridSpec{s.width + 2 * m, s.height + 2 * m, {s.x_range.min - m * cw, s.x_range.max + m * cw},
                          {s.y_range.min - m * rh, s.y_range.max + m * rh}});
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      out.set(c + m, r + m, g.at(c, r));
    }
  }
  return out;
}

inline BinaryGrid crop(const BinaryGrid& g, int m, const GridSpec& inner) {
  BinaryGrid out(inner);
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      out.set(c, r, g.at(c + m, r + m));
    }
  }
  return out;
}

}  // namespace detail

/// Deletes simple cells that are not end points until none is left,
/// sweeping the east, north, west and south borders in turn. The thinning
/// chain stops on blobs at junctions where no element fits; this brings
/// them down to unit width with the same connectivity.
inline BinaryGrid unit_width(const BinaryGrid& a) {
  static constexpr std::array<std::array<int, 2>, 4> kSides{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  BinaryGrid out = a;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& side : kSides) {
      for (int r = 0; r < out.height(); ++r) {
        for (int c = 0; c < out.width(); ++c) {
          if (!out.at(c, r) || out.get(c + side[0], r + side[1]) || detail::neighbour_count(out, c, r) < 2 ||
              detail::connectivity_number(out, c, r) != 1) {
            continue;
          }
          out.set(c, r, false);
          changed = true;
        }
      }
    }
  }
  return out;
}

/// Moves every dent back into line: a cell whose only two neighbours sit
/// one column (or row) over, two cells apart, with the cell between them
/// empty, is moved into that gap. Connectivity and cell count are kept.
inline BinaryGrid straighten(const BinaryGrid& a) {
  static constexpr std::array<std::array<int, 2>, 4> kSides{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  BinaryGrid out = a;
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      if (!out.at(c, r) || detail::neighbour_count(out, c, r) != 2) {
        continue;
      }
      for (const auto& side : kSides) {
        // Along the side's normal, one step each way.
        const int nc = side[1];
        const int nr = side[0];
        const int gc = c + side[0];
        const int gr = r + side[1];
        if (out.inside(gc, gr) && !out.at(gc, gr) && out.get(gc + nc, gr + nr) && out.get(gc - nc, gr - nr)) {
          out.set(c, r, false);
          out.set(gc, gr, true);
          break;
        }
      }
    }
  }
  return out;
}

/// Removes spurs of up to `spur_length` cells. From every end point the
/// stroke is followed until the next cell is a branch point; the cells
/// walked are deleted if there are at most `spur_length` of them. A free
/// stroke that ends without a branch point is deleted when it is that short
/// as well, and isolated cells always go. All spurs are traced on the input,
/// so the result does not depend on scan order.
inline BinaryGrid prune(const BinaryGrid& a, int spur_length) {
  detail::require(spur_length >= 0, "spur_length must be non-negative");
  if (spur_length == 0) {
    return a;
  }
  BinaryGrid out = a - isolated_points(a);
  const auto ends = end_points(a);
  std::vector<std::pair<int, int>> walked;
  std::vector<std::pair<int, int>> next;
  for (int r0 = 0; r0 < a.height(); ++r0) {
    for (int c0 = 0; c0 < a.width(); ++c0) {
      if (!ends.at(c0, r0)) {
        continue;
      }
      walked.assign(1, {c0, r0});
      bool remove = false;
      while (static_cast<int>(walked.size()) <= spur_length) {
        const auto [c, r] = walked.back();
        next.clear();
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const std::pair<int, int> q{c + dc, r + dr};
            if ((dc != 0 || dr != 0) && a.get(q.first, q.second) &&
                std::find(walked.begin(), walked.end(), q) == walked.end()) {
              next.push_back(q);
            }
          }
        }
        const bool at_branch = next.size() > 1 || std::any_of(next.begin(), next.end(), [&](auto q) {
                                 return detail::crossing_number(a, q.first, q.second) >= 3;
                               });
        if (next.empty() || at_branch) {
          remove = true;
          break;
        }
        walked.push_back(next.front());
      }
      if (remove) {
        for (auto [c, r] : walked) {
          out.set(c, r, false);
        }
      }
    }
  }
  return out;
}

/// Skeleton of a thickened plane: thinning to a fixpoint, then noise
/// removal by unit_width, straighten and prune. Pruning a spur can leave a
/// dent at its foot, so the first two steps run again afterwards.
inline BinaryGrid skeletonize(const BinaryGrid& thick, const SEChain& thinning, int spur_length) {
  auto settle = [](BinaryGrid g) {
    for (std::size_t round = 0; round < g.count(); ++round) {
      BinaryGrid next = unit_width(straighten(g));
      if (next == g) {
        break;
      }
      g = std::move(next);
    }
    return g;
  };
  return settle(prune(settle(thin_to_skeleton(thick, thinning).grid), spur_length));
}

/// Skeleton of a raw data plane. Data fitted to the plane touches its
/// edges, so the plane is first framed by a background border the
/// thickening cannot outgrow; the result has the input's spec.
inline BinaryGrid plane_skeleton(const BinaryGrid& raw, const ChainPair& chains, int passes, int spur_length) {
  const int room = passes + 1;
  const BinaryGrid thick = thicken(detail::pad(raw, room), chains.thickening, passes);
  return detail::crop(skeletonize(thick, chains.thinning, spur_length), room, raw.spec());
}

}  // namespace ealm

#endif  // EALM_MORPHOLOGY_HPP
