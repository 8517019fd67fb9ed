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

#ifndef EALM_MODELING_HPP
#define EALM_MODELING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ealm/error.hpp"
#include "ealm/grid.hpp"
#include "ealm/ids_cog.hpp"
#include "ealm/morphology.hpp"

namespace ealm {

// ---------------------------------------------------------------------------
// Rule base types

/// Crisp region of the input space. Degrees are 0 or 1.
struct MembershipFunction {
  enum class Form { kEntireDomain, kInterval, kHalfPlane, kUnion, kIntersection };

  Form form = Form::kEntireDomain;
  std::size_t input = 0;
  std::size_t second = 0;  // half-plane only
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  bool positive = true;  // half-plane side: a*x_i + b*x_j + c >= 0
  std::vector<MembershipFunction> parts;

  static MembershipFunction entire(std::size_t i) {
    MembershipFunction m;
    m.input = i;
    return m;
  }

  /// lo <= x_i < hi. Infinite bounds are allowed.
  static MembershipFunction interval(std::size_t i, double lo, double hi) {
    detail::require(lo < hi, "interval needs lo < hi");
    MembershipFunction m;
    m.form = Form::kInterval;
    m.input = i;
    m.lo = lo;
    m.hi = hi;
    return m;
  }

  static MembershipFunction half_plane(std::size_t i, std::size_t j, double a, double b, double c, bool positive) {
    detail::require(a != 0.0 || b != 0.0, "half-plane needs (a, b) != (0, 0)");
    MembershipFunction m;
    m.form = Form::kHalfPlane;
    m.input = i;
    m.second = j;
    m.a = a;
    m.b = b;
    m.c = c;
    m.positive = positive;
    return m;
  }

  static MembershipFunction any_of(std::vector<MembershipFunction> parts) {
    MembershipFunction m;
    m.form = Form::kUnion;
    m.parts = std::move(parts);
    return m;
  }

  static MembershipFunction all_of(std::vector<MembershipFunction> parts) {
    MembershipFunction m;
    m.form = Form::kIntersection;
    m.parts = std::move(parts);
    return m;
  }

  [[nodiscard]] bool contains(std::span<const double> x) const {
    switch (form) {
      case Form::kEntireDomain:
        return true;
      case Form::kInterval:
        return x[input] >= lo && x[input] < hi;
      case Form::kHalfPlane: {
        const double v = a * x[input] + b * x[second] + c;
        return positive ? v >= 0.0 : v < 0.0;
      }
      case Form::kUnion:
        return std::any_of(parts.begin(), parts.end(), [&](const auto& p) { return p.contains(x); });
      case Form::kIntersection:
        return std::all_of(parts.begin(), parts.end(), [&](const auto& p) { return p.contains(x); });
    }
    return false;
  }

  [[nodiscard]] double degree(std::span<const double> x) const { return contains(x) ? 1.0 : 0.0; }

  /// Largest input index referenced, for arity checks.
  [[nodiscard]] std::size_t max_input() const {
    std::size_t m = 0;
    switch (form) {
      case Form::kEntireDomain:
      case Form::kInterval:
        m = input;
        break;
      case Form::kHalfPlane:
        m = std::max(input, second);
        break;
      case Form::kUnion:
      case Form::kIntersection:
        for (const auto& p : parts) {
          m = std::max(m, p.max_input());
        }
        break;
    }
    return m;
  }

  friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;
};

/// Consequent y = f(x_input), read off a narrow path.
struct PathModel {
  std::size_t input = 0;
  NarrowPath path;

  [[nodiscard]] double operator()(std::span<const double> x) const { return path.value_at(x[input]); }
};

struct Rule {
  MembershipFunction antecedent;
  PathModel consequent;
  double truth = 1.0;
  bool low_confidence = false;
};

enum class Method { kAlm, kEalm };

inline std::string_view method_name(Method m) { return m == Method::kAlm ? "alm" : "ealm"; }

/// Line a*x_i + b*x_j + c = 0; class 1 lies on the positive side.
struct LinearSeparator {
  std::size_t i = 0;
  std::size_t j = 1;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double misclassification = 0.0;

  [[nodiscard]] double value(double xi, double xj) const noexcept { return a * xi + b * xj + c; }
};

/// One recorded division of a region.
struct Split {
  enum class Kind { kAxis, kY };

  Kind kind = Kind::kAxis;
  std::string node;
  int depth = 0;
  // Axis split: x_input < t goes left.
  std::size_t input = 0;
  double t = 0.0;
  // Y split.
  int y0 = 0;
  std::size_t source_plane = 0;
  int score = 0;
  std::optional<LinearSeparator> separator;
};

struct RuleBase {
  Method method = Method::kAlm;
  std::vector<Rule> rules;
  std::vector<Range> input_ranges;
  Range output_range{};  // training outputs; predictions are clamped to it
  int grid_width = 64;
  int grid_height = 64;
  int depth = 0;
  std::vector<Split> splits;

  [[nodiscard]] std::size_t n_inputs() const noexcept { return input_ranges.size(); }
};

/// Receives intermediate planes during fitting, e.g. for PGM dumps.
using PlaneSink = std::function<void(const std::string& name, const BinaryGrid& plane)>;

struct AlmConfig {
  GridSpec grid{};
  IdsParams ids{};
  double truth_threshold = 0.8;
  int max_depth = 6;
  int min_leaf = 8;
  /// Node planes get about one column per this many samples.
  int samples_per_column = 6;
  PlaneSink sink;
};

struct EalmConfig {
  GridSpec grid{};
  int thicken_passes = 3;
  int spur_length = 3;
  double error_threshold = 0.05;
  int max_depth = 6;
  int min_leaf = 8;
  ChainPair chains = fig14_chains();
  PlaneSink sink;
};

// ---------------------------------------------------------------------------
// Plane analysis primitives

struct Y0Choice {
  int y0 = 0;
  std::size_t source_plane = 0;
  int score = 0;
};

/// Columns with foreground strictly below and strictly above `y0`.
inline int y0_score(const BinaryGrid& g, int y0) {
  int score = 0;
  for (int c = 0; c < g.width(); ++c) {
    bool below = false;
    bool above = false;
    for (int r = 0; r < g.height(); ++r) {
      if (g.at(c, r)) {
        below = below || r < y0;
        above = above || r > y0;
      }
    }
    score += below && above ? 1 : 0;
  }
  return score;
}

/// Every (plane, y0) with a positive score, best first: higher score, then
/// y0 nearer the middle row, then lower plane index, then lower y0.
inline std::vector<Y0Choice> rank_y0(std::span<const BinaryGrid> planes) {
  detail::require(!planes.empty(), "find_y0 needs at least one plane");
  std::vector<Y0Choice> out;
  for (std::size_t p = 0; p < planes.size(); ++p) {
    for (int y0 = 0; y0 < planes[p].height(); ++y0) {
      if (const int score = y0_score(planes[p], y0); score > 0) {
        out.push_back(Y0Choice{y0, p, score});
      }
    }
  }
  auto offset = [&](const Y0Choice& c) { return std::abs(c.y0 - planes[c.source_plane].height() / 2.0); };
  // Candidates are generated in (plane, y0) order, so a stable sort keeps
  // that order on full ties.
  std::stable_sort(out.begin(), out.end(), [&](const Y0Choice& l, const Y0Choice& r) {
    if (l.score != r.score) {
      return l.score > r.score;
    }
    return offset(l) < offset(r);
  });
  return out;
}

inline Y0Choice find_y0(std::span<const BinaryGrid> planes) {
  const auto ranked = rank_y0(planes);
  if (ranked.empty()) {
    detail::fail(ErrorKind::kFit, "no split needed");
  }
  return ranked.front();
}

enum class Area { kEmpty, kI, kII, kIII };

/// Area of every column relative to `y0`: I if all foreground is at or below
/// y0, II if all is above, III if both.
inline std::vector<Area> column_areas(const BinaryGrid& g, int y0) {
  std::vector<Area> out(static_cast<std::size_t>(g.width()), Area::kEmpty);
  for (int c = 0; c < g.width(); ++c) {
    bool low = false;
    bool high = false;
    for (int r = 0; r < g.height(); ++r) {
      if (g.at(c, r)) {
        low = low || r <= y0;
        high = high || r > y0;
      }
    }
    auto& a = out[static_cast<std::size_t>(c)];
    a = low && high ? Area::kIII : low ? Area::kI : high ? Area::kII : Area::kEmpty;
  }
  return out;
}

struct AreaPartition {
  BinaryGrid area1;
  BinaryGrid area2;
  BinaryGrid area3;
};

inline AreaPartition partition_areas(const BinaryGrid& g, int y0) {
  detail::require(y0 > 0 && y0 < g.height(), "y0 must lie strictly inside the plane");
  AreaPartition out{BinaryGrid(g.spec()), BinaryGrid(g.spec()), BinaryGrid(g.spec())};
  const auto areas = column_areas(g, y0);
  for (int c = 0; c < g.width(); ++c) {
    const Area a = areas[static_cast<std::size_t>(c)];
    if (a == Area::kEmpty) {
      continue;
    }
    BinaryGrid& dst = a == Area::kI ? out.area1 : a == Area::kII ? out.area2 : out.area3;
    for (int r = 0; r < g.height(); ++r) {
      if (g.at(c, r)) {
        dst.set(c, r);
      }
    }
  }
  return out;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Least-squares discriminant with targets +1 (class 1) and -1 (class 2).
/// Coordinates are standardized before solving; a vanishing ridge keeps
/// rank-deficient point sets solvable.
inline LinearSeparator fit_separator(std::span<const Point2> class1, std::span<const Point2> class2) {
  detail::require(!class1.empty() && !class2.empty(), "both classes must be non-empty");
  const double n = static_cast<double>(class1.size() + class2.size());
  double mx = 0.0;
  double my = 0.0;
  for (auto set : {class1, class2}) {
    for (const auto& p : set) {
      mx += p.x;
      my += p.y;
    }
  }
  mx /= n;
  my /= n;
  double vx = 0.0;
  double vy = 0.0;
  for (auto set : {class1, class2}) {
    for (const auto& p : set) {
      vx += (p.x - mx) * (p.x - mx);
      vy += (p.y - my) * (p.y - my);
    }
  }
  const double sx = vx > 0.0 ? std::sqrt(vx / n) : 1.0;
  const double sy = vy > 0.0 ? std::sqrt(vy / n) : 1.0;

  // Normal equations for (a, b, c) over standardized (u, v, 1).
  double m[3][4] = {};
  auto accumulate = [&](std::span<const Point2> set, double target) {
    for (const auto& p : set) {
      const double f[3] = {(p.x - mx) / sx, (p.y - my) / sy, 1.0};
      for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) {
          m[r][k] += f[r] * f[k];
        }
        m[r][3] += f[r] * target;
      }
    }
  };
  accumulate(class1, 1.0);
  accumulate(class2, -1.0);
  m[0][0] += 1e-9 * n;
  m[1][1] += 1e-9 * n;
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) {
        pivot = r;
      }
    }
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) {
        continue;
      }
      const double f = m[r][col] / m[col][col];
      for (int k = col; k < 4; ++k) {
        m[r][k] -= f * m[col][k];
      }
    }
  }
  const double a = m[0][3] / m[0][0];
  const double b = m[1][3] / m[1][1];
  const double c = m[2][3] / m[2][2];
  if (!(std::abs(a) > 1e-9 || std::abs(b) > 1e-9)) {
    detail::fail(ErrorKind::kFit, "degenerate classes");
  }

  LinearSeparator sep;
  sep.a = a / sx;
  sep.b = b / sy;
  sep.c = c - a * mx / sx - b * my / sy;
  std::size_t wrong = 0;
  for (const auto& p : class1) {
    wrong += sep.value(p.x, p.y) > 0.0 ? 0 : 1;
  }
  for (const auto& p : class2) {
    wrong += sep.value(p.x, p.y) < 0.0 ? 0 : 1;
  }
  sep.misclassification = static_cast<double>(wrong) / n;
  return sep;
}

namespace detail {

/// plane_truth over columns [from, to) only; nullopt when they are empty.
inline std::optional<double> truth_of_columns(const BinaryGrid& g, int from, int to) {
  double total = 0.0;
  int columns = 0;
  for (int c = from; c < to; ++c) {
    if (auto v = column_variance(g, c)) {
      total += *v;
      ++columns;
    }
  }
  if (columns == 0) {
    return std::nullopt;
  }
  return truth(total / columns);
}

}  // namespace detail

/// Column t maximizing truth(columns < t) + truth(columns >= t). Ties go to
/// the t nearest the middle of the occupied extent.
inline int alm_split_point(const BinaryGrid& g) {
  int first = -1;
  int last = -1;
  int occupied = 0;
  for (int c = 0; c < g.width(); ++c) {
    if (!g.column_empty(c)) {
      first = first < 0 ? c : first;
      last = c;
      ++occupied;
    }
  }
  if (occupied < 2) {
    detail::fail(ErrorKind::kFit, "unsplittable plane");
  }
  const double middle = 0.5 * (first + last + 1);
  int best_t = -1;
  double best_score = -1.0;
  for (int t = first + 1; t <= last; ++t) {
    const double score = *detail::truth_of_columns(g, first, t) + *detail::truth_of_columns(g, t, last + 1);
    const bool better = score > best_score + 1e-12 ||
                        (std::abs(score - best_score) <= 1e-12 && std::abs(t - middle) < std::abs(best_t - middle));
    if (better) {
      best_t = t;
      best_score = score;
    }
  }
  return best_t;
}

// ---------------------------------------------------------------------------
// Inference

namespace detail {

/// Truth-weighted mean of the rules active at q, or nothing when none is.
inline std::optional<double> blend(std::span<const Rule> rules, std::span<const double> q) {
  double num = 0.0;
  double den = 0.0;
  double plain = 0.0;
  std::size_t active = 0;
  for (const auto& rule : rules) {
    const double m = rule.antecedent.degree(q);
    if (m == 0.0) {
      continue;
    }
    const double v = rule.consequent(q);
    num += m * rule.truth * v;
    den += m * rule.truth;
    plain += v;
    ++active;
  }
  if (active == 0) {
    return std::nullopt;
  }
  // Truth can underflow to zero for very wide planes; fall back to the
  // unweighted mean of the active rules.
  return den > 0.0 ? num / den : plain / static_cast<double>(active);
}

}  // namespace detail

inline double predict(const RuleBase& rb, std::span<const double> x) {
  if (x.size() != rb.n_inputs()) {
    detail::fail(ErrorKind::kInvalidArgument, "query has " + std::to_string(x.size()) + " inputs, model expects " +
                                                  std::to_string(rb.n_inputs()));
  }
  std::vector<double> q(x.begin(), x.end());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = std::clamp(q[i], rb.input_ranges[i].min, rb.input_ranges[i].max);
  }
  const auto y = detail::blend(rb.rules, q);
  if (!y) {
    detail::fail(ErrorKind::kFit, "uncovered query");
  }
  // Path values sit at bin centres, which lie inside the training range
  // unless that range is a single value.
  return std::clamp(*y, rb.output_range.min, rb.output_range.max);
}

inline std::vector<double> predict_all(const RuleBase& rb, const Dataset& ds) {
  std::vector<double> out(ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out[r] = predict(rb, ds.x(r));
  }
  return out;
}

struct ErrorReport {
  double mse = 0.0;
  std::optional<double> corr;  // empty when either side has zero variance
};

inline ErrorReport error_of(std::span<const double> predicted, std::span<const double> actual) {
  detail::require(predicted.size() == actual.size(), "prediction count mismatch");
  if (actual.empty()) {
    detail::fail(ErrorKind::kData, "empty dataset");
  }
  const double n = static_cast<double>(actual.size());
  double mp = 0.0;
  double ma = 0.0;
  double se = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k) {
    mp += predicted[k];
    ma += actual[k];
    se += (predicted[k] - actual[k]) * (predicted[k] - actual[k]);
  }
  mp /= n;
  ma /= n;
  double spp = 0.0;
  double saa = 0.0;
  double spa = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k) {
    spp += (predicted[k] - mp) * (predicted[k] - mp);
    saa += (actual[k] - ma) * (actual[k] - ma);
    spa += (predicted[k] - mp) * (actual[k] - ma);
  }
  ErrorReport out{se / n, std::nullopt};
  if (spp > 0.0 && saa > 0.0) {
    out.corr = std::clamp(spa / std::sqrt(spp * saa), -1.0, 1.0);
  }
  return out;
}

inline ErrorReport model_error(const RuleBase& rb, const Dataset& ds) {
  if (ds.empty()) {
    detail::fail(ErrorKind::kData, "empty dataset");
  }
  const auto predicted = predict_all(rb, ds);
  return error_of(predicted, ds.outputs());
}

// ---------------------------------------------------------------------------
// Fitting

namespace detail {

inline void check_fit_input(const Dataset& ds, const GridSpec& grid, int max_depth) {
  if (ds.size() < 2) {
    fail(ErrorKind::kData, "empty dataset: at least 2 rows are needed");
  }
  require(grid.width >= 2 && grid.height >= 2, "grid must be at least 2x2");
  require(max_depth >= 0, "max_depth must be non-negative");
}

inline RuleBase empty_rule_base(Method method, const Dataset& ds, const GridSpec& grid) {
  RuleBase rb;
  rb.method = method;
  rb.grid_width = grid.width;
  rb.grid_height = grid.height;
  for (std::size_t i = 0; i < ds.n_inputs(); ++i) {
    rb.input_ranges.push_back(padded(ds.input_range(i)));
  }
  rb.output_range = ds.output_range();
  return rb;
}

/// Plane over the node's own input extent and the given output range.
inline GridSpec node_spec(const Dataset& node, std::size_t input, int width, int height, Range y_range) {
  return GridSpec{width, height, padded(node.input_range(input)), y_range};
}

inline MembershipFunction restrict_to(const MembershipFunction& parent, MembershipFunction child) {
  if (parent.form == MembershipFunction::Form::kEntireDomain) {
    return child;
  }
  if (parent.form == MembershipFunction::Form::kIntersection) {
    auto out = parent;
    out.parts.push_back(std::move(child));
    return out;
  }
  return MembershipFunction::all_of({parent, std::move(child)});
}

inline std::vector<std::size_t> rows_where(const Dataset& ds, const std::function<bool(std::span<const double>)>& keep) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    if (keep(ds.x(r))) {
      rows.push_back(r);
    }
  }
  return rows;
}

inline void emit(const PlaneSink& sink, const std::string& name, const BinaryGrid& g) {
  if (sink) {
    sink(name, g);
  }
}

/// Coverage invariant: every training row must activate some rule.
inline void check_coverage(const RuleBase& rb, const Dataset& ds) {
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const auto x = ds.x(r);
    const bool covered =
        std::any_of(rb.rules.begin(), rb.rules.end(), [&](const Rule& rule) { return rule.antecedent.contains(x); });
    if (!covered) {
      fail(ErrorKind::kFit, "training row " + std::to_string(r) + " is not covered by any rule");
    }
  }
}

/// Summed squared error of `rules` over the rows of `data`; an uncovered row
/// makes it infinite. Training rows lie inside the model's input ranges, so
/// no clamping is needed.
inline double squared_error(std::span<const Rule> rules, const Dataset& data) {
  double se = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto y = blend(rules, data.x(r));
    if (!y) {
      return std::numeric_limits<double>::infinity();
    }
    se += (*y - data.y(r)) * (*y - data.y(r));
  }
  return se;
}

/// Replaces everything emitted since the marks by `leaf` when the subtree
/// fits the node's rows worse than the leaf would. Regions are crisp and
/// siblings partition their parent, so this makes training error
/// non-increasing in max_depth.
inline void keep_better(RuleBase& rb, const Dataset& data, std::size_t rules_mark, std::size_t splits_mark,
                        const std::vector<Rule>& leaf, double leaf_error) {
  if (squared_error(rb.rules, data) <= leaf_error) {
    return;
  }
  rb.rules.resize(rules_mark);
  rb.splits.resize(splits_mark);
  rb.rules.insert(rb.rules.end(), leaf.begin(), leaf.end());
}

/// Leaves sit one level below the deepest kept split.
inline int tree_depth(const std::vector<Split>& splits) {
  int d = 0;
  for (const auto& s : splits) {
    d = std::max(d, s.depth + 1);
  }
  return d;
}

class AlmFitter {
 public:
  AlmFitter(const Dataset& ds, const AlmConfig& cfg) : ds_{ds}, cfg_{cfg}, rb_{empty_rule_base(Method::kAlm, ds, cfg.grid)} {}

  RuleBase run() {
    std::vector<std::size_t> all(ds_.n_inputs());
    for (std::size_t i = 0; i < all.size(); ++i) {
      all[i] = i;
    }
    node(ds_, MembershipFunction::entire(0), 0, "n", all);
    rb_.depth = tree_depth(rb_.splits);
    check_coverage(rb_, ds_);
    return std::move(rb_);
  }

 private:
  int width_for(std::size_t n) const {
    const auto w = static_cast<int>(n) / std::max(1, cfg_.samples_per_column);
    return std::clamp(w, 2, cfg_.grid.width);
  }

  BinaryGrid plane(const Dataset& node, std::size_t i) const {
    const GridSpec spec = node_spec(node, i, width_for(node.size()), cfg_.grid.height, padded(rb_.output_range));
    return quantize(node, PlaneKind::input_output(i), spec);
  }

  void add_rule(const MembershipFunction& region, std::size_t i, const BinaryGrid& g, double t, bool low) {
    rb_.rules.push_back(Rule{region, PathModel{i, cog_path(ids(g, cfg_.ids))}, t, low});
  }

  void node(const Dataset& data, const MembershipFunction& region, int depth, const std::string& id,
            const std::vector<std::size_t>& active) {
    const std::size_t n = ds_.n_inputs();
    std::vector<BinaryGrid> planes;
    std::vector<double> truths;
    for (std::size_t i = 0; i < n; ++i) {
      planes.push_back(plane(data, i));
      truths.push_back(plane_truth(planes.back()));
      emit(cfg_.sink, id + "_x" + std::to_string(i) + "_y", planes.back());
    }
    std::vector<std::size_t> good;
    std::vector<std::size_t> bad;
    for (auto i : active) {
      (truths[i] >= cfg_.truth_threshold ? good : bad).push_back(i);
    }
    // Truth is judged on the coarse plane; the path itself is read at full
    // resolution (one column per sample at most).
    auto path_plane = [&](std::size_t i) {
      const int w = std::clamp(static_cast<int>(data.size()), 2, cfg_.grid.width);
      return quantize(data, PlaneKind::input_output(i), node_spec(data, i, w, cfg_.grid.height, padded(rb_.output_range)));
    };
    for (auto i : good) {
      add_rule(region, i, path_plane(i), truths[i], false);
    }
    if (bad.empty()) {
      return;
    }
    auto best_effort = [&] {
      if (good.empty()) {
        const auto i = *std::max_element(bad.begin(), bad.end(), [&](auto l, auto r) { return truths[l] < truths[r]; });
        add_rule(region, i, path_plane(i), truths[i], true);
      }
    };
    const auto min_leaf = static_cast<std::size_t>(std::max(1, cfg_.min_leaf));
    if (depth >= cfg_.max_depth || data.size() < 2 * min_leaf) {
      best_effort();
      return;
    }

    // Candidate cuts at every column edge of every input's node plane; the
    // score is the size-weighted best child Truth over the unresolved planes.
    struct Cut {
      double score = -1.0;
      std::size_t input = 0;
      double t = 0.0;
    } best;
    for (std::size_t k = 0; k < n; ++k) {
      const GridSpec& spec = planes[k].spec();
      for (int col = 1; col < spec.width; ++col) {
        const double t = spec.column_edge(col);
        const auto left = rows_where(data, [&](auto x) { return x[k] < t; });
        if (left.size() < min_leaf || data.size() - left.size() < min_leaf) {
          continue;
        }
        const auto right = rows_where(data, [&](auto x) { return x[k] >= t; });
        double score = 0.0;
        for (const auto* rows : {&left, &right}) {
          const Dataset part = data.subset(*rows);
          double part_truth = 0.0;
          for (auto j : bad) {
            part_truth = std::max(part_truth, plane_truth(plane(part, j)));
          }
          score += part_truth * static_cast<double>(rows->size()) / static_cast<double>(data.size());
        }
        if (score > best.score + 1e-12) {
          best = {score, k, t};
        }
      }
    }
    if (best.score < 0.0) {
      best_effort();
      return;
    }
    const auto rules_mark = rb_.rules.size();
    const auto splits_mark = rb_.splits.size();
    best_effort();
    const std::vector<Rule> leaf(rb_.rules.begin() + static_cast<std::ptrdiff_t>(rules_mark), rb_.rules.end());
    const double leaf_error = squared_error(rb_.rules, data);
    rb_.rules.resize(rules_mark);

    Split s;
    s.kind = Split::Kind::kAxis;
    s.node = id;
    s.depth = depth;
    s.input = best.input;
    s.t = best.t;
    rb_.splits.push_back(s);

    const auto k = best.input;
    const double t = best.t;
    const auto left = rows_where(data, [&](auto x) { return x[k] < t; });
    const auto right = rows_where(data, [&](auto x) { return x[k] >= t; });
    const double inf = std::numeric_limits<double>::infinity();
    node(data.subset(left), restrict_to(region, MembershipFunction::interval(k, -inf, t)), depth + 1, id + "0", bad);
    node(data.subset(right), restrict_to(region, MembershipFunction::interval(k, t, inf)), depth + 1, id + "1", bad);
    keep_better(rb_, data, rules_mark, splits_mark, leaf, leaf_error);
  }

  const Dataset& ds_;
  const AlmConfig& cfg_;
  RuleBase rb_;
};

/// Mean row of each column of `thick`, with confidence exp(-(w/2)^2) where w
/// is the column's thickened extent in rows.
inline NarrowPath width_path(const BinaryGrid& thick) {
  NarrowPath path(thick.spec());
  for (int c = 0; c < thick.width(); ++c) {
    double n = 0.0;
    double sum = 0.0;
    int lo = thick.height();
    int hi = -1;
    for (int r = 0; r < thick.height(); ++r) {
      if (thick.at(c, r)) {
        n += 1.0;
        sum += r;
        lo = std::min(lo, r);
        hi = r;
      }
    }
    if (n == 0.0) {
      continue;
    }
    const double w = 0.5 * (hi - lo);
    path.delegate[static_cast<std::size_t>(c)] = sum / n;
    path.confidence[static_cast<std::size_t>(c)] = std::exp(-w * w);
  }
  return path;
}

class EalmFitter {
 public:
  static constexpr double kMaxIsolatedShare = 0.1;
  static constexpr std::size_t kMaxY0Candidates = 16;

  EalmFitter(const Dataset& ds, const EalmConfig& cfg)
      : ds_{ds}, cfg_{cfg}, rb_{empty_rule_base(Method::kEalm, ds, cfg.grid)} {}

  RuleBase run() {
    node(ds_, MembershipFunction::entire(0), 0, "n");
    rb_.depth = tree_depth(rb_.splits);
    check_coverage(rb_, ds_);
    return std::move(rb_);
  }

 private:
  struct PlaneInfo {
    BinaryGrid raw;       // global output range
    BinaryGrid samples;    // node output range, structure resolution
    BinaryGrid skeleton;   // samples thickened, thinned and pruned
    NarrowPath path;
    double truth = 0.0;
    double error = 0.0;  // RMSE over the node, divided by the output span
  };

  [[nodiscard]] bool single_valued(const BinaryGrid& g) const {
    const auto counts = branch_counts(g);
    return std::all_of(counts.begin(), counts.end(), [](int k) { return k <= 1; });
  }

  PlaneInfo analyse(const Dataset& data, std::size_t i, const std::string& id) const {
    const int width = std::clamp(static_cast<int>(data.size()), 2, cfg_.grid.width);
    PlaneInfo info;
    info.raw = quantize(data, PlaneKind::input_output(i), node_spec(data, i, width, cfg_.grid.height, padded(rb_.output_range)));
    const BinaryGrid thick = thicken(info.raw, cfg_.chains.thickening, cfg_.thicken_passes);
    info.path = width_path(thick);
    info.truth = plane_truth(info.raw);
    double se = 0.0;
    for (std::size_t r = 0; r < data.size(); ++r) {
      const double d = info.path.value_at(data.x(r, i)) - data.y(r);
      se += d * d;
    }
    info.error = std::sqrt(se / static_cast<double>(data.size())) / padded(rb_.output_range).span();

    // Structure is read at the finest resolution where the samples form
    // strokes rather than scattered dots.
    int sw = width;
    int sh = cfg_.grid.height;
    BinaryGrid local_raw;
    while (true) {
      local_raw = quantize(data, PlaneKind::input_output(i), node_spec(data, i, sw, sh, padded(data.output_range())));
      const double isolated = static_cast<double>(isolated_points(local_raw).count());
      if (isolated <= kMaxIsolatedShare * static_cast<double>(local_raw.count()) || sw < 8 || sh < 8) {
        break;
      }
      sw /= 2;
      sh /= 2;
    }
    // Pass counts are given at full resolution and shrink with the plane.
    const double scale = static_cast<double>(sh) / cfg_.grid.height;
    const int passes = std::max(std::min(1, cfg_.thicken_passes), static_cast<int>(std::floor(cfg_.thicken_passes * scale)));
    info.skeleton = plane_skeleton(local_raw, cfg_.chains, passes, cfg_.spur_length);
    info.samples = local_raw;

    const std::string stem = id + "_x" + std::to_string(i) + "_y";
    emit(cfg_.sink, stem + "_raw", info.raw);
    emit(cfg_.sink, stem + "_thick", thick);
    emit(cfg_.sink, stem + "_skeleton", info.skeleton);
    return info;
  }

  void add_rule(const MembershipFunction& region, std::size_t i, const PlaneInfo& info, bool low) {
    rb_.rules.push_back(Rule{region, PathModel{i, info.path}, info.truth, low});
  }

  void node(const Dataset& data, const MembershipFunction& region, int depth, const std::string& id) {
    const std::size_t n = ds_.n_inputs();
    std::vector<PlaneInfo> info;
    for (std::size_t i = 0; i < n; ++i) {
      info.push_back(analyse(data, i, id));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto kind = PlaneKind::input_input(i, j);
        emit(cfg_.sink, id + "_x" + std::to_string(i) + "_x" + std::to_string(j),
             quantize(data, kind, spec_for(data, kind, cfg_.grid.width, cfg_.grid.height)));
      }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (info[i].error < info[best].error) {
        best = i;
      }
    }
    const bool accurate = info[best].error < cfg_.error_threshold;
    // Function-shaped node: one rule per plane, as in ALM's no-split path.
    // A coarse cloud also thins to a single line, so the shortcut waits for
    // the error to agree.
    if (accurate && std::all_of(info.begin(), info.end(), [&](const PlaneInfo& p) { return single_valued(p.skeleton); })) {
      for (std::size_t i = 0; i < n; ++i) {
        add_rule(region, i, info[i], false);
      }
      return;
    }
    const auto min_leaf = static_cast<std::size_t>(std::max(1, cfg_.min_leaf));
    if (accurate) {
      add_rule(region, best, info[best], false);
      return;
    }
    if (depth >= cfg_.max_depth || data.size() < 2 * min_leaf) {
      add_rule(region, best, info[best], true);
      return;
    }
    // y0 is counted on the projected samples at the structure resolution;
    // small loops and gaps left by thinning would move the count.
    std::vector<BinaryGrid> candidates;
    for (const auto& p : info) {
      candidates.push_back(p.samples);
    }
    // The best-ranked y0 can leave a child too small to fit; later
    // candidates are tried in rank order before giving up on the node.
    const auto ranked = rank_y0(candidates);
    std::optional<SplitPlan> plan;
    for (std::size_t k = 0; k < ranked.size() && k < kMaxY0Candidates && !plan; ++k) {
      plan = plan_split(data, candidates, ranked[k], min_leaf);
    }
    if (!plan) {
      add_rule(region, best, info[best], true);
      return;
    }
    const auto rules_mark = rb_.rules.size();
    const auto splits_mark = rb_.splits.size();
    add_rule(region, best, info[best], true);
    const std::vector<Rule> leaf(rb_.rules.begin() + static_cast<std::ptrdiff_t>(rules_mark), rb_.rules.end());
    const double leaf_error = squared_error(rb_.rules, data);
    rb_.rules.resize(rules_mark);

    Split s;
    s.kind = Split::Kind::kY;
    s.node = id;
    s.depth = depth;
    s.y0 = plan->choice.y0;
    s.source_plane = plan->choice.source_plane;
    s.score = plan->choice.score;
    s.separator = plan->sep;
    rb_.splits.push_back(s);

    const GridSpec& spec = candidates[plan->choice.source_plane].spec();
    auto [small, big] = memberships(spec, plan->areas, plan->choice.source_plane, plan->sep);
    node(data.subset(plan->small_rows), restrict_to(region, std::move(small)), depth + 1, id + "0");
    node(data.subset(plan->big_rows), restrict_to(region, std::move(big)), depth + 1, id + "1");
    keep_better(rb_, data, rules_mark, splits_mark, leaf, leaf_error);
  }

  struct SplitPlan {
    Y0Choice choice;
    std::vector<Area> areas;
    LinearSeparator sep;
    std::vector<std::size_t> small_rows;
    std::vector<std::size_t> big_rows;
  };

  /// Areas, separator and child rows for one y0 candidate, or nothing when a
  /// child would hold fewer than `min_leaf` samples.
  std::optional<SplitPlan> plan_split(const Dataset& data, const std::vector<BinaryGrid>& planes, const Y0Choice& choice,
                                      std::size_t min_leaf) const {
    const std::size_t n = ds_.n_inputs();
    const std::size_t p = choice.source_plane;
    const GridSpec& spec = planes[p].spec();
    const auto areas = column_areas(planes[p], choice.y0);
    auto area_of = [&](double xp) {
      const Area a = areas[static_cast<std::size_t>(spec.column_of(xp))];
      return a == Area::kEmpty ? Area::kIII : a;
    };

    // Area III samples above y0 form class 1, the rest class 2.
    std::optional<LinearSeparator> sep;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == p) {
        continue;
      }
      std::vector<Point2> above;
      std::vector<Point2> below;
      for (std::size_t r = 0; r < data.size(); ++r) {
        if (area_of(data.x(r, p)) != Area::kIII) {
          continue;
        }
        const Point2 pt{data.x(r, p), data.x(r, j)};
        (spec.row_of(data.y(r)) > choice.y0 ? above : below).push_back(pt);
      }
      if (above.empty() || below.empty()) {
        continue;
      }
      LinearSeparator candidate;
      try {
        candidate = fit_separator(above, below);
      } catch (const Error&) {
        continue;
      }
      candidate.i = p;
      candidate.j = j;
      if (!sep || candidate.misclassification < sep->misclassification) {
        sep = candidate;
      }
    }
    if (!sep) {
      return std::nullopt;
    }

    // Big = area II or (area III and on the class-1 side); Small is the rest.
    auto is_big = [&](std::span<const double> x) {
      const Area a = area_of(x[p]);
      if (a != Area::kIII) {
        return a == Area::kII;
      }
      return sep->value(x[p], x[sep->j]) >= 0.0;
    };
    SplitPlan plan{choice, areas, *sep, {}, {}};
    plan.big_rows = rows_where(data, is_big);
    plan.small_rows = rows_where(data, [&](auto x) { return !is_big(x); });
    if (plan.big_rows.size() < min_leaf || plan.small_rows.size() < min_leaf) {
      return std::nullopt;
    }
    return plan;
  }

  /// Small = (x_p in area I) or (x_p in area III and below the line); Big
  /// mirrors it. Empty columns count as area III and the outermost columns
  /// extend to infinity, so the pair partitions the whole x_p axis.
  static std::pair<MembershipFunction, MembershipFunction> memberships(const GridSpec& spec,
                                                                      const std::vector<Area>& areas, std::size_t p,
                                                                      const LinearSeparator& sep) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<MembershipFunction> in_i;
    std::vector<MembershipFunction> in_ii;
    std::vector<MembershipFunction> in_iii;
    const int w = spec.width;
    int c = 0;
    while (c < w) {
      auto kind = [&](int k) {
        const Area a = areas[static_cast<std::size_t>(k)];
        return a == Area::kEmpty ? Area::kIII : a;
      };
      const Area a = kind(c);
      int end = c;
      while (end + 1 < w && kind(end + 1) == a) {
        ++end;
      }
      const double lo = c == 0 ? -inf : spec.column_edge(c);
      const double hi = end == w - 1 ? inf : spec.column_edge(end + 1);
      auto piece = MembershipFunction::interval(p, lo, hi);
      (a == Area::kI ? in_i : a == Area::kII ? in_ii : in_iii).push_back(std::move(piece));
      c = end + 1;
    }
    auto side = [&](bool positive) {
      std::vector<MembershipFunction> parts;
      if (!in_iii.empty()) {
        parts.push_back(MembershipFunction::all_of(
            {MembershipFunction::any_of(in_iii), MembershipFunction::half_plane(sep.i, sep.j, sep.a, sep.b, sep.c, positive)}));
      }
      return parts;
    };
    auto small = side(false);
    small.insert(small.begin(), in_i.begin(), in_i.end());
    auto big = side(true);
    big.insert(big.begin(), in_ii.begin(), in_ii.end());
    return {MembershipFunction::any_of(std::move(small)), MembershipFunction::any_of(std::move(big))};
  }

  const Dataset& ds_;
  const EalmConfig& cfg_;
  RuleBase rb_;
};

}  // namespace detail

inline RuleBase alm_fit(const Dataset& ds, const AlmConfig& cfg = {}) {
  detail::check_fit_input(ds, cfg.grid, cfg.max_depth);
  detail::require(cfg.truth_threshold > 0.0 && cfg.truth_threshold < 1.0, "truth_threshold must lie in (0, 1)");
  detail::require(cfg.ids.radius >= 1, "ids radius must be at least 1");
  return detail::AlmFitter(ds, cfg).run();
}

inline RuleBase ealm_fit(const Dataset& ds, const EalmConfig& cfg = {}) {
  detail::check_fit_input(ds, cfg.grid, cfg.max_depth);
  detail::require(cfg.thicken_passes >= 0 && cfg.spur_length >= 0, "pass counts must be non-negative");
  detail::require(cfg.error_threshold >= 0.0, "error_threshold must be non-negative");
  return detail::EalmFitter(ds, cfg).run();
}

}  // namespace ealm

#endif  // EALM_MODELING_HPP
