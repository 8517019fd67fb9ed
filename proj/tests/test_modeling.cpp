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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ealm/bench.hpp"
#include "ealm/grid.hpp"
#include "ealm/modeling.hpp"
#include "ealm/morphology.hpp"
#include "oracles.hpp"

namespace {

using ealm::Area;
using ealm::BinaryGrid;
using ealm::Dataset;
using ealm::ErrorKind;
using ealm::GridSpec;
using ealm::MembershipFunction;
using ealm::NarrowPath;
using ealm::PlaneKind;
using ealm::Point2;
using ealm::Range;
using ealm::Rule;
using ealm::RuleBase;
using Form = MembershipFunction::Form;

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
void expect_error(F&& f, ErrorKind kind, const char* message) {
  try {
    f();
    ADD_FAILURE() << "expected \"" << message << "\"";
  } catch (const ealm::Error& e) {
    EXPECT_EQ(e.kind(), kind);
    EXPECT_STREQ(e.what(), message);
  }
}

// 4 columns over [0, 1); rows are centred on integers so row r reads as y = r.
GridSpec path_spec() { return GridSpec{4, 32, {0.0, 1.0}, {-0.5, 31.5}}; }

Rule constant_rule(MembershipFunction m, double row, double truth) {
  NarrowPath path(path_spec());
  for (auto& d : path.delegate) {
    d = row;
  }
  return Rule{std::move(m), ealm::PathModel{0, path}, truth, false};
}

RuleBase one_input_base() {
  RuleBase rb;
  rb.input_ranges = {{0.0, 1.0}};
  rb.output_range = {-0.5, 31.5};
  return rb;
}

double predict1(const RuleBase& rb, double x) {
  const double q[] = {x};
  return ealm::predict(rb, q);
}

// Evenly spaced parameter so the shapes are complete regardless of sampling.
template <class F>
Dataset parametric(int n, F f) {
  Dataset ds(2);
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * (k + 0.5) / n;
    const auto [x1, x2, y] = f(t);
    ds.add({x1, x2}, y);
  }
  return ds;
}

// A circle in (x1, y). x2 carries the extra information that makes y a
// function of (x1, x2), so a separator can tell the halves apart.
Dataset circle_with_partner(int n, double rotation = 0.0) {
  return parametric(n, [&](double t) {
    const double a = std::cos(t);
    const double b = std::cos(t + 2.0 * std::numbers::pi / 3.0);
    const double x1 = a * std::cos(rotation) - b * std::sin(rotation);
    const double x2 = a * std::sin(rotation) + b * std::cos(rotation);
    return std::tuple{x1, x2, std::sin(t)};
  });
}

double training_mse(const RuleBase& rb, const Dataset& ds) { return ealm::model_error(rb, ds).mse; }

// ---------------------------------------------------------------------------
// Membership functions

TEST(Membership, IntervalIsHalfOpen) {
  const auto m = MembershipFunction::interval(0, 0.25, 0.5);
  const double lo[] = {0.25};
  const double mid[] = {0.4};
  const double hi[] = {0.5};
  EXPECT_EQ(m.degree(lo), 1.0);
  EXPECT_EQ(m.degree(mid), 1.0);
  EXPECT_EQ(m.degree(hi), 0.0);
  EXPECT_THROW((void)MembershipFunction::interval(0, 0.5, 0.5), ealm::Error);
}

TEST(Membership, HalfPlaneSidesAreComplementary) {
  const auto pos = MembershipFunction::half_plane(0, 1, 1.0, -2.0, 0.5, true);
  const auto neg = MembershipFunction::half_plane(0, 1, 1.0, -2.0, 0.5, false);
  ealm::Xoshiro256 rng(3);
  for (int k = 0; k < 500; ++k) {
    const double x[] = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    EXPECT_EQ(pos.degree(x) + neg.degree(x), 1.0);
    EXPECT_EQ(pos.contains(x), x[0] - 2.0 * x[1] + 0.5 >= 0.0);
  }
  EXPECT_THROW((void)MembershipFunction::half_plane(0, 1, 0.0, 0.0, 1.0, true), ealm::Error);
}

TEST(Membership, UnionAndIntersectionAreCrisp) {
  const auto a = MembershipFunction::interval(0, 0.0, 0.5);
  const auto b = MembershipFunction::interval(1, 0.0, 0.5);
  const auto either = MembershipFunction::any_of({a, b});
  const auto both = MembershipFunction::all_of({a, b});
  for (double x0 : {0.25, 0.75}) {
    for (double x1 : {0.25, 0.75}) {
      const double x[] = {x0, x1};
      const bool in_a = x0 < 0.5;
      const bool in_b = x1 < 0.5;
      EXPECT_EQ(either.degree(x), in_a || in_b ? 1.0 : 0.0);
      EXPECT_EQ(both.degree(x), in_a && in_b ? 1.0 : 0.0);
    }
  }
  EXPECT_EQ(both.max_input(), 1u);
}

// ---------------------------------------------------------------------------
// Inference

TEST(Predict, DelegateColumnGivesItsValue) {
  auto rb = one_input_base();
  NarrowPath path(path_spec());
  path.delegate[1] = 10.0;
  path.delegate[3] = 20.0;
  rb.rules.push_back(Rule{MembershipFunction::entire(0), ealm::PathModel{0, path}, 1.0, false});
  EXPECT_DOUBLE_EQ(predict1(rb, path_spec().column_center(1)), 10.0);
  EXPECT_DOUBLE_EQ(predict1(rb, path_spec().column_center(3)), 20.0);
  // Midway between the delegates, and constant beyond the first one.
  EXPECT_DOUBLE_EQ(predict1(rb, path_spec().column_center(2)), 15.0);
  EXPECT_DOUBLE_EQ(predict1(rb, path_spec().column_center(0)), 10.0);
}

TEST(Predict, IsLinearBetweenDelegates) {
  auto rb = one_input_base();
  NarrowPath path(path_spec());
  path.delegate[0] = 4.0;
  path.delegate[3] = 28.0;
  rb.rules.push_back(Rule{MembershipFunction::entire(0), ealm::PathModel{0, path}, 1.0, false});
  const double x0 = path_spec().column_center(0);
  const double x3 = path_spec().column_center(3);
  for (int k = 0; k <= 10; ++k) {
    const double x = x0 + (x3 - x0) * k / 10.0;
    EXPECT_NEAR(predict1(rb, x), 4.0 + 24.0 * k / 10.0, 1e-9);
  }
}

TEST(Predict, EqualTruthOverlapAverages) {
  auto rb = one_input_base();
  rb.rules.push_back(constant_rule(MembershipFunction::entire(0), 0.0, 1.0));
  rb.rules.push_back(constant_rule(MembershipFunction::entire(0), 10.0, 1.0));
  EXPECT_DOUBLE_EQ(predict1(rb, 0.3), 5.0);
}

TEST(Predict, TruthWeightsTheMean) {
  auto rb = one_input_base();
  rb.rules.push_back(constant_rule(MembershipFunction::entire(0), 0.0, 1.0));
  rb.rules.push_back(constant_rule(MembershipFunction::entire(0), 10.0, 0.25));
  EXPECT_DOUBLE_EQ(predict1(rb, 0.3), 10.0 * 0.25 / 1.25);
}

TEST(Predict, OnlyActiveRulesContribute) {
  auto rb = one_input_base();
  rb.rules.push_back(constant_rule(MembershipFunction::interval(0, -kInf, 0.5), 3.0, 1.0));
  rb.rules.push_back(constant_rule(MembershipFunction::interval(0, 0.5, kInf), 7.0, 1.0));
  EXPECT_DOUBLE_EQ(predict1(rb, 0.2), 3.0);
  EXPECT_DOUBLE_EQ(predict1(rb, 0.8), 7.0);
}

TEST(Predict, UncoveredQueryIsAnError) {
  auto rb = one_input_base();
  rb.rules.push_back(constant_rule(MembershipFunction::interval(0, 0.0, 0.5), 3.0, 1.0));
  expect_error([&] { (void)predict1(rb, 0.75); }, ErrorKind::kFit, "uncovered query");
}

TEST(Predict, RejectsWrongArity) {
  auto rb = one_input_base();
  rb.rules.push_back(constant_rule(MembershipFunction::entire(0), 3.0, 1.0));
  const double q[] = {0.1, 0.2};
  try {
    (void)ealm::predict(rb, q);
    ADD_FAILURE();
  } catch (const ealm::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

// ---------------------------------------------------------------------------
// Error measures

TEST(ModelError, PerfectPredictions) {
  const std::vector<double> y{1.0, 2.0, 4.0, 8.0};
  const auto r = ealm::error_of(y, y);
  EXPECT_EQ(r.mse, 0.0);
  ASSERT_TRUE(r.corr.has_value());
  EXPECT_DOUBLE_EQ(*r.corr, 1.0);
}

TEST(ModelError, NegatedPredictions) {
  const std::vector<double> y{1.0, 2.0, 4.0, 8.0};
  std::vector<double> p;
  for (double v : y) {
    p.push_back(-v);
  }
  const auto r = ealm::error_of(p, y);
  ASSERT_TRUE(r.corr.has_value());
  EXPECT_DOUBLE_EQ(*r.corr, -1.0);
  EXPECT_DOUBLE_EQ(r.mse, (4.0 + 16.0 + 64.0 + 256.0) / 4.0);
}

TEST(ModelError, ConstantPredictionsHaveNoCorrelation) {
  const std::vector<double> y{1.0, 2.0, 4.0};
  const std::vector<double> p{2.0, 2.0, 2.0};
  const auto r = ealm::error_of(p, y);
  EXPECT_FALSE(r.corr.has_value());
  EXPECT_DOUBLE_EQ(r.mse, (1.0 + 0.0 + 4.0) / 3.0);
}

TEST(ModelError, EmptyDatasetIsAnError) {
  auto rb = one_input_base();
  rb.rules.push_back(constant_rule(MembershipFunction::entire(0), 3.0, 1.0));
  expect_error([&] { (void)ealm::model_error(rb, Dataset(1)); }, ErrorKind::kData, "empty dataset");
}

// ---------------------------------------------------------------------------
// ALM split point

TEST(AlmSplitPoint, TwoBlobsSplitAtTheGapCentre) {
  BinaryGrid g(16, 16);
  for (int c = 2; c <= 5; ++c) {
    for (int r = 3; r <= 5; ++r) {
      g.set(c, r);
    }
  }
  for (int c = 10; c <= 13; ++c) {
    for (int r = 10; r <= 12; ++r) {
      g.set(c, r);
    }
  }
  const int t = ealm::alm_split_point(g);
  EXPECT_GE(t, 6);
  EXPECT_LE(t, 10);
  // Every t in the gap scores the same; the midmost of the occupied extent
  // [2, 13] wins.
  EXPECT_EQ(t, 8);
}

TEST(AlmSplitPoint, SingleColumnIsUnsplittable) {
  BinaryGrid g(8, 8);
  g.set(3, 1);
  g.set(3, 6);
  expect_error([&] { (void)ealm::alm_split_point(g); }, ErrorKind::kFit, "unsplittable plane");
}

TEST(AlmSplitPoint, SinCircleMidpointGivesSemicircles) {
  const Dataset ds = parametric(400, [](double t) { return std::tuple{std::sin(t), std::cos(t), std::sin(t)}; });
  const GridSpec spec = ealm::spec_for(ds, PlaneKind::input_output(0));
  const int t = ealm::alm_split_point(ealm::quantize(ds, PlaneKind::input_output(0), spec));
  EXPECT_EQ(t, spec.width / 2);
  const double cut = spec.column_edge(t);
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    (ds.x(r, 0) < cut ? left : right).push_back(r);
  }
  // Below the cut lies the lower semicircle of (x2, y), above it the upper.
  for (auto r : left) {
    EXPECT_LT(ds.y(r), 1e-9);
  }
  for (auto r : right) {
    EXPECT_GE(ds.y(r), -1e-9);
  }
  for (const auto* rows : {&left, &right}) {
    const Range x2 = ds.subset(*rows).input_range(1);
    EXPECT_LT(x2.min, -0.99);
    EXPECT_GT(x2.max, 0.99);
  }
}

// ---------------------------------------------------------------------------
// y0 search

BinaryGrid circle_plane() {
  auto [ds, unused] = ealm::generate({ealm::Generator::kCircle, 2000, 1, 5});
  return ealm::quantize(ds, PlaneKind::input_output(0), ealm::spec_for(ds, PlaneKind::input_output(0), 64, 64));
}

TEST(FindY0, CentredCircleCutsAtTheCentreRow) {
  const BinaryGrid g = circle_plane();
  int interior = 0;
  for (int c = 0; c < g.width(); ++c) {
    const auto rows = oracle::rows_in(g, c);
    if (!rows.empty() && rows.front() < 32 && rows.back() > 32) {
      ++interior;
    }
  }
  const BinaryGrid planes[] = {g};
  const auto choice = ealm::find_y0(planes);
  EXPECT_EQ(choice.y0, 32);
  EXPECT_EQ(choice.source_plane, 0u);
  EXPECT_EQ(choice.score, interior);
  EXPECT_GE(interior, 60);
}

TEST(FindY0, FunctionPlaneNeedsNoSplit) {
  BinaryGrid g(32, 32);
  for (int c = 0; c < 32; ++c) {
    g.set(c, c);
  }
  const BinaryGrid planes[] = {g};
  expect_error([&] { (void)ealm::find_y0(planes); }, ErrorKind::kFit, "no split needed");
}

TEST(FindY0, InvariantUnderHorizontalMirror) {
  ealm::Xoshiro256 rng(11);
  for (int k = 0; k < 50; ++k) {
    const BinaryGrid g = oracle::random_grid(rng, 20, 24, 0, 0.15);
    BinaryGrid m(g.spec());
    for (int r = 0; r < g.height(); ++r) {
      for (int c = 0; c < g.width(); ++c) {
        m.set(g.width() - 1 - c, r, g.at(c, r));
      }
    }
    const BinaryGrid a[] = {g};
    const BinaryGrid b[] = {m};
    const auto ca = ealm::find_y0(a);
    const auto cb = ealm::find_y0(b);
    EXPECT_EQ(ca.y0, cb.y0);
    EXPECT_EQ(ca.score, cb.score);
  }
}

TEST(FindY0, TiesPreferTheCentreThenTheLowerRow) {
  // Column 0 straddles only y0 = 31, column 1 only y0 = 33: both score 1 and
  // sit one row from the middle.
  BinaryGrid g(4, 64);
  g.set(0, 30);
  g.set(0, 32);
  g.set(1, 32);
  g.set(1, 34);
  const BinaryGrid planes[] = {g};
  EXPECT_EQ(ealm::find_y0(planes).y0, 31);

  // Identical planes: the lower index wins.
  const BinaryGrid c = circle_plane();
  const BinaryGrid twins[] = {c, c};
  EXPECT_EQ(ealm::find_y0(twins).source_plane, 0u);
}

TEST(FindY0, RankingIsSortedAndComplete) {
  const BinaryGrid c = circle_plane();
  const BinaryGrid planes[] = {c};
  const auto ranked = ealm::rank_y0(planes);
  ASSERT_FALSE(ranked.empty());
  for (std::size_t k = 1; k < ranked.size(); ++k) {
    EXPECT_GE(ranked[k - 1].score, ranked[k].score);
  }
  for (const auto& choice : ranked) {
    EXPECT_EQ(choice.score, ealm::y0_score(c, choice.y0));
  }
}

// ---------------------------------------------------------------------------
// Areas

TEST(PartitionAreas, DisjointAndCoverThePlane) {
  ealm::Xoshiro256 rng(21);
  for (int k = 0; k < 100; ++k) {
    const BinaryGrid g = oracle::random_grid(rng, 16, 16, 0, 0.2);
    const int y0 = 1 + static_cast<int>(rng.unit() * 14.0);
    const auto p = ealm::partition_areas(g, y0);
    EXPECT_EQ(p.area1 | p.area2 | p.area3, g);
    EXPECT_EQ(p.area1.count() + p.area2.count() + p.area3.count(), g.count());
    for (int c = 0; c < g.width(); ++c) {
      const auto rows = oracle::rows_in(g, c);
      if (rows.empty()) {
        continue;
      }
      const bool low = rows.front() <= y0;
      const bool high = rows.back() > y0;
      const BinaryGrid& expected = low && high ? p.area3 : low ? p.area1 : p.area2;
      EXPECT_EQ(oracle::rows_in(expected, c), rows);
    }
  }
}

TEST(PartitionAreas, TiltedEllipseHasAreaIAndIIAtItsEnds) {
  // y = x1 ± sqrt(1 − x1²): both branches lie below 0 for x1 < −1/√2 and
  // above 0 for x1 > 1/√2; in between the column straddles 0.
  const Dataset ds =
      parametric(4000, [](double t) { return std::tuple{std::sin(t), std::cos(t), std::sin(t) + std::cos(t)}; });
  const GridSpec spec = ealm::spec_for(ds, PlaneKind::input_output(0));
  const BinaryGrid g = ealm::quantize(ds, PlaneKind::input_output(0), spec);
  const int y0 = spec.row_of(0.0) - 1;
  const auto areas = ealm::column_areas(g, y0);
  const double knee = 1.0 / std::numbers::sqrt2;
  const double margin = 2.0 * spec.x_range.span() / spec.width;
  int checked = 0;
  for (int c = 0; c < spec.width; ++c) {
    const double x = spec.column_center(c);
    const auto a = areas[static_cast<std::size_t>(c)];
    if (x < -knee - margin) {
      EXPECT_EQ(a, Area::kI) << "column " << c;
    } else if (x > knee + margin) {
      EXPECT_EQ(a, Area::kII) << "column " << c;
    } else if (std::abs(x) < knee - margin) {
      EXPECT_EQ(a, Area::kIII) << "column " << c;
    } else {
      continue;
    }
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(PartitionAreas, CentredCircleIsAllAreaIII) {
  const BinaryGrid g = circle_plane();
  const auto p = ealm::partition_areas(g, 32);
  EXPECT_EQ(p.area1.count(), 0u);
  EXPECT_EQ(p.area2.count(), 0u);
  EXPECT_EQ(p.area3, g);
}

TEST(PartitionAreas, Y0AboveTheDataIsAllAreaI) {
  BinaryGrid g(8, 16);
  g.set(1, 2);
  g.set(4, 7);
  g.set(6, 9);
  const auto p = ealm::partition_areas(g, 12);
  EXPECT_EQ(p.area1, g);
  EXPECT_EQ(p.area2.count(), 0u);
  EXPECT_EQ(p.area3.count(), 0u);
  EXPECT_THROW((void)ealm::partition_areas(g, 0), ealm::Error);
  EXPECT_THROW((void)ealm::partition_areas(g, 16), ealm::Error);
}

// ---------------------------------------------------------------------------
// Separator

TEST(FitSeparator, SymmetricPair) {
  const Point2 up[] = {{0.0, 1.0}};
  const Point2 down[] = {{0.0, -1.0}};
  const auto sep = ealm::fit_separator(up, down);
  EXPECT_NEAR(sep.a, 0.0, 1e-6);
  EXPECT_GT(sep.b, 0.0);
  EXPECT_NEAR(sep.c / sep.b, 0.0, 1e-9);
  EXPECT_GT(sep.value(0.0, 1.0), 0.0);
  EXPECT_LT(sep.value(0.0, -1.0), 0.0);
  EXPECT_EQ(sep.misclassification, 0.0);
}

TEST(FitSeparator, WorkedExampleClassesAreSeparable) {
  // Class 1 holds the samples with y = sin t + cos t above zero, i.e. the
  // points with x1 + x2 > 0 in the (x1, x2) plane.
  std::vector<Point2> class1;
  std::vector<Point2> class2;
  for (int k = 0; k < 400; ++k) {
    const double t = 2.0 * std::numbers::pi * (k + 0.5) / 400;
    const Point2 p{std::sin(t), std::cos(t)};
    (p.x + p.y > 0.0 ? class1 : class2).push_back(p);
  }
  const auto sep = ealm::fit_separator(class1, class2);
  EXPECT_EQ(sep.misclassification, 0.0);
  EXPECT_NEAR(sep.a / sep.b, 1.0, 1e-6);
  EXPECT_NEAR(sep.c, 0.0, 1e-9);
}

TEST(FitSeparator, DegenerateClasses) {
  const Point2 p[] = {{0.5, 0.5}};
  expect_error([&] { (void)ealm::fit_separator(p, p); }, ErrorKind::kFit, "degenerate classes");
  EXPECT_THROW((void)ealm::fit_separator(p, std::span<const Point2>{}), ealm::Error);
}

// ---------------------------------------------------------------------------
// ALM

TEST(AlmFit, ExactFunctionIsOneRule) {
  Dataset ds(1);
  for (int k = 0; k < 450; ++k) {
    const double x = k / 449.0;
    ds.add({x}, x);
  }
  const auto rb = ealm::alm_fit(ds);
  ASSERT_EQ(rb.rules.size(), 1u);
  EXPECT_EQ(rb.rules[0].antecedent.form, Form::kEntireDomain);
  EXPECT_GT(rb.rules[0].truth, 0.99);
  EXPECT_FALSE(rb.rules[0].low_confidence);
  EXPECT_TRUE(rb.splits.empty());
  EXPECT_EQ(rb.depth, 0);
  EXPECT_LT(training_mse(rb, ds), 1e-4);
}

TEST(AlmFit, TwoIdenticalPoints) {
  Dataset ds(1);
  ds.add({0.5}, 1.0);
  ds.add({0.5}, 1.0);
  const auto rb = ealm::alm_fit(ds);
  ASSERT_EQ(rb.rules.size(), 1u);
  // Ink spreads into the neighbouring column, so the path may hold more than
  // one delegate, but it is flat at the point's value.
  const auto& path = rb.rules[0].consequent.path;
  ASSERT_GE(path.present(), 1u);
  std::optional<double> first;
  for (const auto& d : path.delegate) {
    if (d) {
      first = first.value_or(*d);
      EXPECT_DOUBLE_EQ(*d, *first);
    }
  }
  EXPECT_NEAR(predict1(rb, 0.5), 1.0, 1e-6);
}

TEST(AlmFit, SinCircleSplitsIntoSemicircleRules) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SCOPED_TRACE(seed);
    auto [ds, unused] = ealm::generate({ealm::Generator::kSinCircle, 450, 1, seed});
    const auto rb = ealm::alm_fit(ds);
    ASSERT_GE(rb.rules.size(), 3u);
    // First the (x1, y) diagonal over the entire domain.
    EXPECT_EQ(rb.rules[0].consequent.input, 0u);
    EXPECT_EQ(rb.rules[0].antecedent.form, Form::kEntireDomain);
    EXPECT_GT(rb.rules[0].truth, 0.99);
    // Then x1 is cut near its midpoint.
    ASSERT_FALSE(rb.splits.empty());
    const auto& first = rb.splits[0];
    EXPECT_EQ(first.kind, ealm::Split::Kind::kAxis);
    EXPECT_EQ(first.input, 0u);
    EXPECT_LT(std::abs(first.t), 0.15);
    // Every other rule reads (x2, y) on one side of the cut.
    std::map<bool, int> sides;
    for (std::size_t k = 1; k < rb.rules.size(); ++k) {
      EXPECT_EQ(rb.rules[k].consequent.input, 1u);
      std::optional<bool> side;
      for (std::size_t r = 0; r < ds.size(); ++r) {
        if (!rb.rules[k].antecedent.contains(ds.x(r))) {
          continue;
        }
        const bool left = ds.x(r, 0) < first.t;
        EXPECT_EQ(side.value_or(left), left);
        side = left;
      }
      ASSERT_TRUE(side.has_value());
      ++sides[*side];
    }
    EXPECT_GE(sides[true], 1);
    EXPECT_GE(sides[false], 1);
  }
}

TEST(AlmFit, MaxDepthZeroFlagsBestEffortRule) {
  auto [ds, unused] = ealm::generate({ealm::Generator::kSinc2D, 450, 1, 3});
  ealm::AlmConfig cfg;
  cfg.max_depth = 0;
  const auto rb = ealm::alm_fit(ds, cfg);
  ASSERT_EQ(rb.rules.size(), 1u);
  EXPECT_TRUE(rb.rules[0].low_confidence);
  EXPECT_TRUE(rb.splits.empty());
}

TEST(AlmFit, RejectsBadInput) {
  Dataset one(1);
  one.add({0.1}, 0.1);
  expect_error([&] { (void)ealm::alm_fit(one); }, ErrorKind::kData, "empty dataset: at least 2 rows are needed");
  auto [ds, unused] = ealm::generate({ealm::Generator::kSinc2D, 50, 1, 3});
  for (double tt : {0.0, 1.0, -0.5}) {
    ealm::AlmConfig cfg;
    cfg.truth_threshold = tt;
    EXPECT_THROW((void)ealm::alm_fit(ds, cfg), ealm::Error);
  }
}

// ---------------------------------------------------------------------------
// EALM

TEST(EalmFit, FunctionShortCircuits) {
  Dataset one(1);
  Dataset two(2);
  for (int k = 0; k < 450; ++k) {
    const double x = k / 449.0;
    one.add({x}, x);
    two.add({x, 2.0 * x - 1.0}, x);
  }
  for (const Dataset* ds : {&one, &two}) {
    const auto e = ealm::ealm_fit(*ds);
    const auto a = ealm::alm_fit(*ds);
    EXPECT_TRUE(e.splits.empty());
    EXPECT_EQ(e.rules.size(), ds->n_inputs());
    EXPECT_EQ(e.rules.size(), a.rules.size());
    for (const auto& rule : e.rules) {
      EXPECT_EQ(rule.antecedent.form, Form::kEntireDomain);
      EXPECT_FALSE(rule.low_confidence);
    }
    EXPECT_LT(training_mse(e, *ds), 1e-4);
  }
}

TEST(EalmFit, WorkedExampleOnSixtyOneRowGrid) {
  auto [ds, unused] = ealm::generate({ealm::Generator::kSinPlusCos, 450, 1, 42});
  ealm::EalmConfig cfg;
  cfg.grid = GridSpec{61, 61, {}, {}};
  const auto rb = ealm::ealm_fit(ds, cfg);
  ASSERT_FALSE(rb.splits.empty());
  const auto& s = rb.splits[0];
  EXPECT_EQ(s.kind, ealm::Split::Kind::kY);
  EXPECT_EQ(s.node, "n");
  EXPECT_EQ(s.source_plane, 0u);
  EXPECT_NEAR(s.y0, 30, 2);
  ASSERT_TRUE(s.separator.has_value());
  EXPECT_LT(s.separator->misclassification, 0.05);

  // Small and Big are disjunctions of area intervals on x1 and an area-III
  // interval intersected with one side of the separator.
  auto is_printed_form = [&](const MembershipFunction& m, bool positive) {
    if (m.form != Form::kUnion) {
      return false;
    }
    bool has_line = false;
    for (const auto& part : m.parts) {
      if (part.form == Form::kInterval) {
        EXPECT_EQ(part.input, s.source_plane);
        continue;
      }
      if (part.form != Form::kIntersection || part.parts.size() != 2) {
        return false;
      }
      const auto& line = part.parts[1];
      has_line = line.form == Form::kHalfPlane && line.positive == positive && line.a == s.separator->a &&
                 line.b == s.separator->b && line.c == s.separator->c;
    }
    return has_line;
  };
  // Children of the root carry the root's region as their antecedent, or
  // an intersection starting with it.
  auto root_part = [](const MembershipFunction& m) -> const MembershipFunction& {
    return m.form == Form::kIntersection ? m.parts.front() : m;
  };
  int small = 0;
  int big = 0;
  for (const auto& rule : rb.rules) {
    const auto& m = root_part(rule.antecedent);
    small += is_printed_form(m, false) ? 1 : 0;
    big += is_printed_form(m, true) ? 1 : 0;
  }
  EXPECT_GE(small, 1);
  EXPECT_GE(big, 1);
}

TEST(EalmFit, CircleKeepsTwoBranchesAndSplitsOnY) {
  const Dataset ds = circle_with_partner(450);
  std::map<std::string, BinaryGrid> planes;
  ealm::EalmConfig cfg;
  cfg.sink = [&](const std::string& name, const BinaryGrid& g) { planes.emplace(name, g); };
  const auto rb = ealm::ealm_fit(ds, cfg);
  EXPECT_GE(rb.rules.size(), 2u);
  EXPECT_TRUE(std::any_of(rb.splits.begin(), rb.splits.end(),
                          [](const ealm::Split& s) { return s.kind == ealm::Split::Kind::kY; }));

  ASSERT_TRUE(planes.count("n_x0_y_skeleton"));
  const BinaryGrid& skeleton = planes.at("n_x0_y_skeleton");
  int first = -1;
  int last = -1;
  for (int c = 0; c < skeleton.width(); ++c) {
    if (!skeleton.column_empty(c)) {
      first = first < 0 ? c : first;
      last = c;
    }
  }
  int interior = 0;
  int two = 0;
  for (int c = first + 1; c < last; ++c) {
    ++interior;
    two += oracle::column_branches(skeleton, c) == 2 ? 1 : 0;
  }
  ASSERT_GT(interior, 0);
  EXPECT_GE(two, 0.9 * interior) << two << " of " << interior;
}

TEST(EalmFit, RejectsBadInput) {
  Dataset one(1);
  one.add({0.1}, 0.1);
  EXPECT_THROW((void)ealm::ealm_fit(one), ealm::Error);
  auto [ds, unused] = ealm::generate({ealm::Generator::kSinc2D, 50, 1, 3});
  ealm::EalmConfig cfg;
  cfg.error_threshold = -0.1;
  EXPECT_THROW((void)ealm::ealm_fit(ds, cfg), ealm::Error);
  cfg = {};
  cfg.spur_length = -1;
  EXPECT_THROW((void)ealm::ealm_fit(ds, cfg), ealm::Error);
}

// ---------------------------------------------------------------------------
// Properties shared by both pipelines

RuleBase fit(ealm::Method m, const Dataset& ds, int max_depth = 6) {
  if (m == ealm::Method::kAlm) {
    ealm::AlmConfig cfg;
    cfg.max_depth = max_depth;
    return ealm::alm_fit(ds, cfg);
  }
  ealm::EalmConfig cfg;
  cfg.max_depth = max_depth;
  return ealm::ealm_fit(ds, cfg);
}

class Pipelines : public ::testing::TestWithParam<ealm::Method> {};

TEST_P(Pipelines, EveryTrainingRowIsCovered) {
  for (auto g : {ealm::Generator::kSinc2D, ealm::Generator::kParabolicSine, ealm::Generator::kSinPlusCos}) {
    auto [ds, unused] = ealm::generate({g, 300, 1, 9});
    const auto rb = fit(GetParam(), ds);
    for (std::size_t r = 0; r < ds.size(); ++r) {
      const auto x = ds.x(r);
      EXPECT_TRUE(std::any_of(rb.rules.begin(), rb.rules.end(),
                              [&](const Rule& rule) { return rule.antecedent.degree(x) > 0.0; }));
    }
  }
}

TEST_P(Pipelines, FittingIsDeterministic) {
  auto [train, test] = ealm::generate({ealm::Generator::kParabolicSine, 300, 200, 4});
  const auto a = fit(GetParam(), train);
  const auto b = fit(GetParam(), train);
  ASSERT_EQ(a.rules.size(), b.rules.size());
  ASSERT_EQ(a.splits.size(), b.splits.size());
  EXPECT_EQ(a.depth, b.depth);
  for (std::size_t k = 0; k < a.rules.size(); ++k) {
    EXPECT_EQ(a.rules[k].antecedent, b.rules[k].antecedent);
    EXPECT_EQ(a.rules[k].truth, b.rules[k].truth);
  }
  const auto pa = ealm::predict_all(a, test);
  const auto pb = ealm::predict_all(b, test);
  EXPECT_EQ(pa, pb);
}

TEST_P(Pipelines, DeeperTreesNeverFitTrainingDataWorse) {
  for (auto g : {ealm::Generator::kSinc2D, ealm::Generator::kParabolicSine, ealm::Generator::kSinPlusCos}) {
    for (std::uint64_t seed : {7u, 8u}) {
      SCOPED_TRACE(std::string(ealm::generator_name(g)) + " seed " + std::to_string(seed));
      auto [ds, unused] = ealm::generate({g, 450, 1, seed});
      double previous = kInf;
      for (int depth = 0; depth <= 6; ++depth) {
        const double mse = training_mse(fit(GetParam(), ds, depth), ds);
        EXPECT_LE(mse, previous) << "depth " << depth;
        previous = mse;
      }
    }
  }
}

TEST_P(Pipelines, ReportedDepthRespectsTheCap) {
  auto [ds, unused] = ealm::generate({ealm::Generator::kParabolicSine, 450, 1, 2});
  for (int depth : {0, 1, 3}) {
    const auto rb = fit(GetParam(), ds, depth);
    EXPECT_LE(rb.depth, depth);
    for (const auto& s : rb.splits) {
      EXPECT_LT(s.depth, depth);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Methods, Pipelines, ::testing::Values(ealm::Method::kAlm, ealm::Method::kEalm),
                         [](const auto& info) { return std::string(ealm::method_name(info.param)); });

TEST(RotationDiagnostic, EalmRuleCountGrowsNoFasterThanAlm) {
  const Dataset upright = circle_with_partner(450);
  const Dataset rotated = circle_with_partner(450, std::numbers::pi / 6.0);
  const double alm_growth = static_cast<double>(ealm::alm_fit(rotated).rules.size()) /
                            static_cast<double>(ealm::alm_fit(upright).rules.size());
  const double ealm_growth = static_cast<double>(ealm::ealm_fit(rotated).rules.size()) /
                             static_cast<double>(ealm::ealm_fit(upright).rules.size());
  RecordProperty("alm_growth", std::to_string(alm_growth));
  RecordProperty("ealm_growth", std::to_string(ealm_growth));
  EXPECT_LE(ealm_growth, alm_growth);
}

}  // namespace
