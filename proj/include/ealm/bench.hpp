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

#ifndef EALM_BENCH_HPP
#define EALM_BENCH_HPP

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ealm/error.hpp"
#include "ealm/grid.hpp"
#include "ealm/ids_cog.hpp"
#include "ealm/io.hpp"
#include "ealm/modeling.hpp"
#include "ealm/morphology.hpp"
#include "ealm/rng.hpp"

namespace ealm {

enum class Generator { kSinCircle, kSinPlusCos, kSinc2D, kParabolicSine, kCircle, kConstant };

inline constexpr std::array<std::pair<Generator, std::string_view>, 6> kGeneratorNames{{
    {Generator::kSinCircle, "sin-circle"},
    {Generator::kSinPlusCos, "sin-plus-cos"},
    {Generator::kSinc2D, "sinc2d"},
    {Generator::kParabolicSine, "parabolic-sine"},
    {Generator::kCircle, "circle"},
    {Generator::kConstant, "constant"},
}};

inline std::string_view generator_name(Generator g) {
  for (const auto& [tag, name] : kGeneratorNames) {
    if (tag == g) {
      return name;
    }
  }
  return "";
}

inline std::string generator_list() {
  std::string out;
  for (const auto& [tag, name] : kGeneratorNames) {
    out += (out.empty() ? "" : ", ") + std::string(name);
  }
  return out;
}

inline Generator parse_generator(std::string_view name) {
  for (const auto& [tag, n] : kGeneratorNames) {
    if (n == name) {
      return tag;
    }
  }
  detail::fail(ErrorKind::kInvalidArgument, "unknown generator '" + std::string(name) + "'; valid: " + generator_list());
}

struct BenchSpec {
  Generator generator = Generator::kSinc2D;
  std::size_t n_train = 450;
  std::size_t n_test = 1000;
  std::uint64_t seed = 42;
};

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

inline double sinc2d(double x1, double x2) { return std::sqrt(2.0 * sinc(x1) * sinc(x1) + 3.0 * sinc(x2) * sinc(x2)); }

inline double parabolic_sine(double x1, double x2) {
  const double d = x1 - 6.0 * std::sin(x2);
  return d * d;
}

inline std::size_t generator_inputs(Generator g) { return g == Generator::kCircle ? 1 : 2; }

namespace detail {

/// One sample: draws come from `rng` in a fixed order (t, or x1 then x2).
inline void draw(Generator g, Xoshiro256& rng, Dataset& out) {
  constexpr double kTurns = 10.0 * std::numbers::pi;
  switch (g) {
    case Generator::kSinCircle: {
      const double t = rng.uniform(0.0, kTurns);
      out.add({std::sin(t), std::cos(t)}, std::sin(t));
      return;
    }
    case Generator::kSinPlusCos: {
      const double t = rng.uniform(0.0, kTurns);
      out.add({std::sin(t), std::cos(t)}, std::sin(t) + std::cos(t));
      return;
    }
    case Generator::kSinc2D: {
      const double x1 = rng.uniform(1.0, 10.0);
      const double x2 = rng.uniform(1.0, 10.0);
      out.add({x1, x2}, sinc2d(x1, x2));
      return;
    }
    case Generator::kParabolicSine: {
      const double x1 = rng.uniform(-10.0, 10.0);
      const double x2 = rng.uniform(0.0, 6.0);
      out.add({x1, x2}, parabolic_sine(x1, x2));
      return;
    }
    case Generator::kCircle: {
      const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
      out.add({std::cos(t)}, std::sin(t));
      return;
    }
    case Generator::kConstant: {
      const double x1 = rng.unit();
      const double x2 = rng.unit();
      out.add({x1, x2}, 0.0);
      return;
    }
  }
}

}  // namespace detail

/// Training rows first, then test rows, from one seeded stream.
inline std::pair<Dataset, Dataset> generate(const BenchSpec& spec) {
  detail::require(spec.n_train >= 1 && spec.n_test >= 1, "n_train and n_test must be at least 1");
  Xoshiro256 rng(spec.seed);
  const std::size_t n = generator_inputs(spec.generator);
  Dataset train(n);
  Dataset test(n);
  for (std::size_t k = 0; k < spec.n_train; ++k) {
    detail::draw(spec.generator, rng, train);
  }
  for (std::size_t k = 0; k < spec.n_test; ++k) {
    detail::draw(spec.generator, rng, test);
  }
  return {std::move(train), std::move(test)};
}

struct ReportRow {
  std::string generator;
  Method method = Method::kAlm;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::optional<double> mse;
  std::optional<double> corr;
  std::size_t rule_count = 0;
  double fit_ms = 0.0;
  std::string failure;  // non-empty when the fit or evaluation threw
};

struct BenchConfig {
  AlmConfig alm{};
  EalmConfig ealm{};
  std::vector<Method> methods{Method::kAlm, Method::kEalm};
  /// Root-level planes of every fit are passed here as "<method>_<name>".
  PlaneSink sink;
};

inline std::vector<ReportRow> run_benchmark(const BenchSpec& spec, const BenchConfig& cfg) {
  const auto [train, test] = generate(spec);
  std::vector<ReportRow> rows;
  for (Method m : cfg.methods) {
    ReportRow row;
    row.generator = std::string(generator_name(spec.generator));
    row.method = m;
    row.seed = spec.seed;
    row.n_train = spec.n_train;
    row.n_test = spec.n_test;
    PlaneSink root_only;
    if (cfg.sink) {
      root_only = [&, m](const std::string& name, const BinaryGrid& g) {
        if (name.rfind("n_", 0) == 0) {
          cfg.sink(std::string(method_name(m)) + "_" + name, g);
        }
      };
    }
    try {
      const auto start = std::chrono::steady_clock::now();
      RuleBase rb;
      if (m == Method::kAlm) {
        AlmConfig c = cfg.alm;
        c.sink = root_only;
        rb = alm_fit(train, c);
      } else {
        EalmConfig c = cfg.ealm;
        c.sink = root_only;
        rb = ealm_fit(train, c);
      }
      row.fit_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      row.rule_count = rb.rules.size();
      const auto err = model_error(rb, test);
      row.mse = err.mse;
      row.corr = err.corr;
    } catch (const Error& e) {
      row.failure = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Report CSV. Wall time cannot repeat between runs, so fit_ms is left blank
/// unless `timing` is set.
inline void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows, bool timing) {
  out << "generator,method,seed,n_train,n_test,mse,corr,rule_count,fit_ms\n";
  for (const auto& r : rows) {
    out << r.generator << ',' << method_name(r.method) << ',' << r.seed << ',' << r.n_train << ',' << r.n_test << ','
        << (r.mse ? format_double(*r.mse) : "") << ',' << (r.corr ? format_double(*r.corr) : "") << ','
        << r.rule_count << ',';
    if (timing && r.failure.empty()) {
      std::ostringstream ms;
      ms << std::fixed << std::setprecision(1) << r.fit_ms;
      out << ms.str();
    }
    out << '\n';
  }
}

/// Aligned text table in the layout of the paper's comparison tables.
inline void write_report_table(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << std::left << std::setw(16) << "generator" << std::setw(7) << "method" << std::setw(8) << "seed"
      << std::right << std::setw(14) << "mse" << std::setw(10) << "corr" << std::setw(8) << "rules" << std::setw(11)
      << "fit_ms" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(16) << r.generator << std::setw(7) << method_name(r.method) << std::setw(8)
        << r.seed << std::right;
    if (!r.failure.empty()) {
      out << "  failed: " << r.failure << '\n';
      continue;
    }
    std::ostringstream mse;
    std::ostringstream corr;
    std::ostringstream ms;
    mse << std::setprecision(6) << *r.mse;
    if (r.corr) {
      corr << std::fixed << std::setprecision(4) << *r.corr;
    } else {
      corr << "n/a";
    }
    ms << std::fixed << std::setprecision(1) << r.fit_ms;
    out << std::setw(14) << mse.str() << std::setw(10) << corr.str() << std::setw(8) << r.rule_count << std::setw(11)
        << ms.str() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Structure comparison on ring-shaped planes

struct StructureReport {
  BinaryGrid plane;     // quantized data
  DataPlane spread;     // after ink drop spread
  BinaryGrid cog;       // one cell per delegate
  BinaryGrid thick;     // after thickening
  BinaryGrid skeleton;  // thinned and pruned
  std::vector<int> cog_branches;
  std::vector<int> skeleton_branches;
  std::vector<int> interior;  // columns strictly inside the ring's tangents
  double skeleton_two_fraction = 0.0;
  bool cog_single_valued = false;
};

struct StructureConfig {
  int grid = 64;
  IdsParams ids{};
  int thicken_passes = 3;
  int spur_length = 3;
  /// Plane half-width as a multiple of the data half-span; 1.6 puts a unit
  /// ring at radius 20 on a 64-cell grid.
  double margin = 1.6;
};

inline StructureReport structure_report(const BenchSpec& spec, const StructureConfig& cfg = {}) {
  detail::require(spec.generator == Generator::kCircle || spec.generator == Generator::kSinCircle,
                  "structure report needs the circle or sin-circle generator");
  const Dataset data = generate(spec).first;
  // The ring lives on (x, y) for the circle and on (x2, y) for sin-circle.
  const PlaneKind kind = PlaneKind::input_output(spec.generator == Generator::kCircle ? 0 : 1);
  const GridSpec tight = spec_for(data, kind, cfg.grid, cfg.grid);
  auto widen = [&](Range r) {
    const double mid = 0.5 * (r.min + r.max);
    const double half = 0.5 * r.span() * cfg.margin;
    return Range{mid - half, mid + half};
  };
  const GridSpec gs{cfg.grid, cfg.grid, widen(tight.x_range), widen(tight.y_range)};

  StructureReport rep;
  rep.plane = quantize(data, kind, gs);
  rep.spread = ids(rep.plane, cfg.ids);
  const NarrowPath path = cog_path(rep.spread);
  rep.cog = BinaryGrid(gs);
  for (int c = 0; c < gs.width; ++c) {
    if (const auto& d = path.delegate[static_cast<std::size_t>(c)]) {
      rep.cog.set(c, static_cast<int>(std::lround(*d)));
    }
  }
  const ChainPair chains = fig14_chains();
  rep.thick = thicken(rep.plane, chains.thickening, cfg.thicken_passes);
  rep.skeleton = skeletonize(rep.thick, chains.thinning, cfg.spur_length);
  rep.cog_branches = branch_counts(rep.cog);
  rep.skeleton_branches = branch_counts(rep.skeleton);

  int first = -1;
  int last = -1;
  for (int c = 0; c < gs.width; ++c) {
    if (!rep.plane.column_empty(c)) {
      first = first < 0 ? c : first;
      last = c;
    }
  }
  int two = 0;
  for (int c = first + 2; c <= last - 2; ++c) {
    rep.interior.push_back(c);
    two += rep.skeleton_branches[static_cast<std::size_t>(c)] == 2 ? 1 : 0;
  }
  rep.skeleton_two_fraction = rep.interior.empty() ? 0.0 : static_cast<double>(two) / rep.interior.size();
  // Ink spreads into columns next to the data, so those may hold a delegate
  // too; a column with data must hold exactly one.
  rep.cog_single_valued = true;
  for (int c = 0; c < gs.width; ++c) {
    const int k = rep.cog_branches[static_cast<std::size_t>(c)];
    rep.cog_single_valued = rep.cog_single_valued && k <= 1 && (rep.plane.column_empty(c) || k == 1);
  }
  return rep;
}

/// Writes structure_{plane,ids,cog,thick,skeleton}.pgm into `dir`.
inline void write_structure_pgms(const StructureReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_pgm(dir / "structure_plane.pgm", rep.plane);
  write_pgm(dir / "structure_ids.pgm", rep.spread);
  write_pgm(dir / "structure_cog.pgm", rep.cog);
  write_pgm(dir / "structure_thick.pgm", rep.thick);
  write_pgm(dir / "structure_skeleton.pgm", rep.skeleton);
}

}  // namespace ealm

#endif  // EALM_BENCH_HPP
