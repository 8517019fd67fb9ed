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


// Command-line front end: train, eval, bench, export-plane, structure-report.
//
// Exit status: 0 success, 1 usage error, 2 data error, 3 fit failure.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ealm/ealm.hpp"

namespace fs = std::filesystem;
using namespace ealm;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitFit = 3;

struct Options {
  std::string method = "ealm";
  int grid = 64;
  int ids_radius = 2;
  int thicken_passes = 3;
  int spur_length = 3;
  double truth_threshold = 0.8;
  double error_threshold = 0.05;
  int max_depth = 6;
  std::uint64_t seed = 42;
  std::string out_dir;
  bool dump_planes = false;
};

fs::path output_dir(const Options& o) {
  if (!o.out_dir.empty()) {
    return o.out_dir;
  }
  if (const char* env = std::getenv("EALM_OUT_DIR"); env && *env) {
    return env;
  }
  return "ealm_out";
}

GridSpec grid_of(const Options& o) { return GridSpec{o.grid, o.grid, {0.0, 1.0}, {0.0, 1.0}}; }

AlmConfig alm_config(const Options& o) {
  AlmConfig c;
  c.grid = grid_of(o);
  c.ids.radius = o.ids_radius;
  c.truth_threshold = o.truth_threshold;
  c.max_depth = o.max_depth;
  return c;
}

EalmConfig ealm_config(const Options& o) {
  EalmConfig c;
  c.grid = grid_of(o);
  c.thicken_passes = o.thicken_passes;
  c.spur_length = o.spur_length;
  c.error_threshold = o.error_threshold;
  c.max_depth = o.max_depth;
  return c;
}

PlaneSink pgm_sink(const fs::path& dir, const std::string& prefix) {
  fs::create_directories(dir);
  return [dir, prefix](const std::string& name, const BinaryGrid& g) { write_pgm(dir / (prefix + name + ".pgm"), g); };
}

void add_model_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--grid", o.grid, "Grid size in cells (width and height)")->check(CLI::Range(2, 4096));
  cmd->add_option("--ids-radius", o.ids_radius, "Ink drop spread radius in cells")->check(CLI::PositiveNumber);
  cmd->add_option("--thicken-passes", o.thicken_passes, "Thickening passes")->check(CLI::NonNegativeNumber);
  cmd->add_option("--spur-length", o.spur_length, "Pruning spur length")->check(CLI::NonNegativeNumber);
  cmd->add_option("--truth-threshold", o.truth_threshold, "ALM rule acceptance Truth")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--error-threshold", o.error_threshold, "EALM normalized RMSE stop level")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-depth", o.max_depth, "Recursion cap")->check(CLI::NonNegativeNumber);
}

void print_error(std::ostream& out, const char* label, const ErrorReport& e) {
  out << label << " mse " << format_double(e.mse) << " corr " << (e.corr ? format_double(*e.corr) : "undefined")
      << '\n';
}

int cmd_train(const Options& o, const std::string& input, const std::string& model_path) {
  const Dataset ds = read_csv(fs::path(input));
  const fs::path dir = output_dir(o);
  RuleBase rb;
  if (o.method == "alm") {
    AlmConfig c = alm_config(o);
    if (o.dump_planes) {
      c.sink = pgm_sink(dir / "planes", "alm_");
    }
    rb = alm_fit(ds, c);
  } else {
    EalmConfig c = ealm_config(o);
    if (o.dump_planes) {
      c.sink = pgm_sink(dir / "planes", "ealm_");
    }
    rb = ealm_fit(ds, c);
  }
  const fs::path target = model_path.empty() ? dir / "model.json" : fs::path(model_path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  save_rule_base(target, rb);
  std::cout << "rules " << rb.rules.size() << "\ndepth " << rb.depth << '\n';
  for (const auto& s : rb.splits) {
    if (s.kind == Split::Kind::kY) {
      std::cout << "ysplit " << s.node << " y0 " << s.y0 << " plane x" << s.source_plane;
      if (s.separator) {
        std::cout << " misclassification " << format_double(s.separator->misclassification);
      }
      std::cout << '\n';
    } else {
      std::cout << "axis-split " << s.node << " x" << s.input << " < " << format_double(s.t) << '\n';
    }
  }
  print_error(std::cout, "train", model_error(rb, ds));
  std::cout << "model " << target.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& input, const std::string& predictions) {
  const RuleBase rb = load_rule_base(fs::path(model_path));
  const Dataset ds = read_csv(fs::path(input));
  if (ds.n_inputs() != rb.n_inputs()) {
    throw Error(ErrorKind::kData, "dataset has " + std::to_string(ds.n_inputs()) + " inputs, model expects " +
                                      std::to_string(rb.n_inputs()));
  }
  const auto yhat = predict_all(rb, ds);
  print_error(std::cout, "eval", error_of(yhat, ds.outputs()));
  if (!predictions.empty()) {
    std::ofstream out(predictions);
    if (!out) {
      throw Error(ErrorKind::kData, "cannot write " + predictions);
    }
    out << "y,predicted\n";
    for (std::size_t r = 0; r < ds.size(); ++r) {
      out << format_double(ds.y(r)) << ',' << format_double(yhat[r]) << '\n';
    }
  }
  return 0;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(const Options& o, const std::string& generator, std::size_t n_train, std::size_t n_test, int repeats,
              bool timing) {
  const Generator g = parse_generator(generator);
  const fs::path dir = output_dir(o);
  fs::create_directories(dir);
  BenchConfig cfg;
  cfg.alm = alm_config(o);
  cfg.ealm = ealm_config(o);
  std::vector<ReportRow> rows;
  for (int k = 0; k < repeats; ++k) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(k);
    cfg.sink = pgm_sink(dir, generator + "_seed" + std::to_string(seed) + "_");
    auto part = run_benchmark({g, n_train, n_test, seed}, cfg);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  {
    std::ofstream csv(dir / "report.csv");
    write_report_csv(csv, rows, timing);
  }
  std::ostringstream table;
  write_report_table(table, rows);
  if (repeats > 1) {
    table << "\nmedian over " << repeats << " seeds\n";
    for (Method m : cfg.methods) {
      std::vector<double> mse;
      std::vector<double> corr;
      for (const auto& r : rows) {
        if (r.method == m && r.mse) {
          mse.push_back(*r.mse);
          corr.push_back(r.corr.value_or(0.0));
        }
      }
      if (!mse.empty()) {
        table << method_name(m) << " mse " << format_double(median(mse)) << " corr " << format_double(median(corr))
              << '\n';
      }
    }
  }
  std::cout << table.str();
  std::ofstream(dir / "report.txt") << table.str();
  const bool failed = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return !r.failure.empty(); });
  return failed ? kExitFit : 0;
}

int cmd_export_plane(const Options& o, const std::string& input, std::size_t x, const std::string& vs,
                     const std::string& stage, const std::string& output, const std::string& path_csv) {
  const Dataset ds = read_csv(fs::path(input));
  const PlaneKind kind = vs == "y" ? PlaneKind::input_output(x) : PlaneKind::input_input(x, std::stoul(vs));
  const GridSpec spec = spec_for(ds, kind, o.grid, o.grid);
  const BinaryGrid raw = quantize(ds, kind, spec);
  const ChainPair chains = fig14_chains();
  const fs::path target = output.empty() ? output_dir(o) / ("plane_" + stage + ".pgm") : fs::path(output);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  const DataPlane spread = ids(raw, IdsParams{o.ids_radius});
  if (stage == "raw") {
    write_pgm(target, raw);
  } else if (stage == "ids") {
    write_pgm(target, spread);
  } else if (stage == "thick") {
    write_pgm(target, thicken(raw, chains.thickening, o.thicken_passes));
  } else if (stage == "skeleton") {
    write_pgm(target, plane_skeleton(raw, chains, o.thicken_passes, o.spur_length));
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown stage '" + stage + "'");
  }
  if (!path_csv.empty()) {
    std::ofstream out(path_csv);
    write_path_csv(out, cog_path(spread));
  }
  std::cout << "wrote " << target.string() << '\n';
  return 0;
}

int cmd_structure(const Options& o, const std::string& generator, std::size_t n) {
  StructureConfig cfg;
  cfg.grid = o.grid;
  cfg.ids.radius = o.ids_radius;
  cfg.thicken_passes = o.thicken_passes;
  cfg.spur_length = o.spur_length;
  const StructureReport rep = structure_report({parse_generator(generator), n, 1, o.seed}, cfg);
  const fs::path dir = output_dir(o);
  write_structure_pgms(rep, dir);
  std::cout << "interior columns " << rep.interior.size() << "\nskeleton two-branch fraction "
            << format_double(rep.skeleton_two_fraction) << "\ncog single-valued " << (rep.cog_single_valued ? "yes" : "no")
            << "\ncolumn,cog_branches,skeleton_branches\n";
  for (std::size_t c = 0; c < rep.cog_branches.size(); ++c) {
    std::cout << c << ',' << rep.cog_branches[c] << ',' << rep.skeleton_branches[c] << '\n';
  }
  std::cout << "pgms " << dir.string() << '\n';
  return 0;
}

int cmd_generate(const Options& o, const std::string& generator, std::size_t n, const std::string& out) {
  const auto [train, test] = generate({parse_generator(generator), n, 1, o.seed});
  (void)test;
  const fs::path target = out.empty() ? output_dir(o) / (generator + "_seed" + std::to_string(o.seed) + ".csv") : fs::path(out);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  std::ofstream file(target);
  if (!file) {
    detail::fail(ErrorKind::kData, "cannot write " + target.string());
  }
  write_csv(file, train);
  std::cout << "wrote " << train.size() << " rows to " << target.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy modeling with ALM and morphology-based EALM"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "Fit a rule base to a CSV dataset");
  std::string train_input;
  std::string model_out;
  train->add_option("--input,-i", train_input, "CSV with inputs then output per row")->required();
  train->add_option("--model,-o", model_out, "Rule base JSON to write (default <out-dir>/model.json)");
  train->add_option("--method", o.method, "alm or ealm")->check(CLI::IsMember({"alm", "ealm"}));
  add_model_flags(train, o);
  train->add_flag("--dump-planes", o.dump_planes, "Write every stage plane as PGM under <out-dir>/planes");
  train->add_option("--out-dir", o.out_dir, "Output directory (else $EALM_OUT_DIR, else ./ealm_out)");

  auto* eval = app.add_subcommand("eval", "Evaluate a rule base on a CSV dataset");
  std::string eval_model;
  std::string eval_input;
  std::string eval_predictions;
  eval->add_option("--model,-m", eval_model, "Rule base JSON")->required();
  eval->add_option("--input,-i", eval_input, "CSV dataset")->required();
  eval->add_option("--predictions", eval_predictions, "Optional per-point predictions CSV");

  auto* bench = app.add_subcommand("bench", "Run the train/test benchmark protocol for both methods");
  std::string generator = "sinc2d";
  std::size_t n_train = 450;
  std::size_t n_test = 1000;
  int repeats = 1;
  bool timing = false;
  bench->add_option("--generator,-g", generator, "One of: " + generator_list());
  bench->add_option("--train", n_train, "Training samples")->check(CLI::PositiveNumber);
  bench->add_option("--test", n_test, "Test samples")->check(CLI::PositiveNumber);
  bench->add_option("--seed", o.seed, "First seed");
  bench->add_option("--repeats", repeats, "Number of consecutive seeds; a median summary follows")
      ->check(CLI::PositiveNumber);
  bench->add_flag("--timing", timing, "Fill the fit_ms CSV column (makes the CSV run-dependent)");
  bench->add_option("--out-dir", o.out_dir, "Output directory (else $EALM_OUT_DIR, else ./ealm_out)");
  add_model_flags(bench, o);

  auto* plane = app.add_subcommand("export-plane", "Write one projection plane, at a chosen stage, as PGM");
  std::string plane_input;
  std::size_t plane_x = 0;
  std::string plane_vs = "y";
  std::string stage = "raw";
  std::string plane_out;
  std::string path_csv;
  plane->add_option("--input,-i", plane_input, "CSV dataset")->required();
  plane->add_option("--x", plane_x, "Horizontal input index");
  plane->add_option("--vs", plane_vs, "Vertical axis: y, or another input index");
  plane->add_option("--stage", stage, "raw, ids, thick or skeleton")
      ->check(CLI::IsMember({"raw", "ids", "thick", "skeleton"}));
  plane->add_option("--output,-o", plane_out, "PGM path (default <out-dir>/plane_<stage>.pgm)");
  plane->add_option("--path-csv", path_csv, "Also write the IDS/COG narrow path as CSV");
  plane->add_option("--out-dir", o.out_dir, "Output directory (else $EALM_OUT_DIR, else ./ealm_out)");
  add_model_flags(plane, o);

  auto* structure = app.add_subcommand("structure-report", "Compare COG paths and skeletons on ring data");
  std::string structure_gen = "circle";
  std::size_t structure_n = 450;
  structure->add_option("--generator,-g", structure_gen, "circle or sin-circle");
  structure->add_option("--train", structure_n, "Samples")->check(CLI::PositiveNumber);
  structure->add_option("--seed", o.seed, "Seed");
  structure->add_option("--out-dir", o.out_dir, "Output directory (else $EALM_OUT_DIR, else ./ealm_out)");
  add_model_flags(structure, o);

  auto* gen = app.add_subcommand("generate", "Write a training set from a built-in generator as CSV");
  std::string gen_name = "sin-plus-cos";
  std::size_t gen_n = 450;
  std::string gen_out;
  gen->add_option("--generator,-g", gen_name, "One of: " + generator_list());
  gen->add_option("--train", gen_n, "Samples")->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "Seed");
  gen->add_option("--output,-o", gen_out, "CSV path (default <out-dir>/<generator>_seed<N>.csv)");
  gen->add_option("--out-dir", o.out_dir, "Output directory (else $EALM_OUT_DIR, else ./ealm_out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (train->parsed()) {
      return cmd_train(o, train_input, model_out);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_model, eval_input, eval_predictions);
    }
    if (bench->parsed()) {
      return cmd_bench(o, generator, n_train, n_test, repeats, timing);
    }
    if (plane->parsed()) {
      return cmd_export_plane(o, plane_input, plane_x, plane_vs, stage, plane_out, path_csv);
    }
    if (gen->parsed()) {
      return cmd_generate(o, gen_name, gen_n, gen_out);
    }
    return cmd_structure(o, structure_gen, structure_n);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::kInvalidArgument:
        return kExitUsage;
      case ErrorKind::kData:
        return kExitData;
      case ErrorKind::kFit:
        return kExitFit;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
