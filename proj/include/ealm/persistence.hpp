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

#ifndef EALM_PERSISTENCE_HPP
#define EALM_PERSISTENCE_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <json.hpp>

#include "ealm/error.hpp"
#include "ealm/modeling.hpp"

/**
 * \file
 * \brief JSON storage of rule bases.
 *
 * Doubles are written in shortest round-trip form, so a reloaded rule base
 * predicts bit-identically. Infinite interval bounds are stored as null.
 */

namespace ealm {

namespace detail {

using json = nlohmann::json;

inline json bound_to_json(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

inline double bound_from_json(const json& j, double if_null) { return j.is_null() ? if_null : j.get<double>(); }

inline std::string_view form_name(MembershipFunction::Form f) {
  using F = MembershipFunction::Form;
  switch (f) {
    case F::kEntireDomain:
      return "entire";
    case F::kInterval:
      return "interval";
    case F::kHalfPlane:
      return "half_plane";
    case F::kUnion:
      return "union";
    case F::kIntersection:
      return "intersection";
  }
  return "";
}

inline json to_json(const MembershipFunction& m) {
  using F = MembershipFunction::Form;
  json j{{"form", form_name(m.form)}};
  switch (m.form) {
    case F::kEntireDomain:
      j["input"] = m.input;
      break;
    case F::kInterval:
      j["input"] = m.input;
      j["lo"] = bound_to_json(m.lo);
      j["hi"] = bound_to_json(m.hi);
      break;
    case F::kHalfPlane:
      j["inputs"] = {m.input, m.second};
      j["coeffs"] = {m.a, m.b, m.c};
      j["positive"] = m.positive;
      break;
    case F::kUnion:
    case F::kIntersection:
      j["parts"] = json::array();
      for (const auto& p : m.parts) {
        j["parts"].push_back(to_json(p));
      }
      break;
  }
  return j;
}

inline MembershipFunction membership_from_json(const json& j) {
  const auto form = j.at("form").get<std::string>();
  const double inf = std::numeric_limits<double>::infinity();
  if (form == "entire") {
    return MembershipFunction::entire(j.at("input").get<std::size_t>());
  }
  if (form == "interval") {
    return MembershipFunction::interval(j.at("input").get<std::size_t>(), bound_from_json(j.at("lo"), -inf),
                                        bound_from_json(j.at("hi"), inf));
  }
  if (form == "half_plane") {
    const auto& in = j.at("inputs");
    const auto& k = j.at("coeffs");
    return MembershipFunction::half_plane(in.at(0).get<std::size_t>(), in.at(1).get<std::size_t>(), k.at(0).get<double>(),
                                          k.at(1).get<double>(), k.at(2).get<double>(), j.at("positive").get<bool>());
  }
  if (form == "union" || form == "intersection") {
    std::vector<MembershipFunction> parts;
    for (const auto& p : j.at("parts")) {
      parts.push_back(membership_from_json(p));
    }
    return form == "union" ? MembershipFunction::any_of(std::move(parts)) : MembershipFunction::all_of(std::move(parts));
  }
  fail(ErrorKind::kData, "unknown membership form '" + form + "'");
}

inline json range_to_json(const Range& r) { return json::array({r.min, r.max}); }
inline Range range_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

inline json to_json(const NarrowPath& p) {
  json delegate = json::array();
  json confidence = json::array();
  for (std::size_t c = 0; c < p.delegate.size(); ++c) {
    delegate.push_back(p.delegate[c] ? json(*p.delegate[c]) : json(nullptr));
    confidence.push_back(p.confidence[c] ? json(*p.confidence[c]) : json(nullptr));
  }
  return {{"width", p.spec.width},
          {"height", p.spec.height},
          {"x_range", range_to_json(p.spec.x_range)},
          {"y_range", range_to_json(p.spec.y_range)},
          {"delegate", delegate},
          {"confidence", confidence}};
}

inline NarrowPath path_from_json(const json& j) {
  GridSpec spec{j.at("width").get<int>(), j.at("height").get<int>(), range_from_json(j.at("x_range")),
                range_from_json(j.at("y_range"))};
  spec.validate();
  NarrowPath p(spec);
  const auto& d = j.at("delegate");
  const auto& c = j.at("confidence");
  require(d.size() == p.delegate.size() && c.size() == p.confidence.size(), "path arrays must match the grid width");
  for (std::size_t k = 0; k < p.delegate.size(); ++k) {
    if (!d[k].is_null()) {
      p.delegate[k] = d[k].get<double>();
    }
    if (!c[k].is_null()) {
      p.confidence[k] = c[k].get<double>();
    }
  }
  require(p.present() > 0, "path has no delegates");
  return p;
}

inline json to_json(const Split& s) {
  json j{{"node", s.node}, {"depth", s.depth}};
  if (s.kind == Split::Kind::kAxis) {
    j["kind"] = "axis";
    j["input"] = s.input;
    j["t"] = s.t;
  } else {
    j["kind"] = "y";
    j["y0"] = s.y0;
    j["source_plane"] = s.source_plane;
    j["score"] = s.score;
    if (s.separator) {
      const auto& l = *s.separator;
      j["separator"] = {{"inputs", {l.i, l.j}}, {"coeffs", {l.a, l.b, l.c}}, {"misclassification", l.misclassification}};
    }
  }
  return j;
}

inline Split split_from_json(const json& j) {
  Split s;
  s.node = j.at("node").get<std::string>();
  s.depth = j.at("depth").get<int>();
  if (j.at("kind").get<std::string>() == "axis") {
    s.kind = Split::Kind::kAxis;
    s.input = j.at("input").get<std::size_t>();
    s.t = j.at("t").get<double>();
    return s;
  }
  s.kind = Split::Kind::kY;
  s.y0 = j.at("y0").get<int>();
  s.source_plane = j.at("source_plane").get<std::size_t>();
  s.score = j.at("score").get<int>();
  if (j.contains("separator")) {
    const auto& js = j.at("separator");
    LinearSeparator l;
    l.i = js.at("inputs").at(0).get<std::size_t>();
    l.j = js.at("inputs").at(1).get<std::size_t>();
    l.a = js.at("coeffs").at(0).get<double>();
    l.b = js.at("coeffs").at(1).get<double>();
    l.c = js.at("coeffs").at(2).get<double>();
    l.misclassification = js.at("misclassification").get<double>();
    s.separator = l;
  }
  return s;
}

}  // namespace detail

inline nlohmann::json to_json(const RuleBase& rb) {
  using detail::json;
  json ranges = json::array();
  for (const auto& r : rb.input_ranges) {
    ranges.push_back(detail::range_to_json(r));
  }
  json rules = json::array();
  for (const auto& rule : rb.rules) {
    rules.push_back({{"antecedent", detail::to_json(rule.antecedent)},
                     {"input", rule.consequent.input},
                     {"path", detail::to_json(rule.consequent.path)},
                     {"truth", rule.truth},
                     {"low_confidence", rule.low_confidence}});
  }
  json splits = json::array();
  for (const auto& s : rb.splits) {
    splits.push_back(detail::to_json(s));
  }
  return {{"format", "ealm-rule-base"},
          {"version", 1},
          {"method", method_name(rb.method)},
          {"grid", {{"width", rb.grid_width}, {"height", rb.grid_height}}},
          {"input_ranges", ranges},
          {"output_range", detail::range_to_json(rb.output_range)},
          {"depth", rb.depth},
          {"rules", rules},
          {"splits", splits}};
}

inline RuleBase rule_base_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "ealm-rule-base" || j.at("version").get<int>() != 1) {
      detail::fail(ErrorKind::kData, "not an ealm rule base (version 1)");
    }
    RuleBase rb;
    const auto method = j.at("method").get<std::string>();
    detail::require(method == "alm" || method == "ealm", "unknown method '" + method + "'");
    rb.method = method == "alm" ? Method::kAlm : Method::kEalm;
    rb.grid_width = j.at("grid").at("width").get<int>();
    rb.grid_height = j.at("grid").at("height").get<int>();
    for (const auto& r : j.at("input_ranges")) {
      rb.input_ranges.push_back(detail::range_from_json(r));
    }
    rb.output_range = detail::range_from_json(j.at("output_range"));
    rb.depth = j.at("depth").get<int>();
    for (const auto& jr : j.at("rules")) {
      Rule rule;
      rule.antecedent = detail::membership_from_json(jr.at("antecedent"));
      rule.consequent.input = jr.at("input").get<std::size_t>();
      rule.consequent.path = detail::path_from_json(jr.at("path"));
      rule.truth = jr.at("truth").get<double>();
      rule.low_confidence = jr.at("low_confidence").get<bool>();
      detail::require(rule.consequent.input < rb.n_inputs() && rule.antecedent.max_input() < rb.n_inputs(),
                      "rule refers to a missing input");
      rb.rules.push_back(std::move(rule));
    }
    for (const auto& js : j.at("splits")) {
      rb.splits.push_back(detail::split_from_json(js));
    }
    detail::require(!rb.rules.empty(), "rule base has no rules");
    return rb;
  } catch (const nlohmann::json::exception& e) {
    detail::fail(ErrorKind::kData, std::string("invalid rule base: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kData) {
      throw;
    }
    detail::fail(ErrorKind::kData, std::string("invalid rule base: ") + e.what());
  }
}

inline void save_rule_base(std::ostream& out, const RuleBase& rb) { out << to_json(rb).dump(2) << '\n'; }

inline void save_rule_base(const std::filesystem::path& path, const RuleBase& rb) {
  std::ofstream out(path);
  if (!out) {
    detail::fail(ErrorKind::kData, "cannot write " + path.string());
  }
  save_rule_base(out, rb);
}

inline RuleBase load_rule_base(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    detail::fail(ErrorKind::kData, std::string("invalid rule base: ") + e.what());
  }
  return rule_base_from_json(j);
}

inline RuleBase load_rule_base(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    detail::fail(ErrorKind::kData, "cannot read " + path.string());
  }
  return load_rule_base(in);
}

}  // namespace ealm

#endif  // EALM_PERSISTENCE_HPP
