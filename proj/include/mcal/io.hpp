// Copyright 2026 The mcal-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcal/core.hpp"
#include "mcal/errors.hpp"
#include "mcal/lp.hpp"

namespace mcal {

using Json = nlohmann::ordered_json;

inline Json rational_json(const Rational& r) { return to_string(r); }

inline Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number_unsigned()) return Rational(j.get<unsigned long>());
  if (j.is_number_float()) {
    // Take the literal as written rather than the binary double.
    return parse_rational(j.dump());
  }
  throw InvalidArgument("expected a rational (\"p/q\", decimal string or number), got " + j.dump());
}

inline Json rationals_json(const std::vector<Rational>& v) {
  Json out = Json::array();
  for (const auto& r : v) out.push_back(rational_json(r));
  return out;
}

inline Json predictor_json(const PredictorVec& p) { return rationals_json(p.values); }

inline Json subgroup_json(const Subgroup& s) {
  Json out = Json::array();
  for (Index x : s) out.push_back(x);
  return out;
}

// {"n", "marginal", "p_star", "f", "groups"} plus optional "labels".
inline Json instance_to_json(const Instance& inst) {
  Json j;
  j["n"] = inst.n();
  j["marginal"] = rationals_json(inst.marginal.probs);
  j["p_star"] = predictor_json(inst.ground_truth);
  j["f"] = predictor_json(inst.audited);
  Json groups = Json::array();
  for (const auto& g : inst.groups) groups.push_back(subgroup_json(g));
  j["groups"] = groups;
  if (!inst.domain.labels.empty()) j["labels"] = inst.domain.labels;
  return j;
}

// Structural parse; invariants are left to validate().
inline Instance instance_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("instance JSON must be an object");
  for (const char* key : {"n", "marginal", "p_star", "f", "groups"})
    if (!j.contains(key)) throw InvalidArgument(std::string("instance JSON missing \"") + key + "\"");
  auto read_vec = [&](const char* key) {
    const Json& a = j.at(key);
    if (!a.is_array()) throw InvalidArgument(std::string("\"") + key + "\" must be an array");
    std::vector<Rational> v;
    for (const auto& e : a) v.push_back(rational_from_json(e));
    return v;
  };
  Instance inst;
  const Json& n = j.at("n");
  if (!n.is_number_integer() || n.get<long long>() < 1)
    throw InvalidArgument("\"n\" must be a positive integer");
  inst.domain.n = n.get<std::size_t>();
  inst.marginal = Marginal{read_vec("marginal")};
  inst.ground_truth = PredictorVec(read_vec("p_star"));
  inst.audited = PredictorVec(read_vec("f"));
  const Json& groups = j.at("groups");
  if (!groups.is_array()) throw InvalidArgument("\"groups\" must be an array");
  for (const auto& g : groups) {
    if (!g.is_array()) throw InvalidArgument("each group must be an array of indices");
    std::vector<Index> members;
    for (const auto& x : g) {
      if (!x.is_number_integer() || x.get<long long>() < 0)
        throw InvalidArgument("group members must be non-negative integers");
      members.push_back(x.get<Index>());
    }
    if (members.size() != Subgroup(members).size())
      throw InvalidArgument("group lists a point twice");
    inst.groups.groups.emplace_back(std::move(members));
  }
  if (j.contains("labels")) inst.domain.labels = j.at("labels").get<std::vector<std::string>>();
  return inst;
}

inline Instance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
  return instance_from_json(j);
}

inline void write_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << instance_to_json(inst).dump(2) << "\n";
}

inline const char* relation_symbol(Relation r) {
  switch (r) {
    case Relation::kLessEqual: return "<=";
    case Relation::kEqual: return "=";
    case Relation::kGreaterEqual: return ">=";
  }
  return "?";
}

inline Json lp_to_json(const LPProblem& p) {
  Json j;
  j["sense"] = "minimize";
  j["objective"] = rationals_json(p.objective);
  Json rows = Json::array();
  for (const auto& c : p.constraints) {
    Json row;
    row["coeffs"] = rationals_json(c.coeffs);
    row["relation"] = relation_symbol(c.relation);
    row["rhs"] = rational_json(c.rhs);
    rows.push_back(row);
  }
  j["constraints"] = rows;
  Json bounds = Json::array();
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    Json b;
    VariableBounds vb = i < p.bounds.size() ? p.bounds[i] : VariableBounds{};
    b["lower"] = vb.lower ? rational_json(*vb.lower) : Json(nullptr);
    b["upper"] = vb.upper ? rational_json(*vb.upper) : Json(nullptr);
    bounds.push_back(b);
  }
  j["bounds"] = bounds;
  return j;
}

}  // namespace mcal
