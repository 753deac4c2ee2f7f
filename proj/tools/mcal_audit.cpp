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

// mcal-audit: command-line front end for the mcal library.
// Exit codes: 0 pass, 1 acceptance failure, 2 input error, 3 budget refusal.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcal/mcal.hpp"

namespace {

using mcal::Json;
using mcal::Rational;

constexpr int kExitPass = 0;
constexpr int kExitAcceptance = 1;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;

struct GlobalOptions {
  bool pretty = false;
  std::string dump_lp;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json value_json(const Rational& r) {
  return Json{{"value", mcal::rational_json(r)}, {"decimal", mcal::to_decimal(r)}};
}

void emit(const Json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw mcal::InvalidArgument("cannot write " + path);
  out << j.dump(2) << "\n";
}

// Reads an instance and rejects it unless every invariant holds.
mcal::Instance load(const std::string& path) {
  auto inst = mcal::read_instance(path);
  mcal::require_valid(inst);
  return inst;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// ---------------------------------------------------------------- audit

struct AuditOptions {
  std::string input;
  std::string output;
  std::vector<std::string> metrics{"wdmc", "dmc", "dimc", "wdma", "dma", "dcma"};
  unsigned degree = 2;
};

// Runs one metric, recording either its result or a budget refusal note.
Json guarded_metric(const std::function<Json()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Json out;
  try {
    out = body();
  } catch (const mcal::BudgetExceeded& e) {
    out = Json{{"refused", e.what()}, {"bound", e.bound()}};
  } catch (const mcal::PreconditionViolation& e) {
    out = Json{{"refused", e.what()}};
  }
  out["seconds"] = seconds_since(t0);
  return out;
}

Json distance_entry(const mcal::DistanceResult& r, bool verified) {
  Json j = value_json(r.value);
  j["witness"] = mcal::predictor_json(r.witness);
  j["witness_verified"] = verified;
  return j;
}

Json audit_report(const mcal::Instance& inst, const AuditOptions& opt, const GlobalOptions& g,
                  const mcal::Budget& budget) {
  using namespace mcal;
  auto t0 = std::chrono::steady_clock::now();
  const auto validation = validate(inst);
  const PredictorVec& f = inst.audited;
  auto l1 = [&](const PredictorVec& w) { return l1_distance(f, w, inst.marginal); };

  Json metrics = Json::object();
  for (const auto& name : opt.metrics) {
    if (name == "wdmc") {
      metrics["wdmc"] = guarded_metric([&] {
        auto w = wdmc(inst, budget);
        const auto& s = inst.groups[w.group];
        auto local = dce(inst, s, budget);
        bool ok = is_calibrated(local.witness, inst, s) &&
                  group_mass(inst.marginal, s) * conditional_l1(f, local.witness, inst.marginal, s) ==
                      w.value;
        Json j = value_json(w.value);
        j["group"] = w.group;
        j["witness"] = predictor_json(local.witness);
        j["witness_verified"] = ok;
        return j;
      });
    } else if (name == "dmc") {
      metrics["dmc"] = guarded_metric([&] {
        auto r = dmc(inst, budget);
        return distance_entry(r, is_multicalibrated(r.witness, inst) && l1(r.witness) == r.value);
      });
    } else if (name == "dimc") {
      metrics["dimc"] = guarded_metric([&] {
        auto r = dimc(inst, budget);
        auto cells = generated_partition(inst.groups, inst.n());
        bool ok = is_multicalibrated(r.witness, inst.with_groups(cells.as_collection())) &&
                  l1(r.witness) == r.value;
        Json j = distance_entry(r, ok);
        j["cells"] = cells.cells.size();
        return j;
      });
    } else if (name == "wdma") {
      metrics["wdma"] = guarded_metric([&] {
        auto w = wdma(inst);
        Json j = value_json(w.value);
        j["group"] = w.group;
        return j;
      });
    } else if (name == "dma") {
      if (!g.dump_lp.empty()) emit(lp_to_json(build_dma_lp(inst)), g.dump_lp);
      metrics["dma"] = guarded_metric([&] {
        auto r = dma(inst);
        return distance_entry(r, is_multiaccurate(r.witness, inst) && l1(r.witness) == r.value);
      });
    } else if (name == "dcma") {
      metrics["dcma"] = guarded_metric([&] {
        auto r = dcma(inst, budget);
        bool ok = is_calibrated(r.witness, inst, Subgroup::all(inst.n())) &&
                  is_multiaccurate(r.witness, inst) && l1(r.witness) == r.value;
        return distance_entry(r, ok);
      });
    } else {
      throw InvalidArgument("unknown metric '" + name + "'");
    }
  }

  Json calibrated = Json::array();
  for (const auto& s : inst.groups) calibrated.push_back(is_calibrated(f, inst, s));
  Json degree = Json::array();
  for (unsigned r = 1; r <= opt.degree; ++r)
    degree.push_back(Json{{"r", r}, {"pass", is_degree_r_multicalibrated(f, inst, r)}});
  Json membership{{"calibrated", calibrated},
                  {"multicalibrated", is_multicalibrated(f, inst)},
                  {"multiaccurate", is_multiaccurate(f, inst)},
                  {"degree_r", degree}};

  Json report;
  report["instance"] = Json{{"n", inst.n()}, {"groups", inst.groups.size()},
                            {"covers", validation.covers}};
  report["l1_to_p_star"] = value_json(l1(inst.ground_truth));
  report["metrics"] = metrics;
  report["membership"] = membership;
  report["decimal_note"] = "decimal fields are 30-significant-digit renderings, round-half-even";
  report["timing"] = Json{{"total_seconds", seconds_since(t0)}};
  return report;
}

void print_audit_table(const Json& report) {
  std::cout << pad("metric", 8) << pad("value", 16) << "decimal\n";
  for (const auto& [name, entry] : report["metrics"].items()) {
    if (entry.contains("refused")) {
      std::cout << pad(name, 8) << "refused: " << entry["refused"].get<std::string>() << "\n";
      continue;
    }
    std::cout << pad(name, 8) << pad(entry["value"].get<std::string>(), 16)
              << entry["decimal"].get<std::string>() << "\n";
  }
  const auto& m = report["membership"];
  std::cout << "l1 to p*: " << report["l1_to_p_star"]["value"].get<std::string>() << "\n"
            << "multicalibrated: " << m["multicalibrated"].dump()
            << "  multiaccurate: " << m["multiaccurate"].dump()
            << "  calibrated per group: " << m["calibrated"].dump() << "\n";
  for (const auto& d : m["degree_r"])
    std::cout << "degree " << d["r"].dump() << ": " << d["pass"].dump() << "\n";
}

// ---------------------------------------------------------------- enumerate

Json enumerate_report(const mcal::Instance& inst, const std::string& set, std::size_t group,
                      const mcal::Budget& budget) {
  using namespace mcal;
  Json out;
  out["set"] = set;
  Json list = Json::array();
  if (set == "cal") {
    if (group >= inst.groups.size())
      throw InvalidArgument("--group " + std::to_string(group) + " out of range");
    auto cal = calibrated_set(inst, inst.groups[group], budget);
    out["group"] = group;
    out["members"] = subgroup_json(cal.subgroup);
    for (const auto& p : cal.predictors) list.push_back(rationals_json(p));
  } else {
    auto mc = multicalibrated_set(inst, budget);
    Json constrained = Json::array();
    for (bool b : mc.constrained) constrained.push_back(b);
    out["constrained"] = constrained;
    for (const auto& p : mc.predictors) list.push_back(predictor_json(p));
  }
  out["count"] = list.size();
  out["predictors"] = list;
  return out;
}

// ---------------------------------------------------------------- estimate

struct EstimateOptions {
  std::string input;
  std::string metric = "dce";
  std::size_t group = 0;
  std::string eps = "1/20";
  std::string delta = "1/20";
  std::uint64_t seed = 0;
  int trials = 1;
  bool csv = false;
};

Json estimate_entry(const mcal::IntervalEstimate& e, std::uint64_t seed) {
  return Json{{"seed", seed},
              {"point", mcal::to_decimal(e.point)},
              {"lower", mcal::to_decimal(e.lower)},
              {"upper", e.upper_decimal},
              {"samples_used", e.samples_used}};
}

Json estimate_report(const mcal::Instance& inst, const EstimateOptions& opt,
                     const mcal::Budget& budget, std::vector<mcal::IntervalEstimate>& runs,
                     std::vector<std::uint64_t>& seeds) {
  using namespace mcal;
  if (opt.trials < 1) throw InvalidArgument("--trials must be >= 1");
  const Rational eps = parse_rational(opt.eps);
  const Rational delta = parse_rational(opt.delta);
  const bool is_dce = opt.metric == "dce";
  if (!is_dce && opt.metric != "dimc") throw InvalidArgument("--metric must be dce or dimc");
  if (is_dce && opt.group >= inst.groups.size())
    throw InvalidArgument("--group " + std::to_string(opt.group) + " out of range");

  for (int t = 0; t < opt.trials; ++t) {
    std::uint64_t s = t == 0 ? opt.seed : derive_seed(opt.seed, static_cast<std::uint64_t>(t));
    seeds.push_back(s);
    runs.push_back(is_dce ? dce_interval(inst, inst.groups[opt.group], eps, delta, s)
                          : dimc_interval(inst, eps, delta, s));
  }

  Json out = estimate_entry(runs.front(), seeds.front());
  out["metric"] = opt.metric;
  if (is_dce) out["group"] = opt.group;
  out["eps"] = rational_json(eps);
  out["delta"] = rational_json(delta);
  out["batch_size"] = runs.front().batch_size;
  out["batch_count"] = runs.front().batch_count;
  try {
    Rational exact = is_dce ? dce(inst, inst.groups[opt.group], budget).value
                            : dimc(inst, budget).value;
    out["exact"] = value_json(exact);
    std::size_t covered = 0;
    for (const auto& e : runs) covered += e.contains(exact);
    out["exact_covered"] = covered;
  } catch (const BudgetExceeded& e) {
    out["exact"] = Json{{"refused", e.what()}};
  }
  if (opt.trials > 1) {
    Json all = Json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) all.push_back(estimate_entry(runs[i], seeds[i]));
    out["trials"] = all;
  }
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::string family;
  std::string output;
  std::string alpha = "0";
  std::string eps;
  std::string delta = "1/10";
  std::size_t blocks = 1;
  unsigned k = 0;
  std::string variant;
  std::size_t n = 4;
  std::size_t groups = 2;
  std::uint64_t seed = 0;
  unsigned long grid = 10;
  bool nonuniform = false;
};

mcal::Instance generate_instance(const GenerateOptions& o) {
  using namespace mcal;
  auto eps_or = [&](const char* fallback) { return parse_rational(o.eps.empty() ? fallback : o.eps); };
  const std::string& fam = o.family;
  if (fam == "three-point") return gen_three_point(parse_rational(o.alpha));
  if (fam == "wdmc-local-min") return gen_wdmc_local_min(eps_or("1/100"), parse_rational(o.delta));
  if (fam == "ring") return gen_ring(o.blocks);
  if (fam == "cdmc") return gen_cdmc_example();
  if (fam == "hypercube") {
    auto family = gen_hypercube(o.k == 0 ? 4 : o.k);
    if (o.variant.empty() || o.variant == "null") return family.null_instance;
    if (o.variant == "planted") return family.with_random_subset(o.seed);
    throw InvalidArgument("hypercube --variant must be null or planted");
  }
  if (fam == "fibonacci") {
    unsigned k = o.k == 0 ? 3 : o.k;
    Rational eps = o.eps.empty()
                       ? Rational(mpz_class(1), 4 * (k + 1) * fibonacci_number(k + 1))
                       : parse_rational(o.eps);
    return gen_fibonacci(k, eps);
  }
  if (fam == "dcma") {
    auto pair = gen_dcma_example(eps_or("1/100"));
    if (o.variant.empty() || o.variant == "p-star") return pair.with_p_star;
    if (o.variant == "q-star") return pair.with_q_star;
    throw InvalidArgument("dcma --variant must be p-star or q-star");
  }
  if (fam == "random") {
    RandomInstanceOptions r;
    r.n = o.n;
    r.k = o.groups;
    r.seed = o.seed;
    r.grid_denominator = o.grid;
    r.uniform_marginal = !o.nonuniform;
    return gen_random(r);
  }
  throw InvalidArgument("unknown family '" + fam + "'");
}

// ---------------------------------------------------------------- landscape

struct LandscapeOptions {
  std::string input;
  std::string metric = "wdmc";
  std::string radius = "1/200";
  int trials = 200;
  std::uint64_t seed = 0;
};

Json landscape_report(const mcal::Instance& inst, const LandscapeOptions& o,
                      const mcal::Budget& budget) {
  using namespace mcal;
  auto metric = parse_probe_metric(o.metric);
  if (!metric) throw InvalidArgument("unknown metric '" + o.metric + "'");
  auto r = local_min_probe(*metric, inst, parse_rational(o.radius), o.trials, o.seed, budget);
  return Json{{"metric", to_string(r.metric)},
              {"radius", rational_json(parse_rational(o.radius))},
              {"trials", r.trials},
              {"seed", o.seed},
              {"baseline", value_json(r.baseline)},
              {"best_value", value_json(r.best_value)},
              {"best_decrease", value_json(r.best_decrease)},
              {"decrease_found", r.decrease_found},
              {"best_perturbation", rationals_json(r.best_perturbation)}};
}

// ---------------------------------------------------------------- verify

int run_verify(const std::vector<int>& only) {
  auto suite = mcal::acceptance_suite();
  int failed = 0, ran = 0;
  std::printf("%-4s  %-3s  %-78s %9s  %s\n", "", "#", "claim", "time", "detail");
  for (std::size_t i = 0; i < suite.size(); ++i) {
    int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    auto r = mcal::run_criterion(suite[i], id);
    std::printf("%s  %3d  %-78s %8.2fs  %s\n", r.pass ? "PASS" : "FAIL", r.id, r.claim.c_str(),
                r.seconds, r.detail.c_str());
    for (const auto& line : r.log) std::printf("            log: %s\n", line.c_str());
    std::fflush(stdout);
    ++ran;
    failed += !r.pass;
  }
  if (ran == 0) throw mcal::InvalidArgument("--only selected no criteria");
  std::printf("%d criteria, %d failed\n", ran, failed);
  return failed == 0 ? kExitPass : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact multicalibration auditing toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  GlobalOptions global;
  app.add_flag("--pretty", global.pretty, "Print a human-readable table instead of JSON");
  app.add_option("--dump-lp", global.dump_lp, "Write the multiaccuracy LP as JSON to this file");

  AuditOptions audit;
  auto* audit_cmd = app.add_subcommand("audit", "Compute exact distances and membership flags");
  audit_cmd->add_option("instance", audit.input, "Instance JSON file")->required();
  audit_cmd->add_option("-o,--output", audit.output, "Write the report here instead of stdout");
  audit_cmd->add_option("--metrics", audit.metrics, "Subset of wdmc,dmc,dimc,wdma,dma,dcma")
      ->delimiter(',');
  audit_cmd->add_option("--degree", audit.degree, "Check degree-r multicalibration for r = 1..R");

  std::string enum_input, enum_set = "mcal";
  std::size_t enum_group = 0;
  auto* enum_cmd = app.add_subcommand("enumerate", "List cal(D|S) or mcal_C(D)");
  enum_cmd->add_option("instance", enum_input, "Instance JSON file")->required();
  enum_cmd->add_option("--set", enum_set, "cal or mcal")->check(CLI::IsMember({"cal", "mcal"}));
  enum_cmd->add_option("--group", enum_group, "Group index for --set cal");

  EstimateOptions est;
  auto* est_cmd = app.add_subcommand("estimate", "Sample-based interval estimates");
  est_cmd->add_option("instance", est.input, "Instance JSON file")->required();
  est_cmd->add_option("--metric", est.metric, "dce or dimc")->check(CLI::IsMember({"dce", "dimc"}));
  est_cmd->add_option("--group", est.group, "Group index for dce");
  est_cmd->add_option("--eps", est.eps, "Accuracy parameter (rational or decimal)");
  est_cmd->add_option("--delta", est.delta, "Failure probability (rational or decimal)");
  est_cmd->add_option("--seed", est.seed, "Master seed");
  est_cmd->add_option("--trials", est.trials, "Independent repetitions");
  est_cmd->add_flag("--csv", est.csv, "Emit CSV rows instead of JSON");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a constructed instance as JSON");
  gen_cmd->add_option("--family", gen.family, "Instance family")
      ->required()
      ->check(CLI::IsMember({"three-point", "wdmc-local-min", "ring", "hypercube", "cdmc",
                             "fibonacci", "dcma", "random"}));
  gen_cmd->add_option("-o,--output", gen.output, "Output file (default stdout)");
  gen_cmd->add_option("--alpha", gen.alpha, "three-point: alpha in [0, 1/5]");
  gen_cmd->add_option("--eps", gen.eps, "wdmc-local-min, fibonacci, dcma: epsilon");
  gen_cmd->add_option("--delta", gen.delta, "wdmc-local-min: delta");
  gen_cmd->add_option("--blocks", gen.blocks, "ring: points per block N");
  gen_cmd->add_option("--k", gen.k, "hypercube: dimension; fibonacci: chain length");
  gen_cmd->add_option("--variant", gen.variant, "hypercube: null|planted; dcma: p-star|q-star");
  gen_cmd->add_option("--n", gen.n, "random: domain size");
  gen_cmd->add_option("--groups", gen.groups, "random: number of groups");
  gen_cmd->add_option("--seed", gen.seed, "random, hypercube planted: seed");
  gen_cmd->add_option("--grid", gen.grid, "random: denominator of the p* and f grid");
  gen_cmd->add_flag("--nonuniform", gen.nonuniform, "random: non-uniform marginal");

  LandscapeOptions land;
  auto* land_cmd = app.add_subcommand("landscape", "Probe for a local decrease of a metric");
  land_cmd->add_option("instance", land.input, "Instance JSON file")->required();
  land_cmd->add_option("--metric", land.metric, "wdmc, dmc, dimc, wdma or dma");
  land_cmd->add_option("--radius", land.radius, "Weighted l1 radius of perturbations");
  land_cmd->add_option("--trials", land.trials, "Number of random perturbations");
  land_cmd->add_option("--seed", land.seed, "Seed");

  std::string suite = "paper";
  std::vector<int> only;
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");
  verify_cmd->add_option("--suite", suite, "Suite name")->check(CLI::IsMember({"paper"}));
  verify_cmd->add_option("--only", only, "Run only these criterion numbers")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  const mcal::Budget budget = mcal::Budget::from_env();
  try {
    if (*audit_cmd) {
      auto report = audit_report(load(audit.input), audit, global, budget);
      if (global.pretty && audit.output.empty())
        print_audit_table(report);
      else
        emit(report, audit.output);
    } else if (*enum_cmd) {
      auto report = enumerate_report(load(enum_input), enum_set, enum_group, budget);
      if (global.pretty) {
        std::cout << report["count"].get<std::size_t>() << " predictors\n";
        for (const auto& p : report["predictors"]) std::cout << "  " << p.dump() << "\n";
      } else {
        emit(report, "");
      }
    } else if (*est_cmd) {
      std::vector<mcal::IntervalEstimate> runs;
      std::vector<std::uint64_t> seeds;
      auto report = estimate_report(load(est.input), est, budget, runs, seeds);
      if (est.csv) {
        std::cout << "trial,seed,point,lower,upper,samples_used\n";
        for (std::size_t i = 0; i < runs.size(); ++i)
          std::cout << i << "," << seeds[i] << "," << mcal::to_decimal(runs[i].point) << ","
                    << mcal::to_decimal(runs[i].lower) << "," << runs[i].upper_decimal << ","
                    << runs[i].samples_used << "\n";
      } else if (global.pretty) {
        std::cout << est.metric << ": point " << report["point"].get<std::string>() << "  interval ["
                  << report["lower"].get<std::string>() << ", "
                  << report["upper"].get<std::string>() << "]  samples "
                  << report["samples_used"].dump() << "\n";
      } else {
        emit(report, "");
      }
    } else if (*gen_cmd) {
      auto inst = generate_instance(gen);
      if (gen.output.empty())
        std::cout << mcal::instance_to_json(inst).dump(2) << "\n";
      else
        mcal::write_instance(inst, gen.output);
    } else if (*land_cmd) {
      emit(landscape_report(load(land.input), land, budget), "");
    } else if (*verify_cmd) {
      return run_verify(only);
    }
  } catch (const mcal::BudgetExceeded& e) {
    std::cerr << "budget refusal: " << e.what() << " (bound " << e.bound() << ")\n";
    return kExitBudget;
  } catch (const mcal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitPass;
}
