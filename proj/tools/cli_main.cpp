// Command line front end: parses one query, runs it, prints one report.
// Exit codes: 0 decided, 2 contains an at-resolution or unconverged answer,
// 1 usage or input errors.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teq/effects.hpp"
#include "teq/involution.hpp"
#include "teq/modalities.hpp"
#include "teq/parser.hpp"
#include "teq/proofs.hpp"
#include "teq/relations.hpp"
#include "teq/relator.hpp"
#include "teq/semantics.hpp"
#include "teq/tree.hpp"
#include "teq/value.hpp"

using namespace teq;
using Json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string effect;
  int store_size = 2;
  std::string exceptions = "e1,e2";
  int grid = 3;
  int depth = 20;
  std::string eps = "1/2^20";
  std::string format = "json";
  std::uint64_t seed = 0;
  bool timings = false;

  std::vector<std::string> exception_list() const {
    std::vector<std::string> out;
    std::string cur;
    for (char c : exceptions) {
      if (c == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  }
  EffectParams params() const { return {store_size, exception_list()}; }
  QueryLimits limits() const { return {grid, depth, dyadic_parse(eps)}; }
};

// One report in the making: exit code 2 wins over 0 the moment any
// sub-answer is only good at the current resolution.
struct Report {
  Json doc;
  int exit_code = 0;

  void undecided() { exit_code = 2; }
};

const char* status_str(Status s) {
  switch (s) {
    case Status::Holds:
      return "holds";
    case Status::Refuted:
      return "refuted";
    case Status::HoldsAtResolution:
      return "holds_at_resolution";
  }
  return "unknown";
}

Json witness_json(const Assignment& h) {
  Json w = Json::object();
  for (const auto& [v, val] : h.map) w["x" + std::to_string(v)] = value_print(val);
  return w;
}

void decision_fields(Report& rep, Json& into, const Decision& d) {
  into["result"] = status_str(d.status);
  if (d.status == Status::HoldsAtResolution) {
    into["resolution"] = d.resolution;
    rep.undecided();
  }
  if (d.witness) into["witness"] = witness_json(*d.witness);
  if (d.values)
    into["values"] = Json::array({value_print(d.values->first), value_print(d.values->second)});
}

// --assign entries are comma separated, but values themselves may carry
// commas (intervals, sets), so a split point is a comma that starts the
// next x<nat>= binding.
Assignment parse_assign(const EffectSpec& e, const std::string& text) {
  std::vector<std::string> entries;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != ',') continue;
    std::size_t j = i + 1;
    if (j >= text.size() || text[j] != 'x') continue;
    ++j;
    std::size_t digits = 0;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j, ++digits;
    if (digits == 0 || j >= text.size() || text[j] != '=') continue;
    entries.push_back(text.substr(start, i - start));
    start = i + 1;
  }
  entries.push_back(text.substr(start));
  Assignment h;
  for (const std::string& entry : entries) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || entry.empty() || entry[0] != 'x')
      throw Error("bad assignment entry: " + entry);
    const std::string var_part = entry.substr(1, eq - 1);
    for (char c : var_part)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw Error("bad assignment variable: " + entry.substr(0, eq));
    h.map[static_cast<VarId>(std::stoul(var_part))] = value_parse(e, entry.substr(eq + 1));
  }
  return h;
}

void render_text(std::ostream& os, const Json& doc, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) {
      os << pad << key << ":\n";
      render_text(os, value, indent + 2);
    } else if (value.is_array() && !value.empty() && value[0].is_object()) {
      os << pad << key << ":\n";
      for (const auto& item : value) {
        os << pad << "  -\n";
        render_text(os, item, indent + 4);
      }
    } else {
      os << pad << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
         << "\n";
    }
  }
}

int run(int argc, char** argv) {
  Options opt;
  CLI::App app{"decide, refute and certify orderings of algebraic effect trees"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--store-size", opt.store_size, "store cell count k");
  app.add_option("--exceptions", opt.exceptions, "comma separated exception names");
  app.add_option("--grid", opt.grid, "final dyadic grid resolution");
  app.add_option("--depth", opt.depth, "truncation cap (bounds) or enumeration depth (quotient)");
  app.add_option("--eps", opt.eps, "convergence tolerance, dyadic num/2^k");
  app.add_option("--format", opt.format, "json or text")
      ->check(CLI::IsMember({"json", "text"}));
  app.add_option("--seed", opt.seed, "seed for sampled reports");
  app.add_flag("--timings", opt.timings, "include wall clock timings in the report");

  std::string expr_a, expr_b, assign_text, proof_file;

  auto add_effect = [&](CLI::App* sub) {
    sub->add_option("--effect", opt.effect, "one of: nondet, prob, store, exceptions, input, cost, nondet_prob")
        ->required();
    sub->fallthrough();
  };

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate an expression");
  add_effect(eval_cmd);
  eval_cmd->add_option("--assign", assign_text, "leaf values, x0=VAL,x1=VAL,...");
  eval_cmd->add_option("expr", expr_a, "expression")->required();

  CLI::App* leq_cmd = app.add_subcommand("leq", "decide lhs below rhs");
  add_effect(leq_cmd);
  leq_cmd->add_option("lhs", expr_a)->required();
  leq_cmd->add_option("rhs", expr_b)->required();

  CLI::App* dist_cmd = app.add_subcommand("distinguish", "search both directions for a separating assignment");
  add_effect(dist_cmd);
  dist_cmd->add_option("lhs", expr_a)->required();
  dist_cmd->add_option("rhs", expr_b)->required();

  CLI::App* sv_cmd = app.add_subcommand("single-valued", "two-leaf substitution table against the full check");
  add_effect(sv_cmd);
  sv_cmd->add_option("lhs", expr_a)->required();
  sv_cmd->add_option("rhs", expr_b)->required();

  CLI::App* proof_cmd = app.add_subcommand("check-proof", "check a derivation file");
  proof_cmd->fallthrough();
  proof_cmd->add_option("file", proof_file, "derivation file")->required();

  CLI::App* quot_cmd = app.add_subcommand("quotient", "enumerate closed trees and quotient by evaluation");
  add_effect(quot_cmd);

  CLI::App* rel_cmd = app.add_subcommand("relator-laws", "verify the relator laws on small carriers");
  add_effect(rel_cmd);

  CLI::App* inv_cmd = app.add_subcommand("involution", "involution preservation report");
  add_effect(inv_cmd);

  CLI::App* modal_cmd = app.add_subcommand("modal-leq", "decide the modal preorder");
  add_effect(modal_cmd);
  modal_cmd->add_option("lhs", expr_a)->required();
  modal_cmd->add_option("rhs", expr_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    EffectSpec effect;
    if (command == "check-proof") {
      std::ifstream in(proof_file, std::ios::binary);
      if (!in.good()) throw Error("cannot read file: " + proof_file);
      std::ostringstream ss;
      ss << in.rdbuf();
      const std::string text = ss.str();
      effect = get_effect(derivation_effect_name(text), opt.params());
      rep.doc["command"] = command;
      rep.doc["effect"] = effect.name;
      const Derivation d = parse_derivation(text, effect);
      const ProofResult r = check_derivation(effect, d);
      Json res;
      res["ok"] = r.ok;
      res["conclusion"] =
          Json::array({print_tree(d.lhs), print_tree(d.rhs)});
      res["steps"] = d.steps.size();
      res["assumptions"] = d.assumptions.size();
      if (!r.ok) {
        res["step"] = r.step;
        res["reason"] = r.reason;
      }
      rep.doc["result"] = std::move(res);
    } else {
      effect = get_effect(opt.effect, opt.params());
      rep.doc["command"] = command;
      rep.doc["effect"] = effect.name;
    }
    rep.doc["params"] = Json{{"store_size", opt.store_size},
                             {"exceptions", opt.exception_list()},
                             {"grid", opt.grid},
                             {"depth", opt.depth},
                             {"eps", dyadic_print(dyadic_parse(opt.eps))},
                             {"seed", opt.seed}};

    const QueryLimits limits = opt.limits();

    if (command == "eval") {
      const AnyTree t = parse_tree(expr_a, effect);
      const Assignment h =
          assign_text.empty() ? Assignment{} : parse_assign(effect, assign_text);
      const bool bounded = any_cyclic(t) && (effect.space == Space::Dyadic ||
                                             effect.space == Space::Interval);
      if (bounded) {
        const Bounds b = eval_bounds(effect, t, h, opt.depth, dyadic_parse(opt.eps));
        rep.doc["result"] = Json{{"lower", value_print(b.lower)},
                                 {"upper", value_print(b.upper)},
                                 {"converged", b.converged},
                                 {"depth", b.depth}};
        if (!b.converged) rep.undecided();
      } else {
        rep.doc["result"] = value_print(eval_exact(effect, t, h));
      }
    } else if (command == "leq") {
      const Decision d =
          check_leq(effect, parse_tree(expr_a, effect), parse_tree(expr_b, effect), limits);
      decision_fields(rep, rep.doc, d);
    } else if (command == "modal-leq") {
      const Decision d =
          modal_leq(effect, parse_tree(expr_a, effect), parse_tree(expr_b, effect), limits);
      decision_fields(rep, rep.doc, d);
    } else if (command == "distinguish") {
      const DistinguishReport r = distinguish(effect, parse_tree(expr_a, effect),
                                              parse_tree(expr_b, effect), limits);
      Json res;
      res["lr"] = status_str(r.lr.status);
      res["rl"] = status_str(r.rl.status);
      res["found"] = r.found ? (r.lr.refuted() ? "left_to_right" : "right_to_left") : "none";
      rep.doc["result"] = std::move(res);
      if (r.found) {
        rep.doc["witness"] = witness_json(std::get<0>(*r.found));
        rep.doc["values"] = Json::array(
            {value_print(std::get<1>(*r.found)), value_print(std::get<2>(*r.found))});
      }
      if (r.lr.status == Status::HoldsAtResolution) {
        rep.doc["resolution"] = r.lr.resolution;
        rep.undecided();
      } else if (r.rl.status == Status::HoldsAtResolution) {
        rep.doc["resolution"] = r.rl.resolution;
        rep.undecided();
      }
    } else if (command == "single-valued") {
      const AnyTree a = parse_tree(expr_a, effect);
      const AnyTree b = parse_tree(expr_b, effect);
      if (any_is_regular(a) || any_is_regular(b))
        throw Error("single-valued takes finite trees");
      const SingleValuedReport r = check_single_valued_instance(
          effect, std::get<Tree>(a), std::get<Tree>(b), limits);
      Json res;
      Json vars = Json::array();
      for (VarId v : r.vars) vars.push_back("x" + std::to_string(v));
      res["vars"] = std::move(vars);
      Json rows = Json::array();
      for (const auto& row : r.rows) {
        Json jr;
        Json leaf = Json::array();
        for (bool to_leaf : row.to_leaf) leaf.push_back(to_leaf);
        jr["to_leaf"] = std::move(leaf);
        jr["lr"] = status_str(row.lr.status);
        jr["rl"] = status_str(row.rl.status);
        rows.push_back(std::move(jr));
      }
      res["rows"] = std::move(rows);
      res["rows_hold_lr"] = r.rows_hold_lr();
      res["rows_hold_rl"] = r.rows_hold_rl();
      Json full_lr, full_rl;
      decision_fields(rep, full_lr, r.full_lr);
      decision_fields(rep, full_rl, r.full_rl);
      res["full_lr"] = std::move(full_lr);
      res["full_rl"] = std::move(full_rl);
      rep.doc["result"] = std::move(res);
    } else if (command == "quotient") {
      const ValueTable table = build_quotient(effect, opt.depth);
      Json res;
      res["depth"] = table.depth;
      res["classes"] = table.classes.size();
      Json classes = Json::array();
      for (const auto& c : table.classes)
        classes.push_back(Json{{"value", value_print(c.value)},
                               {"canonical", print_tree(c.canonical)},
                               {"members", c.members.size()}});
      res["class_list"] = std::move(classes);
      rep.doc["result"] = std::move(res);
    } else if (command == "relator-laws") {
      const RelatorLawReport r = check_relator_laws(effect, 2, 2, Exec::Parallel);
      rep.doc["result"] = Json{{"identity_checked", r.identity_checked},
                               {"composition_checked", r.composition_checked},
                               {"monotonicity_checked", r.monotonicity_checked},
                               {"reindexing_checked", r.reindexing_checked},
                               {"violations", r.violations},
                               {"notes", r.notes}};
    } else if (command == "involution") {
      const InvolutionReport r = check_involution_preservation(effect, 1000, opt.seed);
      rep.doc["result"] = Json{{"order_checked", r.order_checked},
                               {"order_failures", r.order_failures},
                               {"value_identity_applicable", r.value_identity_applicable},
                               {"value_checked", r.value_checked},
                               {"value_failures", r.value_failures},
                               {"regular_failure_shown", r.regular_failure_shown},
                               {"regular_witness", r.regular_witness},
                               {"involution_impossible", r.involution_impossible},
                               {"notes", r.notes}};
    }

    if (opt.timings) {
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      rep.doc["timings"] = Json{{"total_ms", ms}};
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (opt.format == "text") {
    render_text(std::cout, rep.doc);
  } else {
    std::cout << rep.doc.dump(2) << "\n";
  }
  return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
