#include "teq/proofs.hpp"

#include <json.hpp>

#include "teq/parser.hpp"

namespace teq {

namespace {

struct Fail {
  std::string reason;
};

struct Checker {
  const EffectSpec& e;
  std::vector<const LabeledAssumption*> assumptions;

  const LabeledAssumption* find_assumption(const std::string& label) const {
    for (const auto* a : assumptions)
      if (a->label == label) return a;
    return nullptr;
  }

  Tree finite_instance(const AnyTree& t) const {
    const auto* f = std::get_if<Tree>(&t);
    if (f == nullptr) throw Fail{"axiom instance is not a finite tree"};
    return *f;
  }

  void apply(const Step& s, Tree& c) {
    switch (s.kind) {
      case Step::Kind::Refl:
        return;
      case Step::Kind::Order:
        e.signature.validate(s.to);
        if (!tree_leq(AnyTree(c), AnyTree(s.to)))
          throw Fail{"order violation: " + print_tree(c) + " is not below " + print_tree(s.to)};
        c = s.to;
        return;
      case Step::Kind::Axiom: {
        const AxiomScheme* ax = e.find_axiom(s.name);
        if (ax == nullptr) throw Fail{"unknown axiom: " + s.name};
        if (ax->lhs.regular || ax->rhs.regular)
          throw Fail{"axiom " + s.name +
                     " has a recursive side; it is validated semantically and cannot be "
                     "applied in a finitary derivation"};
        if (s.reverse && !ax->is_equation)
          throw Fail{"inequation " + s.name + " used right-to-left"};
        const auto [lhs, rhs] = instantiate_axiom(*ax, s.subst);
        const Tree src = finite_instance(s.reverse ? rhs : lhs);
        const Tree dst = finite_instance(s.reverse ? lhs : rhs);
        if (!tree_equal(c, src))
          throw Fail{"axiom instance mismatch: expected " + print_tree(src) + ", at " +
                     print_tree(c)};
        c = dst;
        return;
      }
      case Step::Kind::Assume: {
        const LabeledAssumption* a = find_assumption(s.name);
        if (a == nullptr) throw Fail{"unknown assumption: " + s.name};
        if (!tree_equal(c, a->lhs))
          throw Fail{"assumption mismatch: expected " + print_tree(a->lhs) + ", at " +
                     print_tree(c)};
        c = a->rhs;
        return;
      }
      case Step::Kind::Congruence: {
        Tree u;
        try {
          u = subtree_at(c, s.at);
        } catch (const Error& err) {
          throw Fail{std::string("bad position: ") + err.what()};
        }
        run(*require_sub(s));
        if (!tree_equal(u, s.sub->lhs))
          throw Fail{"congruence mismatch: position holds " + print_tree(u) +
                     ", sub-derivation starts at " + print_tree(s.sub->lhs)};
        c = replace_at(c, s.at, s.sub->rhs);
        return;
      }
      case Step::Kind::Subst: {
        run(*require_sub(s));
        const Tree fu = substitute(s.map, s.sub->lhs);
        const Tree fv = substitute(s.map, s.sub->rhs);
        if (!tree_equal(c, fu))
          throw Fail{"substitution mismatch: expected " + print_tree(fu) + ", at " +
                     print_tree(c)};
        c = fv;
        return;
      }
      case Step::Kind::Trans: {
        run(*require_sub(s));
        if (!tree_equal(s.sub->lhs, c))
          throw Fail{"transitivity mismatch: sub-derivation starts at " +
                     print_tree(s.sub->lhs) + ", chain is at " + print_tree(c)};
        if (!tree_equal(s.sub->rhs, s.to))
          throw Fail{"transitivity mismatch: sub-derivation ends at " +
                     print_tree(s.sub->rhs) + ", step claims " + print_tree(s.to)};
        c = s.to;
        return;
      }
    }
    throw Fail{"unknown step kind"};
  }

  static const Derivation* require_sub(const Step& s) {
    if (s.sub == nullptr) throw Fail{"missing sub-derivation"};
    return s.sub.get();
  }

  void run(const Derivation& d) {
    try {
      e.signature.validate(d.lhs);
      e.signature.validate(d.rhs);
    } catch (const Error& err) {
      throw Fail{std::string("conclusion: ") + err.what()};
    }
    Tree c = d.lhs;
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
      try {
        apply(d.steps[i], c);
      } catch (const Error& err) {
        throw Fail{"step " + std::to_string(i) + ": " + err.what()};
      } catch (Fail& f) {
        throw Fail{"step " + std::to_string(i) + ": " + f.reason};
      }
    }
    if (!tree_equal(c, d.rhs))
      throw Fail{"chain ends at " + print_tree(c) + ", conclusion claims " + print_tree(d.rhs)};
  }
};

}  // namespace

ProofResult check_derivation(const EffectSpec& e, const Derivation& d,
                             const std::vector<LabeledAssumption>& extra) {
  Checker ck{e, {}};
  for (const LabeledAssumption& a : d.assumptions) ck.assumptions.push_back(&a);
  for (const LabeledAssumption& a : extra) ck.assumptions.push_back(&a);
  for (const auto* a : ck.assumptions) {
    try {
      e.signature.validate(a->lhs);
      e.signature.validate(a->rhs);
    } catch (const Error& err) {
      return {false, -1, "assumption " + a->label + ": " + err.what()};
    }
  }
  try {
    e.signature.validate(d.lhs);
    e.signature.validate(d.rhs);
  } catch (const Error& err) {
    return {false, -1, std::string("conclusion: ") + err.what()};
  }
  Tree c = d.lhs;
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    try {
      ck.apply(d.steps[i], c);
    } catch (const Error& err) {
      return {false, static_cast<int>(i), err.what()};
    } catch (const Fail& f) {
      return {false, static_cast<int>(i), f.reason};
    }
  }
  if (!tree_equal(c, d.rhs))
    return {false, static_cast<int>(d.steps.size()),
            "chain ends at " + print_tree(c) + ", conclusion claims " + print_tree(d.rhs)};
  return {true, 0, ""};
}

namespace {

using nlohmann::json;

json tree_json(const Tree& t) { return print_tree(t); }

json derivation_json(const Derivation& d, bool top);

json step_json(const Step& s) {
  json j;
  switch (s.kind) {
    case Step::Kind::Refl:
      j["kind"] = "refl";
      break;
    case Step::Kind::Order:
      j["kind"] = "order";
      j["to"] = tree_json(s.to);
      break;
    case Step::Kind::Axiom: {
      j["kind"] = "axiom";
      j["name"] = s.name;
      j["direction"] = s.reverse ? "rl" : "lr";
      json m = json::object();
      for (const auto& [k, v] : s.subst) m[k] = tree_json(v);
      j["subst"] = m;
      break;
    }
    case Step::Kind::Assume:
      j["kind"] = "assume";
      j["label"] = s.name;
      break;
    case Step::Kind::Congruence: {
      j["kind"] = "congruence";
      j["at"] = json::array();
      for (std::uint32_t i : s.at) j["at"].push_back(i);
      j["derivation"] = derivation_json(*s.sub, false);
      break;
    }
    case Step::Kind::Subst: {
      j["kind"] = "subst";
      json m = json::object();
      for (const auto& [v, t] : s.map) m["x" + std::to_string(v)] = tree_json(t);
      j["map"] = m;
      j["derivation"] = derivation_json(*s.sub, false);
      break;
    }
    case Step::Kind::Trans:
      j["kind"] = "trans";
      j["to"] = tree_json(s.to);
      j["derivation"] = derivation_json(*s.sub, false);
      break;
  }
  return j;
}

json derivation_json(const Derivation& d, bool top) {
  json j;
  j["conclusion"] = {{"lhs", tree_json(d.lhs)}, {"rhs", tree_json(d.rhs)}};
  if (top) {
    j["assumptions"] = json::array();
    for (const LabeledAssumption& a : d.assumptions)
      j["assumptions"].push_back(
          {{"label", a.label}, {"lhs", tree_json(a.lhs)}, {"rhs", tree_json(a.rhs)}});
  }
  j["steps"] = json::array();
  for (const Step& s : d.steps) j["steps"].push_back(step_json(s));
  return j;
}

Tree parse_finite(const json& j, const EffectSpec& e, const char* what) {
  if (!j.is_string()) throw Error(std::string(what) + ": expected an expression string");
  const AnyTree t = parse_tree(j.get<std::string>(), e);
  const auto* f = std::get_if<Tree>(&t);
  if (f == nullptr) throw Error(std::string(what) + ": finite tree expected");
  return *f;
}

VarId parse_var_name(const std::string& s) {
  if (s.size() < 2 || s[0] != 'x' || s.find_first_not_of("0123456789", 1) != std::string::npos)
    throw Error("expected a variable name like x0: " + s);
  return static_cast<VarId>(std::stoul(s.substr(1)));
}

Derivation parse_derivation_json(const json& j, const EffectSpec& e, bool top);

Step parse_step_json(const json& j, const EffectSpec& e) {
  if (!j.is_object() || !j.contains("kind")) throw Error("step: expected an object with kind");
  const std::string kind = j.at("kind").get<std::string>();
  Step s;
  if (kind == "refl") {
    s.kind = Step::Kind::Refl;
  } else if (kind == "order") {
    s.kind = Step::Kind::Order;
    s.to = parse_finite(j.at("to"), e, "order.to");
  } else if (kind == "axiom") {
    s.kind = Step::Kind::Axiom;
    s.name = j.at("name").get<std::string>();
    const std::string dir = j.at("direction").get<std::string>();
    if (dir != "lr" && dir != "rl") throw Error("axiom.direction: expected lr or rl");
    s.reverse = dir == "rl";
    for (const auto& [k, v] : j.at("subst").items())
      s.subst[k] = parse_finite(v, e, "axiom.subst");
  } else if (kind == "assume") {
    s.kind = Step::Kind::Assume;
    s.name = j.at("label").get<std::string>();
  } else if (kind == "congruence") {
    s.kind = Step::Kind::Congruence;
    for (const auto& i : j.at("at")) {
      if (!i.is_number_unsigned()) throw Error("congruence.at: expected child indices");
      s.at.push_back(i.get<std::uint32_t>());
    }
    s.sub = std::make_shared<Derivation>(parse_derivation_json(j.at("derivation"), e, false));
  } else if (kind == "subst") {
    s.kind = Step::Kind::Subst;
    for (const auto& [k, v] : j.at("map").items())
      s.map.emplace_back(parse_var_name(k), parse_finite(v, e, "subst.map"));
    s.sub = std::make_shared<Derivation>(parse_derivation_json(j.at("derivation"), e, false));
  } else if (kind == "trans") {
    s.kind = Step::Kind::Trans;
    s.to = parse_finite(j.at("to"), e, "trans.to");
    s.sub = std::make_shared<Derivation>(parse_derivation_json(j.at("derivation"), e, false));
  } else {
    throw Error("unknown step kind: " + kind);
  }
  return s;
}

Derivation parse_derivation_json(const json& j, const EffectSpec& e, bool top) {
  if (!j.is_object()) throw Error("derivation: expected an object");
  Derivation d;
  const json& c = j.at("conclusion");
  d.lhs = parse_finite(c.at("lhs"), e, "conclusion.lhs");
  d.rhs = parse_finite(c.at("rhs"), e, "conclusion.rhs");
  if (top && j.contains("assumptions")) {
    for (const json& a : j.at("assumptions"))
      d.assumptions.push_back({a.at("label").get<std::string>(),
                               parse_finite(a.at("lhs"), e, "assumption.lhs"),
                               parse_finite(a.at("rhs"), e, "assumption.rhs")});
  }
  for (const json& s : j.at("steps")) d.steps.push_back(parse_step_json(s, e));
  return d;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& err) {
    throw Error(std::string("derivation file: ") + err.what());
  }
}

}  // namespace

std::string derivation_to_json(const Derivation& d, const std::string& effect_name) {
  json j = derivation_json(d, true);
  j["effect"] = effect_name;
  return j.dump(2) + "\n";
}

std::string derivation_effect_name(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object() || !j.contains("effect") || !j.at("effect").is_string())
    throw Error("derivation file: missing effect name");
  return j.at("effect").get<std::string>();
}

Derivation parse_derivation(const std::string& text, const EffectSpec& e) {
  try {
    return parse_derivation_json(parse_text(text), e, true);
  } catch (const nlohmann::json::exception& err) {
    throw Error(std::string("derivation file: ") + err.what());
  }
}

}  // namespace teq
