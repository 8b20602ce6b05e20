// Generates the checked-in derivation corpus under data/derivations/.
// Every emitted file is validated with check_derivation and re-parsed for a
// byte-exact round trip before it is written.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "teq/effects.hpp"
#include "teq/parser.hpp"
#include "teq/proofs.hpp"
#include "teq/semantics.hpp"
#include "teq/tree.hpp"

using namespace teq;
namespace fs = std::filesystem;

namespace {

Step axiom_step(const std::string& name, std::map<std::string, Tree> subst,
                bool reverse = false) {
  Step s;
  s.kind = Step::Kind::Axiom;
  s.name = name;
  s.reverse = reverse;
  s.subst = std::move(subst);
  return s;
}

Step order_step(const Tree& to) {
  Step s;
  s.kind = Step::Kind::Order;
  s.to = to;
  return s;
}

Step congruence_step(Path at, std::shared_ptr<Derivation> sub) {
  Step s;
  s.kind = Step::Kind::Congruence;
  s.at = std::move(at);
  s.sub = std::move(sub);
  return s;
}

Step trans_step(const Tree& to, std::shared_ptr<Derivation> sub) {
  Step s;
  s.kind = Step::Kind::Trans;
  s.to = to;
  s.sub = std::move(sub);
  return s;
}

Step subst_step(std::vector<std::pair<VarId, Tree>> map, std::shared_ptr<Derivation> sub) {
  Step s;
  s.kind = Step::Kind::Subst;
  s.map = std::move(map);
  s.sub = std::move(sub);
  return s;
}

struct Entry {
  std::string name;
  Derivation d;
};

std::string sanitize(const std::string& axiom_name) {
  std::string out;
  for (char c : axiom_name) {
    if (c == '[') {
      out += '-';
    } else if (c != ']') {
      out += c;
    }
  }
  return out;
}

// One forward instance per finite axiom (the scheme itself over variables),
// plus a reversed closed instance for equations and one application under
// the first non-nullary operator.
void add_axiom_entries(const EffectSpec& e, std::vector<Entry>& out) {
  const std::vector<Tree> pool = enumerate_closed_trees(e, 1);
  const Signature::Op* context = nullptr;
  for (const auto& op : e.signature.operators)
    if (op.arity > 0) {
      context = &op;
      break;
    }
  for (const AxiomScheme& ax : e.axioms) {
    if (ax.lhs.regular || ax.rhs.regular) continue;

    std::map<std::string, Tree> open_subst;
    VarId v = 0;
    for (const std::string& mv : ax.metavar_names) open_subst[mv] = var(v++);
    const auto [ol, orr] = instantiate_axiom(ax, open_subst);
    Derivation fwd;
    fwd.lhs = std::get<Tree>(ol);
    fwd.rhs = std::get<Tree>(orr);
    fwd.steps = {axiom_step(ax.name, open_subst)};
    out.push_back({"axiom_" + sanitize(ax.name), fwd});

    if (ax.is_equation) {
      std::map<std::string, Tree> closed;
      std::size_t i = 0;
      for (const std::string& mv : ax.metavar_names)
        closed[mv] = pool[(3 * ++i + 1) % pool.size()];
      const auto [cl, cr] = instantiate_axiom(ax, closed);
      Derivation rev;
      rev.lhs = std::get<Tree>(cr);
      rev.rhs = std::get<Tree>(cl);
      rev.steps = {axiom_step(ax.name, closed, true)};
      out.push_back({"axiom_" + sanitize(ax.name) + "_reversed", rev});
    }

    if (context != nullptr) {
      auto sub = std::make_shared<Derivation>(fwd);
      std::vector<Tree> kl(static_cast<std::size_t>(context->arity), top());
      std::vector<Tree> kr = kl;
      kl[0] = fwd.lhs;
      kr[0] = fwd.rhs;
      Derivation ctx;
      ctx.lhs = node(context->name, kl);
      ctx.rhs = node(context->name, kr);
      ctx.steps = {congruence_step({0}, sub)};
      out.push_back({"axiom_" + sanitize(ax.name) + "_in_context", ctx});
    }
  }
}

// Order, reflexivity, transitivity and substitution entries built from a
// deterministic spread of closed trees.
void add_generic_entries(const EffectSpec& e, std::vector<Entry>& out) {
  const std::vector<Tree> pool = enumerate_closed_trees(e, 2);
  std::vector<Tree> picks;
  for (std::size_t i = 1; i <= 6 && picks.size() < 6; ++i) {
    const Tree& t = pool[i * pool.size() / 7];
    if (t->kind == NodeKind::Op) picks.push_back(t);
  }
  for (std::size_t i = 0; i < picks.size(); ++i) {
    Derivation up;
    up.lhs = bot();
    up.rhs = picks[i];
    up.steps = {order_step(picks[i])};
    out.push_back({"order_bot_below_" + std::to_string(i), up});

    Derivation down;
    down.lhs = picks[i];
    down.rhs = top();
    down.steps = {order_step(top())};
    out.push_back({"order_below_top_" + std::to_string(i), down});
  }
  for (std::size_t i = 0; i < picks.size() && i < 2; ++i) {
    Derivation r;
    r.lhs = picks[i];
    r.rhs = picks[i];
    r.steps = {Step{}};
    out.push_back({"refl_" + std::to_string(i), r});

    auto leg = std::make_shared<Derivation>();
    leg->lhs = bot();
    leg->rhs = picks[i];
    leg->steps = {order_step(picks[i])};
    Derivation through;
    through.lhs = bot();
    through.rhs = top();
    through.steps = {trans_step(picks[i], leg), order_step(top())};
    out.push_back({"trans_through_" + std::to_string(i), through});

    auto open_leg = std::make_shared<Derivation>();
    open_leg->lhs = var(0);
    open_leg->rhs = top();
    open_leg->steps = {order_step(top())};
    Derivation closed;
    closed.lhs = picks[i];
    closed.rhs = top();
    closed.steps = {subst_step({{0, picks[i]}}, open_leg)};
    out.push_back({"subst_closes_" + std::to_string(i), closed});
  }
  const Signature::Op* context = nullptr;
  for (const auto& op : e.signature.operators)
    if (op.arity > 0) {
      context = &op;
      break;
    }
  if (context != nullptr) {
    for (std::size_t i = 0; i < picks.size() && i < 2; ++i) {
      auto sub = std::make_shared<Derivation>();
      sub->lhs = bot();
      sub->rhs = picks[i];
      sub->steps = {order_step(picks[i])};
      std::vector<Tree> kl(static_cast<std::size_t>(context->arity), var(0));
      std::vector<Tree> kr = kl;
      kl[0] = bot();
      kr[0] = picks[i];
      Derivation ctx;
      ctx.lhs = node(context->name, kl);
      ctx.rhs = node(context->name, kr);
      ctx.steps = {congruence_step({0}, sub)};
      out.push_back({"congruence_child_" + std::to_string(i), ctx});
    }
  }
}

// bot <= upd[1](bot): route bot through a constant lookup, push updates
// into the branches, raise the dead branch, and collapse the lookup.
Derivation update_chain() {
  const Tree b = bot();
  const Tree u0b = node("upd[0]", {b});
  const Tree u1b = node("upd[1]", {b});

  auto inner = std::make_shared<Derivation>();
  inner->lhs = b;
  inner->rhs = u1b;
  inner->steps = {order_step(u1b)};

  auto branch = std::make_shared<Derivation>();
  branch->lhs = u0b;
  branch->rhs = u1b;
  branch->steps = {congruence_step({0}, inner), axiom_step("upd_upd[0][1]", {{"x", b}})};

  Derivation d;
  d.lhs = b;
  d.rhs = u1b;
  d.steps = {axiom_step("lkp_const", {{"x", b}}, true),
             axiom_step("lkp_upd", {{"x0", b}, {"x1", b}}, true),
             congruence_step({0}, branch), axiom_step("lkp_const", {{"x", u1b}})};
  return d;
}

// top <= raise[e1] under the assumption catch[e1](x0,x1) <= x0; the
// assumption survives every leaf substitution yet collapses the order.
Derivation collapse_chain() {
  const Tree t = top();
  const Tree r1 = node("raise[e1]", {});

  auto handler = std::make_shared<Derivation>();
  handler->lhs = node("catch[e1]", {var(0), var(1)});
  handler->rhs = var(0);
  Step assume;
  assume.kind = Step::Kind::Assume;
  assume.name = "catch_le";
  handler->steps = {assume};

  Derivation d;
  d.lhs = t;
  d.rhs = r1;
  d.assumptions = {{"catch_le", node("catch[e1]", {var(0), var(1)}), var(0)}};
  d.steps = {axiom_step("catch_raise_same[e1]", {{"x", t}}, true),
             subst_step({{0, r1}, {1, t}}, handler)};
  return d;
}

void add_exemplars(const EffectSpec& e, std::vector<Entry>& out) {
  if (e.name == "store") {
    out.push_back({"bot_below_update", update_chain()});
    return;
  }
  if (e.name == "exceptions") {
    out.push_back({"collapse_top_raise", collapse_chain()});
    Derivation back;
    back.lhs = node("raise[e1]", {});
    back.rhs = top();
    back.steps = {order_step(top())};
    out.push_back({"raise_below_top", back});
    return;
  }
  if (e.name == "nondet") {
    Derivation d;
    d.lhs = node("or", {var(0), node("or", {var(1), var(2)})});
    d.rhs = node("or", {var(2), node("or", {var(0), var(1)})});
    d.steps = {axiom_step("or_assoc", {{"x", var(0)}, {"y", var(1)}, {"z", var(2)}}),
               axiom_step("or_comm", {{"x", node("or", {var(0), var(1)})}, {"y", var(2)}})};
    out.push_back({"associate_then_commute", d});
    return;
  }
  if (e.name == "prob") {
    Derivation d;
    d.lhs = node("por", {node("por", {var(0), var(1)}), node("por", {var(2), var(3)})});
    d.rhs = node("por", {node("por", {var(1), var(3)}), node("por", {var(0), var(2)})});
    d.steps = {
        axiom_step("por_exch",
                   {{"x", var(0)}, {"y", var(1)}, {"z", var(2)}, {"w", var(3)}}),
        axiom_step("por_comm", {{"x", node("por", {var(0), var(2)})},
                                {"y", node("por", {var(1), var(3)})}})};
    out.push_back({"exchange_then_commute", d});
    return;
  }
  if (e.name == "cost") {
    for (int n = 2; n <= 4; ++n) {
      Derivation d;
      Tree cur = var(0);
      for (int i = 0; i < n; ++i) cur = node("tick", {cur});
      d.lhs = cur;
      d.rhs = var(0);
      for (int i = n - 1; i >= 0; --i) {
        Tree inner = var(0);
        for (int j = 0; j < i; ++j) inner = node("tick", {inner});
        d.steps.push_back(axiom_step("tick_le", {{"x", inner}}));
      }
      out.push_back({"discount_" + std::to_string(n) + "_ticks", d});
    }
    return;
  }
  if (e.name == "input") {
    Derivation d;
    d.lhs = bot();
    d.rhs = node("in", {top(), bot()});
    d.steps = {order_step(node("in", {bot(), bot()})),
               order_step(node("in", {top(), bot()}))};
    out.push_back({"deepen_then_widen", d});
    return;
  }
  if (e.name == "nondet_prob") {
    Derivation d;
    const Tree pl = node("por", {var(0), var(1)});
    const Tree prr = node("por", {var(0), var(2)});
    d.lhs = node("por", {var(0), node("or", {var(1), var(2)})});
    d.rhs = node("or", {prr, pl});
    d.steps = {
        axiom_step("por_or_dist", {{"x", var(0)}, {"y", var(1)}, {"z", var(2)}}),
        axiom_step("or_comm", {{"x", pl}, {"y", prr}})};
    out.push_back({"distribute_then_commute", d});
    return;
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("data/derivations");
  bool all_ok = true;
  for (const std::string& name : effect_names()) {
    const EffectSpec e = get_effect(name);
    std::vector<Entry> entries;
    add_exemplars(e, entries);
    add_axiom_entries(e, entries);
    add_generic_entries(e, entries);

    const fs::path dir = root / name;
    fs::create_directories(dir);
    int index = 0;
    for (const Entry& entry : entries) {
      const ProofResult r = check_derivation(e, entry.d);
      if (!r.ok) {
        std::cerr << name << "/" << entry.name << ": step " << r.step << ": " << r.reason
                  << "\n";
        all_ok = false;
        continue;
      }
      const std::string text = derivation_to_json(entry.d, name);
      const Derivation back = parse_derivation(text, e);
      if (derivation_to_json(back, name) != text || !check_derivation(e, back).ok) {
        std::cerr << name << "/" << entry.name << ": round trip failed\n";
        all_ok = false;
        continue;
      }
      std::string nn = std::to_string(index++);
      if (nn.size() < 2) nn.insert(nn.begin(), '0');
      std::ofstream out(dir / (nn + "_" + entry.name + ".json"), std::ios::binary);
      out << text;
    }
    std::cout << name << ": " << index << " derivations\n";
    if (index < 20) {
      std::cerr << name << ": fewer than 20 derivations\n";
      all_ok = false;
    }
  }
  return all_ok ? 0 : 1;
}
