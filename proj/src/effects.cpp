#include "teq/effects.hpp"

#include <algorithm>

namespace teq {

namespace {

AxiomSide side(const Tree& t) { return AxiomSide{false, t, {}}; }
AxiomSide side(const RegularTree& t) { return AxiomSide{true, nullptr, t}; }

AxiomScheme eq(std::string name, AxiomSide l, AxiomSide r, std::vector<std::string> mv) {
  return AxiomScheme{std::move(name), true, std::move(l), std::move(r), std::move(mv)};
}

AxiomScheme le(std::string name, AxiomSide l, AxiomSide r, std::vector<std::string> mv) {
  return AxiomScheme{std::move(name), false, std::move(l), std::move(r), std::move(mv)};
}

Tree op2(const std::string& o, const Tree& a, const Tree& b) { return node(o, {a, b}); }

void add_nondet_axioms(std::vector<AxiomScheme>& out) {
  const Tree x = var(0), y = var(1), z = var(2);
  out.push_back(eq("or_idem", side(op2("or", x, x)), side(x), {"x"}));
  out.push_back(eq("or_comm", side(op2("or", x, y)), side(op2("or", y, x)), {"x", "y"}));
  out.push_back(eq("or_assoc", side(op2("or", x, op2("or", y, z))),
                   side(op2("or", op2("or", x, y), z)), {"x", "y", "z"}));
}

void add_prob_axioms(std::vector<AxiomScheme>& out) {
  const Tree x = var(0), y = var(1), z = var(2), w = var(3);
  out.push_back(eq("por_idem", side(op2("por", x, x)), side(x), {"x"}));
  out.push_back(eq("por_comm", side(op2("por", x, y)), side(op2("por", y, x)), {"x", "y"}));
  out.push_back(eq("por_exch", side(op2("por", op2("por", x, y), op2("por", z, w))),
                   side(op2("por", op2("por", x, z), op2("por", y, w))),
                   {"x", "y", "z", "w"}));
  // rec s. por(y, s) = y: a biased loop on y converges to y.
  RegularTree loop = make_regular({op2("por", var(0), ref(0))}, {"s"}, 0);
  out.push_back(eq("por_unfold", side(loop), side(var(0)), {"y"}));
}

std::string upd_name(int n) { return "upd[" + std::to_string(n) + "]"; }

void add_store_axioms(std::vector<AxiomScheme>& out, int k) {
  const Tree x = var(0);
  for (int n = 0; n < k; ++n)
    for (int m = 0; m < k; ++m)
      out.push_back(eq("upd_upd[" + std::to_string(n) + "][" + std::to_string(m) + "]",
                       side(node(upd_name(n), {node(upd_name(m), {x})})),
                       side(node(upd_name(m), {x})), {"x"}));
  {
    std::vector<Tree> branches(k, x);
    out.push_back(eq("lkp_const", side(node("lkp", branches)), side(x), {"x"}));
  }
  std::vector<std::string> cellvars;
  std::vector<Tree> cells;
  for (int m = 0; m < k; ++m) {
    cellvars.push_back("x" + std::to_string(m));
    cells.push_back(var(static_cast<VarId>(m)));
  }
  // Update-then-lookup reads the written cell; the update itself remains
  // (dropping it would collapse the theory through lkp_const).
  for (int n = 0; n < k; ++n)
    out.push_back(eq("upd_lkp[" + std::to_string(n) + "]",
                     side(node(upd_name(n), {node("lkp", cells)})),
                     side(node(upd_name(n), {cells[n]})), cellvars));
  {
    std::vector<Tree> wrapped;
    for (int m = 0; m < k; ++m) wrapped.push_back(node(upd_name(m), {cells[m]}));
    out.push_back(eq("lkp_upd", side(node("lkp", wrapped)), side(node("lkp", cells)),
                     cellvars));
  }
}

std::string raise_name(const std::string& e) { return "raise[" + e + "]"; }
std::string catch_name(const std::string& e) { return "catch[" + e + "]"; }

void add_exception_axioms(std::vector<AxiomScheme>& out,
                          const std::vector<std::string>& exc) {
  const Tree x = var(0), y = var(1), z = var(2);
  for (const std::string& e : exc) {
    const std::string c = catch_name(e);
    out.push_back(eq("catch_raise_same[" + e + "]",
                     side(node(c, {node(raise_name(e), {}), x})), side(x), {"x"}));
    for (const std::string& d : exc) {
      if (d == e) continue;
      out.push_back(eq("catch_raise_other[" + e + "][" + d + "]",
                       side(node(c, {node(raise_name(d), {}), x})),
                       side(node(raise_name(d), {})), {"x"}));
    }
    out.push_back(eq("catch_idem[" + e + "]", side(node(c, {x, x})), side(x), {"x"}));
    out.push_back(eq("catch_assoc[" + e + "]", side(node(c, {node(c, {x, y}), z})),
                     side(node(c, {x, node(c, {y, z})})), {"x", "y", "z"}));
    out.push_back(eq("catch_bot[" + e + "]", side(node(c, {bot(), x})), side(bot()), {"x"}));
    out.push_back(eq("catch_top[" + e + "]", side(node(c, {top(), x})), side(top()), {"x"}));
  }
}

void add_interaction_axiom(std::vector<AxiomScheme>& out) {
  const Tree x = var(0), y = var(1), z = var(2);
  out.push_back(eq("por_or_dist", side(op2("por", x, op2("or", y, z))),
                   side(op2("or", op2("por", x, y), op2("por", x, z))),
                   {"x", "y", "z"}));
}

Signature sig(std::vector<Signature::Op> ops) { return Signature{std::move(ops)}; }

}  // namespace

const AxiomScheme* EffectSpec::find_axiom(const std::string& axname) const {
  for (const AxiomScheme& a : axioms)
    if (a.name == axname) return &a;
  return nullptr;
}

EffectSpec get_effect(const std::string& name, const EffectParams& params) {
  EffectSpec e;
  e.name = name;
  e.params = params;
  if (name == "nondet") {
    e.kind = EffectKind::Nondet;
    e.signature = sig({{"or", 2}});
    add_nondet_axioms(e.axioms);
    e.space = Space::ThreePoint;
    e.strategy = LeqStrategy::Enumerate;
    return e;
  }
  if (name == "prob") {
    e.kind = EffectKind::Prob;
    e.signature = sig({{"por", 2}});
    add_prob_axioms(e.axioms);
    e.space = Space::Dyadic;
    e.strategy = LeqStrategy::Vertex;
    return e;
  }
  if (name == "store") {
    if (params.store_k < 1) throw Error("store size must be at least 1");
    e.kind = EffectKind::Store;
    std::vector<Signature::Op> ops;
    for (int n = 0; n < params.store_k; ++n) ops.push_back({upd_name(n), 1, false});
    ops.push_back({"lkp", params.store_k, true});
    e.signature = sig(std::move(ops));
    add_store_axioms(e.axioms, params.store_k);
    e.space = Space::StateSet;
    e.strategy = LeqStrategy::Enumerate;
    return e;
  }
  if (name == "exceptions") {
    if (params.exceptions.empty()) throw Error("at least one exception name required");
    for (const std::string& x : params.exceptions)
      if (std::count(params.exceptions.begin(), params.exceptions.end(), x) != 1)
        throw Error("duplicate exception name: " + x);
    e.kind = EffectKind::Exceptions;
    std::vector<Signature::Op> ops;
    for (const std::string& x : params.exceptions) {
      ops.push_back({raise_name(x), 0, false});
      ops.push_back({catch_name(x), 2, false});
    }
    e.signature = sig(std::move(ops));
    add_exception_axioms(e.axioms, params.exceptions);
    e.space = Space::FlatExc;
    e.strategy = LeqStrategy::Enumerate;
    return e;
  }
  if (name == "input") {
    e.kind = EffectKind::Input;
    e.signature = sig({{"in", 2}});
    e.space = Space::ClosedTree;
    e.strategy = LeqStrategy::Bisimulation;
    return e;
  }
  if (name == "cost") {
    e.kind = EffectKind::Cost;
    e.signature = sig({{"tick", 1}});
    const Tree x = var(0);
    e.axioms.push_back(le("tick_le", side(node("tick", {x})), side(x), {"x"}));
    e.space = Space::ExtNat;
    e.strategy = LeqStrategy::CaseAnalysis;
    return e;
  }
  if (name == "nondet_prob") {
    e.kind = EffectKind::NondetProb;
    e.signature = sig({{"or", 2}, {"por", 2}});
    add_nondet_axioms(e.axioms);
    add_prob_axioms(e.axioms);
    add_interaction_axiom(e.axioms);
    e.space = Space::Interval;
    e.strategy = LeqStrategy::Grid;
    return e;
  }
  throw Error("unknown effect: " + name);
}

std::vector<std::string> effect_names() {
  return {"nondet", "prob", "store", "exceptions", "input", "cost", "nondet_prob"};
}

namespace {

// Instantiation inside a recursive body: Ref leaves stay, metavariable images
// must be finite so the result remains a well-formed state system.
Tree instantiate_body(const Tree& pat, const std::vector<Tree>& images) {
  if (pat->kind == NodeKind::Ref) return pat;
  if (pat->kind == NodeKind::Var) {
    if (pat->index >= images.size() || !images[pat->index])
      throw Error("unbound metavariable");
    if (tree_has_refs(images[pat->index])) throw Error("substituted tree must be finite");
    return images[pat->index];
  }
  if (pat->children.empty()) return pat;
  std::vector<Tree> kids;
  kids.reserve(pat->children.size());
  for (const Tree& c : pat->children) kids.push_back(instantiate_body(c, images));
  return node(pat->op, std::move(kids));
}

}  // namespace

std::pair<AnyTree, AnyTree> instantiate_axiom(const AxiomScheme& ax,
                                              const std::map<std::string, Tree>& subst) {
  std::vector<Tree> images(ax.metavar_names.size());
  for (const auto& [name, t] : subst) {
    auto it = std::find(ax.metavar_names.begin(), ax.metavar_names.end(), name);
    if (it == ax.metavar_names.end())
      throw Error("axiom " + ax.name + " has no metavariable " + name);
    images[static_cast<std::size_t>(it - ax.metavar_names.begin())] = t;
  }
  auto inst_side = [&](const AxiomSide& s) -> AnyTree {
    if (!s.regular) {
      // Only metavariables that actually occur need bindings.
      return substitute(
          [&](VarId v) -> Tree {
            if (v >= images.size() || !images[v])
              throw Error("axiom " + ax.name + ": unbound metavariable " +
                          (v < ax.metavar_names.size() ? ax.metavar_names[v]
                                                       : std::to_string(v)));
            return images[v];
          },
          s.tree);
    }
    std::vector<Tree> bodies;
    bodies.reserve(s.rtree.states.size());
    for (const Tree& b : s.rtree.states) bodies.push_back(instantiate_body(b, images));
    return make_regular(std::move(bodies), s.rtree.names, s.rtree.root);
  };
  return {inst_side(ax.lhs), inst_side(ax.rhs)};
}

}  // namespace teq
