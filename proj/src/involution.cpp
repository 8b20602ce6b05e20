#include "teq/involution.hpp"

#include <unordered_map>

#include "teq/parser.hpp"
#include "teq/relations.hpp"
#include "teq/sampling.hpp"
#include "teq/semantics.hpp"
#include "teq/value.hpp"

namespace teq {

namespace {

struct Negator {
  const Involution& inv;
  std::unordered_map<const TreeNode*, Tree> memo;

  Tree walk(const Tree& t) {
    const auto it = memo.find(t.get());
    if (it != memo.end()) return it->second;
    Tree out;
    switch (t->kind) {
      case NodeKind::Bot:
        out = top();
        break;
      case NodeKind::Top:
        out = bot();
        break;
      case NodeKind::Var:
        out = var(inv.apply(t->index));
        break;
      case NodeKind::Ref:
        out = ref(t->index);
        break;
      case NodeKind::Op: {
        std::vector<Tree> kids;
        kids.reserve(t->children.size());
        for (const Tree& k : t->children) kids.push_back(walk(k));
        out = node(t->op, kids);
        break;
      }
    }
    memo.emplace(t.get(), out);
    return out;
  }
};

}  // namespace

Tree negate(const Tree& t, const Involution& inv) {
  Negator n{inv, {}};
  return n.walk(t);
}

RegularTree negate(const RegularTree& t, const Involution& inv) {
  Negator n{inv, {}};
  std::vector<Tree> states;
  states.reserve(t.states.size());
  for (const Tree& b : t.states) states.push_back(n.walk(b));
  return make_regular(states, t.names, t.root);
}

AnyTree negate_any(const AnyTree& t, const Involution& inv) {
  if (const auto* f = std::get_if<Tree>(&t)) return negate(*f, inv);
  return negate(std::get<RegularTree>(t), inv);
}

namespace {

void note(InvolutionReport& rep, const std::string& s) {
  if (rep.notes.size() < 8) rep.notes.push_back(s);
}

// a below b iff not-b below not-a; refutations transfer exactly in both
// directions (complementing an assignment keeps it on the decision grid),
// so the two decisions must agree on refutedness.
void check_order_reversal(const EffectSpec& e, int samples, TreeSampler& gen,
                          InvolutionReport& rep) {
  for (int i = 0; i < samples; ++i) {
    const Tree a = gen.tree(3, 2);
    const Tree b = gen.tree(3, 2);
    const Decision fwd = check_leq(e, a, b);
    const Decision rev = check_leq(e, negate(b), negate(a));
    ++rep.order_checked;
    if (fwd.refuted() != rev.refuted()) {
      ++rep.order_failures;
      note(rep, "order reversal fails for " + print_tree(a) + " vs " + print_tree(b));
    }
  }
}

void check_prob_complement(const EffectSpec& e, int samples, TreeSampler& gen,
                           InvolutionReport& rep) {
  rep.value_identity_applicable = true;
  for (int i = 0; i < samples; ++i) {
    const Tree t = gen.tree(4, 0);
    const Dyadic p = std::get<DyadicV>(eval_exact(e, t)).d;
    const Dyadic q = std::get<DyadicV>(eval_exact(e, negate(t))).d;
    ++rep.value_checked;
    if (dyadic_cmp(q, dyadic_complement(p)) != 0) {
      ++rep.value_failures;
      note(rep, "mass of the negation is not the complement at " + print_tree(t));
    }
  }
}

void check_store_complement(const EffectSpec& e, int samples, TreeSampler& gen,
                            InvolutionReport& rep) {
  rep.value_identity_applicable = true;
  std::vector<Tree> corpus = enumerate_closed_trees(e, 2);
  for (int i = 0; i < samples; ++i) corpus.push_back(gen.tree(3, 0));
  const std::uint32_t full = (1u << e.params.store_k) - 1;
  for (const Tree& t : corpus) {
    const auto w = std::get<StateSetV>(eval_exact(e, t));
    const auto nw = std::get<StateSetV>(eval_exact(e, negate(t)));
    ++rep.value_checked;
    if (nw.bits != (~w.bits & full)) {
      ++rep.value_failures;
      note(rep, "precondition of the negation is not the complement at " + print_tree(t));
    }
  }
}

}  // namespace

InvolutionReport check_involution_preservation(const EffectSpec& e, int samples,
                                               std::uint64_t seed) {
  InvolutionReport rep;
  TreeSampler gen(e, seed);

  if (e.space == Space::ExtNat) {
    rep.involution_impossible = true;
    note(rep,
         "the tick carrier has no order involution: inf is a limit of the "
         "descending chain and 0 is not, so no order-reversing bijection exists");
    return rep;
  }

  check_order_reversal(e, samples, gen, rep);

  if (e.space == Space::Dyadic) check_prob_complement(e, samples, gen, rep);
  if (e.space == Space::StateSet) check_store_complement(e, samples, gen, rep);

  if (e.kind == EffectKind::Nondet) {
    // the leafless cyclic tree is a fixed point of negation, so its value
    // cannot flip from the bottom class to the top class
    const RegularTree t =
        make_regular({node("or", {ref(0), ref(0)})}, {"s"}, 0);
    const Value v = eval_exact(e, t);
    const Value nv = eval_exact(e, negate(t));
    if (value_eq(e, v, nv) && !value_eq(e, v, three_point(1))) {
      rep.regular_failure_shown = true;
      rep.regular_witness = print_tree(t);
      note(rep, "negation is not preserved on " + print_tree(t) + ": both sides evaluate to " +
                    value_print(v) + " but the negated value is " +
                    value_print(value_eq(e, v, three_point(0)) ? three_point(2) : three_point(0)));
    }
  }

  return rep;
}

}  // namespace teq
