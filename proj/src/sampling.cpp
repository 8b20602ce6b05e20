#include "teq/sampling.hpp"

namespace teq {

Tree TreeSampler::tree(int depth, VarId nvars) {
  const EffectSpec& e = effect;
  const bool leaf = depth <= 0 || pick(4) == 0;
  std::vector<const Signature::Op*> ops;
  for (const Signature::Op& o : e.signature.operators)
    if (o.arity > 0 || leaf) ops.push_back(&o);
  if (leaf) {
    const std::uint64_t n = 2 + nvars;
    std::uint64_t base = n;
    for (const auto* o : ops)
      if (o->arity == 0) ++base;
    const std::uint64_t r = pick(base);
    if (r == 0) return bot();
    if (r == 1) return top();
    if (r < n) return var(static_cast<VarId>(r - 2));
    // a nullary operator
    std::uint64_t seen = n;
    for (const auto* o : ops)
      if (o->arity == 0 && seen++ == r) return node(o->name, {});
    return top();
  }
  std::vector<const Signature::Op*> wide;
  for (const auto* o : ops)
    if (o->arity > 0) wide.push_back(o);
  const Signature::Op* o = wide[pick(wide.size())];
  std::vector<Tree> kids;
  for (int i = 0; i < o->arity; ++i) kids.push_back(tree(depth - 1, nvars));
  return node(o->name, kids);
}

RegularTree TreeSampler::regular(int states, int depth, VarId nvars) {
  // Bodies are ordinary trees whose leaves are sometimes redirected to a
  // Ref; the redirect only happens strictly below an operator node.
  std::vector<Tree> bodies;
  for (int s = 0; s < states; ++s) {
    Tree body = tree(depth, nvars);
    if (body->kind != NodeKind::Op) {
      bodies.push_back(body);
      continue;
    }
    struct Rewriter {
      TreeSampler& g;
      int states;
      Tree walk(const Tree& t, bool root) {
        if (t->kind != NodeKind::Op)
          return !root && g.pick(3) == 0
                     ? ref(static_cast<std::uint32_t>(g.pick(states)))
                     : t;
        std::vector<Tree> kids;
        kids.reserve(t->children.size());
        for (const Tree& k : t->children) kids.push_back(walk(k, false));
        return node(t->op, kids);
      }
    } rw{*this, states};
    bodies.push_back(rw.walk(body, true));
  }
  std::vector<std::string> names;
  for (int s = 0; s < states; ++s) names.push_back("s" + std::to_string(s));
  return make_regular(bodies, names, static_cast<std::uint32_t>(pick(states)));
}

Value TreeSampler::value() {
  const EffectSpec& e = effect;
  switch (e.space) {
    case Space::ThreePoint:
      return three_point(static_cast<int>(pick(3)));
    case Space::Dyadic:
      return dyadic_value(Dyadic::make(pick(9), 3));
    case Space::StateSet:
      return state_set(static_cast<std::uint32_t>(pick(1ull << e.params.store_k)),
                       e.params.store_k);
    case Space::FlatExc: {
      const std::uint64_t r = pick(2 + e.params.exceptions.size());
      if (r == 0) return exc_bottom();
      if (r == 1) return exc_top();
      return exc_raise(e.params.exceptions[r - 2]);
    }
    case Space::ExtNat:
      return pick(4) == 0 ? ext_nat_inf() : ext_nat(pick(4));
    case Space::ClosedTree:
      return closed_tree(tree(2, 0));
    case Space::Interval: {
      const Dyadic a = Dyadic::make(pick(9), 3);
      const Dyadic b = Dyadic::make(pick(9), 3);
      return dyadic_leq(a, b) ? interval(a, b) : interval(b, a);
    }
  }
  throw Error("unreachable space");
}

}  // namespace teq
