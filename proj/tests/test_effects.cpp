#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "support/helpers.hpp"
#include "teq/effects.hpp"
#include "teq/relations.hpp"
#include "teq/sampling.hpp"
#include "teq/semantics.hpp"

using namespace teq;
using teq::testing::finite;
using teq::testing::reg;

TEST_CASE("catalog inventory") {
  CHECK(effect_names().size() == 7);

  const EffectSpec nd = get_effect("nondet");
  CHECK(nd.axioms.size() == 3);
  CHECK(nd.signature.operators.size() == 1);
  CHECK(nd.signature.find("or")->arity == 2);

  const EffectSpec pr = get_effect("prob");
  CHECK(pr.axioms.size() == 4);
  CHECK(pr.find_axiom("por_unfold")->lhs.regular);
  CHECK_FALSE(pr.find_axiom("por_unfold")->rhs.regular);

  // Indexed schemes are expanded per cell / exception name.
  const EffectSpec st = get_effect("store");
  CHECK(st.axioms.size() == 4 + 1 + 2 + 1);
  CHECK(st.find_axiom("upd_upd[0][1]") != nullptr);
  CHECK(st.find_axiom("upd_lkp[1]") != nullptr);
  CHECK(st.find_axiom("lkp_const") != nullptr);
  CHECK(st.find_axiom("lkp_upd") != nullptr);

  const EffectSpec ex = get_effect("exceptions");
  CHECK(ex.axioms.size() == 12);
  const EffectSpec ex1 = get_effect("exceptions", EffectParams{2, {"e1"}});
  CHECK(ex1.axioms.size() == 5);  // the cross-exception scheme has no instance

  CHECK(get_effect("input").axioms.empty());

  const EffectSpec ct = get_effect("cost");
  CHECK(ct.axioms.size() == 1);
  CHECK_FALSE(ct.axioms[0].is_equation);
  CHECK(ct.axioms[0].name == "tick_le");

  const EffectSpec np = get_effect("nondet_prob");
  CHECK(np.axioms.size() == 3 + 4 + 1);
  CHECK(np.find_axiom("por_or_dist") != nullptr);
  CHECK(np.signature.find("or") != nullptr);
  CHECK(np.signature.find("por") != nullptr);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(get_effect("banana"), Error);
  CHECK_THROWS_AS(get_effect("store", EffectParams{0, {"e1"}}), Error);
  CHECK_THROWS_AS(get_effect("exceptions", EffectParams{2, {}}), Error);
  CHECK_THROWS_AS(get_effect("exceptions", EffectParams{2, {"e1", "e1"}}), Error);
}

TEST_CASE("instantiate_axiom substitutes metavariables by name") {
  const EffectSpec np = get_effect("nondet_prob");
  const Tree image = finite("por(top,bot)", np);
  const auto [l, r] = instantiate_axiom(*np.find_axiom("or_idem"), {{"x", image}});
  CHECK(tree_equal(std::get<Tree>(l), finite("or(por(top,bot),por(top,bot))", np)));
  CHECK(tree_equal(std::get<Tree>(r), image));

  const EffectSpec st = get_effect("store");
  const auto [sl, sr] = instantiate_axiom(*st.find_axiom("upd_lkp[1]"),
                                          {{"x0", var(0)}, {"x1", var(1)}});
  CHECK(tree_equal(std::get<Tree>(sl), finite("upd[1](lkp(0 -> x0, 1 -> x1))", st)));
  CHECK(tree_equal(std::get<Tree>(sr), finite("upd[1](x1)", st)));

  const EffectSpec pr = get_effect("prob");
  const auto [pl, prr] = instantiate_axiom(*pr.find_axiom("por_unfold"), {{"y", top()}});
  const auto& lhs = std::get<RegularTree>(pl);
  CHECK(regular_equal(lhs, reg("rec s. por(top,s)", pr)));
  CHECK(tree_equal(std::get<Tree>(prr), top()));
}

TEST_CASE("instantiate_axiom requires every metavariable") {
  const EffectSpec nd = get_effect("nondet");
  CHECK_THROWS_AS(instantiate_axiom(*nd.find_axiom("or_comm"), {{"x", top()}}), Error);
}

namespace {

// Closed instantiations of one scheme from a deterministic pool.
void check_axiom_sound(const EffectSpec& e, const AxiomScheme& ax) {
  TreeSampler gen(e, 333);
  for (int round = 0; round < 12; ++round) {
    std::map<std::string, Tree> subst;
    for (const std::string& mv : ax.metavar_names) subst[mv] = gen.tree(2, 0);
    const auto [l, r] = instantiate_axiom(ax, subst);
    const Value vl = eval_exact(e, l);
    const Value vr = eval_exact(e, r);
    if (ax.is_equation) {
      CHECK(value_eq(e, vl, vr));
    } else {
      CHECK(value_leq(e, vl, vr));
    }
  }
}

}  // namespace

TEST_CASE("every axiom is sound for its evaluator on closed instances") {
  for (const std::string& name : effect_names()) {
    const EffectSpec e = get_effect(name);
    for (const AxiomScheme& ax : e.axioms) {
      if ((ax.lhs.regular || ax.rhs.regular) &&
          (e.space == Space::Dyadic || e.space == Space::Interval)) {
        // Recursive instances of dyadic-valued schemes are bound-checked in
        // the semantics tests; eval_exact rejects cyclic input there.
        continue;
      }
      CAPTURE(name);
      CAPTURE(ax.name);
      check_axiom_sound(e, ax);
    }
  }
}

TEST_CASE("finite axioms hold as open inequalities in both directions") {
  for (const std::string& name : effect_names()) {
    const EffectSpec e = get_effect(name);
    for (const AxiomScheme& ax : e.axioms) {
      if (ax.lhs.regular || ax.rhs.regular) continue;
      CAPTURE(name);
      CAPTURE(ax.name);
      // Instantiate metavariables by distinct variables: the scheme itself.
      std::map<std::string, Tree> subst;
      VarId v = 0;
      for (const std::string& mv : ax.metavar_names) subst[mv] = var(v++);
      const auto [l, r] = instantiate_axiom(ax, subst);
      // The combined effect is decided on a grid, which can only refute.
      const bool grid = e.name == "nondet_prob";
      const Decision lr = check_leq(e, l, r);
      CHECK_FALSE(lr.refuted());
      if (!grid) CHECK(lr.holds());
      if (ax.is_equation) {
        const Decision rl = check_leq(e, r, l);
        CHECK_FALSE(rl.refuted());
        if (!grid) CHECK(rl.holds());
      }
    }
  }
}

TEST_CASE("the recursive scheme holds semantically at grid resolution") {
  const EffectSpec pr = get_effect("prob");
  const AxiomScheme& ax = *pr.find_axiom("por_unfold");
  const auto [l, r] = instantiate_axiom(ax, {{"y", var(0)}});
  const Decision lr = check_leq(pr, l, r);
  const Decision rl = check_leq(pr, r, l);
  CHECK_FALSE(lr.refuted());
  CHECK_FALSE(rl.refuted());
  // Closed instance: the loop converges onto the right-hand value.
  const auto [cl, cr] = instantiate_axiom(ax, {{"y", top()}});
  const Bounds b = eval_bounds(pr, cl, {}, 24, Dyadic::make(1, 20));
  CHECK(b.converged);
  CHECK(std::get<DyadicV>(b.upper).d == Dyadic::one());
  CHECK(dyadic_leq(dyadic_complement(Dyadic::make(1, 20)), std::get<DyadicV>(b.lower).d));
  CHECK(tree_equal(std::get<Tree>(cr), top()));
}

TEST_CASE("interaction law is exactly one equation beyond the union") {
  const EffectSpec np = get_effect("nondet_prob");
  const EffectSpec nd = get_effect("nondet");
  const EffectSpec pr = get_effect("prob");
  CHECK(np.axioms.size() == nd.axioms.size() + pr.axioms.size() + 1);
  for (const AxiomScheme& ax : nd.axioms) CHECK(np.find_axiom(ax.name) != nullptr);
  for (const AxiomScheme& ax : pr.axioms) CHECK(np.find_axiom(ax.name) != nullptr);
  const AxiomScheme& inter = *np.find_axiom("por_or_dist");
  CHECK(inter.is_equation);
  const auto [l, r] = instantiate_axiom(
      inter, {{"x", var(0)}, {"y", var(1)}, {"z", var(2)}});
  CHECK(tree_equal(std::get<Tree>(l), finite("por(x0,or(x1,x2))", np)));
  CHECK(tree_equal(std::get<Tree>(r), finite("or(por(x0,x1),por(x0,x2))", np)));
}
