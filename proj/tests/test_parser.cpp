#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/helpers.hpp"
#include "teq/parser.hpp"
#include "teq/sampling.hpp"

using namespace teq;
using teq::testing::finite;
using teq::testing::reg;

TEST_CASE("atoms and applications parse") {
  const EffectSpec nd = get_effect("nondet");
  CHECK(tree_equal(finite("bot", nd), bot()));
  CHECK(tree_equal(finite("top", nd), top()));
  CHECK(tree_equal(finite("x7", nd), var(7)));
  CHECK(tree_equal(finite("or(top,bot)", nd), node("or", {top(), bot()})));
  CHECK(tree_equal(finite(" or ( x0 , or(bot, top) ) ", nd),
                   node("or", {var(0), node("or", {bot(), top()})})));
}

TEST_CASE("indexed and bracketed operators parse") {
  const EffectSpec st = get_effect("store");
  CHECK(tree_equal(finite("upd[1](bot)", st), node("upd[1]", {bot()})));
  CHECK(tree_equal(finite("lkp(0 -> top, 1 -> bot)", st), node("lkp", {top(), bot()})));
  const EffectSpec ex = get_effect("exceptions");
  CHECK(tree_equal(finite("raise[e2]", ex), node("raise[e2]", {})));
  CHECK(tree_equal(finite("catch[e1](raise[e1], top)", ex),
                   node("catch[e1]", {node("raise[e1]", {}), top()})));
}

TEST_CASE("rec binders produce regular trees") {
  const EffectSpec pr = get_effect("prob");
  const RegularTree t = reg("rec s. por(top,s)", pr);
  CHECK(t.states.size() == 1);
  CHECK(tree_equal(t.states[0], node("por", {top(), ref(0)})));
  const EffectSpec ct = get_effect("cost");
  const RegularTree u = reg("rec a. tick(rec b. tick(a))", ct);
  CHECK(u.states.size() == 2);
}

TEST_CASE("parse errors carry positions") {
  const EffectSpec nd = get_effect("nondet");
  CHECK_THROWS_AS(parse_tree("or(top)", nd), ParseError);
  CHECK_THROWS_AS(parse_tree("banana(top,bot)", nd), ParseError);
  CHECK_THROWS_AS(parse_tree("or(top,loose", nd), ParseError);
  CHECK_THROWS_AS(parse_tree("s", nd), ParseError);  // unbound rec reference
  const EffectSpec st = get_effect("store");
  CHECK_THROWS_AS(parse_tree("lkp(top)", st), ParseError);  // branch count below k
  try {
    parse_tree("or(top", nd);
    FAIL("expected a parse error");
  } catch (const ParseError& pe) {
    CHECK(pe.position > 0);
  }
}

TEST_CASE("lookup branches are placed by label") {
  const EffectSpec st = get_effect("store", EffectParams{3, {"e1"}});
  CHECK(tree_equal(finite("lkp(0 -> top, 1 -> bot, 2 -> x0)", st),
                   node("lkp", {top(), bot(), var(0)})));
  CHECK(tree_equal(finite("lkp(1 -> top, 0 -> bot, 2 -> x0)", st),
                   node("lkp", {bot(), top(), var(0)})));
  CHECK_THROWS_AS(parse_tree("lkp(0 -> top, 0 -> bot, 2 -> x0)", st), ParseError);
  CHECK_THROWS_AS(parse_tree("lkp(0 -> top, 1 -> bot, 3 -> x0)", st), ParseError);
}

TEST_CASE("round trip on sampled finite trees for every effect") {
  for (const std::string& name : effect_names()) {
    const EffectSpec e = get_effect(name);
    TreeSampler gen(e, 101);
    for (int i = 0; i < 150; ++i) {
      const Tree t = gen.tree(4, 3);
      const std::string s = print_tree(t);
      CHECK(tree_equal(finite(s, e), t));
    }
  }
}

TEST_CASE("round trip on sampled regular trees for every effect") {
  for (const std::string& name : effect_names()) {
    const EffectSpec e = get_effect(name);
    TreeSampler gen(e, 103);
    for (int i = 0; i < 100; ++i) {
      const RegularTree t = gen.regular(3, 2, 2);
      const AnyTree round = parse_tree(print_tree(AnyTree(t)), e);
      if (const auto* rt = std::get_if<RegularTree>(&round)) {
        CHECK(regular_equal(*rt, t));
      } else {
        // A system without reachable references prints as its unfolding.
        CHECK(regular_is_finite(t));
        CHECK(tree_equal(std::get<Tree>(round), regular_unfold_finite(t)));
      }
    }
  }
}

TEST_CASE("printer is canonical and does not normalize") {
  const EffectSpec nd = get_effect("nondet");
  CHECK(print_tree(finite("or(top,bot)", nd)) == "or(top, bot)");
  CHECK(print_tree(finite("or(bot,top)", nd)) == "or(bot, top)");
  const EffectSpec ct = get_effect("cost");
  CHECK(print_tree(AnyTree(reg("rec s. tick(s)", ct))) == "rec s. tick(s)");
}
