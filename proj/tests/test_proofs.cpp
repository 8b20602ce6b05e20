#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <string>
#include <vector>

#include "support/helpers.hpp"
#include "teq/effects.hpp"
#include "teq/parser.hpp"
#include "teq/proofs.hpp"
#include "teq/relations.hpp"
#include "teq/tree.hpp"

using namespace teq;
using teq::testing::finite;

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

// top <= raise[e1], assuming the handler inequality catch[e1](x0,x1) <= x0.
// The assumption survives every leaf substitution yet collapses the order.
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

  Step subst;
  subst.kind = Step::Kind::Subst;
  subst.map = {{0, r1}, {1, t}};
  subst.sub = handler;

  Derivation d;
  d.lhs = t;
  d.rhs = r1;
  d.assumptions = {{"catch_le", node("catch[e1]", {var(0), var(1)}), var(0)}};
  d.steps = {axiom_step("catch_raise_same[e1]", {{"x", t}}, true), subst};
  return d;
}

}  // namespace

TEST_CASE("a multi-step update derivation checks out") {
  const EffectSpec st = get_effect("store");
  const Derivation d = update_chain();
  const ProofResult r = check_derivation(st, d);
  CAPTURE(r.step);
  CAPTURE(r.reason);
  CHECK(r.ok);
  // The derived inequality is semantically true.
  CHECK(check_leq(st, AnyTree(d.lhs), AnyTree(d.rhs)).holds());
}

TEST_CASE("assumed handler inequality collapses top into an exception") {
  const EffectSpec ex = get_effect("exceptions");
  const Derivation d = collapse_chain();
  const ProofResult r = check_derivation(ex, d);
  CAPTURE(r.step);
  CAPTURE(r.reason);
  CHECK(r.ok);
  // Without the assumption the conclusion is false, which is the point:
  // the assumption holds under every leaf substitution but not in general.
  CHECK(check_leq(ex, AnyTree(d.lhs), AnyTree(d.rhs)).refuted());
  Derivation bare = d;
  bare.assumptions.clear();
  const ProofResult r2 = check_derivation(ex, bare);
  CHECK_FALSE(r2.ok);
  CHECK(r2.step == 1);
}

TEST_CASE("reflexivity and transitivity steps") {
  const EffectSpec nd = get_effect("nondet");
  Derivation refl;
  refl.lhs = top();
  refl.rhs = top();
  refl.steps = {Step{}};
  CHECK(check_derivation(nd, refl).ok);

  auto sub = std::make_shared<Derivation>();
  sub->lhs = bot();
  sub->rhs = finite("or(top,bot)", nd);
  sub->steps = {order_step(sub->rhs)};

  Step trans;
  trans.kind = Step::Kind::Trans;
  trans.to = sub->rhs;
  trans.sub = sub;

  Derivation d;
  d.lhs = bot();
  d.rhs = top();
  d.steps = {trans, order_step(top())};
  CHECK(check_derivation(nd, d).ok);
}

TEST_CASE("order steps reject non-consequences") {
  const EffectSpec nd = get_effect("nondet");
  Derivation d;
  d.lhs = top();
  d.rhs = bot();
  d.steps = {order_step(bot())};
  const ProofResult r = check_derivation(nd, d);
  CHECK_FALSE(r.ok);
  CHECK(r.step == 0);
  CHECK(r.reason.find("order violation") != std::string::npos);
}

TEST_CASE("failure positions are reported precisely") {
  const EffectSpec st = get_effect("store");

  // Malformed conclusion: foreign operator.
  Derivation bad_conc;
  bad_conc.lhs = node("or", {bot(), bot()});
  bad_conc.rhs = bot();
  const ProofResult r1 = check_derivation(st, bad_conc);
  CHECK_FALSE(r1.ok);
  CHECK(r1.step == -1);

  // Malformed assumption.
  Derivation bad_asm;
  bad_asm.lhs = bot();
  bad_asm.rhs = bot();
  bad_asm.assumptions = {{"a", node("or", {bot(), bot()}), bot()}};
  const ProofResult r2 = check_derivation(st, bad_asm);
  CHECK_FALSE(r2.ok);
  CHECK(r2.step == -1);

  // Chain stops short of the conclusion.
  Derivation short_chain;
  short_chain.lhs = bot();
  short_chain.rhs = node("upd[1]", {bot()});
  const ProofResult r3 = check_derivation(st, short_chain);
  CHECK_FALSE(r3.ok);
  CHECK(r3.step == 0);  // == steps.size()
  CHECK(r3.reason.find("chain ends at") != std::string::npos);

  // A failure inside a sub-derivation names both levels.
  Derivation outer = update_chain();
  auto& branch = outer.steps[2].sub;
  branch->steps[1].subst = {{"x", top()}};  // perturbed metavariable image
  const ProofResult r4 = check_derivation(st, outer);
  CHECK_FALSE(r4.ok);
  CHECK(r4.step == 2);
  CHECK(r4.reason.find("step 1:") != std::string::npos);
}

TEST_CASE("single-step mutations of a valid derivation are rejected") {
  const EffectSpec st = get_effect("store");
  REQUIRE(check_derivation(st, update_chain()).ok);

  {
    Derivation d = update_chain();  // drop the reversal on step 0
    d.steps[0].reverse = false;
    const ProofResult r = check_derivation(st, d);
    CHECK_FALSE(r.ok);
    CHECK(r.step == 0);
  }
  {
    Derivation d = update_chain();  // wrong metavariable image
    d.steps[1].subst["x1"] = top();
    CHECK_FALSE(check_derivation(st, d).ok);
  }
  {
    Derivation d = update_chain();  // congruence at the wrong position
    d.steps[2].at = {1};
    const ProofResult r = check_derivation(st, d);
    CHECK_FALSE(r.ok);
    CHECK(r.step == 2);
  }
  {
    Derivation d = update_chain();  // out-of-range position
    d.steps[2].at = {4};
    const ProofResult r = check_derivation(st, d);
    CHECK_FALSE(r.ok);
    CHECK(r.reason.find("bad position") != std::string::npos);
  }
  {
    Derivation d = update_chain();  // unknown axiom name
    d.steps[3].name = "lkp_konst";
    const ProofResult r = check_derivation(st, d);
    CHECK_FALSE(r.ok);
    CHECK(r.reason.find("unknown axiom") != std::string::npos);
  }
  {
    Derivation d = update_chain();  // missing metavariable
    d.steps[3].subst.clear();
    CHECK_FALSE(check_derivation(st, d).ok);
  }
  {
    Derivation d = update_chain();  // claim a stronger conclusion
    d.rhs = node("upd[0]", {bot()});
    const ProofResult r = check_derivation(st, d);
    CHECK_FALSE(r.ok);
    CHECK(r.step == static_cast<int>(d.steps.size()));
  }
}

TEST_CASE("inequations only apply left to right") {
  const EffectSpec ct = get_effect("cost");
  Derivation d;
  d.lhs = finite("tick(top)", ct);
  d.rhs = top();
  d.steps = {axiom_step("tick_le", {{"x", top()}})};
  CHECK(check_derivation(ct, d).ok);

  Derivation rev;
  rev.lhs = top();
  rev.rhs = finite("tick(top)", ct);
  rev.steps = {axiom_step("tick_le", {{"x", top()}}, true)};
  const ProofResult r = check_derivation(ct, rev);
  CHECK_FALSE(r.ok);
  CHECK(r.reason.find("right-to-left") != std::string::npos);
}

TEST_CASE("recursive schemes cannot be applied as rewrite steps") {
  const EffectSpec pr = get_effect("prob");
  Derivation d;
  d.lhs = top();
  d.rhs = top();
  d.steps = {axiom_step("por_unfold", {{"y", top()}})};
  const ProofResult r = check_derivation(pr, d);
  CHECK_FALSE(r.ok);
  CHECK(r.reason.find("recursive side") != std::string::npos);
}

TEST_CASE("assumptions must match the chain exactly") {
  const EffectSpec ex = get_effect("exceptions");
  Derivation d;
  d.lhs = node("catch[e1]", {top(), bot()});
  d.rhs = top();
  d.assumptions = {{"h", node("catch[e1]", {var(0), var(1)}), var(0)}};
  Step assume;
  assume.kind = Step::Kind::Assume;
  assume.name = "h";
  d.steps = {assume};
  // The assumption is stated over variables; the chain holds leaves, so a
  // bare Assume without an enclosing Subst must fail.
  const ProofResult r = check_derivation(ex, d);
  CHECK_FALSE(r.ok);
  CHECK(r.reason.find("assumption mismatch") != std::string::npos);

  Step unknown;
  unknown.kind = Step::Kind::Assume;
  unknown.name = "nope";
  Derivation d2;
  d2.lhs = bot();
  d2.rhs = bot();
  d2.steps = {unknown};
  CHECK(check_derivation(ex, d2).reason.find("unknown assumption") != std::string::npos);
}

TEST_CASE("external assumptions extend the derivation's own") {
  const EffectSpec ex = get_effect("exceptions");
  Derivation d = collapse_chain();
  const std::vector<LabeledAssumption> moved = d.assumptions;
  d.assumptions.clear();
  CHECK_FALSE(check_derivation(ex, d).ok);
  CHECK(check_derivation(ex, d, moved).ok);
}

TEST_CASE("serialization round-trips byte for byte") {
  const EffectSpec st = get_effect("store");
  const EffectSpec ex = get_effect("exceptions");

  const std::string s1 = derivation_to_json(update_chain(), "store");
  CHECK(derivation_effect_name(s1) == "store");
  const Derivation p1 = parse_derivation(s1, st);
  CHECK(derivation_to_json(p1, "store") == s1);
  CHECK(check_derivation(st, p1).ok);

  const std::string s2 = derivation_to_json(collapse_chain(), "exceptions");
  const Derivation p2 = parse_derivation(s2, ex);
  CHECK(derivation_to_json(p2, "exceptions") == s2);
  CHECK(check_derivation(ex, p2).ok);
}

TEST_CASE("parsing rejects malformed documents") {
  const EffectSpec st = get_effect("store");
  CHECK_THROWS_AS(parse_derivation("not json", st), Error);
  CHECK_THROWS_AS(parse_derivation("{}", st), Error);
  CHECK_THROWS_AS(derivation_effect_name("[1,2]"), Error);
  CHECK_THROWS_AS(
      parse_derivation(R"({"effect":"store","conclusion":{"lhs":"bot","rhs":"bot"},)"
                       R"("assumptions":[],"steps":[{"kind":"mystery"}]})",
                      st),
      Error);
}
