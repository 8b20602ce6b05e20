#pragma once

#include <map>
#include <optional>

#include "teq/effects.hpp"
#include "teq/relations.hpp"
#include "teq/semantics.hpp"
#include "teq/value.hpp"

namespace teq {

// Two readings of "open". The monotone reading additionally requires
// upward closure; chain-openness alone is automatic on finite lattices,
// so under ChainOpenOnly any finite membership mask is admissible.
enum class PredicateMode : unsigned char { MonotoneOpen, ChainOpenOnly };

// Open predicate on the value space. Finite carriers use a membership
// mask aligned with finite_space(effect); the dyadic carrier uses a
// strict threshold (absent threshold = always true), which is both
// chain-open and monotone.
struct OpenPredicate {
  bool is_threshold = false;
  std::vector<bool> member;          // finite carrier only
  std::optional<Dyadic> threshold;   // P_r(a) = a > r; nullopt = always true
};

// A test on trees over Booleans: send true to the continuation value,
// false to bottom, evaluate, apply the predicate.
struct Modality {
  OpenPredicate predicate;
  Value continuation;
};

// Upward closure of the given elements, as a membership mask.
OpenPredicate upset_predicate(const EffectSpec& e, const std::vector<Value>& minimal);
OpenPredicate threshold_predicate(const Dyadic& r);
OpenPredicate always_true_predicate();

// Minimal elements of a finite-carrier predicate (its canonical form
// under the monotone reading).
std::vector<Value> minimal_elements(const EffectSpec& e, const OpenPredicate& p);

// Throws unless p fits e's space and satisfies the mode's reading.
void validate_predicate(const EffectSpec& e, const OpenPredicate& p,
                        PredicateMode mode = PredicateMode::MonotoneOpen);

bool predicate_holds(const EffectSpec& e, const OpenPredicate& p, const Value& v);

// P(alpha(T(v-hat o pred)(t))): each variable is sent through pred to
// either the continuation value or bottom, the tree is evaluated, and
// the predicate is applied. Dyadic evaluation of cyclic trees goes
// through converging bounds; a strict threshold is decided soundly from
// the bounds and throws when they straddle it at the depth limit.
bool eval_modality(const EffectSpec& e, const Modality& o, const std::map<VarId, bool>& pred,
                   const AnyTree& t, const QueryLimits& limits = {});

// Decides the modal preorder via its test-family characterization:
// for every value v and every two-valued assignment f: vars -> {bottom, v},
// value_leq(eval(a, f), eval(b, f)). Finite carriers enumerate v exactly.
// Probability rescales every threshold test to v = 1, which makes the
// family coincide with the 0/1 vertex assignments of check_leq; tick
// counting and grafting are decided by check_leq's case analyses, whose
// refuting witnesses are already two-valued, so their decisions carry
// over verbatim. The combined theory runs the interval grid over v.
Decision modal_leq(const EffectSpec& e, const AnyTree& a, const AnyTree& b,
                   const QueryLimits& limits = {});

struct EnumeratedModality {
  Modality m;
  // index of an earlier modality with the same denotation on the
  // bounded comparison corpus, or -1
  int duplicate_of = -1;
};

// All (open predicate, value) pairs over a finite carrier, in mask-major
// order, with denotation duplicates flagged by bounded-depth comparison.
// Infinite value spaces are rejected with a pointer to the parametric
// threshold families.
std::vector<EnumeratedModality> enumerate_modalities(
    const EffectSpec& e, PredicateMode mode = PredicateMode::MonotoneOpen);

std::string predicate_print(const EffectSpec& e, const OpenPredicate& p);
std::string modality_print(const EffectSpec& e, const Modality& m);

}  // namespace teq
