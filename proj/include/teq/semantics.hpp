#pragma once

#include <map>
#include <optional>
#include <unordered_map>

#include "teq/effects.hpp"
#include "teq/tree.hpp"
#include "teq/value.hpp"

namespace teq {

struct Assignment {
  std::map<VarId, Value> map;

  // Unmentioned variables default to the bottom of the space.
  Value get(VarId v, const EffectSpec& e) const {
    auto it = map.find(v);
    return it == map.end() ? value_bottom(e) : it->second;
  }
  bool operator==(const Assignment& o) const = default;
};

// Evaluates through the algebra, exactly. Dyadic-valued effects require the
// input to unfold finitely; cyclic inputs must go through eval_bounds. The
// other carriers evaluate cyclic inputs exactly (divergence is a fixture of
// the carrier: empty run set, infinite cost, bottom class, grafted loop).
Value eval_exact(const EffectSpec& e, const AnyTree& t, const Assignment& h = {});

struct Bounds {
  Value lower, upper;
  bool converged = false;
  int depth = 0;  // truncation depth of the reported bounds
};

// Two-sided truncation bounds, doubling the depth (clamped to max_depth)
// until the gap is within eps or the cap is reached. Non-dyadic effects
// answer exactly in one step.
Bounds eval_bounds(const EffectSpec& e, const AnyTree& t, const Assignment& h,
                   int max_depth, const Dyadic& eps);

// Decides the base inequality between closed finite trees by the effect's
// direct characterization (leaf scan, probability mass, per-state runs,
// normal form, tick count, tree order). Errors on the combined theory.
bool base_oracle(const EffectSpec& e, const Tree& a, const Tree& b);

// All closed trees of the signature up to the given depth, in a fixed
// deterministic order. Throws when the count would exceed the bound.
std::vector<Tree> enumerate_closed_trees(const EffectSpec& e, int depth,
                                         std::size_t bound = 400000);
std::vector<Tree> enumerate_trees(const Signature& sig, const std::vector<Tree>& atoms,
                                  int depth, std::size_t bound = 400000);

struct ValueTable {
  EffectSpec effect;
  int depth = 0;
  struct Class {
    Tree canonical;  // least member in the fixed total order
    Tree greatest;   // greatest member within the enumerated depth
    std::vector<Tree> members;
    Value value;  // exact evaluation of the canonical member
  };
  std::vector<Class> classes;
  std::vector<std::vector<bool>> leq;  // order between classes, by index
  std::unordered_map<Tree, int, TreeHash, TreeEq> member_class;

  int class_of_member(const Tree& t) const;  // -1 when not enumerated
};

ValueTable build_quotient(const EffectSpec& e, int depth, std::size_t bound = 400000);

enum class Choice : std::uint8_t { Least, Greatest };

// Grafts one representative per class leaf and classifies the result. Inside
// the enumerated depth this is a member lookup; beyond it the class is found
// through the base comparison against canonical members, so any finite choice
// function can be exercised.
int alpha_quotient(const ValueTable& table, const Tree& t_over_classes,
                   Choice choice = Choice::Least);

struct LawReport {
  std::uint64_t checked = 0;
  std::uint64_t failures = 0;
  std::vector<std::string> notes;  // first few failures, printed forms

  bool ok() const { return failures == 0; }
};

// Unit and multiplication laws of the evaluation algebra on seeded random
// trees and two-level trees.
LawReport check_em_laws(const EffectSpec& e, int samples, std::uint64_t seed);
LawReport check_em_laws_quotient(const ValueTable& table, int samples, std::uint64_t seed);

}  // namespace teq
