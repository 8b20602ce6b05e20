#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "teq/effects.hpp"
#include "teq/tree.hpp"

namespace teq {

struct Derivation;

// One link in a transitivity chain. Every step proves "current <= next" for
// the tree the chain has reached so far.
struct Step {
  enum class Kind : std::uint8_t { Refl, Order, Axiom, Assume, Congruence, Subst, Trans };

  Kind kind = Kind::Refl;
  Tree to;                           // Order, Trans: the tree stepped to
  std::string name;                  // Axiom: axiom name; Assume: assumption label
  bool reverse = false;              // Axiom: applied right-to-left (equations only)
  std::map<std::string, Tree> subst;           // Axiom: metavariable images
  std::vector<std::pair<VarId, Tree>> map;     // Subst: variable images
  Path at;                                     // Congruence: rewrite position
  std::shared_ptr<Derivation> sub;             // Congruence, Subst, Trans
};

struct LabeledAssumption {
  std::string label;
  Tree lhs, rhs;  // assumed: lhs <= rhs
};

// Proof of conclusion.lhs <= conclusion.rhs as a chain of steps. Nested
// derivations (inside congruence, substitution, and transitivity steps)
// inherit the effect and assumptions of the outermost one.
struct Derivation {
  Tree lhs, rhs;
  std::vector<Step> steps;
  std::vector<LabeledAssumption> assumptions;
};

struct ProofResult {
  bool ok = true;
  // Top-level index of the failing step; -1 for a malformed conclusion,
  // steps.size() when the chain stops short of the conclusion.
  int step = 0;
  std::string reason;
};

ProofResult check_derivation(const EffectSpec& e, const Derivation& d,
                             const std::vector<LabeledAssumption>& extra = {});

// Serialized form: a JSON document with fields effect, conclusion,
// assumptions, steps; trees as expression strings. Serialization is
// canonical, so parse followed by serialize reproduces the bytes.
std::string derivation_to_json(const Derivation& d, const std::string& effect_name);
std::string derivation_effect_name(const std::string& text);
Derivation parse_derivation(const std::string& text, const EffectSpec& e);

}  // namespace teq
