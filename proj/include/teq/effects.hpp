#pragma once

#include <map>
#include <string>
#include <vector>

#include "teq/tree.hpp"

namespace teq {

enum class EffectKind : std::uint8_t {
  Nondet,
  Prob,
  Store,
  Exceptions,
  Input,
  Cost,
  NondetProb,
};

// Carrier the algebra evaluates into.
enum class Space : std::uint8_t {
  ThreePoint,  // bot < mid < top
  Dyadic,      // exact dyadics in [0,1]
  StateSet,    // subsets of {0..k-1}, ordered by inclusion
  FlatExc,     // bot < raise(e) < top, raises pairwise incomparable
  ExtNat,      // naturals with infinity, reverse-ordered (inf is bottom)
  ClosedTree,  // closed regular trees under the coinductive tree order
  Interval,    // pairs (lo, hi) with lo <= hi, ordered componentwise
};

enum class LeqStrategy : std::uint8_t {
  Enumerate,     // all assignments over a finite carrier
  Vertex,        // 0/1 assignments; the evaluation is affine per variable
  CaseAnalysis,  // closed form over (tick count, endpoint)
  Bisimulation,  // coinductive tree order directly
  Grid,          // dyadic grid refutation search; non-refutation is bounded
};

// Axiom sides are patterns over metavariables (Var leaves index
// metavar_names). A side may be a regular pattern; such axioms state limit
// facts and are validated semantically, never applied in finitary rewriting.
struct AxiomSide {
  bool regular = false;
  Tree tree;
  RegularTree rtree;
};

struct AxiomScheme {
  std::string name;
  bool is_equation = true;  // false: inequation, left side below right side
  AxiomSide lhs, rhs;
  std::vector<std::string> metavar_names;
};

struct EffectParams {
  int store_k = 2;
  std::vector<std::string> exceptions = {"e1", "e2"};
};

struct EffectSpec {
  EffectKind kind;
  std::string name;
  Signature signature;
  // Index-expanded: scheme families over cell indices / exception names are
  // already instantiated, so every axiom is a concrete pattern.
  std::vector<AxiomScheme> axioms;
  EffectParams params;
  Space space;
  LeqStrategy strategy;

  const AxiomScheme* find_axiom(const std::string& name) const;
};

// Known names: nondet, prob, store, exceptions, input, cost, nondet_prob.
EffectSpec get_effect(const std::string& name, const EffectParams& params = {});
std::vector<std::string> effect_names();

// Substitutes metavariables (by name) into both sides. Every metavariable of
// the scheme must be bound. Regular sides instantiate to regular trees.
std::pair<AnyTree, AnyTree> instantiate_axiom(const AxiomScheme& ax,
                                              const std::map<std::string, Tree>& subst);

}  // namespace teq
