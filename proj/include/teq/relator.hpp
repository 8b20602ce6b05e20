#pragma once

#include <string>
#include <vector>

#include "teq/corpus.hpp"
#include "teq/effects.hpp"
#include "teq/relations.hpp"
#include "teq/tree.hpp"

namespace teq {

// a related to b through relation R on their variable carriers.
struct RelatorQuery {
  EffectSpec effect;
  std::vector<VarId> X, Y;  // finite carriers; leaves of a lie in X, of b in Y
  BinaryRelation R;         // pairs within X times Y
  Tree a, b;
};

// Decides the value-space relator: over all (f: X->A, g: Y->A) with
// f(x) below g(y) for every related pair, eval(a under f) stays below
// eval(b under g). Finite carriers take the premise-filtered full
// product. The dyadic space checks the 0/1 vertices, which is exact:
// evaluation is affine in the leaf values and the premise polytope has
// only difference and box constraints, so its vertices are integral.
// Tick counting and grafting admit closed-form case analyses. The
// combined theory sweeps the interval grid; true then means
// not-refuted at limits.grid, as in check_leq.
bool relator_lift(const RelatorQuery& q, const QueryLimits& limits = {});

struct RelatorLawReport {
  std::uint64_t identity_checked = 0;
  std::uint64_t composition_checked = 0;
  std::uint64_t monotonicity_checked = 0;
  std::uint64_t reindexing_checked = 0;
  std::uint64_t violations = 0;
  std::vector<std::string> notes;  // first few violating instances

  bool ok() const { return violations == 0; }
};

// Exhaustively verifies the four relator laws (identity inclusion,
// composition, monotonicity in the relation, reindexing) over all
// relations between carriers of size <= max_carrier and all trees of
// depth <= max_depth. Trees with identical evaluation vectors have
// identical relator memberships, so the sweep runs on one
// representative per evaluation class without losing instances.
RelatorLawReport check_relator_laws(const EffectSpec& e, int max_carrier, int max_depth,
                                    Exec exec = Exec::Serial);

}  // namespace teq
