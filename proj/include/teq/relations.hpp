#pragma once

#include <optional>
#include <tuple>

#include "teq/effects.hpp"
#include "teq/semantics.hpp"
#include "teq/tree.hpp"
#include "teq/value.hpp"

namespace teq {

enum class Status : std::uint8_t { Holds, Refuted, HoldsAtResolution };

struct Decision {
  Status status = Status::Holds;
  // grid resolution (or bound depth) that failed to refute, when
  // status is HoldsAtResolution
  int resolution = 0;
  std::optional<Assignment> witness;               // present iff refuted
  std::optional<std::pair<Value, Value>> values;   // lhs/rhs values at the witness

  bool holds() const { return status == Status::Holds; }
  bool refuted() const { return status == Status::Refuted; }
};

struct QueryLimits {
  int grid = 3;                       // dyadic grid resolutions 2^-1 .. 2^-grid
  int depth = 20;                     // truncation cap for bounds
  Dyadic eps = Dyadic::make(1, 20);   // convergence tolerance for bounds
};

// The carrier as an ordered list (finite spaces only; throws otherwise).
std::vector<Value> finite_space(const EffectSpec& e);

// Variables of both sides, sorted and deduplicated.
std::vector<VarId> joint_vars(const AnyTree& a, const AnyTree& b);

// True for a regular tree with a reachable cycle.
bool any_cyclic(const AnyTree& t);

// Checks operators and arities; Ref leaves are allowed inside regular bodies.
void validate_any(const EffectSpec& e, const AnyTree& t);

// base^n, guarded against runaway enumeration sizes.
std::uint64_t checked_pow(std::uint64_t base, std::size_t n);

// The assignment with index idx over vars, first variable varying slowest.
Assignment nth_assignment(const std::vector<VarId>& vars, const std::vector<Value>& space,
                          std::uint64_t idx);

// Interval grid at one resolution, tightest intervals first.
std::vector<Value> grid_points(int rho);

// Decides whether a is below b under every assignment of values to
// variables. Strategy per effect: finite carriers enumerate assignments
// exhaustively; dyadic evaluation is multi-affine per variable, so checking
// the 0/1 vertices is exact; tick counting admits a closed form; grafting
// reduces to the coinductive tree order; the combined theory searches dyadic
// grids and reports non-refutation at the final resolution. Cyclic inputs to
// the dyadic-valued strategies are decided through converging bounds, which
// refute and confirm soundly but may return HoldsAtResolution.
Decision check_leq(const EffectSpec& e, const AnyTree& a, const AnyTree& b,
                   const QueryLimits& limits = {});

struct DistinguishReport {
  Decision lr, rl;
  // assignment and both values when some direction is refuted
  std::optional<std::tuple<Assignment, Value, Value>> found;
};

DistinguishReport distinguish(const EffectSpec& e, const AnyTree& a, const AnyTree& b,
                              const QueryLimits& limits = {});

// One row per substitution of the variables into {bottom leaf, leaf x0}.
struct SingleValuedRow {
  std::vector<bool> to_leaf;  // per variable (sorted order): true sends it to x0
  Decision lr, rl;
};

struct SingleValuedReport {
  std::vector<VarId> vars;
  std::vector<SingleValuedRow> rows;
  Decision full_lr, full_rl;

  bool rows_hold_lr() const;
  bool rows_hold_rl() const;
};

// The single-valuedness probe: if every row holds while the full check
// refutes, the instance witnesses that leaf substitutions do not determine
// the relation.
SingleValuedReport check_single_valued_instance(const EffectSpec& e, const Tree& a,
                                                const Tree& b, const QueryLimits& limits = {});

}  // namespace teq
