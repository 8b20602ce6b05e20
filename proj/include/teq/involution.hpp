#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teq/effects.hpp"
#include "teq/tree.hpp"

namespace teq {

// Variable relabeling that is its own inverse; the default (no swaps)
// is the identity.
struct Involution {
  std::vector<std::pair<VarId, VarId>> swaps;

  VarId apply(VarId v) const {
    for (const auto& [a, b] : swaps) {
      if (v == a) return b;
      if (v == b) return a;
    }
    return v;
  }
};

// Swaps top and bottom leaves, maps variable leaves through the
// involution, keeps operator structure; regular trees are negated
// state-wise.
Tree negate(const Tree& t, const Involution& inv = {});
RegularTree negate(const RegularTree& t, const Involution& inv = {});
AnyTree negate_any(const AnyTree& t, const Involution& inv = {});

struct InvolutionReport {
  // (a) order reversal a below b iff not-b below not-a, on finite samples
  std::uint64_t order_checked = 0;
  std::uint64_t order_failures = 0;
  // (b) derived value involutions on finite closed trees:
  // probability mass complement, weakest-precondition complement
  bool value_identity_applicable = false;
  std::uint64_t value_checked = 0;
  std::uint64_t value_failures = 0;
  // (c) non-preservation on cyclic trees, when the effect exhibits one
  bool regular_failure_shown = false;
  std::string regular_witness;
  // (d) the carrier has no involution at all
  bool involution_impossible = false;
  std::vector<std::string> notes;

  bool ok() const { return order_failures == 0 && value_failures == 0; }
};

// Runs the per-effect preservation analysis on seeded random corpora:
// order reversal on finite trees for every effect, the derived value
// involutions where they exist (prob, store), the cyclic failure
// witness rec s. or(s, s) for nondet, and the impossibility notice for
// the tick carrier.
InvolutionReport check_involution_preservation(const EffectSpec& e, int samples,
                                               std::uint64_t seed);

}  // namespace teq
