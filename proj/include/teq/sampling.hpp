#pragma once

#include <cstdint>
#include <random>

#include "teq/effects.hpp"
#include "teq/value.hpp"

namespace teq {

// Seeded generator for trees, regular trees and carrier values of one
// effect theory. Deterministic for a fixed seed and call sequence.
struct TreeSampler {
  const EffectSpec& effect;
  std::mt19937_64 rng;

  TreeSampler(const EffectSpec& e, std::uint64_t seed) : effect(e), rng(seed) {}

  std::uint64_t pick(std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

  // Finite tree of depth <= depth over variables x0..x(nvars-1).
  Tree tree(int depth, VarId nvars);

  // Regular tree with `states` states; Ref leaves only occur under an
  // operator node, so every cycle is guarded.
  RegularTree regular(int states, int depth, VarId nvars);

  // Uniform-ish carrier value for the effect's value space.
  Value value();
};

}  // namespace teq
