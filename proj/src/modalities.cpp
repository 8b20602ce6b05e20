#include "teq/modalities.hpp"

#include <algorithm>
#include <string>

namespace teq {

namespace {

std::size_t carrier_index(const EffectSpec& e, const std::vector<Value>& space, const Value& v) {
  for (std::size_t i = 0; i < space.size(); ++i)
    if (value_eq(e, space[i], v)) return i;
  throw Error("value outside the carrier");
}

void validate_structure(const EffectSpec& e, const OpenPredicate& p) {
  if (p.is_threshold) {
    if (e.space != Space::Dyadic)
      throw Error("threshold predicates apply to the dyadic value space only");
    return;
  }
  if (p.member.size() != finite_space(e).size())
    throw Error("predicate mask does not match the carrier");
}

}  // namespace

OpenPredicate upset_predicate(const EffectSpec& e, const std::vector<Value>& minimal) {
  const std::vector<Value> space = finite_space(e);
  OpenPredicate p;
  p.member.assign(space.size(), false);
  for (const Value& m : minimal) {
    carrier_index(e, space, m);  // reject foreign values
    for (std::size_t i = 0; i < space.size(); ++i)
      if (value_leq(e, m, space[i])) p.member[i] = true;
  }
  return p;
}

OpenPredicate threshold_predicate(const Dyadic& r) {
  OpenPredicate p;
  p.is_threshold = true;
  p.threshold = r;
  return p;
}

OpenPredicate always_true_predicate() {
  OpenPredicate p;
  p.is_threshold = true;
  return p;
}

std::vector<Value> minimal_elements(const EffectSpec& e, const OpenPredicate& p) {
  if (p.is_threshold) throw Error("threshold predicates have no minimal elements");
  validate_structure(e, p);
  const std::vector<Value> space = finite_space(e);
  std::vector<Value> out;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!p.member[i]) continue;
    bool minimal = true;
    for (std::size_t j = 0; j < space.size(); ++j)
      if (j != i && p.member[j] && value_leq(e, space[j], space[i]) &&
          !value_eq(e, space[j], space[i]))
        minimal = false;
    if (minimal) out.push_back(space[i]);
  }
  return out;
}

void validate_predicate(const EffectSpec& e, const OpenPredicate& p, PredicateMode mode) {
  validate_structure(e, p);
  if (p.is_threshold || mode == PredicateMode::ChainOpenOnly) return;
  const std::vector<Value> space = finite_space(e);
  for (std::size_t i = 0; i < space.size(); ++i)
    for (std::size_t j = 0; j < space.size(); ++j)
      if (p.member[i] && !p.member[j] && value_leq(e, space[i], space[j]))
        throw Error("predicate is not upward-closed");
}

bool predicate_holds(const EffectSpec& e, const OpenPredicate& p, const Value& v) {
  validate_structure(e, p);
  if (p.is_threshold) {
    if (!p.threshold.has_value()) return true;
    return dyadic_cmp(std::get<DyadicV>(v).d, *p.threshold) > 0;
  }
  const std::vector<Value> space = finite_space(e);
  return p.member[carrier_index(e, space, v)];
}

bool eval_modality(const EffectSpec& e, const Modality& o, const std::map<VarId, bool>& pred,
                   const AnyTree& t, const QueryLimits& limits) {
  validate_structure(e, o.predicate);
  validate_any(e, t);
  Assignment h;
  for (const VarId v : any_vars(t)) {
    const auto it = pred.find(v);
    if (it == pred.end())
      throw Error("predicate does not cover variable x" + std::to_string(v));
    h.map[v] = it->second ? o.continuation : value_bottom(e);
  }
  if (e.space == Space::Dyadic && any_cyclic(t)) {
    if (o.predicate.is_threshold && !o.predicate.threshold.has_value()) return true;
    const Bounds b = eval_bounds(e, t, h, limits.depth, limits.eps);
    const Dyadic& r = *o.predicate.threshold;
    // the true mass lies within [lower, upper]
    if (dyadic_cmp(std::get<DyadicV>(b.lower).d, r) > 0) return true;
    if (dyadic_cmp(std::get<DyadicV>(b.upper).d, r) <= 0) return false;
    throw Error("bounds at depth " + std::to_string(b.depth) +
                " straddle the threshold; modality undecided");
  }
  return predicate_holds(e, o.predicate, eval_exact(e, t, h));
}

Decision modal_leq(const EffectSpec& e, const AnyTree& a, const AnyTree& b,
                   const QueryLimits& limits) {
  validate_any(e, a);
  validate_any(e, b);
  switch (e.space) {
    case Space::Dyadic:
    case Space::ExtNat:
    case Space::ClosedTree:
      // Threshold rescaling (dyadic) and the two-valued shape of the
      // closed-form refuting witnesses (ticks, grafting) make the modal
      // test family decide exactly as the assignment order.
      return check_leq(e, a, b, limits);
    case Space::ThreePoint:
    case Space::StateSet:
    case Space::FlatExc: {
      const std::vector<Value> space = finite_space(e);
      const std::vector<VarId> vars = joint_vars(a, b);
      const std::uint64_t total = checked_pow(2, vars.size());
      for (const Value& v : space) {
        const std::vector<Value> two{value_bottom(e), v};
        for (std::uint64_t idx = 0; idx < total; ++idx) {
          const Assignment h = nth_assignment(vars, two, idx);
          const Value va = eval_exact(e, a, h);
          const Value vb = eval_exact(e, b, h);
          if (!value_leq(e, va, vb))
            return {Status::Refuted, 0, h, std::pair{va, vb}};
        }
      }
      return {};
    }
    case Space::Interval: {
      const std::vector<VarId> vars = joint_vars(a, b);
      const std::uint64_t total = checked_pow(2, vars.size());
      const bool approx = any_cyclic(a) || any_cyclic(b);
      for (int rho = 1; rho <= limits.grid; ++rho) {
        for (const Value& v : grid_points(rho)) {
          const std::vector<Value> two{value_bottom(e), v};
          for (std::uint64_t idx = 0; idx < total; ++idx) {
            const Assignment h = nth_assignment(vars, two, idx);
            if (!approx) {
              const Value va = eval_exact(e, a, h);
              const Value vb = eval_exact(e, b, h);
              if (!value_leq(e, va, vb))
                return {Status::Refuted, 0, h, std::pair{va, vb}};
            } else {
              const Bounds ba = eval_bounds(e, a, h, limits.depth, limits.eps);
              const Bounds bb = eval_bounds(e, b, h, limits.depth, limits.eps);
              if (!value_leq(e, ba.lower, bb.upper))
                return {Status::Refuted, 0, h, std::pair{ba.lower, bb.upper}};
            }
          }
        }
      }
      return {Status::HoldsAtResolution, limits.grid, std::nullopt, std::nullopt};
    }
  }
  throw Error("unreachable space");
}

std::vector<EnumeratedModality> enumerate_modalities(const EffectSpec& e, PredicateMode mode) {
  if (e.space != Space::ThreePoint && e.space != Space::StateSet && e.space != Space::FlatExc)
    throw Error("infinite value space; use parametric threshold families (P_r, v)");
  const std::vector<Value> space = finite_space(e);
  if (space.size() > 16) throw Error("carrier too large to enumerate predicates");

  std::vector<OpenPredicate> preds;
  for (std::uint64_t mask = 0; mask < (1ull << space.size()); ++mask) {
    OpenPredicate p;
    p.member.assign(space.size(), false);
    for (std::size_t i = 0; i < space.size(); ++i)
      if (mask & (1ull << i)) p.member[i] = true;
    bool keep = true;
    if (mode == PredicateMode::MonotoneOpen) {
      for (std::size_t i = 0; i < space.size() && keep; ++i)
        for (std::size_t j = 0; j < space.size() && keep; ++j)
          if (p.member[i] && !p.member[j] && value_leq(e, space[i], space[j])) keep = false;
    }
    if (keep) preds.push_back(std::move(p));
  }

  // Denotations are compared on a bounded corpus: all trees of depth <= 2
  // over x0, x1 against all four Boolean predicates on those variables.
  const std::vector<Tree> corpus =
      enumerate_trees(e.signature, {bot(), top(), var(0), var(1)}, 2, 400000);
  std::vector<std::map<VarId, bool>> assigns;
  for (int m = 0; m < 4; ++m)
    assigns.push_back({{0, (m & 2) != 0}, {1, (m & 1) != 0}});

  std::vector<EnumeratedModality> out;
  std::vector<std::vector<bool>> denotations;
  for (const OpenPredicate& p : preds) {
    for (const Value& v : space) {
      const Modality m{p, v};
      std::vector<bool> d;
      d.reserve(corpus.size() * assigns.size());
      for (const Tree& t : corpus)
        for (const auto& pr : assigns) d.push_back(eval_modality(e, m, pr, t));
      int dup = -1;
      for (std::size_t i = 0; i < denotations.size() && dup < 0; ++i)
        if (denotations[i] == d) dup = static_cast<int>(i);
      denotations.push_back(std::move(d));
      out.push_back({m, dup});
    }
  }
  return out;
}

std::string predicate_print(const EffectSpec& e, const OpenPredicate& p) {
  if (p.is_threshold) {
    if (!p.threshold.has_value()) return "P_always";
    return "P_" + dyadic_print(*p.threshold);
  }
  std::string out = "up{";
  bool first = true;
  for (const Value& m : minimal_elements(e, p)) {
    if (!first) out += ", ";
    first = false;
    out += value_print(m);
  }
  return out + "}";
}

std::string modality_print(const EffectSpec& e, const Modality& m) {
  return "(" + predicate_print(e, m.predicate) + ", " + value_print(m.continuation) + ")";
}

}  // namespace teq
