#include "teq/relations.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace teq {

std::vector<Value> finite_space(const EffectSpec& e) {
  switch (e.space) {
    case Space::ThreePoint:
      return {three_point(0), three_point(1), three_point(2)};
    case Space::StateSet: {
      std::vector<Value> out;
      for (std::uint32_t bits = 0; bits < (1u << e.params.store_k); ++bits)
        out.push_back(state_set(bits, e.params.store_k));
      return out;
    }
    case Space::FlatExc: {
      std::vector<Value> out{exc_bottom()};
      for (const std::string& x : e.params.exceptions) out.push_back(exc_raise(x));
      out.push_back(exc_top());
      return out;
    }
    default:
      throw Error("value space is not finite");
  }
}

std::vector<VarId> joint_vars(const AnyTree& a, const AnyTree& b) {
  std::vector<VarId> va = any_vars(a);
  const std::vector<VarId> vb = any_vars(b);
  std::vector<VarId> out;
  std::set_union(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(out));
  return out;
}

bool any_cyclic(const AnyTree& t) {
  const auto* r = std::get_if<RegularTree>(&t);
  return r != nullptr && !regular_is_finite(*r);
}

static void validate_body(const Signature& sig, const Tree& t) {
  if (t->kind == NodeKind::Op) {
    const Signature::Op* o = sig.find(t->op);
    if (o == nullptr) throw Error("unknown operator: " + t->op);
    if (static_cast<std::size_t>(o->arity) != t->children.size())
      throw Error("operator " + t->op + " expects " + std::to_string(o->arity) +
                  " arguments, got " + std::to_string(t->children.size()));
  }
  for (const Tree& c : t->children) validate_body(sig, c);
}

void validate_any(const EffectSpec& e, const AnyTree& t) {
  if (const auto* f = std::get_if<Tree>(&t)) {
    e.signature.validate(*f);
    return;
  }
  for (const Tree& b : std::get<RegularTree>(t).states) validate_body(e.signature, b);
}

std::uint64_t checked_pow(std::uint64_t base, std::size_t n) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (base != 0 && total > (1ull << 22) / base)
      throw Error("assignment space too large");
    total *= base;
  }
  return total;
}

// Assignment with index `idx` in lexicographic order, first variable slowest.
Assignment nth_assignment(const std::vector<VarId>& vars, const std::vector<Value>& space,
                          std::uint64_t idx) {
  Assignment h;
  for (std::size_t j = vars.size(); j-- > 0;) {
    h.map[vars[j]] = space[idx % space.size()];
    idx /= space.size();
  }
  return h;
}

// Grid points at one resolution, tightest intervals first (diagonal values,
// then widening), each group ordered by its lower endpoint.
std::vector<Value> grid_points(int rho) {
  std::vector<Dyadic> g;
  for (std::uint64_t j = 0; j <= (1ull << rho); ++j)
    g.push_back(Dyadic::make(j, static_cast<std::uint32_t>(rho)));
  std::vector<IntervalV> pts;
  for (const Dyadic& lo : g)
    for (const Dyadic& hi : g)
      if (dyadic_cmp(lo, hi) <= 0) pts.push_back({lo, hi});
  std::stable_sort(pts.begin(), pts.end(), [](const IntervalV& p, const IntervalV& q) {
    const int w = dyadic_cmp(dyadic_sub(p.hi, p.lo), dyadic_sub(q.hi, q.lo));
    if (w != 0) return w < 0;
    return dyadic_cmp(p.lo, q.lo) < 0;
  });
  std::vector<Value> out;
  out.reserve(pts.size());
  for (const IntervalV& p : pts) out.push_back(interval(p.lo, p.hi));
  return out;
}

namespace {

Decision check_enumerate(const EffectSpec& e, const AnyTree& a, const AnyTree& b) {
  const std::vector<Value> space = finite_space(e);
  const std::vector<VarId> vars = joint_vars(a, b);
  const std::uint64_t total = checked_pow(space.size(), vars.size());
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    const Assignment h = nth_assignment(vars, space, idx);
    const Value va = eval_exact(e, a, h);
    const Value vb = eval_exact(e, b, h);
    if (!value_leq(e, va, vb))
      return {Status::Refuted, 0, h, std::pair{va, vb}};
  }
  return {};
}

const Dyadic& as_dyadic(const Value& v) { return std::get<DyadicV>(v).d; }

Decision check_vertex(const EffectSpec& e, const AnyTree& a, const AnyTree& b,
                      const QueryLimits& lim) {
  const std::vector<VarId> vars = joint_vars(a, b);
  const std::vector<Value> corners{dyadic_value(Dyadic::zero()), dyadic_value(Dyadic::one())};
  const std::uint64_t total = checked_pow(2, vars.size());
  const bool approx = any_cyclic(a) || any_cyclic(b);
  bool confirmed = true;
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    const Assignment h = nth_assignment(vars, corners, idx);
    if (!approx) {
      const Value va = eval_exact(e, a, h);
      const Value vb = eval_exact(e, b, h);
      if (!dyadic_leq(as_dyadic(va), as_dyadic(vb)))
        return {Status::Refuted, 0, h, std::pair{va, vb}};
    } else {
      const Bounds ba = eval_bounds(e, a, h, lim.depth, lim.eps);
      const Bounds bb = eval_bounds(e, b, h, lim.depth, lim.eps);
      // the true value of each side lies between its bounds
      if (dyadic_cmp(as_dyadic(ba.lower), as_dyadic(bb.upper)) > 0)
        return {Status::Refuted, 0, h, std::pair{ba.lower, bb.upper}};
      if (!dyadic_leq(as_dyadic(ba.upper), as_dyadic(bb.lower))) confirmed = false;
    }
  }
  if (!approx || confirmed) return {};
  return {Status::HoldsAtResolution, lim.depth, std::nullopt, std::nullopt};
}

// A run is some ticks ending at top, at a variable, or never (bottom/cycle).
struct CostShape {
  bool inf = false;
  std::uint64_t ticks = 0;
  std::optional<VarId> end;
};

CostShape cost_shape(const AnyTree& t) {
  const Graph g = Graph::of(t);
  std::vector<bool> seen(g.nodes.size(), false);
  std::uint32_t cur = g.root;
  CostShape s;
  for (;;) {
    if (seen[cur]) {
      s.inf = true;
      return s;
    }
    seen[cur] = true;
    const Graph::N& n = g.nodes[cur];
    switch (n.kind) {
      case NodeKind::Bot:
        s.inf = true;
        return s;
      case NodeKind::Top:
        return s;
      case NodeKind::Var:
        s.end = n.var;
        return s;
      case NodeKind::Op:
        if (n.op != "tick") throw Error("unknown operator: " + n.op);
        ++s.ticks;
        cur = n.kids[0];
        break;
      case NodeKind::Ref:
        throw Error("unresolved state reference");
    }
  }
}

Decision check_cost(const EffectSpec& e, const AnyTree& a, const AnyTree& b) {
  const CostShape sa = cost_shape(a);
  const CostShape sb = cost_shape(b);
  if (sa.inf) return {};  // the left side is the bottom value under every assignment
  auto refute = [&](Assignment h) -> Decision {
    const Value va = eval_exact(e, a, h);
    const Value vb = eval_exact(e, b, h);
    return {Status::Refuted, 0, std::move(h), std::pair{va, vb}};
  };
  Assignment h0;
  if (sa.end) h0.map[*sa.end] = ext_nat(0);
  if (sb.inf) return refute(std::move(h0));
  if (!sb.end) {
    // both end at top: cheaper-or-equal means at least as many ticks
    if (sa.ticks >= sb.ticks) return {};
    return refute(std::move(h0));
  }
  if (sa.end && *sa.end == *sb.end) {
    if (sa.ticks >= sb.ticks) return {};
    return refute(std::move(h0));
  }
  // the right side ends at a variable the left side does not share: grow it
  Assignment h = std::move(h0);
  h.map[*sb.end] = ext_nat(sa.ticks >= sb.ticks ? sa.ticks - sb.ticks + 1 : 0);
  return refute(std::move(h));
}

// Product-graph order search that records the first mismatching pair on a
// refuting path (depth-first, so the endpoint is deterministic).
struct OrderRefuter {
  const Graph& a;
  const Graph& b;
  std::unordered_map<std::uint64_t, bool> memo;
  std::unordered_set<std::uint64_t> in_progress;
  std::optional<std::pair<std::uint32_t, std::uint32_t>> endpoint;

  bool run(std::uint32_t x, std::uint32_t y) {
    const std::uint64_t key = (static_cast<std::uint64_t>(x) << 32) | y;
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (in_progress.count(key)) return true;
    const Graph::N& na = a.nodes[x];
    const Graph::N& nb = b.nodes[y];
    bool ok = false;
    bool local = true;
    if (na.kind == NodeKind::Bot || nb.kind == NodeKind::Top) {
      ok = true;
    } else if (na.kind == NodeKind::Var && nb.kind == NodeKind::Var) {
      ok = na.var == nb.var;
    } else if (na.kind == NodeKind::Op && nb.kind == NodeKind::Op && na.op == nb.op &&
               na.kids.size() == nb.kids.size()) {
      local = false;
      in_progress.insert(key);
      ok = true;
      for (std::size_t i = 0; i < na.kids.size() && ok; ++i) ok = run(na.kids[i], nb.kids[i]);
      in_progress.erase(key);
    }
    if (!ok && local && !endpoint) endpoint = {x, y};
    memo[key] = ok;
    return ok;
  }
};

Decision check_input(const EffectSpec& e, const AnyTree& a, const AnyTree& b) {
  const Graph ga = Graph::of(a);
  const Graph gb = Graph::of(b);
  OrderRefuter search{ga, gb, {}, {}, {}};
  if (search.run(ga.root, gb.root)) return {};
  // Build a closing assignment that reproduces the mismatch: a top where the
  // left endpoint reads a variable defeats every non-top right endpoint, and
  // bottoms elsewhere defeat top-vs-anything and anything-vs-variable.
  Assignment h;
  for (VarId v : joint_vars(a, b)) h.map[v] = closed_tree(AnyTree(bot()));
  const auto [x, y] = *search.endpoint;
  if (ga.nodes[x].kind == NodeKind::Var) h.map[ga.nodes[x].var] = closed_tree(AnyTree(top()));
  const Value va = eval_exact(e, a, h);
  const Value vb = eval_exact(e, b, h);
  return {Status::Refuted, 0, h, std::pair{va, vb}};
}

Decision check_grid(const EffectSpec& e, const AnyTree& a, const AnyTree& b,
                    const QueryLimits& lim) {
  if (lim.grid < 1) throw Error("grid resolution must be positive");
  const std::vector<VarId> vars = joint_vars(a, b);
  const bool approx = any_cyclic(a) || any_cyclic(b);
  if (vars.empty() && !approx) {
    // Closed acyclic pair: the empty assignment is the whole space, so the
    // single exact comparison decides the query outright.
    const Assignment h;
    const Value va = eval_exact(e, a, h);
    const Value vb = eval_exact(e, b, h);
    if (!value_leq(e, va, vb)) return {Status::Refuted, 0, h, std::pair{va, vb}};
    return {Status::Holds, 0, std::nullopt, std::nullopt};
  }
  for (int rho = 1; rho <= lim.grid; ++rho) {
    const std::vector<Value> space = grid_points(rho);
    const std::uint64_t total = checked_pow(space.size(), vars.size());
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      const Assignment h = nth_assignment(vars, space, idx);
      if (!approx) {
        const Value va = eval_exact(e, a, h);
        const Value vb = eval_exact(e, b, h);
        if (!value_leq(e, va, vb))
          return {Status::Refuted, 0, h, std::pair{va, vb}};
      } else {
        const Bounds ba = eval_bounds(e, a, h, lim.depth, lim.eps);
        const Bounds bb = eval_bounds(e, b, h, lim.depth, lim.eps);
        if (!value_leq(e, ba.lower, bb.upper))
          return {Status::Refuted, 0, h, std::pair{ba.lower, bb.upper}};
      }
    }
  }
  return {Status::HoldsAtResolution, lim.grid, std::nullopt, std::nullopt};
}

}  // namespace

Decision check_leq(const EffectSpec& e, const AnyTree& a, const AnyTree& b,
                   const QueryLimits& limits) {
  validate_any(e, a);
  validate_any(e, b);
  switch (e.strategy) {
    case LeqStrategy::Enumerate:
      return check_enumerate(e, a, b);
    case LeqStrategy::Vertex:
      return check_vertex(e, a, b, limits);
    case LeqStrategy::CaseAnalysis:
      return check_cost(e, a, b);
    case LeqStrategy::Bisimulation:
      return check_input(e, a, b);
    case LeqStrategy::Grid:
      return check_grid(e, a, b, limits);
  }
  throw Error("unreachable strategy");
}

DistinguishReport distinguish(const EffectSpec& e, const AnyTree& a, const AnyTree& b,
                              const QueryLimits& limits) {
  DistinguishReport r;
  r.lr = check_leq(e, a, b, limits);
  r.rl = check_leq(e, b, a, limits);
  if (r.lr.refuted()) {
    r.found = {*r.lr.witness, r.lr.values->first, r.lr.values->second};
  } else if (r.rl.refuted()) {
    // values are reported left-to-right regardless of the refuted direction
    r.found = {*r.rl.witness, r.rl.values->second, r.rl.values->first};
  }
  return r;
}

bool SingleValuedReport::rows_hold_lr() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const SingleValuedRow& r) { return !r.lr.refuted(); });
}

bool SingleValuedReport::rows_hold_rl() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const SingleValuedRow& r) { return !r.rl.refuted(); });
}

SingleValuedReport check_single_valued_instance(const EffectSpec& e, const Tree& a,
                                                const Tree& b, const QueryLimits& limits) {
  e.signature.validate(a);
  e.signature.validate(b);
  SingleValuedReport rep;
  rep.vars = joint_vars(a, b);
  const std::size_t n = rep.vars.size();
  if (n > 16) throw Error("too many variables for the substitution table");
  for (std::uint64_t row = 0; row < (1ull << n); ++row) {
    SingleValuedRow r;
    std::vector<std::pair<VarId, Tree>> subst;
    for (std::size_t j = 0; j < n; ++j) {
      const bool to_leaf = (row >> (n - 1 - j)) & 1u;
      r.to_leaf.push_back(to_leaf);
      subst.emplace_back(rep.vars[j], to_leaf ? var(0) : bot());
    }
    const Tree fa = substitute(subst, a);
    const Tree fb = substitute(subst, b);
    r.lr = check_leq(e, AnyTree(fa), AnyTree(fb), limits);
    r.rl = check_leq(e, AnyTree(fb), AnyTree(fa), limits);
    rep.rows.push_back(std::move(r));
  }
  rep.full_lr = check_leq(e, AnyTree(a), AnyTree(b), limits);
  rep.full_rl = check_leq(e, AnyTree(b), AnyTree(a), limits);
  return rep;
}

}  // namespace teq
