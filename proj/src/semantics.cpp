#include "teq/semantics.hpp"

#include "teq/sampling.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <random>
#include <set>

#include "teq/parser.hpp"

namespace teq {

namespace {

// "upd[3]" -> 3, "raise[e2]" -> "e2"
std::string bracket_arg(const std::string& op) {
  auto l = op.find('[');
  if (l == std::string::npos || op.back() != ']') throw Error("unknown operator: " + op);
  return op.substr(l + 1, op.size() - l - 2);
}

int bracket_nat(const std::string& op) {
  const std::string a = bracket_arg(op);
  if (a.empty() || a.find_first_not_of("0123456789") != std::string::npos)
    throw Error("unknown operator: " + op);
  return std::stoi(a);
}

bool op_is(const std::string& op, const char* base) {
  const std::size_t n = std::strlen(base);
  return op.size() > n && op.compare(0, n, base) == 0 && op[n] == '[';
}

[[noreturn]] void bad_carrier() { throw Error("assignment value has the wrong carrier"); }

// ---- three-point must/may evaluation ----

Value eval_nondet(const EffectSpec& e, const Graph& g, const Assignment& h) {
  bool cycle = false;     // an infinite run exists
  bool all_top = true;    // every reachable leaf is certain
  bool some_mid = false;  // some reachable leaf is at least possible
  std::vector<int> mark(g.nodes.size(), 0);
  std::function<void(std::uint32_t)> visit = [&](std::uint32_t i) {
    if (mark[i] == 1) {
      cycle = true;
      return;
    }
    if (mark[i] == 2) return;
    mark[i] = 1;
    const Graph::N& n = g.nodes[i];
    switch (n.kind) {
      case NodeKind::Bot:
        all_top = false;
        break;
      case NodeKind::Top:
        some_mid = true;
        break;
      case NodeKind::Var: {
        const Value val = h.get(n.var, e);
        const auto* p = std::get_if<ThreePointV>(&val);
        if (p == nullptr) bad_carrier();
        if (p->v < 2) all_top = false;
        if (p->v >= 1) some_mid = true;
        break;
      }
      case NodeKind::Op:
        if (n.op != "or") throw Error("unknown operator: " + n.op);
        for (std::uint32_t k : n.kids) visit(k);
        break;
      case NodeKind::Ref:
        throw Error("unresolved state reference");
    }
    mark[i] = 2;
  };
  visit(g.root);
  if (!cycle && all_top) return three_point(2);
  return three_point(some_mid ? 1 : 0);
}

// ---- exact dyadic evaluation on a finite unfolding ----

Dyadic eval_prob_at(const EffectSpec& e, const Graph& g, const Assignment& h,
                    std::vector<std::optional<Dyadic>>& memo, std::uint32_t i) {
  if (memo[i]) return *memo[i];
  const Graph::N& n = g.nodes[i];
  Dyadic r;
  switch (n.kind) {
    case NodeKind::Bot:
      r = Dyadic::zero();
      break;
    case NodeKind::Top:
      r = Dyadic::one();
      break;
    case NodeKind::Var: {
      const Value val = h.get(n.var, e);
      const auto* p = std::get_if<DyadicV>(&val);
      if (p == nullptr) bad_carrier();
      r = p->d;
      break;
    }
    case NodeKind::Op:
      if (n.op != "por") throw Error("unknown operator: " + n.op);
      r = dyadic_avg(eval_prob_at(e, g, h, memo, n.kids[0]),
                     eval_prob_at(e, g, h, memo, n.kids[1]));
      break;
    case NodeKind::Ref:
      throw Error("unresolved state reference");
  }
  memo[i] = r;
  return r;
}

// ---- weakest-precondition runs over store cells ----

Value eval_store(const EffectSpec& e, const Graph& g, const Assignment& h) {
  const int k = e.params.store_k;
  std::uint32_t bits = 0;
  for (int m = 0; m < k; ++m) {
    std::set<std::pair<std::uint32_t, int>> seen;
    std::uint32_t cur = g.root;
    int st = m;
    for (;;) {
      if (!seen.insert({cur, st}).second) break;  // diverges
      const Graph::N& n = g.nodes[cur];
      if (n.kind == NodeKind::Bot) break;
      if (n.kind == NodeKind::Top) {
        bits |= 1u << m;
        break;
      }
      if (n.kind == NodeKind::Var) {
        const Value val = h.get(n.var, e);
        const auto* p = std::get_if<StateSetV>(&val);
        if (p == nullptr) bad_carrier();
        if ((p->bits >> st) & 1u) bits |= 1u << m;
        break;
      }
      if (n.kind != NodeKind::Op) throw Error("unresolved state reference");
      if (n.op == "lkp") {
        cur = n.kids[st];
      } else if (op_is(n.op, "upd")) {
        st = bracket_nat(n.op);
        if (st < 0 || st >= k) throw Error("cell index out of range: " + n.op);
        cur = n.kids[0];
      } else {
        throw Error("unknown operator: " + n.op);
      }
    }
  }
  return state_set(bits, k);
}

// ---- least fixed point over the flat exception lattice ----

Value eval_exceptions(const EffectSpec& e, const Graph& g, const Assignment& h) {
  std::vector<FlatExcV> val(g.nodes.size());  // all bottom
  auto step = [&](std::uint32_t i) -> FlatExcV {
    const Graph::N& n = g.nodes[i];
    switch (n.kind) {
      case NodeKind::Bot:
        return {};
      case NodeKind::Top:
        return {FlatExcV::Top, ""};
      case NodeKind::Var: {
        const Value v = h.get(n.var, e);
        const auto* p = std::get_if<FlatExcV>(&v);
        if (p == nullptr) bad_carrier();
        return *p;
      }
      case NodeKind::Op: {
        if (op_is(n.op, "raise")) return {FlatExcV::Raise, bracket_arg(n.op)};
        if (!op_is(n.op, "catch")) throw Error("unknown operator: " + n.op);
        const std::string exc = bracket_arg(n.op);
        const FlatExcV& a = val[n.kids[0]];
        if (a.tag == FlatExcV::Bot) return {};
        if (a.tag == FlatExcV::Top) return {FlatExcV::Top, ""};
        return a.exc == exc ? val[n.kids[1]] : a;
      }
      case NodeKind::Ref:
        throw Error("unresolved state reference");
    }
    return {};
  };
  // the lattice has height two, so each node rises at most twice
  const std::size_t rounds = 2 * g.nodes.size() + 2;
  for (std::size_t r = 0; r < rounds; ++r) {
    bool changed = false;
    for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
      FlatExcV next = step(i);
      if (next.tag != val[i].tag || next.exc != val[i].exc) {
        val[i] = next;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return val[g.root];
}

// ---- tick counting along the unique run ----

Value eval_cost(const EffectSpec& e, const Graph& g, const Assignment& h) {
  std::set<std::uint32_t> seen;
  std::uint64_t ticks = 0;
  std::uint32_t cur = g.root;
  for (;;) {
    if (!seen.insert(cur).second) return ext_nat_inf();
    const Graph::N& n = g.nodes[cur];
    switch (n.kind) {
      case NodeKind::Bot:
        return ext_nat_inf();
      case NodeKind::Top:
        return ext_nat(ticks);
      case NodeKind::Var: {
        const Value v = h.get(n.var, e);
        const auto* p = std::get_if<ExtNatV>(&v);
        if (p == nullptr) bad_carrier();
        return p->inf ? ext_nat_inf() : ext_nat(ticks + p->n);
      }
      case NodeKind::Op:
        if (n.op != "tick") throw Error("unknown operator: " + n.op);
        ++ticks;
        cur = n.kids[0];
        break;
      case NodeKind::Ref:
        throw Error("unresolved state reference");
    }
  }
}

// ---- grafting closed trees over the leaves ----

Tree shift_refs(const Tree& t, std::uint32_t off) {
  if (t->kind == NodeKind::Ref) return ref(t->index + off);
  if (t->children.empty()) return t;
  std::vector<Tree> kids;
  kids.reserve(t->children.size());
  for (const Tree& c : t->children) kids.push_back(shift_refs(c, off));
  return node(t->op, std::move(kids));
}

AnyTree normalize_any(const RegularTree& r) {
  if (r.states.size() == 1 && !tree_has_refs(r.states[0])) return r.states[0];
  return r;
}

Value eval_input(const EffectSpec& e, const AnyTree& t, const Assignment& h) {
  const RegularTree base =
      any_is_regular(t) ? std::get<RegularTree>(t) : regular_of(std::get<Tree>(t));
  std::vector<Tree> states(base.states.size());
  std::vector<std::string> names = base.names;
  std::function<Tree(const Tree&)> graft = [&](const Tree& b) -> Tree {
    if (b->kind == NodeKind::Var) {
      const Value val = h.get(b->index, e);
      const auto* p = std::get_if<ClosedTreeV>(&val);
      if (p == nullptr || p->t == nullptr) bad_carrier();
      const AnyTree& image = *p->t;
      if (const auto* fin = std::get_if<Tree>(&image)) return *fin;
      // fresh copy per occurrence: every reference stays internal to its copy
      const RegularTree& r = std::get<RegularTree>(image);
      const auto off = static_cast<std::uint32_t>(states.size());
      for (std::uint32_t i = 0; i < r.states.size(); ++i) {
        states.push_back(shift_refs(r.states[i], off));
        names.emplace_back();
      }
      return ref(off + r.root);
    }
    if (b->kind == NodeKind::Op) {
      if (e.signature.find(b->op) == nullptr) throw Error("unknown operator: " + b->op);
      std::vector<Tree> kids;
      kids.reserve(b->children.size());
      for (const Tree& c : b->children) kids.push_back(graft(c));
      return node(b->op, std::move(kids));
    }
    return b;
  };
  for (std::uint32_t s = 0; s < base.states.size(); ++s) states[s] = graft(base.states[s]);
  return closed_tree(normalize_any(make_regular(std::move(states), std::move(names), base.root)));
}

// ---- interval evaluation for the combined theory ----

IntervalV eval_interval_at(const EffectSpec& e, const Graph& g, const Assignment& h,
                           std::vector<std::optional<IntervalV>>& memo, std::uint32_t i) {
  if (memo[i]) return *memo[i];
  const Graph::N& n = g.nodes[i];
  IntervalV r;
  switch (n.kind) {
    case NodeKind::Bot:
      r = {Dyadic::zero(), Dyadic::zero()};
      break;
    case NodeKind::Top:
      r = {Dyadic::one(), Dyadic::one()};
      break;
    case NodeKind::Var: {
      const Value val = h.get(n.var, e);
      const auto* p = std::get_if<IntervalV>(&val);
      if (p == nullptr) bad_carrier();
      r = *p;
      break;
    }
    case NodeKind::Op: {
      const IntervalV a = eval_interval_at(e, g, h, memo, n.kids[0]);
      const IntervalV b = eval_interval_at(e, g, h, memo, n.kids[1]);
      if (n.op == "or") {
        r = {dyadic_leq(a.lo, b.lo) ? a.lo : b.lo, dyadic_leq(a.hi, b.hi) ? b.hi : a.hi};
      } else if (n.op == "por") {
        r = {dyadic_avg(a.lo, b.lo), dyadic_avg(a.hi, b.hi)};
      } else {
        throw Error("unknown operator: " + n.op);
      }
      break;
    }
    case NodeKind::Ref:
      throw Error("unresolved state reference");
  }
  memo[i] = r;
  return r;
}

}  // namespace

Value eval_exact(const EffectSpec& e, const AnyTree& t, const Assignment& h) {
  if (e.space == Space::ClosedTree) return eval_input(e, t, h);
  const Graph g = Graph::of(t);
  switch (e.space) {
    case Space::ThreePoint:
      return eval_nondet(e, g, h);
    case Space::Dyadic: {
      if (g.cyclic()) throw Error("exact evaluation needs a finite unfolding; use bounds");
      std::vector<std::optional<Dyadic>> memo(g.nodes.size());
      return dyadic_value(eval_prob_at(e, g, h, memo, g.root));
    }
    case Space::StateSet:
      return eval_store(e, g, h);
    case Space::FlatExc:
      return eval_exceptions(e, g, h);
    case Space::ExtNat:
      return eval_cost(e, g, h);
    case Space::Interval: {
      if (g.cyclic()) throw Error("exact evaluation needs a finite unfolding; use bounds");
      std::vector<std::optional<IntervalV>> memo(g.nodes.size());
      const IntervalV v = eval_interval_at(e, g, h, memo, g.root);
      return interval(v.lo, v.hi);
    }
    default:
      throw Error("unreachable space");
  }
}

namespace {

bool gap_within(const EffectSpec& e, const Value& lo, const Value& hi, const Dyadic& eps) {
  if (e.space == Space::Dyadic) {
    const auto& a = std::get<DyadicV>(lo).d;
    const auto& b = std::get<DyadicV>(hi).d;
    return dyadic_leq(dyadic_sub(b, a), eps);
  }
  const auto& a = std::get<IntervalV>(lo);
  const auto& b = std::get<IntervalV>(hi);
  return dyadic_leq(dyadic_sub(b.lo, a.lo), eps) && dyadic_leq(dyadic_sub(b.hi, a.hi), eps);
}

}  // namespace

Bounds eval_bounds(const EffectSpec& e, const AnyTree& t, const Assignment& h, int max_depth,
                   const Dyadic& eps) {
  if (max_depth < 1) throw Error("depth must be positive");
  const bool approximable = e.space == Space::Dyadic || e.space == Space::Interval;
  const auto* r = std::get_if<RegularTree>(&t);
  if (!approximable || r == nullptr || regular_is_finite(*r)) {
    const Value v = eval_exact(e, t, h);
    return {v, v, true, 0};
  }
  int d = 1;
  for (;;) {
    d = std::min(d, max_depth);
    const Value lo = eval_exact(e, AnyTree(truncate(*r, d, false)), h);
    const Value hi = eval_exact(e, AnyTree(truncate(*r, d, true)), h);
    Bounds out{lo, hi, gap_within(e, lo, hi, eps), d};
    if (out.converged || d == max_depth) return out;
    d *= 2;
  }
}

namespace {

// classes of closed finite trees over {or}: 2 all leaves certain, 1 some
// leaf possible, 0 otherwise
int nondet_class(const Tree& t) {
  if (t->kind == NodeKind::Bot) return 0;
  if (t->kind == NodeKind::Top) return 2;
  if (t->kind != NodeKind::Op || t->op != "or") throw Error("unknown operator: " + t->op);
  const int a = nondet_class(t->children[0]);
  const int b = nondet_class(t->children[1]);
  if (a == 2 && b == 2) return 2;
  return (a >= 1 || b >= 1) ? 1 : 0;
}

Dyadic prob_mass(const Tree& t) {
  if (t->kind == NodeKind::Bot) return Dyadic::zero();
  if (t->kind == NodeKind::Top) return Dyadic::one();
  if (t->kind != NodeKind::Op || t->op != "por") throw Error("unknown operator: " + t->op);
  return dyadic_avg(prob_mass(t->children[0]), prob_mass(t->children[1]));
}

bool store_run(const Tree& t, int st, int k) {
  if (t->kind == NodeKind::Bot) return false;
  if (t->kind == NodeKind::Top) return true;
  if (t->kind != NodeKind::Op) throw Error("closed tree expected");
  if (t->op == "lkp") return store_run(t->children[st], st, k);
  if (op_is(t->op, "upd")) {
    const int n = bracket_nat(t->op);
    if (n < 0 || n >= k) throw Error("cell index out of range: " + t->op);
    return store_run(t->children[0], n, k);
  }
  throw Error("unknown operator: " + t->op);
}

FlatExcV exc_normal_form(const Tree& t) {
  if (t->kind == NodeKind::Bot) return {};
  if (t->kind == NodeKind::Top) return {FlatExcV::Top, ""};
  if (t->kind != NodeKind::Op) throw Error("closed tree expected");
  if (op_is(t->op, "raise")) return {FlatExcV::Raise, bracket_arg(t->op)};
  if (!op_is(t->op, "catch")) throw Error("unknown operator: " + t->op);
  const FlatExcV a = exc_normal_form(t->children[0]);
  if (a.tag == FlatExcV::Raise && a.exc == bracket_arg(t->op))
    return exc_normal_form(t->children[1]);
  return a;
}

// (finite?, tick count); infinite when the run ends in bottom
std::pair<bool, std::uint64_t> cost_measure(const Tree& t) {
  if (t->kind == NodeKind::Bot) return {false, 0};
  if (t->kind == NodeKind::Top) return {true, 0};
  if (t->kind != NodeKind::Op || t->op != "tick") throw Error("closed tree expected");
  auto [fin, n] = cost_measure(t->children[0]);
  return {fin, n + 1};
}

}  // namespace

bool base_oracle(const EffectSpec& e, const Tree& a, const Tree& b) {
  if (!tree_closed(a) || !tree_closed(b)) throw Error("closed finite trees expected");
  switch (e.kind) {
    case EffectKind::Nondet:
      return nondet_class(a) <= nondet_class(b);
    case EffectKind::Prob:
      return dyadic_leq(prob_mass(a), prob_mass(b));
    case EffectKind::Store: {
      const int k = e.params.store_k;
      for (int m = 0; m < k; ++m)
        if (store_run(a, m, k) && !store_run(b, m, k)) return false;
      return true;
    }
    case EffectKind::Exceptions: {
      const FlatExcV x = exc_normal_form(a);
      const FlatExcV y = exc_normal_form(b);
      if (x.tag == FlatExcV::Bot || y.tag == FlatExcV::Top) return true;
      return x.tag == y.tag && x.exc == y.exc;
    }
    case EffectKind::Input:
      return tree_leq(a, b);
    case EffectKind::Cost: {
      const auto x = cost_measure(a);
      const auto y = cost_measure(b);
      if (!x.first) return true;   // infinite cost is the bottom
      if (!y.first) return false;
      return x.second >= y.second;  // cheaper is higher
    }
    case EffectKind::NondetProb:
      throw Error("no direct characterization for the combined theory");
  }
  throw Error("unreachable effect");
}

std::vector<Tree> enumerate_trees(const Signature& sig, const std::vector<Tree>& atoms,
                                  int depth, std::size_t bound) {
  if (depth < 0) throw Error("negative depth");
  std::vector<Tree> all = atoms;
  for (const Signature::Op& o : sig.operators)
    if (o.arity == 0) all.push_back(node(o.name, {}));
  if (all.size() > bound) throw Error("enumeration exceeds bound");
  std::size_t prev_begin = 0;  // first index of the previous layer
  for (int d = 1; d <= depth; ++d) {
    const std::size_t layer_end = all.size();
    for (const Signature::Op& o : sig.operators) {
      if (o.arity == 0) continue;
      const auto arity = static_cast<std::size_t>(o.arity);
      std::vector<std::size_t> idx(arity, 0);
      for (;;) {
        // at least one child from the newest layer, so depth is exactly d
        bool fresh = false;
        for (std::size_t i : idx) fresh |= i >= prev_begin;
        if (fresh) {
          std::vector<Tree> kids;
          kids.reserve(arity);
          for (std::size_t i : idx) kids.push_back(all[i]);
          all.push_back(node(o.name, std::move(kids)));
          if (all.size() > bound) throw Error("enumeration exceeds bound");
        }
        std::size_t c = arity;
        while (c > 0) {
          if (++idx[c - 1] < layer_end) break;
          idx[c - 1] = 0;
          --c;
        }
        if (c == 0) break;
      }
    }
    prev_begin = layer_end;
    if (all.size() == layer_end) break;  // no operator can grow the set
  }
  return all;
}

std::vector<Tree> enumerate_closed_trees(const EffectSpec& e, int depth, std::size_t bound) {
  return enumerate_trees(e.signature, {bot(), top()}, depth, bound);
}

int ValueTable::class_of_member(const Tree& t) const {
  auto it = member_class.find(t);
  return it == member_class.end() ? -1 : it->second;
}

ValueTable build_quotient(const EffectSpec& e, int depth, std::size_t bound) {
  ValueTable tb;
  tb.effect = e;
  tb.depth = depth;
  const std::vector<Tree> trees = enumerate_closed_trees(e, depth, bound);
  for (const Tree& t : trees) {
    int cls = -1;
    for (std::size_t c = 0; c < tb.classes.size(); ++c) {
      const Tree& rep = tb.classes[c].canonical;
      if (base_oracle(e, t, rep) && base_oracle(e, rep, t)) {
        cls = static_cast<int>(c);
        break;
      }
    }
    if (cls < 0) {
      cls = static_cast<int>(tb.classes.size());
      tb.classes.push_back({t, t, {}, eval_exact(e, t, {})});
    }
    ValueTable::Class& c = tb.classes[cls];
    c.members.push_back(t);
    if (tree_compare(t, c.canonical) < 0) c.canonical = t;
    if (tree_compare(t, c.greatest) > 0) c.greatest = t;
    tb.member_class.emplace(t, cls);
  }
  const std::size_t n = tb.classes.size();
  tb.leq.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      tb.leq[i][j] = base_oracle(e, tb.classes[i].canonical, tb.classes[j].canonical);
  return tb;
}

int alpha_quotient(const ValueTable& table, const Tree& t_over_classes, Choice choice) {
  const auto ncls = static_cast<VarId>(table.classes.size());
  const Tree grafted = substitute(
      [&](VarId v) -> Tree {
        if (v >= ncls) throw Error("class index out of range");
        const ValueTable::Class& c = table.classes[v];
        return choice == Choice::Least ? c.canonical : c.greatest;
      },
      t_over_classes);
  table.effect.signature.validate(grafted);
  if (int c = table.class_of_member(grafted); c >= 0) return c;
  // beyond the enumerated depth: classify against representatives
  for (std::size_t c = 0; c < table.classes.size(); ++c) {
    const Tree& rep = table.classes[c].canonical;
    if (base_oracle(table.effect, grafted, rep) && base_oracle(table.effect, rep, grafted))
      return static_cast<int>(c);
  }
  throw Error("value outside the enumerated quotient");
}

namespace {

void report_failure(LawReport& rep, const std::string& note) {
  ++rep.failures;
  if (rep.notes.size() < 5) rep.notes.push_back(note);
}

}  // namespace

LawReport check_em_laws(const EffectSpec& e, int samples, std::uint64_t seed) {
  LawReport rep;
  TreeSampler gen(e, seed);
  constexpr VarId kVars = 3;
  for (int s = 0; s < samples; ++s) {
    // unit: evaluating a bare leaf gives back its assigned value
    Assignment h;
    for (VarId v = 0; v < kVars; ++v) h.map[v] = gen.value();
    ++rep.checked;
    const Value u = eval_exact(e, AnyTree(var(0)), h);
    if (!value_eq(e, u, h.map[0]))
      report_failure(rep, "unit: " + value_print(h.map[0]) + " -> " + value_print(u));

    // multiplication: evaluating layer by layer agrees with flattening
    const Tree shape = gen.tree(2, kVars);
    std::vector<Tree> payload;
    for (VarId v = 0; v < kVars; ++v) payload.push_back(gen.tree(2, kVars));
    Assignment inner;
    for (VarId v = 0; v < kVars; ++v)
      inner.map[v] = eval_exact(e, AnyTree(payload[v]), h);
    const Value lhs = eval_exact(e, AnyTree(shape), inner);
    const Tree flat = flatten(shape, [&](VarId v) { return payload[v]; });
    const Value rhs = eval_exact(e, AnyTree(flat), h);
    ++rep.checked;
    if (!value_eq(e, lhs, rhs))
      report_failure(rep, "mult: shape " + print_tree(shape) + ": " + value_print(lhs) +
                              " != " + value_print(rhs));
  }
  return rep;
}

LawReport check_em_laws_quotient(const ValueTable& table, int samples, std::uint64_t seed) {
  LawReport rep;
  TreeSampler gen(table.effect, seed);
  const auto ncls = static_cast<VarId>(table.classes.size());
  for (const Choice choice : {Choice::Least, Choice::Greatest}) {
    // unit, exhaustively: each class leaf maps to its own class
    for (VarId c = 0; c < ncls; ++c) {
      ++rep.checked;
      if (alpha_quotient(table, var(c), choice) != static_cast<int>(c))
        report_failure(rep, "quotient unit: class " + std::to_string(c));
    }
  }
  for (int s = 0; s < samples; ++s) {
    constexpr VarId kVars = 3;
    const Tree shape = gen.tree(2, kVars);
    std::vector<Tree> payload;
    for (VarId v = 0; v < kVars; ++v) payload.push_back(gen.tree(1, ncls));
    for (const Choice choice : {Choice::Least, Choice::Greatest}) {
      std::vector<int> cls;
      for (VarId v = 0; v < kVars; ++v)
        cls.push_back(alpha_quotient(table, payload[v], choice));
      const Tree collapsed =
          map_tree([&](VarId v) { return var(static_cast<VarId>(cls[v])); }, shape);
      const int lhs = alpha_quotient(table, collapsed, choice);
      const Tree flat = flatten(shape, [&](VarId v) { return payload[v]; });
      const int rhs = alpha_quotient(table, flat, choice);
      ++rep.checked;
      if (lhs != rhs)
        report_failure(rep, "quotient mult: shape " + print_tree(shape) + ": class " +
                                std::to_string(lhs) + " != " + std::to_string(rhs));
    }
  }
  return rep;
}

}  // namespace teq
