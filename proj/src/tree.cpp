#include "teq/tree.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace teq {

namespace {

std::size_t hash_combine(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

Tree make_node(NodeKind kind, VarId index, std::string op, std::vector<Tree> children) {
  auto n = std::make_shared<TreeNode>();
  n->kind = kind;
  n->index = index;
  n->op = std::move(op);
  n->children = std::move(children);
  std::size_t h = hash_combine(static_cast<std::size_t>(kind) * 0x51ed2701, index);
  for (char c : n->op) h = hash_combine(h, static_cast<std::size_t>(c) + 0x100);
  int d = 0;
  for (const Tree& c : n->children) {
    h = hash_combine(h, c->hash);
    d = std::max(d, c->depth + 1);
  }
  n->hash = h;
  n->depth = d;
  return n;
}

}  // namespace

Tree bot() {
  static const Tree t = make_node(NodeKind::Bot, 0, "", {});
  return t;
}

Tree top() {
  static const Tree t = make_node(NodeKind::Top, 0, "", {});
  return t;
}

Tree var(VarId v) { return make_node(NodeKind::Var, v, "", {}); }

Tree ref(VarId state) { return make_node(NodeKind::Ref, state, "", {}); }

Tree node(const std::string& op, std::vector<Tree> children) {
  return make_node(NodeKind::Op, 0, op, std::move(children));
}

bool tree_equal(const Tree& a, const Tree& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->kind != b->kind || a->index != b->index || a->op != b->op ||
      a->children.size() != b->children.size())
    return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!tree_equal(a->children[i], b->children[i])) return false;
  return true;
}

std::size_t tree_size(const Tree& t) {
  std::size_t n = 1;
  for (const Tree& c : t->children) n += tree_size(c);
  return n;
}

int tree_depth(const Tree& t) { return t->depth; }

namespace {

int structural_compare(const Tree& a, const Tree& b) {
  auto rank = [](const Tree& t) -> long long {
    switch (t->kind) {
      case NodeKind::Bot: return 0;
      case NodeKind::Top: return 1;
      case NodeKind::Var: return 2 + static_cast<long long>(t->index);
      case NodeKind::Ref: return 1u << 30;
      case NodeKind::Op: return 1u << 31;
    }
    return 0;
  };
  long long ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (a->kind == NodeKind::Ref) {
    if (a->index != b->index) return a->index < b->index ? -1 : 1;
    return 0;
  }
  if (a->kind != NodeKind::Op) return 0;
  if (a->op != b->op) return a->op < b->op ? -1 : 1;
  if (a->children.size() != b->children.size())
    return a->children.size() < b->children.size() ? -1 : 1;
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    int c = structural_compare(a->children[i], b->children[i]);
    if (c != 0) return c;
  }
  return 0;
}

}  // namespace

int tree_compare(const Tree& a, const Tree& b) {
  std::size_t sa = tree_size(a), sb = tree_size(b);
  if (sa != sb) return sa < sb ? -1 : 1;
  return structural_compare(a, b);
}

namespace {
void collect_vars(const Tree& t, std::set<VarId>& out) {
  if (t->kind == NodeKind::Var) out.insert(t->index);
  for (const Tree& c : t->children) collect_vars(c, out);
}
}  // namespace

std::vector<VarId> tree_vars(const Tree& t) {
  std::set<VarId> s;
  collect_vars(t, s);
  return {s.begin(), s.end()};
}

bool tree_closed(const Tree& t) {
  if (t->kind == NodeKind::Var || t->kind == NodeKind::Ref) return false;
  for (const Tree& c : t->children)
    if (!tree_closed(c)) return false;
  return true;
}

bool tree_has_refs(const Tree& t) {
  if (t->kind == NodeKind::Ref) return true;
  for (const Tree& c : t->children)
    if (tree_has_refs(c)) return true;
  return false;
}

Tree subtree_at(const Tree& t, const Path& p) {
  Tree cur = t;
  for (std::uint32_t i : p) {
    if (i >= cur->children.size()) throw Error("path leaves the tree");
    cur = cur->children[i];
  }
  return cur;
}

Tree replace_at(const Tree& t, const Path& p, const Tree& s) {
  if (p.empty()) return s;
  if (p.front() >= t->children.size()) throw Error("path leaves the tree");
  std::vector<Tree> kids = t->children;
  Path rest(p.begin() + 1, p.end());
  kids[p.front()] = replace_at(kids[p.front()], rest, s);
  return node(t->op, std::move(kids));
}

const Signature::Op* Signature::find(const std::string& name) const {
  for (const Op& o : operators)
    if (o.name == name) return &o;
  return nullptr;
}

void Signature::validate(const Tree& t) const {
  switch (t->kind) {
    case NodeKind::Bot:
    case NodeKind::Top:
    case NodeKind::Var:
      return;
    case NodeKind::Ref:
      throw Error("state reference outside a recursive binding");
    case NodeKind::Op: {
      const Op* o = find(t->op);
      if (o == nullptr) throw Error("unknown operator: " + t->op);
      if (static_cast<std::size_t>(o->arity) != t->children.size())
        throw Error("operator " + t->op + " expects " + std::to_string(o->arity) +
                    " arguments, got " + std::to_string(t->children.size()));
      for (const Tree& c : t->children) validate(c);
      return;
    }
  }
}

namespace {

Tree remap_refs(const Tree& t, const std::vector<std::uint32_t>& remap) {
  if (t->kind == NodeKind::Ref) return ref(remap[t->index]);
  if (t->children.empty()) return t;
  std::vector<Tree> kids;
  kids.reserve(t->children.size());
  for (const Tree& c : t->children) kids.push_back(remap_refs(c, remap));
  return node(t->op, std::move(kids));
}

void dfs_order(const std::vector<Tree>& states, std::uint32_t s,
               std::vector<std::uint32_t>& order, std::vector<bool>& seen) {
  if (s >= states.size()) throw Error("dangling state reference");
  if (seen[s]) return;
  seen[s] = true;
  order.push_back(s);
  // visit references in body preorder
  std::function<void(const Tree&)> walk = [&](const Tree& t) {
    if (t->kind == NodeKind::Ref) dfs_order(states, t->index, order, seen);
    for (const Tree& c : t->children) walk(c);
  };
  walk(states[s]);
}

}  // namespace

RegularTree make_regular(std::vector<Tree> states, std::vector<std::string> names,
                         std::uint32_t root) {
  if (states.empty() || root >= states.size()) throw Error("empty recursive system");
  // Normalize away alias states (a body that is a bare reference); a cycle of
  // aliases is unguarded recursion.
  std::vector<std::uint32_t> target(states.size());
  for (std::uint32_t s = 0; s < states.size(); ++s) {
    std::uint32_t t = s;
    std::set<std::uint32_t> seen_alias;
    while (t < states.size() && states[t]->kind == NodeKind::Ref) {
      if (!seen_alias.insert(t).second) throw Error("unguarded recursion");
      t = states[t]->index;
    }
    if (t >= states.size()) throw Error("dangling state reference");
    target[s] = t;
  }
  bool any_alias = false;
  for (std::uint32_t s = 0; s < states.size(); ++s) any_alias |= target[s] != s;
  if (any_alias) {
    for (std::uint32_t s = 0; s < states.size(); ++s)
      if (states[s]->kind != NodeKind::Ref) states[s] = remap_refs(states[s], target);
    root = target[root];
  }
  std::vector<bool> seen(states.size(), false);
  std::vector<std::uint32_t> order;
  dfs_order(states, root, order, seen);
  std::vector<std::uint32_t> remap(states.size(), 0);
  for (std::uint32_t i = 0; i < order.size(); ++i) remap[order[i]] = i;
  RegularTree out;
  out.states.resize(order.size());
  out.names.resize(order.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) {
    out.states[i] = remap_refs(states[order[i]], remap);
    out.names[i] = order[i] < names.size() && !names[order[i]].empty()
                       ? names[order[i]]
                       : ("s" + std::to_string(i));
  }
  out.root = 0;
  return out;
}

RegularTree regular_of(const Tree& finite) {
  if (tree_has_refs(finite)) throw Error("finite tree expected");
  return make_regular({finite}, {"s0"}, 0);
}

namespace {

// Bisimilarity on the product graph: pairs on the in-progress stack are
// coinductively assumed, so only a finite mismatch refutes.
struct BisimSearch {
  const Graph& a;
  const Graph& b;
  std::unordered_map<std::uint64_t, bool> memo;
  std::unordered_set<std::uint64_t> in_progress;

  bool run(std::uint32_t x, std::uint32_t y) {
    const std::uint64_t key = (static_cast<std::uint64_t>(x) << 32) | y;
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (in_progress.count(key)) return true;
    const Graph::N& na = a.nodes[x];
    const Graph::N& nb = b.nodes[y];
    bool ok = false;
    if (na.kind != nb.kind) {
      ok = false;
    } else if (na.kind == NodeKind::Var) {
      ok = na.var == nb.var;
    } else if (na.kind == NodeKind::Op) {
      if (na.op == nb.op && na.kids.size() == nb.kids.size()) {
        in_progress.insert(key);
        ok = true;
        for (std::size_t i = 0; i < na.kids.size() && ok; ++i)
          ok = run(na.kids[i], nb.kids[i]);
        in_progress.erase(key);
      }
    } else {
      ok = true;
    }
    memo[key] = ok;
    return ok;
  }
};

}  // namespace

bool regular_equal(const RegularTree& a, const RegularTree& b) {
  Graph ga = Graph::of(a);
  Graph gb = Graph::of(b);
  BisimSearch s{ga, gb, {}, {}};
  return s.run(ga.root, gb.root);
}

namespace {

// cycle detection over the state graph (edge: body of s references t)
bool state_cycle(const RegularTree& t, std::uint32_t s, std::vector<int>& mark) {
  if (mark[s] == 1) return true;
  if (mark[s] == 2) return false;
  mark[s] = 1;
  bool cyc = false;
  std::function<void(const Tree&)> walk = [&](const Tree& b) {
    if (cyc) return;
    if (b->kind == NodeKind::Ref) cyc = cyc || state_cycle(t, b->index, mark);
    for (const Tree& c : b->children) walk(c);
  };
  walk(t.states[s]);
  mark[s] = 2;
  return cyc;
}

}  // namespace

bool regular_is_finite(const RegularTree& t) {
  std::vector<int> mark(t.states.size(), 0);
  return !state_cycle(t, t.root, mark);
}

namespace {
Tree unfold_state(const RegularTree& t, std::uint32_t s);

Tree unfold_body(const RegularTree& t, const Tree& b) {
  if (b->kind == NodeKind::Ref) return unfold_state(t, b->index);
  if (b->children.empty()) return b;
  std::vector<Tree> kids;
  kids.reserve(b->children.size());
  for (const Tree& c : b->children) kids.push_back(unfold_body(t, c));
  return node(b->op, std::move(kids));
}

Tree unfold_state(const RegularTree& t, std::uint32_t s) { return unfold_body(t, t.states[s]); }
}  // namespace

Tree regular_unfold_finite(const RegularTree& t) {
  if (!regular_is_finite(t)) throw Error("recursive tree has a cycle");
  return unfold_state(t, t.root);
}

std::vector<VarId> regular_vars(const RegularTree& t) {
  std::set<VarId> s;
  for (const Tree& b : t.states) collect_vars(b, s);
  return {s.begin(), s.end()};
}

bool any_is_regular(const AnyTree& t) { return std::holds_alternative<RegularTree>(t); }

std::vector<VarId> any_vars(const AnyTree& t) {
  if (auto* f = std::get_if<Tree>(&t)) return tree_vars(*f);
  return regular_vars(std::get<RegularTree>(t));
}

namespace {

using NodeMemo = std::unordered_map<const TreeNode*, std::uint32_t>;

// Structurally shared subtrees become shared graph nodes; every consumer of
// Graph is a function of the unfolding, so the merge is unobservable.
std::uint32_t graph_add(Graph& g, const Tree& t, const std::vector<std::uint32_t>& state_root,
                        NodeMemo& memo) {
  if (t->kind == NodeKind::Ref) return state_root[t->index];
  if (auto it = memo.find(t.get()); it != memo.end()) return it->second;
  Graph::N n;
  n.kind = t->kind;
  n.var = t->index;
  n.op = t->op;
  std::uint32_t id = static_cast<std::uint32_t>(g.nodes.size());
  g.nodes.push_back(n);
  memo.emplace(t.get(), id);
  std::vector<std::uint32_t> kids;
  kids.reserve(t->children.size());
  for (const Tree& c : t->children) kids.push_back(graph_add(g, c, state_root, memo));
  g.nodes[id].kids = std::move(kids);
  return id;
}

}  // namespace

Graph Graph::of(const Tree& t) {
  Graph g;
  NodeMemo memo;
  g.root = graph_add(g, t, {}, memo);
  return g;
}

Graph Graph::of(const RegularTree& t) {
  Graph g;
  // reserve one placeholder root per state so references can be wired up front
  std::vector<std::uint32_t> state_root(t.states.size());
  // two passes: bodies may reference states defined later
  // first pass allocates roots by building bodies in order, with refs resolved
  // to the (eventual) root slot; we pre-scan to fix root ids deterministically.
  // Build each state body into the graph; a body's own root is the node created
  // first for that body. Do a pre-pass creating stub nodes, then fill.
  std::vector<Tree> bodies = t.states;
  // Pass 1: create stubs.
  for (std::uint32_t s = 0; s < bodies.size(); ++s) {
    state_root[s] = static_cast<std::uint32_t>(g.nodes.size());
    g.nodes.push_back({NodeKind::Bot, 0, "", {}});
  }
  // Pass 2: build bodies; body root replaces the stub.
  NodeMemo memo;
  for (std::uint32_t s = 0; s < bodies.size(); ++s) {
    const Tree& b = bodies[s];
    if (b->kind == NodeKind::Ref) {
      // A body that is bare reference: alias by copying the target stub link.
      // Represent as a unary chain collapse: point the stub at the target's
      // eventual content by marking it a Ref-forward; resolve after building.
      g.nodes[state_root[s]] = {NodeKind::Ref, b->index, "", {}};
      continue;
    }
    Graph::N n;
    n.kind = b->kind;
    n.var = b->index;
    n.op = b->op;
    g.nodes[state_root[s]] = n;
    std::vector<std::uint32_t> kids;
    kids.reserve(b->children.size());
    for (const Tree& c : b->children) kids.push_back(graph_add(g, c, state_root, memo));
    g.nodes[state_root[s]].kids = std::move(kids);
  }
  // Resolve bare-reference forwarding chains (rec s. s style knots are
  // rejected: a state whose body is itself is bottom-less nonsense we map to
  // a self-loop through a forward, detected below).
  auto resolve = [&](std::uint32_t id) {
    std::set<std::uint32_t> seen;
    while (g.nodes[id].kind == NodeKind::Ref) {
      if (!seen.insert(id).second) throw Error("unguarded recursion");
      id = state_root[g.nodes[id].var];
    }
    return id;
  };
  for (Graph::N& n : g.nodes)
    for (std::uint32_t& k : n.kids) k = resolve(k);
  g.root = resolve(state_root[t.root]);
  return g;
}

Graph Graph::of(const AnyTree& t) {
  if (auto* f = std::get_if<Tree>(&t)) return Graph::of(*f);
  return Graph::of(std::get<RegularTree>(t));
}

bool Graph::cyclic() const {
  std::vector<int> mark(nodes.size(), 0);
  std::function<bool(std::uint32_t)> visit = [&](std::uint32_t i) {
    if (mark[i] == 1) return true;
    if (mark[i] == 2) return false;
    mark[i] = 1;
    for (std::uint32_t k : nodes[i].kids)
      if (visit(k)) return true;
    mark[i] = 2;
    return false;
  };
  return visit(root);
}

Tree map_tree(const std::function<Tree(VarId)>& f, const Tree& t) {
  if (t->kind == NodeKind::Var) {
    Tree image = f(t->index);
    if (image->kind == NodeKind::Op || image->kind == NodeKind::Ref)
      throw Error("relabeling image must be a leaf");
    return image;
  }
  if (t->kind == NodeKind::Ref) throw Error("finite tree expected");
  if (t->children.empty()) return t;
  std::vector<Tree> kids;
  kids.reserve(t->children.size());
  for (const Tree& c : t->children) kids.push_back(map_tree(f, c));
  return node(t->op, std::move(kids));
}

Tree substitute(const std::function<Tree(VarId)>& f, const Tree& t) {
  if (t->kind == NodeKind::Var) return f(t->index);
  if (t->kind == NodeKind::Ref) throw Error("finite tree expected");
  if (t->children.empty()) return t;
  std::vector<Tree> kids;
  kids.reserve(t->children.size());
  for (const Tree& c : t->children) kids.push_back(substitute(f, c));
  return node(t->op, std::move(kids));
}

Tree substitute(const std::vector<std::pair<VarId, Tree>>& f, const Tree& t) {
  return substitute(
      [&](VarId v) -> Tree {
        for (const auto& [from, to] : f)
          if (from == v) return to;
        return var(v);
      },
      t);
}

Tree flatten(const Tree& shape, const std::function<Tree(VarId)>& payload) {
  return substitute(payload, shape);
}

namespace {

// Greatest fixed point on the product graph: a pair is assumed until a finite
// refutation is found; pairs on the in-progress stack are coinductively true.
struct LeqSearch {
  const Graph& a;
  const Graph& b;
  std::unordered_map<std::uint64_t, bool> memo;
  std::unordered_set<std::uint64_t> in_progress;

  bool run(std::uint32_t x, std::uint32_t y) {
    const std::uint64_t key = (static_cast<std::uint64_t>(x) << 32) | y;
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (in_progress.count(key)) return true;
    const Graph::N& na = a.nodes[x];
    const Graph::N& nb = b.nodes[y];
    bool ok = false;
    if (na.kind == NodeKind::Bot || nb.kind == NodeKind::Top) {
      ok = true;
    } else if (na.kind == NodeKind::Var && nb.kind == NodeKind::Var) {
      ok = na.var == nb.var;
    } else if (na.kind == NodeKind::Op && nb.kind == NodeKind::Op && na.op == nb.op &&
               na.kids.size() == nb.kids.size()) {
      in_progress.insert(key);
      ok = true;
      for (std::size_t i = 0; i < na.kids.size() && ok; ++i)
        ok = run(na.kids[i], nb.kids[i]);
      in_progress.erase(key);
    }
    memo[key] = ok;
    return ok;
  }
};

}  // namespace

bool tree_leq(const AnyTree& a, const AnyTree& b) {
  Graph ga = Graph::of(a);
  Graph gb = Graph::of(b);
  LeqSearch s{ga, gb, {}, {}};
  return s.run(ga.root, gb.root);
}

namespace {

// Memoized per (state, remaining depth): repeated expansions of one state are
// the same shared subtree, so the result is DAG-sized, not unfolding-sized.
struct Truncator {
  const RegularTree& t;
  const Tree fill;
  std::unordered_map<std::uint64_t, Tree> memo;

  Tree state(std::uint32_t s, int depth) {
    const std::uint64_t key = (static_cast<std::uint64_t>(s) << 32) |
                              static_cast<std::uint32_t>(depth);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Tree r = body(t.states[s], depth);
    memo.emplace(key, r);
    return r;
  }

  Tree body(const Tree& b, int depth) {
    if (b->kind == NodeKind::Ref) {
      if (depth <= 0) return fill;
      return state(b->index, depth - 1);
    }
    if (b->children.empty()) return b;
    std::vector<Tree> kids;
    kids.reserve(b->children.size());
    for (const Tree& c : b->children) kids.push_back(body(c, depth));
    return node(b->op, std::move(kids));
  }
};

}  // namespace

Tree truncate(const RegularTree& t, int depth, bool fill_top) {
  if (depth < 0) throw Error("negative depth");
  const Tree fill = fill_top ? top() : bot();
  if (depth == 0) return fill;
  Truncator tr{t, fill, {}};
  return tr.state(t.root, depth - 1);
}

bool lift_relation_check(const BinaryRelation& r, const Tree& a, const Tree& b) {
  if (a->kind == NodeKind::Ref || b->kind == NodeKind::Ref)
    throw Error("finite tree expected");
  if (a->kind == NodeKind::Bot) return b->kind == NodeKind::Bot;
  if (a->kind == NodeKind::Top) return b->kind == NodeKind::Top;
  if (a->kind == NodeKind::Var)
    return b->kind == NodeKind::Var && r.related(a->index, b->index);
  if (b->kind != NodeKind::Op || a->op != b->op || a->children.size() != b->children.size())
    return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!lift_relation_check(r, a->children[i], b->children[i])) return false;
  return true;
}

}  // namespace teq
