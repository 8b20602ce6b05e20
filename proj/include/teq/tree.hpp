#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace teq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using VarId = std::uint32_t;

enum class NodeKind : std::uint8_t { Bot, Top, Var, Ref, Op };

struct TreeNode;
// Immutable, structurally shared. Sharing is never observable: all
// operations compare and hash by structure.
using Tree = std::shared_ptr<const TreeNode>;

struct TreeNode {
  NodeKind kind;
  VarId index = 0;  // Var: variable id. Ref: state id inside a RegularTree body.
  std::string op;   // Op only.
  std::vector<Tree> children;
  std::size_t hash = 0;
  int depth = 0;  // leaves and nullary operators have depth 0
};

Tree bot();
Tree top();
Tree var(VarId v);
Tree ref(VarId state);
Tree node(const std::string& op, std::vector<Tree> children);

bool tree_equal(const Tree& a, const Tree& b);
// Total order: node count first, then structural (Bot < Top < Var(i) < Ref(i) < Op,
// ops by name, children lexicographically). Used as the canonical choice order.
int tree_compare(const Tree& a, const Tree& b);
std::size_t tree_size(const Tree& t);
int tree_depth(const Tree& t);
std::vector<VarId> tree_vars(const Tree& t);  // sorted, unique
bool tree_closed(const Tree& t);
bool tree_has_refs(const Tree& t);

struct TreeHash {
  std::size_t operator()(const Tree& t) const { return t->hash; }
};
struct TreeEq {
  bool operator()(const Tree& a, const Tree& b) const { return tree_equal(a, b); }
};

// Path to a subtree: child indices from the root.
using Path = std::vector<std::uint32_t>;
Tree subtree_at(const Tree& t, const Path& p);           // throws Error on bad path
Tree replace_at(const Tree& t, const Path& p, const Tree& s);

struct Signature {
  struct Op {
    std::string name;
    int arity = 0;
    // Realization of a countable branching operator at a finite width; the
    // arity field holds the realized width.
    bool omega = false;
  };
  std::vector<Op> operators;

  const Op* find(const std::string& name) const;
  // Checks every operator node against the signature and rejects Ref leaves.
  void validate(const Tree& t) const;
};

// Finite system of recursive equations presenting a regular tree. Bodies may
// contain Ref leaves naming states; kept canonical: every state reachable from
// the root, states ordered by first visit, root = 0.
struct RegularTree {
  std::vector<Tree> states;
  std::vector<std::string> names;  // printing only; not part of identity
  std::uint32_t root = 0;
};

RegularTree make_regular(std::vector<Tree> states, std::vector<std::string> names,
                         std::uint32_t root);
RegularTree regular_of(const Tree& finite);
bool regular_equal(const RegularTree& a, const RegularTree& b);  // bisimilarity
bool regular_is_finite(const RegularTree& t);  // no cycle among states
Tree regular_unfold_finite(const RegularTree& t);  // throws Error when cyclic
std::vector<VarId> regular_vars(const RegularTree& t);

// Either a finite tree or a regular one. Most entry points accept this.
using AnyTree = std::variant<Tree, RegularTree>;
bool any_is_regular(const AnyTree& t);
std::vector<VarId> any_vars(const AnyTree& t);

// Explicit rooted graph with Ref leaves resolved; the common evaluation form.
struct Graph {
  struct N {
    NodeKind kind;
    VarId var = 0;
    std::string op;
    std::vector<std::uint32_t> kids;
  };
  std::vector<N> nodes;
  std::uint32_t root = 0;

  static Graph of(const Tree& t);
  static Graph of(const RegularTree& t);
  static Graph of(const AnyTree& t);
  bool cyclic() const;
};

// T(f): relabels Var leaves; every image must itself be a leaf.
Tree map_tree(const std::function<Tree(VarId)>& f, const Tree& t);
// f*: grafts arbitrary trees over Var leaves (Kleisli extension).
Tree substitute(const std::function<Tree(VarId)>& f, const Tree& t);
Tree substitute(const std::vector<std::pair<VarId, Tree>>& f, const Tree& t);
// mu: a two-level tree is a shape whose Var leaves index payload trees.
Tree flatten(const Tree& shape, const std::function<Tree(VarId)>& payload);

// Coinductive order: Bot below everything, everything below Top, variables
// discrete, operator nodes childwise. Decided on the product graph by a
// greatest-fixed-point search (a pair fails only on a finite refutation path).
bool tree_leq(const AnyTree& a, const AnyTree& b);

// Unfolds a regular tree, spending one unit of depth per state reference
// crossed; remaining references become fill (Bot or Top).
Tree truncate(const RegularTree& t, int depth, bool fill_top);

struct BinaryRelation {
  std::vector<VarId> lhs_carrier;  // informational; pairs are authoritative
  std::vector<VarId> rhs_carrier;
  std::set<std::pair<VarId, VarId>> pairs;

  bool related(VarId x, VarId y) const { return pairs.count({x, y}) != 0; }
};

// Functorial lifting on finite trees: Bot matches Bot, Top matches Top,
// leaves must be related, operator nodes recurse childwise.
bool lift_relation_check(const BinaryRelation& r, const Tree& a, const Tree& b);

}  // namespace teq
