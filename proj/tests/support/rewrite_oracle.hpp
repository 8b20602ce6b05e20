#pragma once

// Bounded-derivation oracle over a finite tree universe: a pair (a, b) is
// oracle-derivable when b is reachable from a within a fixed number of steps,
// each step either a syntactic order move or a single-position axiom rewrite
// (equations usable in both directions). Every oracle path is a checkable
// derivation: order steps, congruence-wrapped axiom steps, transitivity.

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "teq/corpus.hpp"
#include "teq/effects.hpp"
#include "teq/relations.hpp"
#include "teq/semantics.hpp"
#include "teq/tree.hpp"
#include "teq/value.hpp"

namespace teq::support {

struct BitMatrix {
  std::size_t n = 0, words = 0;
  std::vector<std::uint64_t> bits;

  void init(std::size_t size) {
    n = size;
    words = (size + 63) / 64;
    bits.assign(n * words, 0);
  }
  void set(std::size_t a, std::size_t b) { bits[a * words + b / 64] |= 1ull << (b % 64); }
  bool get(std::size_t a, std::size_t b) const {
    return (bits[a * words + b / 64] >> (b % 64)) & 1;
  }
  std::uint64_t* row(std::size_t a) { return bits.data() + a * words; }
  const std::uint64_t* row(std::size_t a) const { return bits.data() + a * words; }
};

inline BitMatrix bool_product(const BitMatrix& a, const BitMatrix& b, Exec exec) {
  BitMatrix out;
  out.init(a.n);
  parallel_for(exec, a.n, [&](std::size_t i) {
    std::uint64_t* dst = out.row(i);
    const std::uint64_t* in = a.row(i);
    for (std::size_t k = 0; k < a.n; ++k)
      if ((in[k / 64] >> (k % 64)) & 1) {
        const std::uint64_t* rk = b.row(k);
        for (std::size_t w = 0; w < a.words; ++w) dst[w] |= rk[w];
      }
  });
  return out;
}

// reach = seed^rounds over boolean matrix product; seed contains the
// identity, so the result is reachability along paths of <= rounds edges.
inline BitMatrix bounded_power(const BitMatrix& seed, int rounds, Exec exec) {
  BitMatrix acc = seed;
  int power = 1;
  while (power < rounds) {
    if (2 * power <= rounds) {
      acc = bool_product(acc, acc, exec);
      power *= 2;
    } else {
      acc = bool_product(acc, seed, exec);
      ++power;
    }
  }
  return acc;
}

// The syntactic order on finite trees, allocation-free (tree_leq's product
// search is built for cycles; universes here are finite and small).
inline bool finite_leq(const Tree& a, const Tree& b) {
  if (a->kind == NodeKind::Bot || b->kind == NodeKind::Top) return true;
  if (a->kind == NodeKind::Var) return b->kind == NodeKind::Var && a->index == b->index;
  if (a->kind == NodeKind::Op) {
    if (b->kind != NodeKind::Op || a->op != b->op ||
        a->children.size() != b->children.size())
      return false;
    for (std::size_t i = 0; i < a->children.size(); ++i)
      if (!finite_leq(a->children[i], b->children[i])) return false;
    return true;
  }
  return false;  // Top on the left only reaches Top, handled above
}

inline bool match_pattern(const Tree& pat, const Tree& subj, std::vector<Tree>& bind) {
  switch (pat->kind) {
    case NodeKind::Bot:
    case NodeKind::Top:
      return subj->kind == pat->kind;
    case NodeKind::Var: {
      Tree& slot = bind[pat->index];
      if (!slot) {
        slot = subj;
        return true;
      }
      return tree_equal(slot, subj);
    }
    case NodeKind::Op: {
      if (subj->kind != NodeKind::Op || subj->op != pat->op ||
          subj->children.size() != pat->children.size())
        return false;
      for (std::size_t i = 0; i < pat->children.size(); ++i)
        if (!match_pattern(pat->children[i], subj->children[i], bind)) return false;
      return true;
    }
    case NodeKind::Ref:
      return false;
  }
  return false;
}

struct RewriteSweep {
  EffectSpec effect;
  std::vector<Tree> trees;
  std::unordered_map<Tree, int, TreeHash, TreeEq> index;
  std::vector<int> cls;                     // tree -> evaluation class
  std::vector<std::vector<bool>> class_leq; // pointwise over all assignments
  BitMatrix reach;
  std::uint64_t derivable = 0;       // reachable pairs, identity included
  std::uint64_t contradictions = 0;  // derivable yet refuted by evaluation

  bool oracle_derivable(const Tree& a, const Tree& b) const {
    return reach.get(static_cast<std::size_t>(index.at(a)),
                     static_cast<std::size_t>(index.at(b)));
  }
  bool evaluation_holds(int i, int j) const { return class_leq[cls[i]][cls[j]]; }
};

// Assignment rows for the sweep: the full finite carrier, or the 0/1
// vertices for the dyadic space (exactly the decidable family check_leq
// uses there).
inline std::vector<Value> sweep_space(const EffectSpec& e) {
  if (e.space == Space::Dyadic)
    return {dyadic_value(Dyadic::zero()), dyadic_value(Dyadic::one())};
  return finite_space(e);
}

inline RewriteSweep run_rewrite_sweep(const EffectSpec& e, int rounds, Exec exec,
                                      int depth = 2) {
  RewriteSweep s;
  s.effect = e;
  s.trees = enumerate_trees(e.signature, {bot(), top(), var(0), var(1)}, depth);
  const std::size_t n = s.trees.size();
  for (std::size_t i = 0; i < n; ++i) s.index.emplace(s.trees[i], static_cast<int>(i));

  // Evaluation vectors over all assignments of the sweep space to {x0, x1},
  // compressed through a per-effect value dictionary.
  const std::vector<Value> space = sweep_space(e);
  const std::vector<VarId> vars = {0, 1};
  const std::uint64_t row_count = checked_pow(space.size(), vars.size());
  std::vector<Value> dict;
  std::vector<std::vector<std::uint16_t>> vec(n);
  {
    std::vector<std::vector<Value>> raw(n);
    parallel_for(exec, n, [&](std::size_t i) {
      raw[i].reserve(row_count);
      for (std::uint64_t r = 0; r < row_count; ++r)
        raw[i].push_back(eval_exact(e, s.trees[i], nth_assignment(vars, space, r)));
    });
    auto code_of = [&](const Value& v) {
      for (std::size_t d = 0; d < dict.size(); ++d)
        if (value_eq(e, dict[d], v)) return static_cast<std::uint16_t>(d);
      dict.push_back(v);
      return static_cast<std::uint16_t>(dict.size() - 1);
    };
    for (std::size_t i = 0; i < n; ++i) {
      vec[i].reserve(row_count);
      for (const Value& v : raw[i]) vec[i].push_back(code_of(v));
    }
  }
  std::unordered_map<std::string, int> class_ids;
  for (std::size_t i = 0; i < n; ++i) {
    std::string key(reinterpret_cast<const char*>(vec[i].data()),
                    vec[i].size() * sizeof(std::uint16_t));
    auto [it, fresh] = class_ids.emplace(std::move(key), static_cast<int>(class_ids.size()));
    s.cls.push_back(it->second);
  }
  std::vector<std::vector<std::uint16_t>> class_vec(class_ids.size());
  for (std::size_t i = 0; i < n; ++i) class_vec[s.cls[i]] = vec[i];

  std::vector<std::vector<bool>> code_leq(dict.size(), std::vector<bool>(dict.size()));
  for (std::size_t a = 0; a < dict.size(); ++a)
    for (std::size_t b = 0; b < dict.size(); ++b)
      code_leq[a][b] = value_leq(e, dict[a], dict[b]);
  s.class_leq.assign(class_vec.size(), std::vector<bool>(class_vec.size(), true));
  for (std::size_t a = 0; a < class_vec.size(); ++a)
    for (std::size_t b = 0; b < class_vec.size(); ++b)
      for (std::uint64_t r = 0; r < row_count; ++r)
        if (!code_leq[class_vec[a][r]][class_vec[b][r]]) {
          s.class_leq[a][b] = false;
          break;
        }

  // Seed edges: identity, the syntactic order, and single-position axiom
  // rewrites staying inside the universe.
  BitMatrix seed;
  seed.init(n);
  parallel_for(exec, n, [&](std::size_t i) {
    seed.set(i, i);
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && finite_leq(s.trees[i], s.trees[j])) seed.set(i, j);
  });
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> found(n);
  parallel_for(exec, n, [&](std::size_t i) {
    struct Walker {
      const EffectSpec& e;
      const RewriteSweep& s;
      const Tree& whole;
      std::vector<std::pair<std::size_t, std::size_t>>& out;
      std::size_t from;
      Path path;

      void visit(const Tree& u) {
        for (const AxiomScheme& ax : e.axioms) {
          if (ax.lhs.regular || ax.rhs.regular) continue;
          std::vector<Tree> bind(ax.metavar_names.size());
          if (!match_pattern(ax.lhs.tree, u, bind)) continue;
          bool complete = true;
          std::vector<std::pair<VarId, Tree>> images;
          for (std::size_t m = 0; m < bind.size(); ++m) {
            if (!bind[m]) {
              complete = false;
              break;
            }
            images.emplace_back(static_cast<VarId>(m), bind[m]);
          }
          if (!complete) continue;
          const Tree rewritten =
              replace_at(whole, path, substitute(images, ax.rhs.tree));
          auto it = s.index.find(rewritten);
          if (it == s.index.end()) continue;
          out.emplace_back(from, static_cast<std::size_t>(it->second));
          if (ax.is_equation) out.emplace_back(static_cast<std::size_t>(it->second), from);
        }
        if (u->kind == NodeKind::Op)
          for (std::uint32_t c = 0; c < u->children.size(); ++c) {
            path.push_back(c);
            visit(u->children[c]);
            path.pop_back();
          }
      }
    };
    Walker w{e, s, s.trees[i], found[i], i, {}};
    w.visit(s.trees[i]);
  });
  for (const auto& edges : found)
    for (const auto& [a, b] : edges) seed.set(a, b);

  s.reach = bounded_power(seed, rounds, exec);

  std::vector<std::uint64_t> derivable_rows(n), contra_rows(n);
  parallel_for(exec, n, [&](std::size_t i) {
    const std::uint64_t* row = s.reach.row(i);
    for (std::size_t j = 0; j < n; ++j)
      if ((row[j / 64] >> (j % 64)) & 1) {
        ++derivable_rows[i];
        if (!s.class_leq[s.cls[i]][s.cls[j]]) ++contra_rows[i];
      }
  });
  for (std::size_t i = 0; i < n; ++i) {
    s.derivable += derivable_rows[i];
    s.contradictions += contra_rows[i];
  }
  return s;
}

}  // namespace teq::support
