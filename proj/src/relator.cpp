#include "teq/relator.hpp"

#include <algorithm>
#include <map>

#include "teq/parser.hpp"
#include "teq/semantics.hpp"
#include "teq/value.hpp"

namespace teq {

namespace {

void validate_query(const RelatorQuery& q) {
  q.effect.signature.validate(q.a);
  q.effect.signature.validate(q.b);
  const auto in = [](const std::vector<VarId>& c, VarId v) {
    return std::find(c.begin(), c.end(), v) != c.end();
  };
  for (const VarId v : tree_vars(q.a))
    if (!in(q.X, v)) throw Error("left leaf outside its carrier: x" + std::to_string(v));
  for (const VarId v : tree_vars(q.b))
    if (!in(q.Y, v)) throw Error("right leaf outside its carrier: x" + std::to_string(v));
  for (const auto& [x, y] : q.R.pairs)
    if (!in(q.X, x) || !in(q.Y, y)) throw Error("relation pair outside the carriers");
}

// value index at carrier position j, first position varying slowest
std::size_t digit_at(std::uint64_t idx, std::size_t j, std::size_t n, std::size_t base) {
  for (std::size_t k = n; k-- > j + 1;) idx /= base;
  return static_cast<std::size_t>(idx % base);
}

bool product_lift(const RelatorQuery& q, const std::vector<Value>& points) {
  const EffectSpec& e = q.effect;
  const std::uint64_t fa = checked_pow(points.size(), q.X.size());
  const std::uint64_t fb = checked_pow(points.size(), q.Y.size());
  std::vector<Value> va, vb;
  va.reserve(fa);
  vb.reserve(fb);
  for (std::uint64_t i = 0; i < fa; ++i)
    va.push_back(eval_exact(e, q.a, nth_assignment(q.X, points, i)));
  for (std::uint64_t j = 0; j < fb; ++j)
    vb.push_back(eval_exact(e, q.b, nth_assignment(q.Y, points, j)));

  std::map<VarId, std::size_t> px, py;
  for (std::size_t j = 0; j < q.X.size(); ++j) px[q.X[j]] = j;
  for (std::size_t j = 0; j < q.Y.size(); ++j) py[q.Y[j]] = j;

  for (std::uint64_t i = 0; i < fa; ++i) {
    for (std::uint64_t j = 0; j < fb; ++j) {
      bool premise = true;
      for (const auto& [x, y] : q.R.pairs) {
        const Value& fx = points[digit_at(i, px[x], q.X.size(), points.size())];
        const Value& gy = points[digit_at(j, py[y], q.Y.size(), points.size())];
        if (!value_leq(e, fx, gy)) {
          premise = false;
          break;
        }
      }
      if (premise && !value_leq(e, va[i], vb[j])) return false;
    }
  }
  return true;
}

struct TickShape {
  std::uint64_t ticks = 0;
  NodeKind end = NodeKind::Bot;
  VarId v = 0;
};

TickShape tick_shape(Tree t) {
  TickShape s;
  while (t->kind == NodeKind::Op) {
    ++s.ticks;
    t = t->children[0];
  }
  s.end = t->kind;
  if (t->kind == NodeKind::Var) s.v = t->index;
  return s;
}

// Ticks: a refutation needs a finite left value, so the left endpoint
// pins the analysis; an unrelated right variable can always be driven
// above any finite left value.
bool tick_lift(const RelatorQuery& q) {
  const TickShape sa = tick_shape(q.a);
  const TickShape sb = tick_shape(q.b);
  if (sa.end == NodeKind::Bot) return true;
  if (sb.end == NodeKind::Bot) return false;
  if (sb.end == NodeKind::Top) return sa.ticks >= sb.ticks;
  if (sa.end == NodeKind::Top) return false;
  return q.R.related(sa.v, sb.v) && sa.ticks >= sb.ticks;
}

// Grafting: descending the product of the two trees, a mismatch below
// matching operator paths is always realizable by a premise-respecting
// assignment (send the offending left variable to the top tree, the
// variables it relates to along, everything else to bottom), so the
// relator is the leafwise-R tree order.
bool graft_lift(const BinaryRelation& r, const Tree& a, const Tree& b) {
  if (a->kind == NodeKind::Bot || b->kind == NodeKind::Top) return true;
  if (a->kind == NodeKind::Var && b->kind == NodeKind::Var) return r.related(a->index, b->index);
  if (a->kind == NodeKind::Op && b->kind == NodeKind::Op && a->op == b->op &&
      a->children.size() == b->children.size()) {
    for (std::size_t i = 0; i < a->children.size(); ++i)
      if (!graft_lift(r, a->children[i], b->children[i])) return false;
    return true;
  }
  return false;
}

}  // namespace

bool relator_lift(const RelatorQuery& q, const QueryLimits& limits) {
  validate_query(q);
  switch (q.effect.space) {
    case Space::ThreePoint:
    case Space::StateSet:
    case Space::FlatExc:
      return product_lift(q, finite_space(q.effect));
    case Space::Dyadic:
      return product_lift(q, {dyadic_value(Dyadic::zero()), dyadic_value(Dyadic::one())});
    case Space::ExtNat:
      return tick_lift(q);
    case Space::ClosedTree:
      return graft_lift(q.R, q.a, q.b);
    case Space::Interval: {
      for (int rho = 1; rho <= limits.grid; ++rho)
        if (!product_lift(q, grid_points(rho))) return false;
      return true;  // not refuted at the final grid resolution
    }
  }
  throw Error("unreachable space");
}

namespace {

struct BitMatrix {
  std::size_t rows = 0, cols = 0, words = 0;
  std::vector<std::uint64_t> bits;

  void init(std::size_t r, std::size_t c) {
    rows = r;
    cols = c;
    words = (c + 63) / 64;
    bits.assign(r * words, 0);
  }
  void set(std::size_t a, std::size_t b) { bits[a * words + b / 64] |= 1ull << (b % 64); }
  bool get(std::size_t a, std::size_t b) const {
    return (bits[a * words + b / 64] >> (b % 64)) & 1;
  }
  const std::uint64_t* row(std::size_t a) const { return bits.data() + a * words; }
};

struct ClassTable {
  std::vector<Tree> reps;
  std::vector<std::vector<std::uint16_t>> vec;  // [class][assignment] -> dict index
  std::map<std::vector<std::uint16_t>, int> class_of;
};

struct LawWorld {
  const EffectSpec& e;
  int max_carrier;
  int max_depth;
  Exec exec;
  std::vector<Value> points;  // assignment point set
  std::vector<Value> dict;    // realized evaluation values
  std::map<std::string, std::uint16_t> dict_ix;
  std::vector<std::vector<char>> point_leq;
  std::vector<std::vector<char>> dict_leq;
  std::vector<ClassTable> tab;  // tab[n] for carriers {x0..x(n-1)}
  // matrices[nx][ny][mask]: relator membership between class reps
  std::vector<std::vector<std::vector<BitMatrix>>> mat;

  std::uint16_t intern(const Value& v) {
    const std::string k = value_print(v);
    const auto it = dict_ix.find(k);
    if (it != dict_ix.end()) return it->second;
    dict.push_back(v);
    dict_ix[k] = static_cast<std::uint16_t>(dict.size() - 1);
    return static_cast<std::uint16_t>(dict.size() - 1);
  }
};

void build_tables(LawWorld& w) {
  w.tab.resize(w.max_carrier + 1);
  for (int n = 1; n <= w.max_carrier; ++n) {
    std::vector<Tree> atoms{bot(), top()};
    std::vector<VarId> vars;
    for (VarId v = 0; v < static_cast<VarId>(n); ++v) {
      atoms.push_back(var(v));
      vars.push_back(v);
    }
    const std::vector<Tree> trees = enumerate_trees(w.e.signature, atoms, w.max_depth);
    const std::uint64_t assigns = checked_pow(w.points.size(), vars.size());
    ClassTable& tb = w.tab[n];
    for (const Tree& t : trees) {
      std::vector<std::uint16_t> v;
      v.reserve(assigns);
      for (std::uint64_t idx = 0; idx < assigns; ++idx)
        v.push_back(w.intern(eval_exact(w.e, t, nth_assignment(vars, w.points, idx))));
      if (tb.class_of.emplace(v, static_cast<int>(tb.reps.size())).second) {
        tb.reps.push_back(t);
        tb.vec.push_back(std::move(v));
      }
    }
  }
}

void build_leq_tables(LawWorld& w) {
  const auto table = [&](const std::vector<Value>& vs) {
    std::vector<std::vector<char>> t(vs.size(), std::vector<char>(vs.size(), 0));
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (std::size_t j = 0; j < vs.size(); ++j)
        t[i][j] = value_leq(w.e, vs[i], vs[j]) ? 1 : 0;
    return t;
  };
  w.point_leq = table(w.points);
  w.dict_leq = table(w.dict);
}

void build_matrices(LawWorld& w) {
  const std::size_t p = w.points.size();
  w.mat.assign(w.max_carrier + 1, {});
  for (int nx = 1; nx <= w.max_carrier; ++nx) {
    w.mat[nx].assign(w.max_carrier + 1, {});
    for (int ny = 1; ny <= w.max_carrier; ++ny) {
      const std::uint64_t fa = checked_pow(p, nx);
      const std::uint64_t fb = checked_pow(p, ny);
      const std::size_t nmask = std::size_t{1} << (nx * ny);
      w.mat[nx][ny].resize(nmask);
      const ClassTable& ta = w.tab[nx];
      const ClassTable& tb = w.tab[ny];
      for (std::size_t mask = 0; mask < nmask; ++mask) {
        // admissible assignment pairs under the premise for this relation
        std::vector<std::pair<std::uint32_t, std::uint32_t>> ok;
        for (std::uint64_t i = 0; i < fa; ++i) {
          for (std::uint64_t j = 0; j < fb; ++j) {
            bool prem = true;
            for (int x = 0; x < nx && prem; ++x)
              for (int y = 0; y < ny && prem; ++y)
                if (mask & (std::size_t{1} << (x * ny + y)))
                  if (!w.point_leq[digit_at(i, x, nx, p)][digit_at(j, y, ny, p)]) prem = false;
            if (prem) ok.emplace_back(i, j);
          }
        }
        BitMatrix& m = w.mat[nx][ny][mask];
        m.init(ta.reps.size(), tb.reps.size());
        parallel_for(w.exec, ta.reps.size(), [&](std::size_t a) {
          for (std::size_t b = 0; b < tb.reps.size(); ++b) {
            bool all = true;
            for (const auto& [i, j] : ok) {
              if (!w.dict_leq[ta.vec[a][i]][tb.vec[b][j]]) {
                all = false;
                break;
              }
            }
            if (all) m.set(a, b);
          }
        });
      }
    }
  }
}

void note_violation(RelatorLawReport& rep, const std::string& s) {
  ++rep.violations;
  if (rep.notes.size() < 8) rep.notes.push_back(s);
}

void law_identity(LawWorld& w, RelatorLawReport& rep) {
  for (int n = 1; n <= w.max_carrier; ++n) {
    std::size_t idmask = 0;
    for (int x = 0; x < n; ++x) idmask |= std::size_t{1} << (x * n + x);
    const BitMatrix& m = w.mat[n][n][idmask];
    for (std::size_t a = 0; a < w.tab[n].reps.size(); ++a) {
      ++rep.identity_checked;
      if (!m.get(a, a))
        note_violation(rep, "identity law fails at " + print_tree(w.tab[n].reps[a]));
    }
  }
}

void law_composition(LawWorld& w, RelatorLawReport& rep) {
  for (int nx = 1; nx <= w.max_carrier; ++nx)
    for (int ny = 1; ny <= w.max_carrier; ++ny)
      for (int nz = 1; nz <= w.max_carrier; ++nz) {
        const std::size_t nr = std::size_t{1} << (nx * ny);
        const std::size_t ns = std::size_t{1} << (ny * nz);
        const std::size_t ca = w.tab[nx].reps.size();
        const std::size_t cb = w.tab[ny].reps.size();
        const std::size_t cc = w.tab[nz].reps.size();
        for (std::size_t rm = 0; rm < nr; ++rm)
          for (std::size_t sm = 0; sm < ns; ++sm) {
            std::size_t rs = 0;
            for (int x = 0; x < nx; ++x)
              for (int z = 0; z < nz; ++z)
                for (int y = 0; y < ny; ++y)
                  if ((rm & (std::size_t{1} << (x * ny + y))) &&
                      (sm & (std::size_t{1} << (y * nz + z))))
                    rs |= std::size_t{1} << (x * nz + z);
            const BitMatrix& mr = w.mat[nx][ny][rm];
            const BitMatrix& ms = w.mat[ny][nz][sm];
            const BitMatrix& mrs = w.mat[nx][nz][rs];
            rep.composition_checked += ca * cc;
            for (std::size_t a = 0; a < ca; ++a) {
              std::vector<std::uint64_t> acc(ms.words, 0);
              for (std::size_t b = 0; b < cb; ++b)
                if (mr.get(a, b))
                  for (std::size_t k = 0; k < ms.words; ++k) acc[k] |= ms.row(b)[k];
              for (std::size_t k = 0; k < ms.words; ++k) {
                const std::uint64_t bad = acc[k] & ~mrs.row(a)[k];
                if (bad != 0) {
                  const std::size_t c = k * 64 + static_cast<std::size_t>(__builtin_ctzll(bad));
                  note_violation(rep, "composition law fails at " +
                                          print_tree(w.tab[nx].reps[a]) + " / " +
                                          print_tree(w.tab[nz].reps[c]));
                }
              }
            }
          }
      }
}

void law_monotonicity(LawWorld& w, RelatorLawReport& rep) {
  for (int nx = 1; nx <= w.max_carrier; ++nx)
    for (int ny = 1; ny <= w.max_carrier; ++ny) {
      const std::size_t nr = std::size_t{1} << (nx * ny);
      const std::size_t ca = w.tab[nx].reps.size();
      for (std::size_t sm = 0; sm < nr; ++sm) {
        // proper submasks rm of sm, plus the empty relation
        std::size_t rm = sm;
        while (true) {
          rm = (rm - 1) & sm;
          const BitMatrix& mr = w.mat[nx][ny][rm];
          const BitMatrix& msup = w.mat[nx][ny][sm];
          rep.monotonicity_checked += ca * w.tab[ny].reps.size();
          for (std::size_t a = 0; a < ca; ++a)
            for (std::size_t k = 0; k < mr.words; ++k) {
              const std::uint64_t bad = mr.row(a)[k] & ~msup.row(a)[k];
              if (bad != 0) {
                const std::size_t b = k * 64 + static_cast<std::size_t>(__builtin_ctzll(bad));
                note_violation(rep, "monotonicity law fails at " +
                                        print_tree(w.tab[nx].reps[a]) + " / " +
                                        print_tree(w.tab[ny].reps[b]));
              }
            }
          if (rm == 0) break;
        }
      }
    }
}

void law_reindexing(LawWorld& w, RelatorLawReport& rep) {
  const std::size_t p = w.points.size();
  for (int nxp = 1; nxp <= w.max_carrier; ++nxp)
    for (int nx = 1; nx <= w.max_carrier; ++nx)
      for (int nyp = 1; nyp <= w.max_carrier; ++nyp)
        for (int ny = 1; ny <= w.max_carrier; ++ny) {
          const std::uint64_t nh = checked_pow(nx, nxp);
          const std::uint64_t nk = checked_pow(ny, nyp);
          const std::uint64_t fa = checked_pow(p, nx);
          const std::uint64_t fb = checked_pow(p, ny);
          for (std::uint64_t hi = 0; hi < nh; ++hi) {
            std::vector<std::size_t> h(nxp);
            for (int j = 0; j < nxp; ++j) h[j] = digit_at(hi, j, nxp, nx);
            // class of the renamed tree, via composed assignment indices
            std::vector<std::size_t> compA(fa);
            for (std::uint64_t i = 0; i < fa; ++i) {
              std::size_t idx = 0;
              for (int j = 0; j < nxp; ++j) idx = idx * p + digit_at(i, h[j], nx, p);
              compA[i] = idx;
            }
            std::vector<int> mapX(w.tab[nxp].reps.size());
            for (std::size_t a = 0; a < mapX.size(); ++a) {
              std::vector<std::uint16_t> v(fa);
              for (std::uint64_t i = 0; i < fa; ++i) v[i] = w.tab[nxp].vec[a][compA[i]];
              const auto it = w.tab[nx].class_of.find(v);
              if (it == w.tab[nx].class_of.end())
                throw Error("renamed tree missing from the enumeration");
              mapX[a] = it->second;
            }
            for (std::uint64_t ki = 0; ki < nk; ++ki) {
              std::vector<std::size_t> kf(nyp);
              for (int j = 0; j < nyp; ++j) kf[j] = digit_at(ki, j, nyp, ny);
              std::vector<std::size_t> compB(fb);
              for (std::uint64_t i = 0; i < fb; ++i) {
                std::size_t idx = 0;
                for (int j = 0; j < nyp; ++j) idx = idx * p + digit_at(i, kf[j], ny, p);
                compB[i] = idx;
              }
              std::vector<int> mapY(w.tab[nyp].reps.size());
              for (std::size_t b = 0; b < mapY.size(); ++b) {
                std::vector<std::uint16_t> v(fb);
                for (std::uint64_t i = 0; i < fb; ++i) v[i] = w.tab[nyp].vec[b][compB[i]];
                const auto it = w.tab[ny].class_of.find(v);
                if (it == w.tab[ny].class_of.end())
                  throw Error("renamed tree missing from the enumeration");
                mapY[b] = it->second;
              }
              const std::size_t nr = std::size_t{1} << (nx * ny);
              for (std::size_t rm = 0; rm < nr; ++rm) {
                std::size_t rp = 0;
                for (int xp = 0; xp < nxp; ++xp)
                  for (int yp = 0; yp < nyp; ++yp)
                    if (rm & (std::size_t{1} << (h[xp] * ny + kf[yp])))
                      rp |= std::size_t{1} << (xp * nyp + yp);
                const BitMatrix& ml = w.mat[nxp][nyp][rp];
                const BitMatrix& mrr = w.mat[nx][ny][rm];
                for (std::size_t a = 0; a < mapX.size(); ++a)
                  for (std::size_t b = 0; b < mapY.size(); ++b) {
                    ++rep.reindexing_checked;
                    if (ml.get(a, b) !=
                        mrr.get(static_cast<std::size_t>(mapX[a]),
                                static_cast<std::size_t>(mapY[b])))
                      note_violation(rep, "reindexing law fails at " +
                                              print_tree(w.tab[nxp].reps[a]) + " / " +
                                              print_tree(w.tab[nyp].reps[b]));
                  }
              }
            }
          }
        }
}

}  // namespace

RelatorLawReport check_relator_laws(const EffectSpec& e, int max_carrier, int max_depth,
                                    Exec exec) {
  if (max_carrier < 1 || max_depth < 0) throw Error("law sweep bounds must be positive");
  std::vector<Value> points;
  switch (e.space) {
    case Space::ThreePoint:
    case Space::StateSet:
    case Space::FlatExc:
      points = finite_space(e);
      break;
    case Space::Dyadic:
      // vertex points; membership through them is exact (affine evaluation,
      // unimodular premise polytope)
      points = {dyadic_value(Dyadic::zero()), dyadic_value(Dyadic::one())};
      break;
    default:
      throw Error("relator law sweep supports finite carriers and the dyadic space");
  }
  LawWorld w{e, max_carrier, max_depth, exec, std::move(points), {}, {}, {}, {}, {}, {}};
  build_tables(w);
  build_leq_tables(w);
  build_matrices(w);
  RelatorLawReport rep;
  law_identity(w, rep);
  law_composition(w, rep);
  law_monotonicity(w, rep);
  law_reindexing(w, rep);
  return rep;
}

}  // namespace teq
