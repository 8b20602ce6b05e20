#include "teq/value.hpp"

#include <sstream>

#include "teq/parser.hpp"

namespace teq {

Dyadic Dyadic::make(std::uint64_t num, std::uint32_t exp) {
  if (exp > kMaxExp) throw Error("dyadic precision exceeded");
  if (num > (1ULL << exp)) throw Error("dyadic out of [0,1]");
  while (exp > 0 && (num & 1) == 0) {
    num >>= 1;
    --exp;
  }
  return Dyadic{num, exp};
}

int dyadic_cmp(const Dyadic& a, const Dyadic& b) {
  const std::uint32_t e = std::max(a.exp, b.exp);
  const std::uint64_t xa = a.num << (e - a.exp);
  const std::uint64_t xb = b.num << (e - b.exp);
  if (xa != xb) return xa < xb ? -1 : 1;
  return 0;
}

bool dyadic_leq(const Dyadic& a, const Dyadic& b) { return dyadic_cmp(a, b) <= 0; }

Dyadic dyadic_avg(const Dyadic& a, const Dyadic& b) {
  const std::uint32_t e = std::max(a.exp, b.exp);
  if (e + 1 > Dyadic::kMaxExp) throw Error("dyadic precision exceeded");
  return Dyadic::make((a.num << (e - a.exp)) + (b.num << (e - b.exp)), e + 1);
}

Dyadic dyadic_sub(const Dyadic& a, const Dyadic& b) {
  if (dyadic_cmp(a, b) < 0) throw Error("dyadic subtraction below zero");
  const std::uint32_t e = std::max(a.exp, b.exp);
  return Dyadic::make((a.num << (e - a.exp)) - (b.num << (e - b.exp)), e);
}

Dyadic dyadic_complement(const Dyadic& a) {
  return Dyadic::make((1ULL << a.exp) - a.num, a.exp);
}

Dyadic dyadic_parse(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (s == "0") return Dyadic::zero();
    if (s == "1") return Dyadic::one();
    throw Error("expected a dyadic like 3/2^2, or 0, or 1: " + s);
  }
  const std::string den = s.substr(slash + 1);
  if (den.size() < 3 || den[0] != '2' || den[1] != '^')
    throw Error("expected a power-of-two denominator: " + s);
  std::size_t used = 0;
  const std::uint64_t num = std::stoull(s.substr(0, slash), &used);
  if (used != slash) throw Error("bad dyadic numerator: " + s);
  const std::uint64_t exp = std::stoull(den.substr(2), &used);
  if (used != den.size() - 2) throw Error("bad dyadic exponent: " + s);
  if (exp > Dyadic::kMaxExp) throw Error("dyadic precision exceeded");
  return Dyadic::make(num, static_cast<std::uint32_t>(exp));
}

std::string dyadic_print(const Dyadic& d) {
  return std::to_string(d.num) + "/2^" + std::to_string(d.exp);
}

Value three_point(int v) { return ThreePointV{static_cast<std::uint8_t>(v)}; }
Value dyadic_value(const Dyadic& d) { return DyadicV{d}; }
Value state_set(std::uint32_t bits, int k) { return StateSetV{bits, k}; }
Value exc_bottom() { return FlatExcV{FlatExcV::Bot, ""}; }
Value exc_top() { return FlatExcV{FlatExcV::Top, ""}; }
Value exc_raise(const std::string& e) { return FlatExcV{FlatExcV::Raise, e}; }
Value ext_nat(std::uint64_t n) { return ExtNatV{false, n}; }
Value ext_nat_inf() { return ExtNatV{true, 0}; }
Value closed_tree(const AnyTree& t) {
  return ClosedTreeV{std::make_shared<const AnyTree>(t)};
}
Value interval(const Dyadic& lo, const Dyadic& hi) {
  if (dyadic_cmp(lo, hi) > 0) throw Error("interval bounds out of order");
  return IntervalV{lo, hi};
}

Value value_bottom(const EffectSpec& e) {
  switch (e.space) {
    case Space::ThreePoint: return three_point(0);
    case Space::Dyadic: return dyadic_value(Dyadic::zero());
    case Space::StateSet: return state_set(0, e.params.store_k);
    case Space::FlatExc: return exc_bottom();
    case Space::ExtNat: return ext_nat_inf();
    case Space::ClosedTree: return closed_tree(AnyTree{bot()});
    case Space::Interval: return interval(Dyadic::zero(), Dyadic::zero());
  }
  throw Error("unknown space");
}

bool value_leq(const EffectSpec& e, const Value& a, const Value& b) {
  switch (e.space) {
    case Space::ThreePoint:
      return std::get<ThreePointV>(a).v <= std::get<ThreePointV>(b).v;
    case Space::Dyadic:
      return dyadic_leq(std::get<DyadicV>(a).d, std::get<DyadicV>(b).d);
    case Space::StateSet: {
      const auto& x = std::get<StateSetV>(a);
      const auto& y = std::get<StateSetV>(b);
      return (x.bits & ~y.bits) == 0;
    }
    case Space::FlatExc: {
      const auto& x = std::get<FlatExcV>(a);
      const auto& y = std::get<FlatExcV>(b);
      if (x.tag == FlatExcV::Bot || y.tag == FlatExcV::Top) return true;
      return x.tag == y.tag && x.exc == y.exc;
    }
    case Space::ExtNat: {
      const auto& x = std::get<ExtNatV>(a);
      const auto& y = std::get<ExtNatV>(b);
      if (x.inf) return true;   // infinity is the bottom of the reverse order
      if (y.inf) return false;
      return x.n >= y.n;
    }
    case Space::ClosedTree:
      return tree_leq(*std::get<ClosedTreeV>(a).t, *std::get<ClosedTreeV>(b).t);
    case Space::Interval: {
      const auto& x = std::get<IntervalV>(a);
      const auto& y = std::get<IntervalV>(b);
      return dyadic_leq(x.lo, y.lo) && dyadic_leq(x.hi, y.hi);
    }
  }
  throw Error("unknown space");
}

bool value_eq(const EffectSpec& e, const Value& a, const Value& b) {
  return value_leq(e, a, b) && value_leq(e, b, a);
}

std::string value_print(const Value& v) {
  if (const auto* t = std::get_if<ThreePointV>(&v))
    return t->v == 0 ? "bot" : (t->v == 1 ? "diamond" : "top");
  if (const auto* d = std::get_if<DyadicV>(&v)) return dyadic_print(d->d);
  if (const auto* s = std::get_if<StateSetV>(&v)) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (int i = 0; i < s->k; ++i)
      if (s->bits & (1u << i)) {
        if (!first) os << ",";
        os << i;
        first = false;
      }
    os << "}";
    return os.str();
  }
  if (const auto* x = std::get_if<FlatExcV>(&v)) {
    if (x->tag == FlatExcV::Bot) return "bot";
    if (x->tag == FlatExcV::Top) return "top";
    return "raise(" + x->exc + ")";
  }
  if (const auto* n = std::get_if<ExtNatV>(&v))
    return n->inf ? "inf" : std::to_string(n->n);
  if (const auto* c = std::get_if<ClosedTreeV>(&v)) return print_tree(*c->t);
  const auto& p = std::get<IntervalV>(v);
  return "(" + dyadic_print(p.lo) + "," + dyadic_print(p.hi) + ")";
}

Value value_parse(const EffectSpec& e, const std::string& s) {
  switch (e.space) {
    case Space::ThreePoint:
      if (s == "bot") return three_point(0);
      if (s == "diamond") return three_point(1);
      if (s == "top") return three_point(2);
      throw Error("expected bot, diamond, or top: " + s);
    case Space::Dyadic: return dyadic_value(dyadic_parse(s));
    case Space::StateSet: {
      if (s.size() < 2 || s.front() != '{' || s.back() != '}')
        throw Error("expected a set like {0,1} or {}: " + s);
      std::uint32_t bits = 0;
      std::string body = s.substr(1, s.size() - 2);
      std::stringstream ss(body);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const unsigned long cell = std::stoul(item, &used);
        if (used != item.size() || cell >= static_cast<unsigned long>(e.params.store_k))
          throw Error("cell out of range: " + item);
        bits |= 1u << cell;
      }
      return state_set(bits, e.params.store_k);
    }
    case Space::FlatExc: {
      if (s == "bot") return exc_bottom();
      if (s == "top") return exc_top();
      if (s.size() > 7 && s.rfind("raise(", 0) == 0 && s.back() == ')') {
        std::string name = s.substr(6, s.size() - 7);
        for (const std::string& x : e.params.exceptions)
          if (x == name) return exc_raise(name);
        throw Error("unknown exception: " + name);
      }
      throw Error("expected bot, top, or raise(e): " + s);
    }
    case Space::ExtNat: {
      if (s == "inf") return ext_nat_inf();
      std::size_t used = 0;
      const std::uint64_t n = std::stoull(s, &used);
      if (used != s.size()) throw Error("expected a natural number or inf: " + s);
      return ext_nat(n);
    }
    case Space::ClosedTree: {
      AnyTree t = parse_tree(s, e);
      if (!any_vars(t).empty()) throw Error("closed tree required: " + s);
      return closed_tree(t);
    }
    case Space::Interval: {
      if (s.size() < 2 || s.front() != '(' || s.back() != ')')
        throw Error("expected an interval like (1/2^1,1/2^0): " + s);
      std::string body = s.substr(1, s.size() - 2);
      auto comma = body.find(',');
      if (comma == std::string::npos) throw Error("expected two components: " + s);
      return interval(dyadic_parse(body.substr(0, comma)),
                      dyadic_parse(body.substr(comma + 1)));
    }
  }
  throw Error("unknown space");
}

}  // namespace teq
