#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "teq/effects.hpp"
#include "teq/tree.hpp"

namespace teq {

// Exact dyadic rational in [0,1], kept in lowest terms: num / 2^exp with num
// odd or zero (and exp 0 when num is 0 or 1). Exponents are capped so all
// arithmetic stays inside 64 bits; the cap is far beyond desk-scale use.
struct Dyadic {
  std::uint64_t num = 0;
  std::uint32_t exp = 0;

  static constexpr std::uint32_t kMaxExp = 62;

  static Dyadic make(std::uint64_t num, std::uint32_t exp);
  static Dyadic zero() { return {0, 0}; }
  static Dyadic one() { return {1, 0}; }

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.num == b.num && a.exp == b.exp;
  }
  friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }
};

int dyadic_cmp(const Dyadic& a, const Dyadic& b);
bool dyadic_leq(const Dyadic& a, const Dyadic& b);
Dyadic dyadic_avg(const Dyadic& a, const Dyadic& b);
Dyadic dyadic_sub(const Dyadic& a, const Dyadic& b);  // requires a >= b
Dyadic dyadic_complement(const Dyadic& a);            // 1 - a
// "num/2^k", or an integer 0/1.
Dyadic dyadic_parse(const std::string& s);
std::string dyadic_print(const Dyadic& d);

struct ThreePointV {
  std::uint8_t v = 0;  // 0 bot, 1 mid, 2 top
};
struct DyadicV {
  Dyadic d;
};
struct StateSetV {
  std::uint32_t bits = 0;  // subset of {0..k-1}
  int k = 0;
};
struct FlatExcV {
  enum Tag : std::uint8_t { Bot = 0, Raise = 1, Top = 2 } tag = Bot;
  std::string exc;
};
struct ExtNatV {
  bool inf = true;
  std::uint64_t n = 0;
};
struct ClosedTreeV {
  // closed: no variables; may be genuinely recursive
  std::shared_ptr<const AnyTree> t;
};
struct IntervalV {
  Dyadic lo, hi;  // lo <= hi
};

using Value =
    std::variant<ThreePointV, DyadicV, StateSetV, FlatExcV, ExtNatV, ClosedTreeV, IntervalV>;

Value value_bottom(const EffectSpec& e);
bool value_leq(const EffectSpec& e, const Value& a, const Value& b);
bool value_eq(const EffectSpec& e, const Value& a, const Value& b);
std::string value_print(const Value& v);
// Inverse of value_print for the effect's space; closed-tree values use the
// expression grammar.
Value value_parse(const EffectSpec& e, const std::string& s);

Value three_point(int v);
Value dyadic_value(const Dyadic& d);
Value state_set(std::uint32_t bits, int k);
Value exc_bottom();
Value exc_top();
Value exc_raise(const std::string& e);
Value ext_nat(std::uint64_t n);
Value ext_nat_inf();
Value closed_tree(const AnyTree& t);
Value interval(const Dyadic& lo, const Dyadic& hi);

}  // namespace teq
