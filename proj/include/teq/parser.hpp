#pragma once

#include <string>
#include <string_view>

#include "teq/effects.hpp"
#include "teq/tree.hpp"

namespace teq {

struct ParseError : Error {
  std::size_t position;
  ParseError(std::size_t pos, const std::string& msg)
      : Error("parse error at " + std::to_string(pos) + ": " + msg), position(pos) {}
};

// Grammar (whitespace insensitive):
//   expr  := 'bot' | 'top' | 'x'<nat> | ident
//          | 'rec' ident '.' expr
//          | op '(' expr (',' expr)* ')'
//          | op '[' arg ']' [ '(' expr (',' expr)* ')' ]
//          | 'lkp' '(' <nat> '->' expr (',' <nat> '->' expr)* ')'
// Operators are validated against the effect signature. A bare ident is a
// back-reference to an enclosing 'rec' binder. The result is finite unless a
// reachable back-reference remains.
AnyTree parse_tree(std::string_view text, const EffectSpec& effect);

// Canonical form; parse_tree(print_tree(t)) is structurally equal to t.
std::string print_tree(const AnyTree& t);
std::string print_tree(const Tree& t);

}  // namespace teq
