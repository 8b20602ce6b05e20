#pragma once

#include <string>
#include <variant>

#include "teq/effects.hpp"
#include "teq/parser.hpp"
#include "teq/tree.hpp"

namespace teq::testing {

// Parses text that must denote a finite tree.
inline Tree finite(const std::string& text, const EffectSpec& e) {
  AnyTree t = parse_tree(text, e);
  return std::get<Tree>(t);
}

// Parses text that must denote a regular tree (at least one rec binder).
inline RegularTree reg(const std::string& text, const EffectSpec& e) {
  AnyTree t = parse_tree(text, e);
  return std::get<RegularTree>(t);
}

}  // namespace teq::testing
