#include "teq/parser.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace teq {

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  const EffectSpec& effect;

  std::vector<Tree> states;
  std::vector<std::string> state_names;
  std::vector<std::pair<std::string, std::uint32_t>> scope;  // innermost last

  explicit Parser(std::string_view t, const EffectSpec& e) : text(t), effect(e) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(pos, msg); }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  bool eat_arrow() {
    skip_ws();
    if (pos + 1 < text.size() && text[pos] == '-' && text[pos + 1] == '>') {
      pos += 2;
      return true;
    }
    return false;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected an identifier");
    return std::string(text.substr(start, pos - start));
  }

  std::uint64_t natural() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) fail("expected a number");
    return std::stoull(std::string(text.substr(start, pos - start)));
  }

  static bool is_var_name(const std::string& s) {
    if (s.size() < 2 || s[0] != 'x') return false;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
  }

  std::vector<Tree> arg_list(int arity, const std::string& opname) {
    expect('(');
    std::vector<Tree> args;
    args.push_back(expr());
    while (eat(',')) args.push_back(expr());
    expect(')');
    if (static_cast<int>(args.size()) != arity)
      fail("operator " + opname + " expects " + std::to_string(arity) + " arguments, got " +
           std::to_string(args.size()));
    return args;
  }

  Tree lookup_branches() {
    const int k = effect.params.store_k;
    expect('(');
    std::vector<Tree> branches(static_cast<std::size_t>(k));
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (int i = 0; i < k; ++i) {
      if (i > 0) expect(',');
      std::size_t label_pos = pos;
      std::uint64_t cell = natural();
      if (cell >= static_cast<std::uint64_t>(k)) {
        pos = label_pos;
        fail("lookup branch label out of range (store size " + std::to_string(k) + ")");
      }
      if (seen[cell]) {
        pos = label_pos;
        fail("duplicate lookup branch " + std::to_string(cell));
      }
      if (!eat_arrow()) fail("expected '->'");
      branches[cell] = expr();
      seen[cell] = true;
    }
    expect(')');
    return node("lkp", std::move(branches));
  }

  Tree indexed_op(const std::string& head) {
    // head '[' arg ']' with optional argument list, per signature arity
    expect('[');
    std::string arg;
    skip_ws();
    std::size_t arg_pos = pos;
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      arg = std::to_string(natural());
    else
      arg = ident();
    expect(']');
    std::string opname = head + "[" + arg + "]";
    const Signature::Op* op = effect.signature.find(opname);
    if (op == nullptr) {
      pos = arg_pos;
      fail("unknown operator for effect " + effect.name + ": " + opname);
    }
    if (op->arity == 0) return node(opname, {});
    return node(opname, arg_list(op->arity, opname));
  }

  Tree expr() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    std::size_t start = pos;
    std::string head = ident();
    if (head == "bot") return bot();
    if (head == "top") return top();
    if (head == "rec") {
      std::string name = ident();
      if (name == "bot" || name == "top" || name == "rec" || is_var_name(name))
        fail("invalid binder name: " + name);
      expect('.');
      std::uint32_t id = static_cast<std::uint32_t>(states.size());
      states.push_back(nullptr);
      state_names.push_back(name);
      scope.emplace_back(name, id);
      Tree body = expr();
      scope.pop_back();
      states[id] = body;
      return ref(id);
    }
    if (is_var_name(head)) return var(static_cast<VarId>(std::stoul(head.substr(1))));
    skip_ws();
    if (pos < text.size() && text[pos] == '[') return indexed_op(head);
    if (head == "lkp" && effect.signature.find("lkp") != nullptr) return lookup_branches();
    if (const Signature::Op* op = effect.signature.find(head)) {
      if (op->arity == 0) return node(head, {});
      return node(head, arg_list(op->arity, head));
    }
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == head) return ref(it->second);
    pos = start;
    fail("unknown operator for effect " + effect.name + ": " + head);
  }
};

}  // namespace

AnyTree parse_tree(std::string_view text, const EffectSpec& effect) {
  Parser p(text, effect);
  Tree t = p.expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  if (p.states.empty()) {
    effect.signature.validate(t);
    return t;
  }
  std::uint32_t root;
  if (t->kind == NodeKind::Ref) {
    root = t->index;
  } else {
    root = static_cast<std::uint32_t>(p.states.size());
    p.states.push_back(t);
    p.state_names.push_back("");
  }
  RegularTree rt = make_regular(p.states, p.state_names, root);
  bool any_ref = false;
  for (const Tree& b : rt.states) any_ref = any_ref || tree_has_refs(b);
  if (!any_ref && rt.states.size() == 1) {
    effect.signature.validate(rt.states[0]);
    return rt.states[0];
  }
  // guardedness (no bare-reference cycles) is enforced by make_regular
  for (const Tree& b : rt.states) {
    std::function<void(const Tree&)> check = [&](const Tree& x) {
      if (x->kind == NodeKind::Op) {
        const Signature::Op* op = effect.signature.find(x->op);
        if (op == nullptr)
          throw Error("unknown operator for effect " + effect.name + ": " + x->op);
        if (static_cast<std::size_t>(op->arity) != x->children.size())
          throw Error("operator " + x->op + " expects " + std::to_string(op->arity) +
                      " arguments");
      }
      for (const Tree& c : x->children) check(c);
    };
    check(b);
  }
  return rt;
}

namespace {

bool plain_op_name(const std::string& s) { return s.find('[') == std::string::npos; }

struct Printer {
  const RegularTree* rt = nullptr;
  std::vector<char> open;      // binder currently in scope on the print stack
  std::vector<bool> looping;   // state can reach itself, so it needs a binder
  std::vector<std::string> names;

  void print(std::ostream& os, const Tree& t) {
    switch (t->kind) {
      case NodeKind::Bot: os << "bot"; return;
      case NodeKind::Top: os << "top"; return;
      case NodeKind::Var: os << "x" << t->index; return;
      case NodeKind::Ref: {
        std::uint32_t s = t->index;
        if (open[s]) {
          os << names[s];
          return;
        }
        // A state shared between sibling subtrees is expanded once per
        // occurrence: a binder only scopes over its own subexpression.
        if (looping[s]) os << "rec " << names[s] << ". ";
        open[s] = 1;
        print(os, rt->states[s]);
        open[s] = 0;
        return;
      }
      case NodeKind::Op: {
        if (t->op == "lkp") {
          os << "lkp(";
          for (std::size_t i = 0; i < t->children.size(); ++i) {
            if (i > 0) os << ", ";
            os << i << " -> ";
            print(os, t->children[i]);
          }
          os << ")";
          return;
        }
        os << t->op;
        if (t->children.empty() && !plain_op_name(t->op)) return;  // raise[e]
        os << "(";
        for (std::size_t i = 0; i < t->children.size(); ++i) {
          if (i > 0) os << ", ";
          print(os, t->children[i]);
        }
        os << ")";
        return;
      }
    }
  }
};

}  // namespace

std::string print_tree(const Tree& t) {
  std::ostringstream os;
  Printer p;
  p.print(os, t);
  return os.str();
}

std::string print_tree(const AnyTree& t) {
  if (auto* f = std::get_if<Tree>(&t)) return print_tree(*f);
  const RegularTree& rt = std::get<RegularTree>(t);
  Printer p;
  p.rt = &rt;
  const std::size_t n = rt.states.size();
  p.open.assign(n, 0);
  std::vector<std::set<std::uint32_t>> adj(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    std::function<void(const Tree&)> walk = [&](const Tree& b) {
      if (b->kind == NodeKind::Ref) adj[s].insert(b->index);
      for (const Tree& c : b->children) walk(c);
    };
    walk(rt.states[s]);
  }
  p.looping.assign(n, false);
  for (std::uint32_t s = 0; s < n; ++s) {
    std::vector<char> seen(n, 0);
    std::vector<std::uint32_t> stack(adj[s].begin(), adj[s].end());
    while (!stack.empty()) {
      std::uint32_t t2 = stack.back();
      stack.pop_back();
      if (t2 == s) {
        p.looping[s] = true;
        break;
      }
      if (seen[t2]) continue;
      seen[t2] = 1;
      for (std::uint32_t u : adj[t2]) stack.push_back(u);
    }
  }
  // unique, valid binder names
  p.names.resize(rt.states.size());
  std::set<std::string> used;
  for (std::size_t i = 0; i < rt.states.size(); ++i) {
    std::string n = rt.names.size() > i ? rt.names[i] : "";
    auto bad = [&](const std::string& s) {
      return s.empty() || s == "bot" || s == "top" || s == "rec" || Parser::is_var_name(s) ||
             used.count(s) != 0;
    };
    if (bad(n)) {
      int j = 0;
      do {
        n = "s" + std::to_string(j++);
      } while (bad(n));
    }
    used.insert(n);
    p.names[i] = n;
  }
  std::ostringstream os;
  p.print(os, ref(rt.root));
  return os.str();
}

}  // namespace teq
