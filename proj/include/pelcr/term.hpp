#pragma once

// Lambda-term front end: AST, Krivine-style parser and Church numerals.
//
// Grammar:
//   term   := ("\" | "λ") ident "."? term | appseq
//   appseq := factor factor*
//   factor := ident | nat | "(" term ")"
// Application nests to the right, Krivine style: `(M)N P` reads as M(N(P)),
// so `(f)(f)x` is f applied to (f applied to x). Integers expand to Church
// numerals at parse time.

#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pelcr {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind { Var, Abs, App };
  Kind kind;
  std::string name;  // Var: the variable; Abs: the binder
  TermPtr left;      // Abs: body; App: function
  TermPtr right;     // App: argument
};

inline TermPtr make_var(std::string name) {
  return std::make_shared<Term>(Term{Term::Kind::Var, std::move(name), nullptr, nullptr});
}
inline TermPtr make_abs(std::string binder, TermPtr body) {
  return std::make_shared<Term>(Term{Term::Kind::Abs, std::move(binder), std::move(body), nullptr});
}
inline TermPtr make_app(TermPtr fun, TermPtr arg) {
  return std::make_shared<Term>(Term{Term::Kind::App, {}, std::move(fun), std::move(arg)});
}

/// Church numeral n: \f.\x.f(f(...(x))).
inline TermPtr church(uint64_t n) {
  TermPtr body = make_var("x");
  for (uint64_t i = 0; i < n; ++i) body = make_app(make_var("f"), body);
  return make_abs("f", make_abs("x", body));
}

struct TermParseError : std::runtime_error {
  size_t pos;
  TermParseError(const std::string& what, size_t p)
      : std::runtime_error(what + " at offset " + std::to_string(p)), pos(p) {}
};

namespace detail {

struct TermParser {
  std::string_view text;
  size_t pos = 0;
  const std::set<std::string>* free_names;

  void skip_ws() {
    while (pos < text.size() &&
           (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' || text[pos] == '\r'))
      ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() { return text[pos]; }

  bool at_lambda() {
    skip_ws();
    if (pos < text.size() && text[pos] == '\\') return true;
    // UTF-8 lambda
    return pos + 1 < text.size() && static_cast<unsigned char>(text[pos]) == 0xce &&
           static_cast<unsigned char>(text[pos + 1]) == 0xbb;
  }
  void eat_lambda() {
    if (text[pos] == '\\') ++pos;
    else pos += 2;
  }

  static bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool ident_char(char c) {
    return ident_start(c) || (c >= '0' && c <= '9') || c == '\'';
  }

  std::string ident() {
    skip_ws();
    if (pos >= text.size() || !ident_start(text[pos]))
      throw TermParseError("expected identifier", pos);
    size_t s = pos;
    while (pos < text.size() && ident_char(text[pos])) ++pos;
    return std::string(text.substr(s, pos - s));
  }

  TermPtr term(std::vector<std::string>& scope) {
    if (at_lambda()) {
      eat_lambda();
      std::string binder = ident();
      skip_ws();
      if (pos < text.size() && text[pos] == '.') ++pos;
      if (eof()) throw TermParseError("abstraction needs a body", pos);
      scope.push_back(binder);
      TermPtr body = term(scope);
      scope.pop_back();
      return make_abs(std::move(binder), std::move(body));
    }
    std::vector<TermPtr> factors;
    while (!eof()) {
      if (at_lambda()) {  // a lambda swallows the rest: (M)\x.B applies M to \x.B
        factors.push_back(term(scope));
        break;
      }
      char c = peek();
      if (c == ')') break;
      factors.push_back(factor(scope));
    }
    if (factors.empty()) throw TermParseError("expected a term", pos);
    TermPtr t = factors.back();
    for (size_t i = factors.size() - 1; i > 0; --i) t = make_app(factors[i - 1], t);
    return t;
  }

  TermPtr factor(std::vector<std::string>& scope) {
    skip_ws();
    char c = peek();
    if (c == '(') {
      ++pos;
      TermPtr t = term(scope);
      skip_ws();
      if (pos >= text.size() || text[pos] != ')')
        throw TermParseError("expected ')'", pos);
      ++pos;
      return t;
    }
    if (c >= '0' && c <= '9') {
      size_t s = pos;
      uint64_t v = 0;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        v = v * 10 + static_cast<uint64_t>(text[pos] - '0');
        if (v > 1000000) throw TermParseError("numeral too large", s);
        ++pos;
      }
      return church(v);
    }
    if (ident_start(c)) {
      size_t s = pos;
      std::string name = ident();
      bool bound = false;
      for (const auto& b : scope)
        if (b == name) {
          bound = true;
          break;
        }
      if (!bound && (free_names == nullptr || !free_names->count(name)))
        throw TermParseError("unbound variable '" + name + "'", s);
      return make_var(std::move(name));
    }
    throw TermParseError("unexpected character", pos);
  }
};

}  // namespace detail

/// Parses a term; names not bound and not in `free_names` are rejected.
inline TermPtr parse_term(std::string_view text,
                          const std::set<std::string>& free_names = {}) {
  detail::TermParser p{text, 0, &free_names};
  std::vector<std::string> scope;
  TermPtr t = p.term(scope);
  if (!p.eof()) throw TermParseError("trailing input", p.pos);
  return t;
}

inline std::string to_string(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var: return t->name;
    case Term::Kind::Abs: return "\\" + t->name + "." + to_string(t->left);
    case Term::Kind::App: {
      std::string f = "(" + to_string(t->left) + ")";
      if (t->right->kind == Term::Kind::Var) return f + t->right->name;
      return f + "(" + to_string(t->right) + ")";
    }
  }
  return {};
}

namespace detail {

inline bool alpha_equal_rec(const TermPtr& a, const TermPtr& b,
                            std::vector<std::pair<std::string, std::string>>& scope) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Var:
      for (size_t i = scope.size(); i > 0; --i) {
        const auto& [an, bn] = scope[i - 1];
        bool am = an == a->name, bm = bn == b->name;
        if (am || bm) return am && bm;
      }
      return a->name == b->name;  // both free
    case Term::Kind::Abs: {
      scope.emplace_back(a->name, b->name);
      bool r = alpha_equal_rec(a->left, b->left, scope);
      scope.pop_back();
      return r;
    }
    case Term::Kind::App:
      return alpha_equal_rec(a->left, b->left, scope) &&
             alpha_equal_rec(a->right, b->right, scope);
  }
  return false;
}

}  // namespace detail

inline bool alpha_equal(const TermPtr& a, const TermPtr& b) {
  std::vector<std::pair<std::string, std::string>> scope;
  return detail::alpha_equal_rec(a, b, scope);
}

}  // namespace pelcr
