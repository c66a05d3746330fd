#pragma once

// The dynamic algebra L*: positive monomials over the generators p, q and a
// family of lifted w-generators, with the monoid product, the !-morphism and
// rewriting of mixed starred/unstarred words to stable form (a.b*) or zero.
//
// Words rewrite by two oriented equation families:
//   annihilation   x* y  ->  1 if x == y, 0 otherwise   (equal depth)
//   swapping       !(u) w ->  w !^e(u)                  (e = lift of w)
// plus the starred mirrors of swapping. On atoms the swapping rule reads
// !^k(x).w = !(!^(k-1)x).w = w.!^e(!^(k-1)x) = w.!^(k+e-1)(x): crossing a
// lift-e generator shifts the crossing atom's depth by e-1. Non-zero normal
// forms are the stable forms a.b* with a, b positive; anything else signals
// a corrupted net and surfaces as NonStableResidue.

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pelcr {

enum class GenKind : uint8_t { P = 0, Q = 1, W = 2 };

struct Generator {
  GenKind kind = GenKind::P;
  uint32_t name = 0;  // W only: mux premise identity
  uint32_t lift = 0;  // W only: the e exponent of the swapping rule

  friend constexpr bool operator==(const Generator&, const Generator&) = default;
  friend constexpr auto operator<=>(const Generator&, const Generator&) = default;
};

constexpr Generator gen_p() { return {GenKind::P, 0, 0}; }
constexpr Generator gen_q() { return {GenKind::Q, 0, 0}; }
constexpr Generator gen_w(uint32_t name, uint32_t lift) {
  return {GenKind::W, name, lift};
}

// An atom at depth k denotes !^k(gen).
struct Atom {
  Generator gen;
  uint32_t depth = 0;

  friend constexpr bool operator==(const Atom&, const Atom&) = default;
  friend constexpr auto operator<=>(const Atom&, const Atom&) = default;
};

constexpr Atom at(Generator g, uint32_t depth = 0) { return {g, depth}; }

namespace detail {

// Appends one atom to a normal-form sequence, restoring normal form by the
// oriented swapping rule: <x@k, w@m> with k > m becomes <w@m, x@(k+e-1)>.
// An incoming w bubbles left across every deeper trailing atom, shifting it.
inline void append_atom(std::vector<Atom>& dst, Atom t) {
  if (t.gen.kind == GenKind::W) {
    size_t i = dst.size();
    while (i > 0 && dst[i - 1].depth > t.depth) --i;
    if (i != dst.size()) {
      const uint32_t e = t.gen.lift;
      for (size_t j = i; j < dst.size(); ++j) {
        dst[j].depth = dst[j].depth + e - 1;
      }
      dst.insert(dst.begin() + static_cast<ptrdiff_t>(i), t);
      return;
    }
  }
  dst.push_back(t);
}

}  // namespace detail

/// A positive monomial of L*, kept in normal form: for every adjacent pair
/// (A, B) with B a w-generator, A.depth <= B.depth. The empty sequence is 1.
class PositiveMonomial {
 public:
  PositiveMonomial() = default;

  // Normalizes an arbitrary atom sequence.
  static PositiveMonomial from_atoms(std::span<const Atom> atoms) {
    PositiveMonomial m;
    m.atoms_.reserve(atoms.size());
    for (const Atom& a : atoms) detail::append_atom(m.atoms_, a);
    return m;
  }
  static PositiveMonomial from_atoms(std::initializer_list<Atom> atoms) {
    return from_atoms(std::span<const Atom>(atoms.begin(), atoms.size()));
  }
  static PositiveMonomial single(Atom a) { return from_atoms({a}); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool is_one() const { return atoms_.empty(); }
  size_t size() const { return atoms_.size(); }

  friend bool operator==(const PositiveMonomial&, const PositiveMonomial&) = default;
  friend auto operator<=>(const PositiveMonomial& a, const PositiveMonomial& b) {
    return std::lexicographical_compare_three_way(
        a.atoms_.begin(), a.atoms_.end(), b.atoms_.begin(), b.atoms_.end());
  }

 private:
  friend PositiveMonomial mul(const PositiveMonomial&, const PositiveMonomial&);
  friend PositiveMonomial bang(const PositiveMonomial&, uint32_t);
  std::vector<Atom> atoms_;
};

/// Identity of the monoid product.
inline PositiveMonomial one() { return {}; }

/// The !-morphism applied k times: every atom depth shifted up by k.
inline PositiveMonomial bang(const PositiveMonomial& m, uint32_t k) {
  PositiveMonomial r = m;
  for (Atom& a : r.atoms_) a.depth += k;
  return r;
}

/// Monoid product a.b, renormalized. Products of positives never vanish.
inline PositiveMonomial mul(const PositiveMonomial& a, const PositiveMonomial& b) {
  PositiveMonomial r = a;
  r.atoms_.reserve(a.size() + b.size());
  for (const Atom& t : b.atoms()) detail::append_atom(r.atoms_, t);
  return r;
}

/// Zero or a positive monomial; zero absorbs under all products.
class Weight {
 public:
  static Weight zero() { return Weight(true, {}); }
  static Weight pos(PositiveMonomial m) { return Weight(false, std::move(m)); }

  bool is_zero() const { return zero_; }
  const PositiveMonomial& monomial() const { return m_; }

  friend bool operator==(const Weight&, const Weight&) = default;

 private:
  Weight(bool z, PositiveMonomial m) : zero_(z), m_(std::move(m)) {}
  bool zero_;
  PositiveMonomial m_;
};

/// Result of rewriting a word to normal form: zero, or the stable form a.b*.
struct StableResult {
  bool zero = false;
  PositiveMonomial a;  // positive part
  PositiveMonomial b;  // starred part (unstarred representation)

  static StableResult make_zero() { return {true, {}, {}}; }
  static StableResult stable(PositiveMonomial a_, PositiveMonomial b_) {
    return {false, std::move(a_), std::move(b_)};
  }
  friend bool operator==(const StableResult&, const StableResult&) = default;
};

struct MixedAtom {
  Atom atom;
  bool starred = false;
  friend bool operator==(const MixedAtom&, const MixedAtom&) = default;
};
using MixedWord = std::vector<MixedAtom>;

/// Thrown when rewriting terminates on a word that is neither zero nor a.b*
/// (e.g. p*.!(q)). Well-formed nets never produce such residues.
struct NonStableResidue : std::runtime_error {
  explicit NonStableResidue(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Local redex classification for an adjacent token pair (left, right).
enum class PairRule : uint8_t {
  None,          // no rule applies (includes permanently stuck junctions)
  AnnihilateOne, // x*@k . x@k -> 1
  AnnihilateZero,// x*@k . y@k -> 0
  Swap,          // one atom crosses the w pivot, depth scaled
};

struct Tok {
  Atom atom;
  bool starred;
};

// Depth of an atom at depth k after crossing a lift-e generator strictly
// above it (k > pivot depth, so k + e >= 1).
inline uint32_t crossed_depth(uint32_t pivot_lift, uint32_t k) {
  return k + pivot_lift - 1;
}

// Classifies the pair and, for Swap, writes the replacement pair.
inline PairRule classify(const Tok& l, const Tok& r, Tok& nl, Tok& nr) {
  const uint32_t dl = l.atom.depth, dr = r.atom.depth;
  if (l.starred && !r.starred) {
    if (dl == dr) {
      return l.atom.gen == r.atom.gen ? PairRule::AnnihilateOne
                                      : PairRule::AnnihilateZero;
    }
    if (dl < dr && l.atom.gen.kind == GenKind::W) {
      // w@m* . v@j  ->  v@(j+e-1) . w@m*
      nl = {at(r.atom.gen, crossed_depth(l.atom.gen.lift, dr)), false};
      nr = l;
      return PairRule::Swap;
    }
    if (dl > dr && r.atom.gen.kind == GenKind::W) {
      // x@k* . w@m  ->  w@m . x@(k+e-1)*
      nl = r;
      nr = {at(l.atom.gen, crossed_depth(r.atom.gen.lift, dl)), true};
      return PairRule::Swap;
    }
    return PairRule::None;  // stuck junction
  }
  if (!l.starred && !r.starred) {
    if (r.atom.gen.kind == GenKind::W && dl > dr) {
      nl = r;
      nr = {at(l.atom.gen, crossed_depth(r.atom.gen.lift, dl)), false};
      return PairRule::Swap;
    }
    return PairRule::None;
  }
  if (l.starred && r.starred) {
    if (l.atom.gen.kind == GenKind::W && dr > dl) {
      nl = {at(r.atom.gen, crossed_depth(l.atom.gen.lift, dr)), true};
      nr = l;
      return PairRule::Swap;
    }
    return PairRule::None;
  }
  return PairRule::None;  // unstarred-then-starred is the stable shape
}

// Full normalization by a stack pass; cascades handled locally. Returns false
// when the word vanished. The result may still contain stuck junctions; shape
// checking is up to the caller.
inline bool rewrite_stack(std::vector<Tok>& word) {
  std::vector<Tok> left;
  left.reserve(word.size());
  std::vector<Tok> right(word.rbegin(), word.rend());
  while (!right.empty()) {
    Tok t = right.back();
    right.pop_back();
    for (;;) {
      if (left.empty()) {
        left.push_back(t);
        break;
      }
      Tok nl, nr;
      switch (classify(left.back(), t, nl, nr)) {
        case PairRule::None:
          left.push_back(t);
          goto next_token;
        case PairRule::AnnihilateOne:
          left.pop_back();
          goto next_token;
        case PairRule::AnnihilateZero:
          return false;
        case PairRule::Swap:
          left.pop_back();
          right.push_back(nr);
          t = nl;
          continue;
      }
    }
  next_token:;
  }
  word = std::move(left);
  return true;
}

inline std::string word_to_string(const std::vector<Tok>& w);

// Splits a fully-rewritten word into a stable form, or throws.
inline StableResult to_stable(const std::vector<Tok>& word) {
  size_t split = 0;
  while (split < word.size() && !word[split].starred) ++split;
  for (size_t i = split; i < word.size(); ++i) {
    if (!word[i].starred) throw NonStableResidue("irreducible residue: " + word_to_string(word));
  }
  std::vector<Atom> a, b;
  a.reserve(split);
  b.reserve(word.size() - split);
  for (size_t i = 0; i < split; ++i) a.push_back(word[i].atom);
  // b* is stored right-to-left in the word: reverse to read b itself.
  for (size_t i = word.size(); i > split; --i) b.push_back(word[i - 1].atom);
  return StableResult::stable(PositiveMonomial::from_atoms(a),
                              PositiveMonomial::from_atoms(b));
}

}  // namespace detail

/// Normal form of b*.a (the DVR composition kernel). Returns zero, the stable
/// form, or throws NonStableResidue on a malformed junction.
inline StableResult star_mul(const PositiveMonomial& b, const PositiveMonomial& a) {
  std::vector<detail::Tok> word;
  word.reserve(a.size() + b.size());
  for (size_t i = b.size(); i > 0; --i) word.push_back({b.atoms()[i - 1], true});
  for (const Atom& t : a.atoms()) word.push_back({t, false});
  if (!detail::rewrite_stack(word)) return StableResult::make_zero();
  return detail::to_stable(word);
}

enum class RewriteStrategy { Leftmost, Rightmost };

/// Full rewriting of an arbitrary mixed word by repeated single-redex steps.
/// Intentionally naive: this is the reference the fast path is checked
/// against, and the strategy parameter exists for confluence testing.
inline StableResult normalize_word(const MixedWord& w,
                                   RewriteStrategy strategy = RewriteStrategy::Leftmost) {
  std::vector<detail::Tok> word;
  word.reserve(w.size());
  for (const MixedAtom& m : w) word.push_back({m.atom, m.starred});
  for (;;) {
    ptrdiff_t chosen = -1;
    detail::Tok nl, nr;
    detail::PairRule rule = detail::PairRule::None;
    for (size_t i = 0; i + 1 < word.size(); ++i) {
      detail::Tok cl, cr;
      detail::PairRule r = detail::classify(word[i], word[i + 1], cl, cr);
      if (r == detail::PairRule::None) continue;
      chosen = static_cast<ptrdiff_t>(i);
      rule = r;
      nl = cl;
      nr = cr;
      if (strategy == RewriteStrategy::Leftmost) break;
    }
    if (chosen < 0) break;
    switch (rule) {
      case detail::PairRule::AnnihilateZero:
        return StableResult::make_zero();
      case detail::PairRule::AnnihilateOne:
        word.erase(word.begin() + chosen, word.begin() + chosen + 2);
        break;
      case detail::PairRule::Swap:
        word[static_cast<size_t>(chosen)] = nl;
        word[static_cast<size_t>(chosen) + 1] = nr;
        break;
      case detail::PairRule::None:
        break;
    }
  }
  return detail::to_stable(word);
}

/// Whether m1.m1*.m2.m2*...mk.mk* vanishes (the splitness/orthogonality test;
/// fin u = u.u*). Non-zero residues, stable or not, simply answer false.
inline bool fin_product_zero(std::span<const PositiveMonomial> ms) {
  std::vector<detail::Tok> word;
  size_t total = 0;
  for (const auto& m : ms) total += 2 * m.size();
  word.reserve(total);
  for (const auto& m : ms) {
    for (const Atom& t : m.atoms()) word.push_back({t, false});
    for (size_t i = m.size(); i > 0; --i) word.push_back({m.atoms()[i - 1], true});
  }
  return !detail::rewrite_stack(word);
}

inline bool fin_product_zero(std::initializer_list<PositiveMonomial> ms) {
  return fin_product_zero(std::span<const PositiveMonomial>(ms.begin(), ms.size()));
}

// ---------------------------------------------------------------------------
// Textual weight grammar:
//   weight := "0" | "1" | atom ("." atom)*
//   atom   := ("!" nat ":")? gen
//   gen    := "p" | "q" | "w(" nat "," nat ")"
// Dumps always emit normal forms, so parse/format round-trips bit-exactly.
// ---------------------------------------------------------------------------

struct WeightParseError : std::runtime_error {
  size_t pos;
  WeightParseError(const std::string& what, size_t p)
      : std::runtime_error(what + " at offset " + std::to_string(p)), pos(p) {}
};

inline std::string to_string(const Atom& a) {
  std::string s;
  if (a.depth != 0) {
    s += '!';
    s += std::to_string(a.depth);
    s += ':';
  }
  switch (a.gen.kind) {
    case GenKind::P: s += 'p'; break;
    case GenKind::Q: s += 'q'; break;
    case GenKind::W:
      s += "w(";
      s += std::to_string(a.gen.name);
      s += ',';
      s += std::to_string(a.gen.lift);
      s += ')';
      break;
  }
  return s;
}

inline std::string to_string(const PositiveMonomial& m) {
  if (m.is_one()) return "1";
  std::string s;
  for (size_t i = 0; i < m.size(); ++i) {
    if (i) s += '.';
    s += to_string(m.atoms()[i]);
  }
  return s;
}

inline std::string to_string(const Weight& w) {
  return w.is_zero() ? "0" : to_string(w.monomial());
}

inline std::string to_string(const StableResult& r) {
  if (r.zero) return "0";
  if (r.b.is_one()) return to_string(r.a);
  return to_string(r.a) + "." + to_string(r.b) + "*";
}

namespace detail {

inline std::string word_to_string(const std::vector<Tok>& w) {
  if (w.empty()) return "1";
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += '.';
    s += to_string(w[i].atom);
    if (w[i].starred) s += '*';
  }
  return s;
}

struct WeightParser {
  std::string_view text;
  size_t pos = 0;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  uint32_t nat() {
    if (eof() || peek() < '0' || peek() > '9') throw WeightParseError("expected number", pos);
    uint64_t v = 0;
    while (!eof() && peek() >= '0' && peek() <= '9') {
      v = v * 10 + static_cast<uint64_t>(peek() - '0');
      if (v > 0xffffffffull) throw WeightParseError("number too large", pos);
      ++pos;
    }
    return static_cast<uint32_t>(v);
  }

  void expect(char c) {
    if (eof() || peek() != c)
      throw WeightParseError(std::string("expected '") + c + "'", pos);
    ++pos;
  }

  Atom atom() {
    uint32_t depth = 0;
    if (!eof() && peek() == '!') {
      ++pos;
      depth = nat();
      expect(':');
    }
    if (eof()) throw WeightParseError("expected generator", pos);
    char c = peek();
    ++pos;
    switch (c) {
      case 'p': return at(gen_p(), depth);
      case 'q': return at(gen_q(), depth);
      case 'w': {
        expect('(');
        uint32_t name = nat();
        expect(',');
        uint32_t lift = nat();
        expect(')');
        return at(gen_w(name, lift), depth);
      }
      default: throw WeightParseError("unknown generator", pos - 1);
    }
  }

  Weight weight() {
    if (eof()) throw WeightParseError("empty weight", pos);
    if (peek() == '0') {
      ++pos;
      return Weight::zero();
    }
    if (peek() == '1') {
      ++pos;
      return Weight::pos(one());
    }
    std::vector<Atom> atoms;
    atoms.push_back(atom());
    while (!eof() && peek() == '.') {
      ++pos;
      atoms.push_back(atom());
    }
    return Weight::pos(PositiveMonomial::from_atoms(atoms));
  }
};

}  // namespace detail

inline Weight parse_weight(std::string_view text) {
  detail::WeightParser p{text};
  Weight w = p.weight();
  if (!p.eof()) throw WeightParseError("trailing input", p.pos);
  return w;
}

inline PositiveMonomial parse_monomial(std::string_view text) {
  Weight w = parse_weight(text);
  if (w.is_zero()) throw WeightParseError("zero is not a monomial", 0);
  return w.monomial();
}

}  // namespace pelcr
