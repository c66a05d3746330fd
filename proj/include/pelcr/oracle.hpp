#pragma once

// Brute-force verification machinery, test-time only: execution-formula
// enumeration over straight paths, net-validity sweeps and a normal-order
// beta reducer for front-end sanity. Nothing here is on the reduction path;
// the engine is checked against it, never through it.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pelcr/algebra.hpp"
#include "pelcr/net.hpp"
#include "pelcr/term.hpp"
#include "pelcr/translate.hpp"

namespace pelcr {

/// Flat net view the oracle works on: every node that appears anywhere plus
/// the directed weighted edges between them. An edge is either still in
/// flight (an incoming message) or combusted (stored at its target). Two
/// combusted edges of the same node were already composed together - the
/// paper's filters would zero their junction - so straight paths bouncing
/// between them are excluded from enumeration.
struct OracleEdge {
  EdgeMsg msg;
  bool combusted = false;
};

struct OracleNet {
  std::vector<NodeId> nodes;
  std::vector<OracleEdge> edges;
  std::vector<NodeId> border;

  static OracleNet from_edges(std::vector<EdgeMsg> edges, std::vector<NodeId> border,
                              std::vector<NodeId> extra_nodes = {},
                              bool combusted = false) {
    OracleNet n;
    n.border = std::move(border);
    std::set<NodeId> seen(n.border.begin(), n.border.end());
    n.nodes.assign(seen.begin(), seen.end());
    auto add = [&](const NodeId& id) {
      if (seen.insert(id).second) n.nodes.push_back(id);
    };
    for (EdgeMsg& e : edges) {
      add(e.source);
      add(e.target);
      n.edges.push_back(OracleEdge{std::move(e), combusted});
    }
    for (const NodeId& id : extra_nodes) add(id);
    return n;
  }

  static OracleNet from_initial(const InitialNet& net) {
    std::vector<NodeId> extra;
    for (const InitNode& n : net.nodes) extra.push_back(n.id);
    return from_edges(net.edges, net.border, std::move(extra), false);
  }
};

struct SizeBound : std::runtime_error {
  explicit SizeBound(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// A straight-path weight, carried as a fully normalized mixed word. Stable
// forms are not forced: a path may pass through words like q*.!1:q that only
// become reducible once further edges extend the path.
struct PathWeight {
  std::vector<Tok> toks;

  // Prepends w (starred, reversed, for a backwards traversal) and
  // renormalizes; composition is function-order, the newest edge leftmost.
  // Returns false when the word vanished.
  bool extend(const PositiveMonomial& w, bool reversed) {
    std::vector<Tok> next;
    next.reserve(w.size() + toks.size());
    if (reversed) {
      for (size_t i = w.size(); i > 0; --i) next.push_back({w.atoms()[i - 1], true});
    } else {
      for (const Atom& a : w.atoms()) next.push_back({a, false});
    }
    next.insert(next.end(), toks.begin(), toks.end());
    if (!rewrite_stack(next)) return false;
    toks = std::move(next);
    return true;
  }

  bool squared_is_zero() const {
    std::vector<Tok> twice = toks;
    twice.insert(twice.end(), toks.begin(), toks.end());
    return !rewrite_stack(twice);
  }

  // Stable split; the word is normalized already.
  bool to_stable(StableResult& out) const {
    size_t split = 0;
    while (split < toks.size() && !toks[split].starred) ++split;
    for (size_t i = split; i < toks.size(); ++i)
      if (!toks[i].starred) return false;
    std::vector<Atom> a, b;
    for (size_t i = 0; i < split; ++i) a.push_back(toks[i].atom);
    for (size_t i = toks.size(); i > split; --i) b.push_back(toks[i - 1].atom);
    out = StableResult::stable(PositiveMonomial::from_atoms(a),
                               PositiveMonomial::from_atoms(b));
    return true;
  }

  std::string text() const { return word_to_string(toks); }
};

}  // namespace detail

/// Multiset of stable forms, one per nonzero border-to-border straight path.
/// Paths whose normal form is not a stable form land in `residues`; on
/// well-formed nets that vector stays empty.
struct ExecutionFormula {
  std::vector<StableResult> forms;    // kept sorted by (a, b)
  std::vector<std::string> residues;  // kept sorted

  void add(const detail::PathWeight& w) {
    StableResult s;
    if (w.to_stable(s)) forms.push_back(std::move(s));
    else residues.push_back(w.text());
  }
  void normalize() {
    std::sort(forms.begin(), forms.end(), [](const StableResult& x, const StableResult& y) {
      if (x.a != y.a) return x.a < y.a;
      return x.b < y.b;
    });
    std::sort(residues.begin(), residues.end());
  }
  friend bool operator==(const ExecutionFormula&, const ExecutionFormula&) = default;

  std::string to_text() const {
    std::string out;
    for (const auto& f : forms) {
      out += to_string(f);
      out += '\n';
    }
    for (const auto& r : residues) {
      out += r;
      out += '\n';
    }
    return out;
  }
};

namespace detail {

struct PathEnumerator {
  const OracleNet& net;
  std::map<NodeId, std::vector<size_t>> out_edges, in_edges;
  std::map<NodeId, size_t> border_index;
  size_t max_len;
  ExecutionFormula ex;

  explicit PathEnumerator(const OracleNet& n, size_t size_bound) : net(n) {
    if (net.edges.size() > size_bound)
      throw SizeBound("net exceeds oracle size bound (" +
                      std::to_string(net.edges.size()) + " edges)");
    for (size_t i = 0; i < net.edges.size(); ++i) {
      out_edges[net.edges[i].msg.source].push_back(i);
      in_edges[net.edges[i].msg.target].push_back(i);
    }
    for (size_t i = 0; i < net.border.size(); ++i) border_index[net.border[i]] = i;
    max_len = 10 * net.edges.size() + 16;
  }

  void dfs(const NodeId& at_node, size_t start_border, ptrdiff_t last_edge,
           bool last_reversed, const PathWeight& acc, size_t len) {
    if (len > max_len)
      throw SizeBound("straight-path enumeration exceeded length cap");
    if (len > 0) {
      auto it = border_index.find(at_node);
      if (it != border_index.end() && it->second >= start_border) ex.add(acc);
    }
    auto it_out = out_edges.find(at_node);
    if (it_out != out_edges.end()) {
      for (size_t ei : it_out->second) {
        if (last_edge == static_cast<ptrdiff_t>(ei) && last_reversed) continue;
        PathWeight next = acc;
        if (!next.extend(net.edges[ei].msg.weight, false)) continue;
        dfs(net.edges[ei].msg.target, start_border, static_cast<ptrdiff_t>(ei), false,
            next, len + 1);
      }
    }
    auto it_in = in_edges.find(at_node);
    if (it_in != in_edges.end()) {
      for (size_t ei : it_in->second) {
        if (last_edge == static_cast<ptrdiff_t>(ei) && !last_reversed) continue;
        // A bounce between two combusted edges at their common target is a
        // junction the reduction already consumed (filtered); skip it.
        if (last_edge >= 0 && !last_reversed &&
            net.edges[static_cast<size_t>(last_edge)].combusted &&
            net.edges[ei].combusted)
          continue;
        PathWeight next = acc;
        if (!next.extend(net.edges[ei].msg.weight, true)) continue;
        dfs(net.edges[ei].msg.source, start_border, static_cast<ptrdiff_t>(ei), true,
            next, len + 1);
      }
    }
  }
};

}  // namespace detail

/// EX(R): weights of all nonzero border-to-border straight paths, enumerated
/// once per geometric path (ordered border pairs i <= j; paths from a border
/// to itself appear in both traversal directions).
inline ExecutionFormula execution_formula(const OracleNet& net, size_t size_bound = 200) {
  detail::PathEnumerator en(net, size_bound);
  for (size_t i = 0; i < net.border.size(); ++i) {
    en.dfs(net.border[i], i, -1, false, detail::PathWeight{}, 0);
  }
  en.ex.normalize();
  return en.ex;
}

/// Net-validity sweep: acyclicity, splitness of every coincident triple and
/// vanishing of small closed straight squares. Violations are reported, not
/// thrown.
struct ValidityReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidityReport check_net_validity(const OracleNet& net, size_t size_bound = 200) {
  ValidityReport rep;
  if (net.edges.size() > size_bound) {
    rep.violations.push_back("net exceeds validity size bound");
    return rep;
  }

  // Acyclicity by Kahn's algorithm.
  std::map<NodeId, size_t> indeg;
  for (const NodeId& n : net.nodes) indeg[n] = 0;
  for (const OracleEdge& e : net.edges) indeg[e.msg.target]++;
  std::vector<NodeId> queue;
  for (const auto& [n, d] : indeg)
    if (d == 0) queue.push_back(n);
  size_t seen = 0;
  std::map<NodeId, std::vector<NodeId>> adj;
  for (const OracleEdge& e : net.edges) adj[e.msg.source].push_back(e.msg.target);
  while (!queue.empty()) {
    NodeId n = queue.back();
    queue.pop_back();
    ++seen;
    for (const NodeId& m : adj[n])
      if (--indeg[m] == 0) queue.push_back(m);
  }
  if (seen != indeg.size()) rep.violations.push_back("net contains a directed cycle");

  // Splitness: every coincident triple of distinct edges vanishes.
  std::map<NodeId, std::vector<const EdgeMsg*>> coincident;
  for (const OracleEdge& e : net.edges) coincident[e.msg.target].push_back(&e.msg);
  for (const auto& [node, edges] : coincident) {
    for (size_t i = 0; i < edges.size(); ++i)
      for (size_t j = i + 1; j < edges.size(); ++j)
        for (size_t k = j + 1; k < edges.size(); ++k) {
          if (!fin_product_zero({edges[i]->weight, edges[j]->weight, edges[k]->weight})) {
            rep.violations.push_back(
                "splitness violated at node " + std::to_string(node.timestamp) + ": (" +
                to_string(edges[i]->weight) + ", " + to_string(edges[j]->weight) + ", " +
                to_string(edges[k]->weight) + ")");
          }
        }
  }

  // Square-freeness on short closed straight paths: phi.phi must vanish for
  // every closed straight phi of length <= 4.
  struct Walker {
    const OracleNet& net;
    std::map<NodeId, std::vector<size_t>> out_e, in_e;
    ValidityReport& rep;

    void dfs(const NodeId& origin, const NodeId& at_node, ptrdiff_t first_edge,
             bool first_rev, ptrdiff_t last_edge, bool last_rev,
             const detail::PathWeight& acc, size_t len) {
      if (len > 0 && at_node == origin) {
        // Straightness across the seam: the walk may not re-enter through
        // the edge it left by.
        if (!(first_edge == last_edge && first_rev != last_rev) && len >= 2) {
          if (!acc.squared_is_zero())
            rep.violations.push_back("square-freeness violated on a closed path of length " +
                                     std::to_string(len));
        }
      }
      if (len == 4) return;
      auto step = [&](size_t ei, bool reversed, const NodeId& next_node) {
        if (last_edge == static_cast<ptrdiff_t>(ei) && last_rev != reversed) return;
        detail::PathWeight next = acc;
        if (!next.extend(net.edges[ei].msg.weight, reversed)) return;
        dfs(origin, next_node, first_edge == -1 ? static_cast<ptrdiff_t>(ei) : first_edge,
            first_edge == -1 ? reversed : first_rev, static_cast<ptrdiff_t>(ei), reversed,
            next, len + 1);
      };
      auto ito = out_e.find(at_node);
      if (ito != out_e.end())
        for (size_t ei : ito->second) step(ei, false, net.edges[ei].msg.target);
      auto iti = in_e.find(at_node);
      if (iti != in_e.end())
        for (size_t ei : iti->second) step(ei, true, net.edges[ei].msg.source);
    }
  };
  Walker w{net, {}, {}, rep};
  for (size_t i = 0; i < net.edges.size(); ++i) {
    w.out_e[net.edges[i].msg.source].push_back(i);
    w.in_e[net.edges[i].msg.target].push_back(i);
  }
  for (const NodeId& n : net.nodes)
    w.dfs(n, n, -1, false, -1, false, detail::PathWeight{}, 0);

  return rep;
}

// ---------------------------------------------------------------------------
// Normal-order beta reduction (front-end sanity oracle).
// ---------------------------------------------------------------------------

struct FuelExhausted : std::runtime_error {
  FuelExhausted() : std::runtime_error("beta reduction ran out of fuel") {}
};

namespace detail {

inline void free_vars_of(const TermPtr& t, std::set<std::string>& out,
                         std::vector<std::string>& bound) {
  switch (t->kind) {
    case Term::Kind::Var:
      for (const auto& b : bound)
        if (b == t->name) return;
      out.insert(t->name);
      return;
    case Term::Kind::Abs:
      bound.push_back(t->name);
      free_vars_of(t->left, out, bound);
      bound.pop_back();
      return;
    case Term::Kind::App:
      free_vars_of(t->left, out, bound);
      free_vars_of(t->right, out, bound);
      return;
  }
}

inline std::set<std::string> free_vars_of(const TermPtr& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  free_vars_of(t, out, bound);
  return out;
}

// Capture-avoiding substitution t[name := value].
inline TermPtr substitute(const TermPtr& t, const std::string& name, const TermPtr& value,
                          uint64_t& fresh) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name == name ? value : t;
    case Term::Kind::Abs: {
      if (t->name == name) return t;
      if (free_vars_of(value).count(t->name)) {
        std::string renamed = t->name + "_" + std::to_string(fresh++);
        TermPtr body = substitute(t->left, t->name, make_var(renamed), fresh);
        return make_abs(renamed, substitute(body, name, value, fresh));
      }
      return make_abs(t->name, substitute(t->left, name, value, fresh));
    }
    case Term::Kind::App:
      return make_app(substitute(t->left, name, value, fresh),
                      substitute(t->right, name, value, fresh));
  }
  return t;
}

inline TermPtr reduce_leftmost(const TermPtr& t, uint64_t& fresh) {
  switch (t->kind) {
    case Term::Kind::Var:
      return nullptr;
    case Term::Kind::Abs: {
      TermPtr body = reduce_leftmost(t->left, fresh);
      return body ? make_abs(t->name, body) : nullptr;
    }
    case Term::Kind::App: {
      if (t->left->kind == Term::Kind::Abs)
        return substitute(t->left->left, t->left->name, t->right, fresh);
      if (TermPtr f = reduce_leftmost(t->left, fresh)) return make_app(f, t->right);
      if (TermPtr a = reduce_leftmost(t->right, fresh)) return make_app(t->left, a);
      return nullptr;
    }
  }
  return nullptr;
}

}  // namespace detail

/// Leftmost-outermost reduction to beta normal form, or FuelExhausted.
inline TermPtr beta_normal_form(TermPtr t, uint64_t fuel = 100000) {
  uint64_t fresh = 0;
  for (uint64_t i = 0; i < fuel; ++i) {
    TermPtr next = detail::reduce_leftmost(t, fresh);
    if (!next) return t;
    t = next;
  }
  throw FuelExhausted();
}

}  // namespace pelcr
