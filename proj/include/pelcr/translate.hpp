#pragma once

// Front end: leveled sharing graph with muxes, then the initial directed
// virtual net.
//
// Wires between operator ports are the net's nodes. Every operator emits
// edges from its auxiliary wires into its principal wire, so both sides of a
// cut point into the cut wire and the net is acyclic:
//
//   abstraction at level i:  body -!i:q-> principal,  var -!i:p-> principal
//   application at level i:  result -!i:q-> function, argument -!i:p-> function
//   mux premise (n,l) at i:  occurrence -!i:w(n,l)-> mux root
//
// Levels: the root is at 0, an application's argument enters a box (level+1),
// an abstraction body stays at its binder's level. A variable bound at level
// b occurring at level o contributes a premise of lift o-b; a single
// occurrence of lift 0 collapses to a plain wire. Amalgamation then contracts
// every interior wire with exactly one outgoing edge, composing weights, so
// only cut wires, source wires and the border remain.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pelcr/algebra.hpp"
#include "pelcr/net.hpp"
#include "pelcr/term.hpp"

namespace pelcr {

struct InitNode {
  NodeId id;
  bool border = false;
  uint32_t out_degree = 0;  // real out-edges
  uint32_t eot_slots = 0;   // 0 for border; max(out_degree, 1) otherwise
  uint32_t in_slot_base = 0;
};

struct InitialNet {
  std::vector<InitNode> nodes;
  std::vector<EdgeMsg> edges;
  std::vector<NodeId> border;  // root first, then free variables in order
};

struct TranslateError : std::runtime_error {
  explicit TranslateError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

class Translator {
 public:
  explicit Translator(const std::vector<std::string>& free_vars) {
    root_ = fresh_wire();
    border_wires_.push_back(root_);
    for (const auto& name : free_vars) {
      int w = fresh_wire();
      border_wires_.push_back(w);
      free_frames_.emplace(name, Frame{0, w, {}});
    }
  }

  InitialNet run(const TermPtr& t) {
    emit(t, 0, root_);
    for (auto& [name, frame] : free_frames_) close_binder(frame);
    resolve_edges();
    amalgamate();
    return build_net();
  }

 private:
  struct Frame {
    uint32_t level;
    int var_wire;  // -1 until the mux root is known; borders pre-set it
    std::vector<std::pair<int, uint32_t>> occs;  // (wire, occurrence level)
  };

  struct WireEdge {
    int src, dst;
    PositiveMonomial w;
  };

  int fresh_wire() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }

  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }

  bool is_border_wire(int w) {
    for (int b : border_wires_)
      if (find(b) == find(w)) return true;
    return false;
  }

  void add_edge(int src, int dst, PositiveMonomial w, uint32_t level) {
    // Level sanity: an emitted weight's minimum depth is the node's level.
    if (!w.is_one()) {
      uint32_t mind = UINT32_MAX;
      for (const Atom& a : w.atoms()) mind = std::min(mind, a.depth);
      if (mind != level) throw TranslateError("level sanity violated");
    }
    edges_.push_back(WireEdge{src, dst, std::move(w)});
  }

  void emit(const TermPtr& t, uint32_t level, int root_wire) {
    switch (t->kind) {
      case Term::Kind::Var: {
        Frame* f = lookup(t->name);
        if (!f) throw TranslateError("unbound variable " + t->name);
        f->occs.emplace_back(root_wire, level);
        return;
      }
      case Term::Kind::Abs: {
        int body = fresh_wire();
        scopes_[t->name].push_back(Frame{level, -1, {}});
        emit(t->left, level, body);
        Frame frame = scopes_[t->name].back();
        scopes_[t->name].pop_back();
        add_edge(body, root_wire, bang(PositiveMonomial::single(at(gen_q())), level), level);
        close_binder(frame);
        if (frame.var_wire >= 0)
          add_edge(frame.var_wire, root_wire,
                   bang(PositiveMonomial::single(at(gen_p())), level), level);
        return;
      }
      case Term::Kind::App: {
        int fun = fresh_wire();
        int arg = fresh_wire();
        add_edge(root_wire, fun, bang(PositiveMonomial::single(at(gen_q())), level), level);
        add_edge(arg, fun, bang(PositiveMonomial::single(at(gen_p())), level), level);
        emit(t->left, level, fun);
        emit(t->right, level + 1, arg);
        return;
      }
    }
  }

  Frame* lookup(const std::string& name) {
    auto it = scopes_.find(name);
    if (it != scopes_.end() && !it->second.empty()) return &it->second.back();
    auto fit = free_frames_.find(name);
    return fit == free_frames_.end() ? nullptr : &fit->second;
  }

  // Builds the mux for a binder. A 0-ary mux emits nothing; a single
  // occurrence of lift 0 is the identity and collapses to a wire.
  void close_binder(Frame& frame) {
    if (frame.occs.empty()) return;
    if (frame.occs.size() == 1 && frame.occs[0].second == frame.level) {
      int occ = frame.occs[0].first;
      if (frame.var_wire < 0) {
        frame.var_wire = occ;
      } else if (is_border_wire(occ) && is_border_wire(frame.var_wire)) {
        // A bare wire joins two border ports: weight-1 edge.
        add_edge(frame.var_wire, occ, one(), frame.level);
      } else {
        // Identify the occurrence wire with the mux root; keep borders as
        // representatives.
        int a = find(occ), b = find(frame.var_wire);
        if (is_border_wire(b)) parent_[a] = b;
        else parent_[b] = a;
      }
      return;
    }
    if (frame.var_wire < 0) frame.var_wire = fresh_wire();
    for (const auto& [occ, occ_level] : frame.occs) {
      uint32_t lift = occ_level - frame.level;
      PositiveMonomial w =
          bang(PositiveMonomial::single(at(gen_w(next_name_++, lift))), frame.level);
      add_edge(occ, frame.var_wire, std::move(w), frame.level);
    }
  }

  void resolve_edges() {
    for (WireEdge& e : edges_) {
      e.src = find(e.src);
      e.dst = find(e.dst);
      if (e.src == e.dst) throw TranslateError("self-loop in translated net");
    }
  }

  // Contracts every interior wire with one outgoing edge, composing the
  // out-weight after each in-weight. Applied to fixpoint.
  void amalgamate() {
    for (;;) {
      std::map<int, std::pair<int, int>> degree;  // wire -> (in, out)
      for (const WireEdge& e : edges_) {
        degree[e.src].second++;
        degree[e.dst].first++;
      }
      int victim = -1;
      for (const auto& [w, deg] : degree) {
        if (deg.first >= 1 && deg.second == 1 && !is_border_wire(w)) {
          victim = w;
          break;
        }
      }
      if (victim < 0) return;
      WireEdge out;
      std::vector<WireEdge> ins, rest;
      for (WireEdge& e : edges_) {
        if (e.src == victim) out = std::move(e);
        else if (e.dst == victim) ins.push_back(std::move(e));
        else rest.push_back(std::move(e));
      }
      for (WireEdge& in : ins) {
        if (in.src == out.dst) throw TranslateError("amalgamation formed a loop");
        rest.push_back(WireEdge{in.src, out.dst, mul(out.w, in.w)});
      }
      edges_ = std::move(rest);
    }
  }

  InitialNet build_net() {
    // Surviving wires, border first in declaration order.
    std::vector<int> wires;
    std::set<int> seen;
    for (int b : border_wires_) {
      int w = find(b);
      if (seen.insert(w).second) wires.push_back(w);
    }
    size_t border_count = wires.size();
    std::set<int> used;
    for (const WireEdge& e : edges_) {
      used.insert(e.src);
      used.insert(e.dst);
    }
    for (int w : used)
      if (seen.insert(w).second) wires.push_back(w);

    std::map<int, NodeId> ids;
    for (size_t i = 0; i < wires.size(); ++i)
      ids[wires[i]] = NodeId{static_cast<uint64_t>(i), 0, 0};

    std::map<int, uint32_t> out_deg, in_count, out_count;
    for (const WireEdge& e : edges_) out_deg[e.src]++;

    InitialNet net;
    for (size_t i = 0; i < wires.size(); ++i) {
      int w = wires[i];
      InitNode n;
      n.id = ids[w];
      n.border = i < border_count;
      n.out_degree = out_deg.count(w) ? out_deg[w] : 0;
      n.eot_slots = n.border ? 0 : std::max<uint32_t>(n.out_degree, 1);
      n.in_slot_base = n.border ? n.out_degree : n.eot_slots;
      net.nodes.push_back(n);
      if (n.border) net.border.push_back(n.id);
    }

    std::map<int, InitNode*> by_wire;
    for (size_t i = 0; i < wires.size(); ++i) by_wire[wires[i]] = &net.nodes[i];

    for (const WireEdge& e : edges_) {
      EdgeMsg m;
      m.source = ids[e.src];
      m.target = ids[e.dst];
      m.weight = e.w;
      m.source_slot = Slot{out_count[e.src]++};
      m.target_slot = Slot{by_wire[e.dst]->in_slot_base + in_count[e.dst]++};
      net.edges.push_back(std::move(m));
    }
    return net;
  }

  std::vector<int> parent_;
  std::vector<WireEdge> edges_;
  std::vector<int> border_wires_;
  std::map<std::string, std::vector<Frame>> scopes_;
  std::map<std::string, Frame> free_frames_;
  int root_ = 0;
  uint32_t next_name_ = 0;
};

}  // namespace detail

/// Translates a term into its initial directed virtual net. Free variables
/// become border nodes p1..pn after the root p0, in the given order.
inline InitialNet translate(const TermPtr& t,
                            const std::vector<std::string>& free_vars = {}) {
  detail::Translator tr(free_vars);
  return tr.run(t);
}

inline std::vector<NodeId> border_of(const InitialNet& net) { return net.border; }

}  // namespace pelcr
