#pragma once

// The half-combustion kernel. Each incoming edge is composed against every
// combusted edge of its target filed under a different slot, then filed
// itself. A composition either vanishes, creates a fresh node with two
// residual edges, or - when one residual is 1 - reroutes a single edge and
// grows the adoptee's EOT expectation (the optimization of one).

#include <cstdint>

#include "pelcr/algebra.hpp"
#include "pelcr/net.hpp"

namespace pelcr {

struct EngineConfig {
  bool slot_skip = true;  // skip same-slot pairs (provably orthogonal)
  bool opt_one = true;    // reroute instead of creating weight-1 edges
  bool debug_checks = false;
};

struct EngineCounters {
  uint64_t compositions = 0;       // star_mul evaluations
  uint64_t zero_compositions = 0;
  uint64_t new_nodes = 0;
  uint64_t reroutes = 0;
  uint64_t same_slot_skipped = 0;  // pairs not composed thanks to slot classification
  uint64_t same_slot_nonzero = 0;  // slot_skip off: same-slot pairs that did not vanish
  uint64_t opt_one_violations = 0; // debug: nonzero sibling composition next to a reroute
};

struct NodeIdGen {
  WorkerId self = 0;
  uint64_t next_timestamp = 0;
  NodeId fresh(WorkerId host) { return NodeId{next_timestamp++, self, host}; }
  // Adoption tokens share the timestamp counter; uniqueness comes from
  // (counter, worker) exactly as for node ids.
  uint64_t fresh_token() { return (next_timestamp++ << 16) | (self + 1); }
};

struct ComposeOutcome {
  enum class Kind { Null, NewNode, Rerouted } kind = Kind::Null;
  // NewNode
  NodeId id;
  EdgeMsg to_incoming_source;
  EdgeMsg to_combusted_source;
  // Rerouted
  EdgeMsg edge;
  OutDegreeIncMsg adopt;
};

/// One DVR step between the incoming edge and one combusted edge of the same
/// target. The combusted edge plays b, the incoming plays a; a'.b'* is the
/// stable form of b*.a, b' flows toward the incoming source.
template <typename HostChooser>
ComposeOutcome compose(const EdgeMsg& incoming, const EdgeMsg& combusted,
                       NodeIdGen& idgen, HostChooser&& choose_host,
                       const EngineConfig& cfg) {
  ComposeOutcome out;
  StableResult s;
  try {
    s = star_mul(combusted.weight, incoming.weight);
  } catch (const NonStableResidue& e) {
    throw NonStableResidue(std::string(e.what()) + " while composing combusted " +
                           to_string(combusted.weight) + " with incoming " +
                           to_string(incoming.weight));
  }
  if (s.zero) return out;

  // Total mutual annihilation (a' = b' = 1) is handled by a fresh node, not
  // a reroute: the pair is perfectly symmetric, so a single weight-1 edge
  // has no arrival-order-independent orientation and would make the reduced
  // net depend on scheduling.
  if (cfg.opt_one && s.b.is_one() && !s.a.is_one()) {
    // The incoming edge is total w.r.t. the combusted one: transfer its
    // source directly, inheriting the incoming edge's out-line.
    uint64_t token = idgen.fresh_token();
    out.kind = ComposeOutcome::Kind::Rerouted;
    out.edge = EdgeMsg{incoming.source, combusted.source, std::move(s.a),
                       combusted.source_slot, incoming.source_slot, token};
    out.adopt = OutDegreeIncMsg{incoming.source, incoming.source_slot, token};
    return out;
  }
  if (cfg.opt_one && s.a.is_one() && !s.b.is_one()) {
    uint64_t token = idgen.fresh_token();
    out.kind = ComposeOutcome::Kind::Rerouted;
    out.edge = EdgeMsg{combusted.source, incoming.source, std::move(s.b),
                       incoming.source_slot, combusted.source_slot, token};
    out.adopt = OutDegreeIncMsg{combusted.source, combusted.source_slot, token};
    return out;
  }

  out.kind = ComposeOutcome::Kind::NewNode;
  out.id = idgen.fresh(choose_host());
  out.to_incoming_source = EdgeMsg{out.id, incoming.source, std::move(s.b),
                                   incoming.source_slot, Slot{0}, 0};
  out.to_combusted_source = EdgeMsg{out.id, combusted.source, std::move(s.a),
                                    combusted.source_slot, Slot{1}, 0};
  return out;
}

/// Processes one incoming edge message at its (possibly delayed-created)
/// target: compose against every opposite-slot combusted edge, emit the
/// results, then file the edge. Emissions go through `emit(Msg)`; routing by
/// target host is the caller's business.
template <typename HostChooser, typename Emit>
void process_edge(const EdgeMsg& m, NodeStore& store, NodeIdGen& idgen,
                  HostChooser&& choose_host, Emit&& emit, const EngineConfig& cfg,
                  EngineCounters& counters) {
  NodeRecord& rec = store.lookup_or_create(m.target);

  bool rerouted_from_incoming = false;
  bool any_other_nonzero = false;
  for (uint32_t slot = 0; slot < rec.combusted.size(); ++slot) {
    const auto& edges = rec.combusted[slot];
    if (edges.empty()) continue;
    if (slot == m.target_slot.index) {
      if (cfg.slot_skip) {
        counters.same_slot_skipped += edges.size();
        continue;
      }
      // Debug mode: evaluate the skipped class and insist it vanishes.
      for (const EdgeMsg& e : edges) {
        counters.compositions += 1;
        if (!star_mul(e.weight, m.weight).zero) counters.same_slot_nonzero += 1;
        else counters.zero_compositions += 1;
      }
      continue;
    }
    for (const EdgeMsg& e : edges) {
      counters.compositions += 1;
      ComposeOutcome out = compose(m, e, idgen, choose_host, cfg);
      switch (out.kind) {
        case ComposeOutcome::Kind::Null:
          counters.zero_compositions += 1;
          break;
        case ComposeOutcome::Kind::NewNode:
          counters.new_nodes += 1;
          any_other_nonzero = true;
          emit(Msg{std::move(out.to_incoming_source)});
          emit(Msg{std::move(out.to_combusted_source)});
          break;
        case ComposeOutcome::Kind::Rerouted:
          counters.reroutes += 1;
          if (out.adopt.target == m.source) rerouted_from_incoming = true;
          else any_other_nonzero = true;
          emit(Msg{out.adopt});
          emit(Msg{std::move(out.edge)});
          break;
      }
    }
  }
  if (cfg.debug_checks && rerouted_from_incoming && any_other_nonzero) {
    // Totality says an incoming-side reroute excludes every other nonzero
    // composition of the same incoming edge.
    counters.opt_one_violations += 1;
  }
  add_combusted(rec, m);
}

/// Debug/oracle sweep for the semifull invariant: within every slot of every
/// node, stored edges are pairwise orthogonal (the content of the residual
/// orthogonality proposition; cross-slot pairs were already composed when
/// the later edge arrived).
inline bool classify_semifull(const NodeStore& store) {
  bool ok = true;
  store.for_each([&](const NodeRecord& rec) {
    for (const auto& edges : rec.combusted)
      for (size_t i = 0; i < edges.size() && ok; ++i)
        for (size_t j = i + 1; j < edges.size() && ok; ++j)
          if (!fin_product_zero({edges[i].weight, edges[j].weight})) ok = false;
  });
  return ok;
}

}  // namespace pelcr
