#pragma once

// Directed-virtual-net data model: node identity, edge messages, per-node
// combusted storage with slot classification, delayed creation and EOT
// accounting for on-the-fly storage recovery.
//
// Slots name a node's out-lines. An in-edge is classified at its target by
// the out-line whose composition produced it; in-edges sharing a line are
// provably orthogonal and skipped. EOT bookkeeping is per out-slot and
// distinguishes base lines (the out-edges a node was created with) from
// extra lines added by the optimization-of-one reroute. Every adoption is
// identified by a token minted at the composing worker and carried by the
// OutDegreeInc, the rerouted edge and its closing EOT; a slot is complete
// only when every token has been seen from both sides. Chained adoptions
// spread these messages over different channels, so bare counters could be
// satisfied by mispaired arrivals and remove a node early - exact matching
// cannot.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "pelcr/algebra.hpp"

namespace pelcr {

using WorkerId = uint16_t;

/// Triple (timestamp, creator, host); (timestamp, creator) is globally
/// unique, host is where the record lives.
struct NodeId {
  uint64_t timestamp = 0;
  WorkerId creator = 0;
  WorkerId host = 0;

  uint64_t key() const { return (timestamp << 16) | creator; }
  friend constexpr bool operator==(const NodeId&, const NodeId&) = default;
  friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct Slot {
  uint32_t index = 0;
  friend constexpr bool operator==(const Slot&, const Slot&) = default;
  friend constexpr auto operator<=>(const Slot&, const Slot&) = default;
};

/// The unit application message: one directed weighted edge.
struct EdgeMsg {
  NodeId source;
  NodeId target;
  PositiveMonomial weight;     // always nonzero positive
  Slot target_slot;            // classification at the target (the paper's Side)
  Slot source_slot;            // which out-line of the source this edge is
  uint64_t adoption_token = 0; // nonzero iff created by a reroute
};

struct EotMsg {
  NodeId target;
  Slot slot;
  uint64_t token = 0;  // nonzero: closes the adopted line with this token
};

struct OutDegreeIncMsg {
  NodeId target;
  Slot slot;
  uint64_t token = 0;
};

struct StatusMsg {
  WorkerId worker = 0;
  uint64_t processed = 0;
  std::vector<uint64_t> produced_for;  // per destination worker
};

struct TerminateMsg {};

using Msg = std::variant<EdgeMsg, EotMsg, OutDegreeIncMsg, StatusMsg, TerminateMsg>;

struct AccessAfterRemoval : std::runtime_error {
  explicit AccessAfterRemoval(const NodeId& id)
      : std::runtime_error("access to removed node " + std::to_string(id.timestamp) +
                           ":" + std::to_string(id.creator)) {}
};

struct EOTOverflow : std::runtime_error {
  explicit EOTOverflow(const NodeId& id)
      : std::runtime_error("EOT overflow at node " + std::to_string(id.timestamp) +
                           ":" + std::to_string(id.creator)) {}
};

/// Per-out-slot EOT accounting for base lines.
struct SlotEot {
  uint32_t expected_base = 0;
  uint32_t received_base = 0;
  bool complete() const { return received_base == expected_base; }
};

/// One adopted line: seen from the OutDegreeInc side, the EOT side, or both.
struct Adoption {
  uint64_t token = 0;
  bool odi_seen = false;
  bool eot_seen = false;
};

struct NodeRecord {
  NodeId id;
  bool is_border = false;
  // Indexed by slot; in-edges filed under their target_slot.
  std::vector<std::vector<EdgeMsg>> combusted;
  std::vector<SlotEot> eot;        // indexed by out-slot
  std::vector<Adoption> adoptions; // usually empty; tokens are unique

  std::vector<EdgeMsg>& combusted_slot(Slot s) {
    if (combusted.size() <= s.index) combusted.resize(s.index + 1);
    return combusted[s.index];
  }

  size_t stored_edges() const {
    size_t n = 0;
    for (const auto& v : combusted) n += v.size();
    return n;
  }

  Adoption& adoption(uint64_t token) {
    for (Adoption& a : adoptions)
      if (a.token == token) return a;
    adoptions.push_back(Adoption{token, false, false});
    return adoptions.back();
  }
};

inline void add_combusted(NodeRecord& rec, const EdgeMsg& e) {
  rec.combusted_slot(e.target_slot).push_back(e);
}

enum class RemovalDecision { KeepAlive, Remove };

inline RemovalDecision removal_decision(const NodeRecord& rec) {
  for (const SlotEot& e : rec.eot)
    if (!e.complete()) return RemovalDecision::KeepAlive;
  for (const Adoption& a : rec.adoptions)
    if (!a.odi_seen || !a.eot_seen) return RemovalDecision::KeepAlive;
  return RemovalDecision::Remove;
}

/// Files one EOT into the record. Remove means every base line and every
/// adopted line is closed: no live or future message can target this node.
inline RemovalDecision record_eot(NodeRecord& rec, Slot slot, uint64_t token) {
  if (token != 0) {
    Adoption& a = rec.adoption(token);
    if (a.eot_seen) throw EOTOverflow(rec.id);
    a.eot_seen = true;
  } else {
    if (rec.eot.size() <= slot.index) rec.eot.resize(slot.index + 1);
    SlotEot& s = rec.eot[slot.index];
    if (s.received_base >= s.expected_base) throw EOTOverflow(rec.id);
    s.received_base += 1;
  }
  return removal_decision(rec);
}

/// Registers the OutDegreeInc side of an adoption.
inline void record_adoption(NodeRecord& rec, uint64_t token) {
  Adoption& a = rec.adoption(token);
  if (a.odi_seen) throw EOTOverflow(rec.id);
  a.odi_seen = true;
}

/// The outbound EOTs a removed node owes: one per stored in-edge, addressed
/// to the edge's source at the source-side slot.
inline std::vector<EotMsg> removal_eots(const NodeRecord& rec) {
  std::vector<EotMsg> out;
  out.reserve(rec.stored_edges());
  for (const auto& slot_edges : rec.combusted)
    for (const EdgeMsg& e : slot_edges)
      out.push_back(EotMsg{e.source, e.source_slot, e.adoption_token});
  return out;
}

/// Worker-local node table: hash map on (timestamp, creator) plus the
/// tombstone set that makes removal irreversible.
class NodeStore {
 public:
  /// Existing record, or a fresh one. DVR-created nodes are the source of
  /// exactly two edges, so a delayed-created record expects one base EOT on
  /// each of slots 0 and 1.
  NodeRecord& lookup_or_create(const NodeId& id) {
    if (tombstones_.count(id.key())) throw AccessAfterRemoval(id);
    auto [it, fresh] = map_.try_emplace(id.key());
    NodeRecord& rec = it->second;
    if (fresh) {
      rec.id = id;
      rec.eot.resize(2);
      rec.eot[0].expected_base = 1;
      rec.eot[1].expected_base = 1;
    }
    return rec;
  }

  /// Registers a translation-time node with explicit EOT expectations.
  NodeRecord& insert_initial(const NodeId& id, bool is_border, uint32_t out_slots) {
    auto [it, fresh] = map_.try_emplace(id.key());
    NodeRecord& rec = it->second;
    rec.id = id;
    rec.is_border = is_border;
    rec.eot.resize(out_slots);
    for (auto& s : rec.eot) s.expected_base = 1;
    return rec;
  }

  bool contains(const NodeId& id) const { return map_.count(id.key()) != 0; }
  bool removed(const NodeId& id) const { return tombstones_.count(id.key()) != 0; }

  void remove(const NodeId& id) {
    map_.erase(id.key());
    tombstones_.insert(id.key());
  }

  size_t live_count() const { return map_.size(); }

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [k, rec] : map_) f(rec);
  }

 private:
  std::unordered_map<uint64_t, NodeRecord> map_;
  std::unordered_set<uint64_t> tombstones_;
};

}  // namespace pelcr
