#pragma once

// Net dump text format and the canonical form.
//
//   node <t>:<creator>:<host> border|inner
//   edge <t>:<creator>:<host> <t>:<creator>:<host> <weight> s<tslot> o<oslot>
//
// Lines are sorted, weights use the algebra grammar, round-trips are exact.
// canonicalize() relabels node ids by a BFS from the border and renames each
// node's slots by structural keys, so nets that differ only in created-node
// ids, hosts, or arrival-order slot naming print byte-identically.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pelcr/net.hpp"
#include "pelcr/runtime.hpp"

namespace pelcr {

struct NetDumpParseError : std::runtime_error {
  explicit NetDumpParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string id_text(const NodeId& id) {
  return std::to_string(id.timestamp) + ":" + std::to_string(id.creator) + ":" +
         std::to_string(id.host);
}

inline NodeId parse_id(const std::string& s) {
  NodeId id;
  size_t a = s.find(':');
  size_t b = s.find(':', a + 1);
  if (a == std::string::npos || b == std::string::npos)
    throw NetDumpParseError("bad node id: " + s);
  id.timestamp = std::stoull(s.substr(0, a));
  id.creator = static_cast<WorkerId>(std::stoul(s.substr(a + 1, b - a - 1)));
  id.host = static_cast<WorkerId>(std::stoul(s.substr(b + 1)));
  return id;
}

}  // namespace detail

inline std::string dump_net(const FinalNet& net) {
  std::set<NodeId> border(net.border.begin(), net.border.end());
  std::map<NodeId, bool> nodes;
  for (const auto& [id, is_border] : net.nodes) nodes[id] = is_border || border.count(id);
  for (const EdgeMsg& e : net.edges) {
    nodes.try_emplace(e.source, border.count(e.source) != 0);
    nodes.try_emplace(e.target, border.count(e.target) != 0);
  }
  std::vector<std::string> lines;
  for (const auto& [id, is_border] : nodes)
    lines.push_back("node " + detail::id_text(id) + (is_border ? " border" : " inner"));
  std::vector<std::string> edge_lines;
  for (const EdgeMsg& e : net.edges) {
    edge_lines.push_back("edge " + detail::id_text(e.source) + " " +
                         detail::id_text(e.target) + " " + to_string(e.weight) + " s" +
                         std::to_string(e.target_slot.index) + " o" +
                         std::to_string(e.source_slot.index));
  }
  std::sort(edge_lines.begin(), edge_lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  for (const auto& l : edge_lines) {
    out += l;
    out += '\n';
  }
  return out;
}

inline FinalNet parse_net_dump(const std::string& text) {
  FinalNet net;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "node") {
      std::string id, role;
      ls >> id >> role;
      if (role != "border" && role != "inner")
        throw NetDumpParseError("line " + std::to_string(lineno) + ": bad node role");
      NodeId nid = detail::parse_id(id);
      net.nodes.emplace_back(nid, role == "border");
      if (role == "border") net.border.push_back(nid);
    } else if (kind == "edge") {
      std::string src, dst, weight, ts, os;
      ls >> src >> dst >> weight >> ts >> os;
      if (ts.size() < 2 || os.size() < 2 || ts[0] != 's' || os[0] != 'o')
        throw NetDumpParseError("line " + std::to_string(lineno) + ": bad slots");
      EdgeMsg e;
      e.source = detail::parse_id(src);
      e.target = detail::parse_id(dst);
      Weight w = parse_weight(weight);
      if (w.is_zero())
        throw NetDumpParseError("line " + std::to_string(lineno) + ": zero edge weight");
      e.weight = w.monomial();
      e.target_slot = Slot{static_cast<uint32_t>(std::stoul(ts.substr(1)))};
      e.source_slot = Slot{static_cast<uint32_t>(std::stoul(os.substr(1)))};
      net.edges.push_back(std::move(e));
    } else {
      throw NetDumpParseError("line " + std::to_string(lineno) + ": unknown record");
    }
  }
  std::sort(net.border.begin(), net.border.end());
  return net;
}

/// Relabels NodeIds by a deterministic BFS from the sorted border and renames
/// every node's slots by structural keys. Isomorphic final nets (same term,
/// different worker counts or schedules) canonicalize to identical nets.
inline FinalNet canonicalize(const FinalNet& net) {
  // Collect all nodes (records plus phantom edge endpoints).
  std::set<NodeId> border(net.border.begin(), net.border.end());
  std::set<NodeId> all;
  for (const auto& [id, b] : net.nodes) all.insert(id);
  for (const EdgeMsg& e : net.edges) {
    all.insert(e.source);
    all.insert(e.target);
  }

  std::map<NodeId, std::vector<size_t>> incident;  // node -> edge indices
  for (size_t i = 0; i < net.edges.size(); ++i) {
    incident[net.edges[i].source].push_back(i);
    incident[net.edges[i].target].push_back(i);
  }

  // Phase 1: BFS numbering from the border. Neighbors explored in the order
  // of a slot-free edge key; unvisited ties are resolved by iterating.
  std::map<NodeId, uint64_t> canon;
  std::vector<NodeId> order;
  auto visit = [&](const NodeId& id) {
    if (canon.count(id)) return;
    canon[id] = order.size();
    order.push_back(id);
  };
  std::vector<NodeId> sorted_border(border.begin(), border.end());
  for (const NodeId& b : sorted_border) visit(b);
  for (size_t head = 0; head < order.size(); ++head) {
    NodeId at = order[head];
    auto it = incident.find(at);
    if (it == incident.end()) continue;
    // Edge key: direction from `at`, weight, then known far ids first.
    std::vector<std::pair<std::string, NodeId>> frontier;
    for (size_t ei : it->second) {
      const EdgeMsg& e = net.edges[ei];
      bool outgoing = e.source == at;
      NodeId far = outgoing ? e.target : e.source;
      if (canon.count(far)) continue;
      frontier.emplace_back((outgoing ? "o " : "i ") + to_string(e.weight), far);
    }
    std::sort(frontier.begin(), frontier.end());
    for (auto& [key, far] : frontier) visit(far);
  }
  // Unreachable leftovers (isolated nodes), in original-id order.
  for (const NodeId& id : all) visit(id);

  // Phase 2: per-node slot renaming by structural key. A slot's key is the
  // sorted multiset of its incident edges described with canonical far ids.
  std::map<NodeId, std::map<uint32_t, std::vector<std::string>>> slot_desc;
  for (const EdgeMsg& e : net.edges) {
    slot_desc[e.source][e.source_slot.index].push_back(
        "o " + to_string(e.weight) + " " + std::to_string(canon[e.target]));
    slot_desc[e.target][e.target_slot.index].push_back(
        "i " + to_string(e.weight) + " " + std::to_string(canon[e.source]));
  }
  std::map<NodeId, std::map<uint32_t, uint32_t>> slot_rename;
  for (auto& [id, slots] : slot_desc) {
    std::vector<std::pair<std::string, uint32_t>> keyed;
    for (auto& [slot, descs] : slots) {
      std::sort(descs.begin(), descs.end());
      std::string key;
      for (const auto& d : descs) {
        key += d;
        key += '|';
      }
      keyed.emplace_back(std::move(key), slot);
    }
    std::sort(keyed.begin(), keyed.end());
    auto& rename = slot_rename[id];
    for (uint32_t i = 0; i < keyed.size(); ++i) rename[keyed[i].second] = i;
  }

  FinalNet out;
  auto canon_id = [&](const NodeId& id) { return NodeId{canon[id], 0, 0}; };
  for (const NodeId& id : order) out.nodes.emplace_back(canon_id(id), border.count(id) != 0);
  for (const NodeId& b : sorted_border) out.border.push_back(canon_id(b));
  for (const EdgeMsg& e : net.edges) {
    EdgeMsg c = e;
    c.source = canon_id(e.source);
    c.target = canon_id(e.target);
    c.source_slot = Slot{slot_rename[e.source][e.source_slot.index]};
    c.target_slot = Slot{slot_rename[e.target][e.target_slot.index]};
    c.adoption_token = 0;
    out.edges.push_back(std::move(c));
  }
  return out;
}

inline std::string canonical_dump(const FinalNet& net) { return dump_net(canonicalize(net)); }

/// Restriction of a net to the nodes with a directed path to the border
/// (the normal form under the gc=off semantics).
inline FinalNet border_reachable_restriction(const FinalNet& net) {
  std::set<NodeId> keep(net.border.begin(), net.border.end());
  // Reverse reachability over directed edges, to fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const EdgeMsg& e : net.edges) {
      if (keep.count(e.target) && !keep.count(e.source)) {
        keep.insert(e.source);
        changed = true;
      }
    }
  }
  FinalNet out;
  out.border = net.border;
  for (const auto& [id, b] : net.nodes)
    if (keep.count(id)) out.nodes.emplace_back(id, b);
  for (const EdgeMsg& e : net.edges)
    if (keep.count(e.source) && keep.count(e.target)) out.edges.push_back(e);
  return out;
}

}  // namespace pelcr
