#include <catch2/catch_amalgamated.hpp>

#include "pelcr/net.hpp"

using namespace pelcr;

namespace {
NodeId nid(uint64_t t, WorkerId c = 0, WorkerId h = 0) { return NodeId{t, c, h}; }
EdgeMsg edge(NodeId s, NodeId t, const char* w, uint32_t tslot, uint32_t oslot,
             uint64_t token = 0) {
  return EdgeMsg{s, t, parse_monomial(w), Slot{tslot}, Slot{oslot}, token};
}
}  // namespace

TEST_CASE("delayed creation initializes a DVR record") {
  NodeStore store;
  NodeRecord& rec = store.lookup_or_create(nid(7, 1, 2));
  REQUIRE(rec.eot.size() == 2);
  CHECK(rec.eot[0].expected_base == 1);
  CHECK(rec.eot[1].expected_base == 1);
  CHECK(rec.stored_edges() == 0);
  // Idempotent: second lookup returns the same record.
  add_combusted(rec, edge(nid(1), nid(7, 1, 2), "p", 0, 0));
  CHECK(store.lookup_or_create(nid(7, 1, 2)).stored_edges() == 1);
  CHECK(store.live_count() == 1);
}

TEST_CASE("lookup after removal is an error") {
  NodeStore store;
  store.lookup_or_create(nid(3));
  store.remove(nid(3));
  CHECK(store.removed(nid(3)));
  CHECK_THROWS_AS(store.lookup_or_create(nid(3)), AccessAfterRemoval);
}

TEST_CASE("combusted edges partition by slot") {
  NodeStore store;
  NodeRecord& rec = store.lookup_or_create(nid(1));
  add_combusted(rec, edge(nid(10), nid(1), "p", 0, 0));
  add_combusted(rec, edge(nid(11), nid(1), "q", 0, 1));
  add_combusted(rec, edge(nid(12), nid(1), "q.q", 1, 0));
  REQUIRE(rec.combusted.size() == 2);
  CHECK(rec.combusted[0].size() == 2);
  CHECK(rec.combusted[1].size() == 1);
  // Insertion order preserved.
  CHECK(to_string(rec.combusted[0][0].weight) == "p");
  CHECK(to_string(rec.combusted[0][1].weight) == "q");
}

TEST_CASE("two EOTs remove a DVR node and propagate to in-edge sources") {
  NodeStore store;
  NodeRecord& rec = store.lookup_or_create(nid(5));
  add_combusted(rec, edge(nid(20), nid(5), "p", 0, 3));
  add_combusted(rec, edge(nid(21), nid(5), "q", 1, 0, 77));
  record_adoption(rec, 99);  // an adopted line of this node's own
  CHECK(record_eot(rec, Slot{0}, 0) == RemovalDecision::KeepAlive);
  CHECK(record_eot(rec, Slot{1}, 0) == RemovalDecision::KeepAlive);
  CHECK(record_eot(rec, Slot{0}, 99) == RemovalDecision::Remove);
  auto eots = removal_eots(rec);
  REQUIRE(eots.size() == 2);
  CHECK(eots[0].target == nid(20));
  CHECK(eots[0].slot == Slot{3});
  CHECK(eots[0].token == 0);
  CHECK(eots[1].target == nid(21));
  CHECK(eots[1].token == 77);  // adopted in-edge closes with its token
}

TEST_CASE("adopted lines need the matched OutDegreeInc and EOT, in any order") {
  NodeStore store;
  NodeRecord& rec = store.lookup_or_create(nid(6));
  // The token EOT arriving before its OutDegreeInc must not enable removal.
  CHECK(record_eot(rec, Slot{0}, 41) == RemovalDecision::KeepAlive);
  CHECK(record_eot(rec, Slot{0}, 0) == RemovalDecision::KeepAlive);
  CHECK(record_eot(rec, Slot{1}, 0) == RemovalDecision::KeepAlive);
  record_adoption(rec, 41);
  CHECK(removal_decision(rec) == RemovalDecision::Remove);
}

TEST_CASE("a foreign token never completes another line's adoption") {
  NodeStore store;
  NodeRecord& rec = store.lookup_or_create(nid(8));
  record_adoption(rec, 7);                                   // expecting line 7
  CHECK(record_eot(rec, Slot{0}, 13) == RemovalDecision::KeepAlive);  // wrong line
  CHECK(record_eot(rec, Slot{0}, 0) == RemovalDecision::KeepAlive);
  CHECK(record_eot(rec, Slot{1}, 0) == RemovalDecision::KeepAlive);
  // Only the exact match closes it.
  CHECK(record_eot(rec, Slot{0}, 7) == RemovalDecision::KeepAlive);
  record_adoption(rec, 13);
  CHECK(removal_decision(rec) == RemovalDecision::Remove);
}

TEST_CASE("EOT overflow is an ordering violation") {
  NodeStore store;
  NodeRecord& rec = store.lookup_or_create(nid(9));
  record_eot(rec, Slot{0}, 0);
  CHECK_THROWS_AS(record_eot(rec, Slot{0}, 0), EOTOverflow);
  record_eot(rec, Slot{1}, 5);
  CHECK_THROWS_AS(record_eot(rec, Slot{1}, 5), EOTOverflow);
}

TEST_CASE("initial records carry their own expectations") {
  NodeStore store;
  NodeRecord& rec = store.insert_initial(nid(0), false, 3);
  REQUIRE(rec.eot.size() == 3);
  record_eot(rec, Slot{0}, 0);
  record_eot(rec, Slot{1}, 0);
  CHECK(record_eot(rec, Slot{2}, 0) == RemovalDecision::Remove);
  NodeRecord& b = store.insert_initial(nid(1), true, 0);
  CHECK(b.is_border);
  CHECK(b.eot.empty());
}
