#pragma once

// Parallel orchestration: N in-process workers over pairwise FIFO channels.
// Worker 0 is the master; it holds every initial node and message, and owns
// termination detection. All cross-worker effects travel as messages; no
// node record is ever shared.
//
// Message flow per worker (the paper's program P_i):
//   drain channels -> process incoming -> route emissions through
//   aggregation buffers -> on empty worklist flush everything and either
//   report status (slave) or try to detect termination (master).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "pelcr/engine.hpp"
#include "pelcr/net.hpp"
#include "pelcr/translate.hpp"

namespace pelcr {

enum class AggPolicy { None, Fab, Vab };

struct RuntimeConfig {
  uint16_t workers = 1;
  AggPolicy agg = AggPolicy::Vab;
  uint32_t max_age = 4;
  uint32_t age_cap = 32;
  uint32_t rate_window = 16;
  uint32_t drain_cadence = 64;  // extra channel drain every K processed messages
  bool gc = true;
  bool opt_one = true;
  bool slot_skip = true;
  bool debug_checks = false;  // removal soundness sweeps (single worker only)
  bool trace_upm = false;
};

/// An aggregate of application/control messages plus the sender's current
/// unprocessed-message count, piggy-backed for load balancing.
struct PhysicalMessage {
  std::vector<Msg> payload;
  uint64_t upm = 0;
};

struct UpmSample {
  uint64_t time_us;
  uint16_t worker;
  uint64_t upm;
};

struct WorkerMetrics {
  uint64_t processed = 0;  // edge + EOT + OutDegreeInc messages
  std::vector<uint64_t> produced_for;
  uint64_t edges_processed = 0;
  uint64_t physical_sent = 0;
  uint64_t payload_items_sent = 0;
  uint64_t removals = 0;
  uint64_t drains = 0;
  uint64_t termination_rounds = 0;  // master only
  EngineCounters engine;
  std::vector<UpmSample> trace;
};

struct FinalNet {
  std::vector<std::pair<NodeId, bool>> nodes;  // (id, is_border)
  std::vector<EdgeMsg> edges;
  std::vector<NodeId> border;
};

namespace detail {

// Per-receiver mailbox: one FIFO queue per sender, drained in sender order.
class Mailbox {
 public:
  explicit Mailbox(size_t senders) : queues_(senders) {}

  void push(WorkerId from, PhysicalMessage&& pm) {
    {
      std::lock_guard<std::mutex> lk(mu_);
      queues_[from].push_back(std::move(pm));
      ++pending_;
    }
    cv_.notify_one();
  }

  bool drain(std::vector<std::vector<PhysicalMessage>>& out) {
    std::lock_guard<std::mutex> lk(mu_);
    if (pending_ == 0) return false;
    for (size_t i = 0; i < queues_.size(); ++i) {
      out[i].clear();
      while (!queues_[i].empty()) {
        out[i].push_back(std::move(queues_[i].front()));
        queues_[i].pop_front();
      }
    }
    pending_ = 0;
    return true;
  }

  void wait_for_data(std::chrono::microseconds timeout) {
    std::unique_lock<std::mutex> lk(mu_);
    if (pending_ > 0) return;
    cv_.wait_for(lk, timeout, [&] { return pending_ > 0; });
  }

  template <typename F>
  void peek(F&& f) const {  // single-threaded debug use
    for (const auto& q : queues_)
      for (const PhysicalMessage& pm : q)
        for (const Msg& m : pm.payload) f(m);
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::deque<PhysicalMessage>> queues_;
  size_t pending_ = 0;
};

struct AggregationBuffer {
  std::vector<Msg> pending;
  uint32_t age = 0;
  uint32_t max_age = 4;
  double rate_estimate = 0.0;
  std::deque<double> window;

  // One age tick, taken after each processed incoming message; true when the
  // aggregate is due.
  bool tick() {
    if (pending.empty()) return false;
    age += 1;
    return age >= max_age;
  }

  // VAB adaptation at flush time: compare the achieved arrival rate with the
  // sliding-window estimate, then fold it into the window.
  void vab_on_flush(uint32_t age_cap, uint32_t window_size) {
    double achieved =
        static_cast<double>(pending.size()) / static_cast<double>(std::max(1u, age));
    if (achieved > rate_estimate) max_age = std::min(max_age + 1, age_cap);
    else if (achieved < rate_estimate && max_age > 1) max_age -= 1;
    window.push_back(achieved);
    if (window.size() > window_size) window.pop_front();
    double sum = 0;
    for (double r : window) sum += r;
    rate_estimate = sum / static_cast<double>(window.size());
  }
};

inline bool counted_message(const Msg& m) {
  return std::holds_alternative<EdgeMsg>(m) || std::holds_alternative<EotMsg>(m) ||
         std::holds_alternative<OutDegreeIncMsg>(m);
}

}  // namespace detail

/// The modified round-robin of the load balancer: advance rr, send there only
/// when that worker looks less loaded than we are, otherwise keep the node.
inline WorkerId choose_host_rr(uint32_t& rr, const std::vector<uint64_t>& upm_view,
                               WorkerId self) {
  rr = static_cast<uint32_t>((rr + 1) % upm_view.size());
  WorkerId cand = static_cast<WorkerId>(rr);
  return upm_view[cand] < upm_view[self] ? cand : self;
}

class Runtime;

/// State of one worker. Single-threaded over its own data; the mailboxes are
/// the only shared structures.
class Worker {
 public:
  Worker(WorkerId self, const RuntimeConfig& cfg, Runtime& rt, size_t n)
      : self_(self), cfg_(cfg), rt_(rt), n_(n) {
    idgen_.self = self;
    upm_view_.assign(n, 0);
    metrics_.produced_for.assign(n, 0);
    buffers_.resize(n);
    for (auto& b : buffers_) b.max_age = cfg.max_age;
    drain_scratch_.resize(n);
    statuses_.resize(n);
  }

  void loop();

  WorkerId self() const { return self_; }
  const NodeStore& store() const { return store_; }
  NodeStore& store() { return store_; }
  const std::deque<Msg>& incoming() const { return incoming_; }
  const WorkerMetrics& metrics() const { return metrics_; }
  WorkerMetrics& metrics() { return metrics_; }

  template <typename F>
  void peek_buffers(F&& f) const {
    for (const auto& b : buffers_)
      for (const Msg& m : b.pending) f(m);
  }

  template <typename F>
  void peek_mailbox(F&& f) const;  // single-threaded debug use

  // Master bootstrap.
  void seed(const InitialNet& net);

 private:
  friend class Runtime;

  WorkerId choose_host() { return choose_host_rr(rr_, upm_view_, self_); }

  void route(Msg&& m);
  void flush(WorkerId dest);
  void flush_all();
  void tick_buffers();
  bool drain_channels();
  void process(Msg m);
  void process_eot(const EotMsg& eot);
  void send_status();
  bool check_termination();
  void broadcast_terminate();
  void assert_no_messages_target(const NodeId& id) const;

  WorkerId self_;
  RuntimeConfig cfg_;
  Runtime& rt_;
  size_t n_;

  NodeStore store_;
  NodeIdGen idgen_;
  std::deque<Msg> incoming_;
  uint64_t upm_self_ = 0;  // EdgeMsg entries in incoming_
  std::vector<uint64_t> upm_view_;
  uint32_t rr_ = 0;

  std::vector<detail::AggregationBuffer> buffers_;
  std::vector<std::vector<PhysicalMessage>> drain_scratch_;
  WorkerMetrics metrics_;

  // Termination bookkeeping.
  std::vector<StatusMsg> statuses_;  // master: latest report per worker
  bool status_dirty_ = true;
  StatusMsg last_sent_;
  bool terminated_ = false;
};

/// The N-worker reduction runtime. Blocks in run() until termination; the
/// final partial net and per-worker metrics are collected afterwards.
class Runtime {
 public:
  Runtime(const InitialNet& net, const RuntimeConfig& cfg)
      : cfg_(cfg), net_(net), border_(net.border.begin(), net.border.end()) {
    size_t n = cfg.workers;
    for (size_t i = 0; i < n; ++i)
      mailboxes_.push_back(std::make_unique<detail::Mailbox>(n));
    for (size_t i = 0; i < n; ++i)
      workers_.push_back(std::make_unique<Worker>(static_cast<WorkerId>(i), cfg, *this, n));
    workers_[0]->seed(net);
  }

  void run() {
    start_ = std::chrono::steady_clock::now();
    if (cfg_.workers == 1) {
      workers_[0]->loop();
    } else {
      std::vector<std::thread> threads;
      std::vector<std::exception_ptr> errors(cfg_.workers);
      for (uint16_t i = 1; i < cfg_.workers; ++i) {
        threads.emplace_back([this, i, &errors] {
          try {
            workers_[i]->loop();
          } catch (...) {
            errors[i] = std::current_exception();
            abort_.store(true);
          }
        });
      }
      try {
        workers_[0]->loop();
      } catch (...) {
        errors[0] = std::current_exception();
        abort_.store(true);
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    // Exit assertion: globally, every produced message was processed.
    uint64_t produced = 0, processed = 0;
    for (const auto& w : workers_) {
      processed += w->metrics().processed;
      for (uint64_t p : w->metrics().produced_for) produced += p;
    }
    if (produced != processed)
      throw std::logic_error("conservation violated: produced " + std::to_string(produced) +
                             " processed " + std::to_string(processed));
  }

  FinalNet collect_final_net() const {
    FinalNet out;
    out.border = net_.border;
    for (const auto& w : workers_) {
      w->store().for_each([&](const NodeRecord& rec) {
        out.nodes.emplace_back(rec.id, rec.is_border);
        for (const auto& slot_edges : rec.combusted)
          for (const EdgeMsg& e : slot_edges) out.edges.push_back(e);
      });
    }
    return out;
  }

  std::vector<WorkerMetrics> collect_metrics() const {
    std::vector<WorkerMetrics> out;
    for (const auto& w : workers_) out.push_back(w->metrics());
    return out;
  }

  bool is_border(const NodeId& id) const { return border_.count(id) != 0; }
  detail::Mailbox& mailbox(WorkerId w) { return *mailboxes_[w]; }
  const Worker& worker(WorkerId w) const { return *workers_[w]; }
  uint64_t elapsed_us() const {
    return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                     std::chrono::steady_clock::now() - start_)
                                     .count());
  }
  bool aborted() const { return abort_.load(); }
  std::function<void(const Worker&, const Msg&)> debug_hook;  // after every processed message

 private:
  friend class Worker;
  RuntimeConfig cfg_;
  InitialNet net_;
  std::set<NodeId> border_;
  std::vector<std::unique_ptr<detail::Mailbox>> mailboxes_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::chrono::steady_clock::time_point start_;
  std::atomic<bool> abort_{false};
};

// ---------------------------------------------------------------------------
// Worker implementation
// ---------------------------------------------------------------------------

inline void Worker::seed(const InitialNet& net) {
  idgen_.next_timestamp = net.nodes.size();  // initial ids share creator 0
  for (const InitNode& n : net.nodes)
    store_.insert_initial(n.id, n.border, n.border ? 0 : n.eot_slots);
  for (const EdgeMsg& e : net.edges) {
    incoming_.push_back(Msg{e});
    upm_self_ += 1;
    metrics_.produced_for[self_] += 1;
  }
  // EOT seeds for non-border nodes with no out-edge, behind every initial
  // edge message; propagation covers every used out-slot.
  if (cfg_.gc) {
    for (const InitNode& n : net.nodes) {
      if (n.border || n.out_degree > 0) continue;
      incoming_.push_back(Msg{EotMsg{n.id, Slot{0}, 0}});
      metrics_.produced_for[self_] += 1;
    }
  }
  upm_view_[self_] = upm_self_;
}

inline void Worker::route(Msg&& m) {
  WorkerId dest = std::visit(
      [](const auto& msg) -> WorkerId {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, EdgeMsg> || std::is_same_v<T, EotMsg> ||
                      std::is_same_v<T, OutDegreeIncMsg>)
          return msg.target.host;
        else
          return 0;
      },
      m);
  if (detail::counted_message(m)) metrics_.produced_for[dest] += 1;
  buffers_[dest].pending.push_back(std::move(m));
  if (cfg_.agg == AggPolicy::None) flush(dest);
}

inline void Worker::flush(WorkerId dest) {
  detail::AggregationBuffer& buf = buffers_[dest];
  if (buf.pending.empty()) {
    buf.age = 0;
    return;
  }
  if (cfg_.agg == AggPolicy::Vab) buf.vab_on_flush(cfg_.age_cap, cfg_.rate_window);
  PhysicalMessage pm;
  pm.payload = std::move(buf.pending);
  pm.upm = upm_self_;
  metrics_.physical_sent += 1;
  metrics_.payload_items_sent += pm.payload.size();
  buf.pending.clear();
  buf.age = 0;
  rt_.mailbox(dest).push(self_, std::move(pm));
}

inline void Worker::flush_all() {
  for (size_t d = 0; d < n_; ++d) flush(static_cast<WorkerId>(d));
}

inline void Worker::tick_buffers() {
  if (cfg_.agg == AggPolicy::None) return;
  for (size_t d = 0; d < n_; ++d)
    if (buffers_[d].tick()) flush(static_cast<WorkerId>(d));
}

inline bool Worker::drain_channels() {
  metrics_.drains += 1;
  if (cfg_.trace_upm)
    metrics_.trace.push_back(UpmSample{rt_.elapsed_us(), self_, upm_self_});
  if (!rt_.mailbox(self_).drain(drain_scratch_)) return false;
  for (size_t from = 0; from < n_; ++from) {
    for (PhysicalMessage& pm : drain_scratch_[from]) {
      upm_view_[from] = pm.upm;
      for (Msg& m : pm.payload) {
        if (std::holds_alternative<EdgeMsg>(m)) upm_self_ += 1;
        incoming_.push_back(std::move(m));
      }
    }
    drain_scratch_[from].clear();
  }
  upm_view_[self_] = upm_self_;
  return true;
}

inline void Worker::process_eot(const EotMsg& eot) {
  if (!cfg_.gc) return;
  NodeRecord& rec = store_.lookup_or_create(eot.target);
  if (record_eot(rec, eot.slot, eot.token) == RemovalDecision::Remove) {
    std::vector<EotMsg> eots = removal_eots(rec);
    NodeId id = rec.id;
    store_.remove(id);
    metrics_.removals += 1;
    if (cfg_.debug_checks && n_ == 1) assert_no_messages_target(id);
    for (EotMsg& e : eots) {
      if (rt_.is_border(e.target)) continue;  // the border is never removed
      route(Msg{e});
    }
  }
}

inline void Worker::process(Msg m) {
  if (detail::counted_message(m)) metrics_.processed += 1;
  std::visit(
      [&](auto&& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, EdgeMsg>) {
          upm_self_ -= 1;
          upm_view_[self_] = upm_self_;
          metrics_.edges_processed += 1;
          EngineConfig ecfg{cfg_.slot_skip, cfg_.opt_one, cfg_.debug_checks};
          process_edge(
              msg, store_, idgen_, [this] { return choose_host(); },
              [this](Msg out) { route(std::move(out)); }, ecfg, metrics_.engine);
        } else if constexpr (std::is_same_v<T, EotMsg>) {
          process_eot(msg);
        } else if constexpr (std::is_same_v<T, OutDegreeIncMsg>) {
          if (cfg_.gc) record_adoption(store_.lookup_or_create(msg.target), msg.token);
        } else if constexpr (std::is_same_v<T, StatusMsg>) {
          statuses_[msg.worker] = msg;  // master only
        } else if constexpr (std::is_same_v<T, TerminateMsg>) {
          terminated_ = true;
        }
      },
      std::move(m));
  status_dirty_ = true;
}

inline void Worker::send_status() {
  StatusMsg st{self_, metrics_.processed, metrics_.produced_for};
  if (st.processed == last_sent_.processed && st.produced_for == last_sent_.produced_for)
    return;
  last_sent_ = st;
  PhysicalMessage pm;
  pm.payload.push_back(Msg{std::move(st)});
  pm.upm = upm_self_;
  metrics_.physical_sent += 1;
  metrics_.payload_items_sent += 1;
  rt_.mailbox(0).push(self_, std::move(pm));
}

inline bool Worker::check_termination() {
  metrics_.termination_rounds += 1;
  // The master's own counters are always fresh; slaves are judged by their
  // last idle report.
  statuses_[0] = StatusMsg{0, metrics_.processed, metrics_.produced_for};
  for (size_t j = 0; j < n_; ++j) {
    uint64_t produced_into_j = 0;
    for (size_t i = 0; i < n_; ++i) {
      if (statuses_[i].produced_for.size() == n_) produced_into_j += statuses_[i].produced_for[j];
    }
    if (produced_into_j != statuses_[j].processed) return false;
  }
  return true;
}

inline void Worker::broadcast_terminate() {
  for (size_t d = 1; d < n_; ++d) {
    PhysicalMessage pm;
    pm.payload.push_back(Msg{TerminateMsg{}});
    pm.upm = upm_self_;
    metrics_.physical_sent += 1;
    metrics_.payload_items_sent += 1;
    rt_.mailbox(static_cast<WorkerId>(d)).push(self_, std::move(pm));
  }
  terminated_ = true;
}

inline void Worker::assert_no_messages_target(const NodeId& id) const {
  auto check = [&](const Msg& m) {
    std::visit(
        [&](const auto& msg) {
          using T = std::decay_t<decltype(msg)>;
          if constexpr (std::is_same_v<T, EdgeMsg> || std::is_same_v<T, EotMsg> ||
                        std::is_same_v<T, OutDegreeIncMsg>) {
            if (msg.target == id)
              throw std::logic_error("removal soundness violated: live message targets "
                                     "removed node");
          }
        },
        m);
  };
  for (const Msg& m : incoming_) check(m);
  peek_buffers(check);
  rt_.mailbox(self_).peek(check);
}

template <typename F>
void Worker::peek_mailbox(F&& f) const {
  rt_.mailbox(self_).peek(f);
}

inline void Worker::loop() {
  uint64_t since_drain = 0;
  while (!terminated_) {
    if (rt_.aborted()) return;
    drain_channels();
    if (incoming_.empty()) {
      flush_all();
      drain_channels();  // flushing to self may have produced work
      if (incoming_.empty()) {
        if (self_ == 0) {
          if (check_termination()) {
            broadcast_terminate();
            break;
          }
        } else if (status_dirty_) {
          send_status();
          status_dirty_ = false;
        }
        rt_.mailbox(self_).wait_for_data(std::chrono::microseconds(200));
        continue;
      }
    }
    since_drain = 0;
    while (!incoming_.empty() && !terminated_) {
      Msg m = std::move(incoming_.front());
      incoming_.pop_front();
      process(m);
      tick_buffers();
      if (rt_.debug_hook) rt_.debug_hook(*this, m);
      if (++since_drain >= cfg_.drain_cadence) {
        drain_channels();
        since_drain = 0;
      }
    }
  }
}

}  // namespace pelcr
