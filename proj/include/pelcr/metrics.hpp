#pragma once

// Run configuration, the measurement report and CSV emission: wall clock,
// composition and node counters, aggregation effectiveness (AAS = average
// application messages per physical message) and the upm traces.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "pelcr/netdump.hpp"
#include "pelcr/oracle.hpp"
#include "pelcr/runtime.hpp"
#include "pelcr/term.hpp"
#include "pelcr/translate.hpp"

namespace pelcr {

struct RunConfig {
  std::string term_text;
  std::vector<std::string> free_vars;
  RuntimeConfig runtime;
  std::string dump_net_path;
  std::string metrics_path;
  std::string trace_upm_path;
};

struct RunReport {
  uint16_t workers = 1;
  double wall_seconds = 0;
  uint64_t initial_nodes = 0;
  uint64_t initial_edges = 0;
  uint64_t final_nodes = 0;
  uint64_t final_edges = 0;
  uint64_t nodes_created = 0;
  uint64_t compositions = 0;
  uint64_t zero_compositions = 0;
  uint64_t reroutes = 0;
  uint64_t same_slot_skipped = 0;
  uint64_t same_slot_nonzero = 0;
  uint64_t removals = 0;
  uint64_t application_messages = 0;  // edge + EOT + OutDegreeInc processed
  uint64_t physical_messages = 0;
  uint64_t payload_items = 0;
  double aas = 0;  // payload items per physical message
  double aas_times_workers = 0;
  std::vector<double> per_worker_aas;
  uint64_t termination_rounds = 0;

  std::string to_csv() const {
    std::string s = "key,value\n";
    auto row = [&](const char* k, const std::string& v) {
      s += k;
      s += ',';
      s += v;
      s += '\n';
    };
    row("workers", std::to_string(workers));
    row("wall_seconds", std::to_string(wall_seconds));
    row("initial_nodes", std::to_string(initial_nodes));
    row("initial_edges", std::to_string(initial_edges));
    row("final_nodes", std::to_string(final_nodes));
    row("final_edges", std::to_string(final_edges));
    row("nodes_created", std::to_string(nodes_created));
    row("compositions", std::to_string(compositions));
    row("zero_compositions", std::to_string(zero_compositions));
    row("reroutes", std::to_string(reroutes));
    row("same_slot_skipped", std::to_string(same_slot_skipped));
    row("same_slot_nonzero", std::to_string(same_slot_nonzero));
    row("removals", std::to_string(removals));
    row("application_messages", std::to_string(application_messages));
    row("physical_messages", std::to_string(physical_messages));
    row("payload_items", std::to_string(payload_items));
    row("aas", std::to_string(aas));
    row("aas_times_workers", std::to_string(aas_times_workers));
    for (size_t i = 0; i < per_worker_aas.size(); ++i)
      row(("aas_worker_" + std::to_string(i)).c_str(), std::to_string(per_worker_aas[i]));
    row("termination_rounds", std::to_string(termination_rounds));
    return s;
  }
};

inline RunReport assemble_report(const Runtime& rt, const InitialNet& initial,
                                 const FinalNet& fin, double wall_seconds,
                                 const std::vector<WorkerMetrics>& ms) {
  RunReport r;
  r.workers = static_cast<uint16_t>(ms.size());
  r.wall_seconds = wall_seconds;
  r.initial_nodes = initial.nodes.size();
  r.initial_edges = initial.edges.size();
  r.final_nodes = fin.nodes.size();
  r.final_edges = fin.edges.size();
  for (const WorkerMetrics& m : ms) {
    r.nodes_created += m.engine.new_nodes;
    r.compositions += m.engine.compositions;
    r.zero_compositions += m.engine.zero_compositions;
    r.reroutes += m.engine.reroutes;
    r.same_slot_skipped += m.engine.same_slot_skipped;
    r.same_slot_nonzero += m.engine.same_slot_nonzero;
    r.removals += m.removals;
    r.application_messages += m.processed;
    r.physical_messages += m.physical_sent;
    r.payload_items += m.payload_items_sent;
    r.per_worker_aas.push_back(
        m.physical_sent ? static_cast<double>(m.payload_items_sent) / m.physical_sent : 0.0);
    r.termination_rounds += m.termination_rounds;
  }
  r.aas = r.physical_messages ? static_cast<double>(r.payload_items) / r.physical_messages : 0.0;
  r.aas_times_workers = r.aas * r.workers;
  (void)rt;
  return r;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

inline std::string upm_trace_csv(const std::vector<WorkerMetrics>& ms) {
  std::string s = "time_ms,worker,upm\n";
  std::vector<UpmSample> all;
  for (const WorkerMetrics& m : ms) all.insert(all.end(), m.trace.begin(), m.trace.end());
  std::sort(all.begin(), all.end(),
            [](const UpmSample& a, const UpmSample& b) { return a.time_us < b.time_us; });
  for (const UpmSample& u : all) {
    s += std::to_string(u.time_us / 1000.0);
    s += ',';
    s += std::to_string(u.worker);
    s += ',';
    s += std::to_string(u.upm);
    s += '\n';
  }
  return s;
}

/// Full pipeline: parse, translate, reduce, report. The final net is written
/// to *out_net when requested.
inline RunReport run_pipeline(const RunConfig& cfg, FinalNet* out_net = nullptr) {
  std::set<std::string> frees(cfg.free_vars.begin(), cfg.free_vars.end());
  TermPtr term = parse_term(cfg.term_text, frees);
  InitialNet net = translate(term, cfg.free_vars);

  auto t0 = std::chrono::steady_clock::now();
  Runtime rt(net, cfg.runtime);
  rt.run();
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  FinalNet fin = rt.collect_final_net();
  auto ms = rt.collect_metrics();
  RunReport report = assemble_report(rt, net, fin, wall, ms);

  if (!cfg.dump_net_path.empty()) write_file(cfg.dump_net_path, dump_net(fin));
  if (!cfg.metrics_path.empty()) write_file(cfg.metrics_path, report.to_csv());
  if (!cfg.trace_upm_path.empty()) write_file(cfg.trace_upm_path, upm_trace_csv(ms));
  if (out_net) *out_net = std::move(fin);
  return report;
}

}  // namespace pelcr
