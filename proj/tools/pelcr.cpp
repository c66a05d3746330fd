// pelcr - parallel optimal lambda-calculus reduction over directed virtual
// nets, with brute-force oracles for verification.
//
// Exit codes: 0 ok, 2 parse error, 3 algebra error (irreducible residue),
// 4 infrastructure failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "pelcr/metrics.hpp"
#include "pelcr/netdump.hpp"
#include "pelcr/oracle.hpp"

using namespace pelcr;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string term_source(const std::string& inline_term, const std::string& file) {
  if (!file.empty()) return slurp(file);
  if (!inline_term.empty()) return inline_term;
  throw CLI::ValidationError("term", "give a term or --file");
}

struct RunFlags {
  std::string term, file;
  std::vector<std::string> free_vars;
  std::string agg = "vab";
  std::string gc = "on", opt_one = "on", slot_skip = "on";
  RunConfig cfg;

  void attach(CLI::App* app) {
    app->add_option("term", term, "lambda term (Krivine notation; integers are Church numerals)");
    app->add_option("-f,--file", file, "read the term from a file");
    app->add_option("--workers", cfg.runtime.workers, "number of workers")
        ->check(CLI::Range(1, 4096));
    app->add_option("--agg", agg, "aggregation policy: none|fab|vab");
    app->add_option("--max-age", cfg.runtime.max_age, "initial aggregate max age")
        ->check(CLI::Range(1u, 1u << 20));
    app->add_option("--age-cap", cfg.runtime.age_cap, "upper bound for VAB max age");
    app->add_option("--drain", cfg.runtime.drain_cadence,
                    "extra channel drain every K processed messages");
    app->add_option("--gc", gc, "on-the-fly storage recovery: on|off");
    app->add_option("--opt-one", opt_one, "optimization-of-one reroute: on|off");
    app->add_option("--slot-skip", slot_skip, "same-slot composition skipping: on|off");
    app->add_option("--dump-net", cfg.dump_net_path, "write the final net dump here");
    app->add_option("--metrics", cfg.metrics_path, "write the metrics CSV here");
    app->add_option("--trace-upm", cfg.trace_upm_path, "write the upm trace CSV here");
    app->add_option("--free", free_vars, "declared free variables")->delimiter(',');
  }

  static bool on_off(const std::string& v, const char* what) {
    if (v == "on") return true;
    if (v == "off") return false;
    throw CLI::ValidationError(what, "expected on|off");
  }

  RunConfig finish() {
    cfg.term_text = term_source(term, file);
    cfg.free_vars = free_vars;
    if (agg == "none") cfg.runtime.agg = AggPolicy::None;
    else if (agg == "fab") cfg.runtime.agg = AggPolicy::Fab;
    else if (agg == "vab") cfg.runtime.agg = AggPolicy::Vab;
    else throw CLI::ValidationError("--agg", "expected none|fab|vab");
    cfg.runtime.gc = on_off(gc, "--gc");
    cfg.runtime.opt_one = on_off(opt_one, "--opt-one");
    cfg.runtime.slot_skip = on_off(slot_skip, "--slot-skip");
    if (cfg.runtime.age_cap < cfg.runtime.max_age)
      throw CLI::ValidationError("--age-cap", "must be >= --max-age");
    cfg.runtime.trace_upm = !cfg.trace_upm_path.empty();
    return cfg;
  }
};

void print_report(const RunReport& r) {
  std::cout << "workers              " << r.workers << "\n"
            << "wall seconds         " << r.wall_seconds << "\n"
            << "initial net          " << r.initial_nodes << " nodes, " << r.initial_edges
            << " edges\n"
            << "final net            " << r.final_nodes << " nodes, " << r.final_edges
            << " edges\n"
            << "nodes created        " << r.nodes_created << "\n"
            << "compositions         " << r.compositions << " (" << r.zero_compositions
            << " null, " << r.reroutes << " rerouted)\n"
            << "same-slot skipped    " << r.same_slot_skipped << "\n"
            << "removals             " << r.removals << "\n"
            << "application messages " << r.application_messages << "\n"
            << "physical messages    " << r.physical_messages << " (AAS " << r.aas
            << ", AAS*workers " << r.aas_times_workers << ")\n"
            << "termination rounds   " << r.termination_rounds << "\n";
}

int cmd_run(RunFlags& flags) {
  RunReport report = run_pipeline(flags.finish());
  print_report(report);
  return 0;
}

int cmd_translate(const std::string& term, const std::string& file,
                  const std::vector<std::string>& frees, const std::string& dump_path) {
  std::set<std::string> fs(frees.begin(), frees.end());
  TermPtr t = parse_term(term_source(term, file), fs);
  InitialNet net = translate(t, frees);
  FinalNet as_final;
  as_final.border = net.border;
  for (const InitNode& n : net.nodes) as_final.nodes.emplace_back(n.id, n.border);
  as_final.edges = net.edges;
  std::string dump = dump_net(as_final);
  if (dump_path.empty()) std::cout << dump;
  else write_file(dump_path, dump);
  return 0;
}

OracleNet oracle_net_from_dump(const std::string& path, bool combusted) {
  FinalNet net = parse_net_dump(slurp(path));
  std::vector<NodeId> extra;
  for (auto& [id, b] : net.nodes) extra.push_back(id);
  return OracleNet::from_edges(net.edges, net.border, std::move(extra), combusted);
}

int cmd_oracle_ex(const std::string& path, bool final_net, size_t bound) {
  ExecutionFormula ex = execution_formula(oracle_net_from_dump(path, final_net), bound);
  std::cout << ex.to_text();
  return 0;
}

int cmd_oracle_validate(const std::string& path, size_t bound) {
  ValidityReport rep = check_net_validity(oracle_net_from_dump(path, false), bound);
  if (rep.ok()) {
    std::cout << "valid\n";
    return 0;
  }
  for (const auto& v : rep.violations) std::cout << v << "\n";
  return 4;
}

int cmd_oracle_beta(const std::string& term, const std::string& file,
                    const std::vector<std::string>& frees, uint64_t fuel) {
  std::set<std::string> fs(frees.begin(), frees.end());
  TermPtr t = parse_term(term_source(term, file), fs);
  std::cout << to_string(beta_normal_form(t, fuel)) << "\n";
  return 0;
}

int cmd_bench(const std::string& term, const std::string& file,
              const std::vector<std::string>& frees, std::vector<uint16_t> workers) {
  if (workers.empty()) workers = {1, 2, 4};
  RunConfig cfg;
  cfg.term_text = term_source(term, file);
  cfg.free_vars = frees;
  // Warm-up run, discarded.
  cfg.runtime.workers = 1;
  run_pipeline(cfg);
  double sequential = 0;
  std::cout << "workers  wall_s   speedup  AAS      AAS*workers\n";
  for (uint16_t n : workers) {
    cfg.runtime.workers = n;
    RunReport r = run_pipeline(cfg);
    if (n == workers.front()) sequential = r.wall_seconds;
    printf("%-8u %-8.3f %-8.2f %-8.2f %-8.2f\n", n, r.wall_seconds,
           sequential / r.wall_seconds, r.aas, r.aas_times_workers);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pelcr: parallel optimal lambda-calculus reduction"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "reduce a term and report");
  run_flags.attach(run);

  std::string tr_term, tr_file, tr_dump;
  std::vector<std::string> tr_free;
  CLI::App* tr = app.add_subcommand("translate", "emit the initial net dump of a term");
  tr->add_option("term", tr_term, "lambda term");
  tr->add_option("-f,--file", tr_file, "read the term from a file");
  tr->add_option("--free", tr_free, "declared free variables")->delimiter(',');
  tr->add_option("--dump-net", tr_dump, "output path (stdout otherwise)");

  CLI::App* oracle = app.add_subcommand("oracle", "brute-force verification tools");
  oracle->require_subcommand(1);
  std::string ex_path;
  bool ex_final = false;
  size_t ex_bound = 200;
  CLI::App* ex = oracle->add_subcommand("ex", "execution formula of a net dump");
  ex->add_option("netdump", ex_path, "net dump file")->required();
  ex->add_flag("--final", ex_final, "treat edges as combusted (a reduced net)");
  ex->add_option("--bound", ex_bound, "net size bound in edges");
  std::string val_path;
  size_t val_bound = 200;
  CLI::App* val = oracle->add_subcommand("validate", "acyclicity/splitness/square checks");
  val->add_option("netdump", val_path, "net dump file")->required();
  val->add_option("--bound", val_bound, "net size bound in edges");
  std::string beta_term, beta_file;
  std::vector<std::string> beta_free;
  uint64_t beta_fuel = 100000;
  CLI::App* beta = oracle->add_subcommand("beta", "normal-order beta normal form");
  beta->add_option("term", beta_term, "lambda term");
  beta->add_option("-f,--file", beta_file, "read the term from a file");
  beta->add_option("--free", beta_free, "declared free variables")->delimiter(',');
  beta->add_option("--fuel", beta_fuel, "reduction step budget");

  std::string bench_term, bench_file;
  std::vector<std::string> bench_free;
  std::vector<uint16_t> bench_workers;
  CLI::App* bench = app.add_subcommand("bench", "speedup sweep over worker counts");
  bench->add_option("term", bench_term, "lambda term");
  bench->add_option("-f,--file", bench_file, "read the term from a file");
  bench->add_option("--free", bench_free, "declared free variables")->delimiter(',');
  bench->add_option("--workers", bench_workers, "worker counts to sweep")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*tr) return cmd_translate(tr_term, tr_file, tr_free, tr_dump);
    if (*ex) return cmd_oracle_ex(ex_path, ex_final, ex_bound);
    if (*val) return cmd_oracle_validate(val_path, val_bound);
    if (*beta) return cmd_oracle_beta(beta_term, beta_file, beta_free, beta_fuel);
    if (*bench) return cmd_bench(bench_term, bench_file, bench_free, bench_workers);
  } catch (const TermParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const WeightParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const NetDumpParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NonStableResidue& e) {
    std::cerr << "algebra error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
