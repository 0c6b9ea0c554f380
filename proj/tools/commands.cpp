#include "commands.hpp"

#include "qpart/circuits.hpp"
#include "qpart/executor.hpp"
#include "qpart/graph.hpp"
#include "qpart/partitioner.hpp"
#include "qpart/plan.hpp"
#include "qpart/qasm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace qpart::cli {

namespace {

using nlohmann::json;

constexpr double kVerifyTolerance = 1e-10;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string join(const std::vector<int>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
  return s;
}

Circuit load_circuit(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_qasm(text.str());
}

void check_format(const RunConfig& config) {
  if (config.format != "json" && config.format != "text") {
    throw UsageError("--format must be json or text, got '" + config.format + "'");
  }
}

struct Pipeline {
  Circuit circuit;
  std::vector<int> hierarchy;
  PartitionTree tree;
  ExecutionPlan plan;
  double partition_seconds = 0.0;
};

Pipeline build_pipeline(Circuit circuit, std::vector<int> hierarchy) {
  Pipeline p;
  p.circuit = std::move(circuit);
  p.hierarchy = std::move(hierarchy);
  const auto graph = build_graph(p.circuit);
  const auto t0 = std::chrono::steady_clock::now();
  p.tree = partition(graph, MemoryHierarchy::from_budgets(p.hierarchy));
  p.partition_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  p.plan = lower(p.tree);
  return p;
}

/// Maps pipeline exceptions onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InputError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const QasmError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const InvalidCircuit& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const BudgetTooSmall& e) {
    err << "partition error: " << e.what() << "\n";
    return kPartitionError;
  } catch (const InvalidHierarchy& e) {
    err << "partition error: " << e.what() << "\n";
    return kPartitionError;
  } catch (const TooLarge& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

int rank_bits(const RunConfig& config) {
  if (!config.ranks) return 0;
  const auto r = *config.ranks;
  if (r == 0 || !std::has_single_bit(r)) {
    throw UsageError("--ranks must be a power of two, got " + std::to_string(r));
  }
  return std::countr_zero(r);
}

std::vector<int> bench_hierarchy(const RunConfig& config, int d) {
  if (!config.hierarchy.empty() || config.ranks) return resolve_hierarchy(config, d);
  const int l0 = d - std::min(3, d / 2);
  const int l1 = std::max(2, l0 / 2);
  if (l1 < l0) return {l0, l1};
  return {l0};
}

json state_to_json(const OracleState& s) {
  json a = json::array();
  for (Eigen::Index i = 0; i < s.size(); ++i) a.push_back({s(i).real(), s(i).imag()});
  return a;
}

std::string verdict_text(double dev) {
  const bool ok = dev <= kVerifyTolerance;
  if (dev < 1e-12) return "max deviation < 1e-12, OK";
  return "max deviation " + fmt("%.3e", dev) + (ok ? ", OK" : ", FAILED");
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("expected a comma-separated list of non-negative integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty integer list");
  return out;
}

std::vector<int> parse_qubit_range(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      const auto v = parse_int_list(item);
      out.insert(out.end(), v.begin(), v.end());
      continue;
    }
    const int lo = parse_int_list(item.substr(0, dash)).at(0);
    const int hi = parse_int_list(item.substr(dash + 1)).at(0);
    if (hi < lo) throw UsageError("descending qubit range '" + item + "'");
    for (int d = lo; d <= hi; ++d) out.push_back(d);
  }
  if (out.empty()) throw UsageError("empty qubit range");
  return out;
}

std::vector<int> resolve_hierarchy(const RunConfig& config, int num_qubits) {
  const int g = rank_bits(config);
  if (g > num_qubits) {
    throw UsageError(std::to_string(*config.ranks) + " ranks exceed the 2^" + std::to_string(num_qubits) +
                     " amplitudes");
  }
  if (!config.hierarchy.empty()) {
    if (config.ranks && g + config.hierarchy.front() != num_qubits) {
      throw UsageError("log2(ranks) + L0 = " + std::to_string(g + config.hierarchy.front()) + " but the circuit has " +
                       std::to_string(num_qubits) + " qubits");
    }
    return config.hierarchy;
  }
  return {num_qubits - g};
}

int cmd_partition(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    check_format(config);
    auto circuit = load_circuit(config.input);
    const int d = circuit.num_qubits;
    const auto p = build_pipeline(std::move(circuit), resolve_hierarchy(config, d));
    const auto leaves = p.tree.leaves().size();
    const auto exchanges = p.plan.count(TaskKind::Exchange);
    if (config.format == "text") {
      out << "qubits " << d << ", gates " << p.circuit.ops.size() << ", hierarchy " << join(p.hierarchy) << "\n";
      out << "partitions " << p.tree.children.size() << ", leaves " << leaves << ", exchanges " << exchanges << "\n";
      out << "partition time " << fmt("%.6f", p.partition_seconds) << " s\n";
      if (config.dump_tree) out << tree_to_json(p.tree).dump(2) << "\n";
      if (config.dump_plan) out << plan_to_json(p.plan).dump(2) << "\n";
      return kOk;
    }
    json j;
    j["num_qubits"] = d;
    j["num_gates"] = p.circuit.ops.size();
    j["hierarchy"] = p.hierarchy;
    j["num_partitions"] = p.tree.children.size();
    j["num_leaves"] = leaves;
    j["num_exchanges"] = exchanges;
    j["partition_seconds"] = p.partition_seconds;
    j["tree"] = tree_to_json(p.tree);
    if (config.dump_plan) j["plan"] = plan_to_json(p.plan);
    out << j.dump(2) << "\n";
    return kOk;
  });
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    check_format(config);
    auto circuit = load_circuit(config.input);
    const int d = circuit.num_qubits;
    if ((config.verify || config.dump_state) && d > kMaxDenseQubits) {
      throw UsageError("--verify and --dump-state need at most " + std::to_string(kMaxDenseQubits) + " qubits");
    }
    const auto p = build_pipeline(std::move(circuit), resolve_hierarchy(config, d));
    RunOptions options;
    options.shots = config.shots;
    options.seed = config.seed;
    const auto result = run_plan(p.plan, options);

    std::optional<OracleState> final_state;
    if (config.dump_state || config.verify || (!config.shots && d <= kMaxDenseQubits)) {
      final_state = gather(result.state);
    }
    std::optional<double> deviation;
    if (config.verify) deviation = compare(oracle_simulate(p.circuit), *final_state);
    const bool ok = !deviation || *deviation <= kVerifyTolerance;

    if (config.format == "text") {
      out << "qubits " << d << ", ranks " << p.plan.num_ranks() << ", hierarchy " << join(p.hierarchy)
          << ", exchanges " << p.plan.count(TaskKind::Exchange) << "\n";
      if (deviation) out << verdict_text(*deviation) << "\n";
      if (result.histogram) {
        for (const auto& [bits, count] : *result.histogram) out << bits << " " << count << "\n";
      } else if (final_state) {
        for (const auto& [bits, prob] : probabilities(*final_state)) out << bits << " " << fmt("%.17g", prob) << "\n";
      }
      if (config.dump_state) {
        for (Eigen::Index i = 0; i < final_state->size(); ++i) {
          out << bitstring(static_cast<std::uint64_t>(i), d) << " " << fmt("%.17g", (*final_state)(i).real()) << " "
              << fmt("%.17g", (*final_state)(i).imag()) << "\n";
        }
      }
      if (config.dump_tree) out << tree_to_json(p.tree).dump(2) << "\n";
      if (config.dump_plan) out << plan_to_json(p.plan).dump(2) << "\n";
    } else {
      json j;
      j["num_qubits"] = d;
      j["ranks"] = p.plan.num_ranks();
      j["hierarchy"] = p.hierarchy;
      j["num_exchanges"] = p.plan.count(TaskKind::Exchange);
      if (deviation) j["verify"] = {{"max_deviation", *deviation}, {"tolerance", kVerifyTolerance}, {"ok", ok}};
      if (result.histogram) {
        j["shots"] = *config.shots;
        j["seed"] = config.seed;
        j["histogram"] = histogram_to_json(*result.histogram);
      } else if (final_state) {
        j["probabilities"] = probabilities(*final_state);
      }
      if (config.dump_state) j["state"] = state_to_json(*final_state);
      if (config.dump_tree) j["tree"] = tree_to_json(p.tree);
      if (config.dump_plan) j["plan"] = plan_to_json(p.plan);
      out << j.dump(2) << "\n";
    }
    if (!ok) {
      err << verdict_text(*deviation) << "\n";
      return kVerifyFailed;
    }
    return kOk;
  });
}

int cmd_stats(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    check_format(config);
    auto circuit = load_circuit(config.input);
    const int d = circuit.num_qubits;
    const auto p = build_pipeline(std::move(circuit), resolve_hierarchy(config, d));
    const auto result = run_plan(p.plan);
    const auto& s = result.stats;
    std::uint64_t bytes = 0;
    for (const auto& e : s.exchanges) bytes += e.bytes_moved;

    if (config.format == "text") {
      out << "qubits " << d << ", ranks " << p.plan.num_ranks() << ", hierarchy " << join(p.hierarchy) << "\n";
      out << "partition " << fmt("%.6f", p.partition_seconds) << " s, local compute " << fmt("%.6f", s.compute_seconds)
          << " s, data movement " << fmt("%.6f", s.exchange_seconds) << " s\n";
      out << "tasks";
      for (const auto& [kind, n] : s.task_counts) out << " " << task_kind_name(kind) << "=" << n;
      out << "\n";
      for (const auto& ph : s.phases) {
        out << "phase " << ph.phase << ": compute " << fmt("%.6f", ph.compute_seconds) << " s, exchange "
            << fmt("%.6f", ph.exchange_seconds) << " s\n";
      }
      for (const auto& e : s.exchanges) {
        out << "exchange task " << e.task << ": " << e.amplitudes_per_pair << " amplitudes per rank pair, "
            << e.bytes_moved << " bytes\n";
      }
      out << "bytes moved " << bytes << "\n";
      return kOk;
    }
    json j;
    j["num_qubits"] = d;
    j["ranks"] = p.plan.num_ranks();
    j["hierarchy"] = p.hierarchy;
    j["partition_seconds"] = p.partition_seconds;
    j["compute_seconds"] = s.compute_seconds;
    j["exchange_seconds"] = s.exchange_seconds;
    j["task_counts"] = json::object();
    for (const auto& [kind, n] : s.task_counts) j["task_counts"][std::string(task_kind_name(kind))] = n;
    j["phases"] = json::array();
    for (const auto& ph : s.phases) {
      j["phases"].push_back(
          {{"phase", ph.phase}, {"compute_seconds", ph.compute_seconds}, {"exchange_seconds", ph.exchange_seconds}});
    }
    j["exchanges"] = json::array();
    for (const auto& e : s.exchanges) {
      j["exchanges"].push_back({{"task", e.task},
                                {"amplitudes_per_pair", e.amplitudes_per_pair},
                                {"amplitudes_moved", e.amplitudes_moved},
                                {"bytes_moved", e.bytes_moved}});
    }
    j["bytes_moved"] = bytes;
    out << j.dump(2) << "\n";
    return kOk;
  });
}

int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    check_format(config);
    const auto& fams = circuit_families();
    if (std::find(fams.begin(), fams.end(), config.family) == fams.end()) {
      throw UsageError("unknown family '" + config.family + "'");
    }
    if (config.qubits.empty()) throw UsageError("--qubits is required");

    int code = kOk;
    json rows = json::array();
    for (int d : config.qubits) {
      json row{{"family", config.family}, {"num_qubits", d}};
      try {
        const auto p = build_pipeline(generate_circuit(config.family, d, config.seed), bench_hierarchy(config, d));
        row["num_gates"] = p.circuit.ops.size();
        row["hierarchy"] = p.hierarchy;
        row["partition_seconds"] = p.partition_seconds;
        row["num_leaves"] = p.tree.leaves().size();
        row["num_exchanges"] = p.plan.count(TaskKind::Exchange);
        row["num_tasks"] = p.plan.tasks.size();
        if (d <= kMaxDenseQubits) {
          const auto result = run_plan(p.plan);
          const double dev = compare(oracle_simulate(p.circuit), gather(result.state));
          row["max_deviation"] = dev;
          row["ok"] = dev <= kVerifyTolerance;
          if (dev > kVerifyTolerance) code = kVerifyFailed;
        }
      } catch (const BudgetTooSmall& e) {
        row["error"] = e.what();
        if (code == kOk) code = kPartitionError;
      } catch (const InvalidHierarchy& e) {
        row["error"] = e.what();
        if (code == kOk) code = kPartitionError;
      }
      rows.push_back(row);
    }

    if (config.format == "text") {
      out << "family      d   gates  leaves  exch   partition_s  verify\n";
      for (const auto& r : rows) {
        char line[160];
        if (r.contains("error")) {
          std::snprintf(line, sizeof line, "%-10s %3d  error: %s\n", config.family.c_str(), r["num_qubits"].get<int>(),
                        r["error"].get<std::string>().c_str());
        } else {
          const std::string verify =
              r.contains("ok") ? (r["ok"].get<bool>() ? "OK" : "FAILED") + fmt(" (%.1e)", r["max_deviation"].get<double>())
                               : "-";
          std::snprintf(line, sizeof line, "%-10s %3d  %6zu  %6zu  %4zu  %11.6f  %s\n", config.family.c_str(),
                        r["num_qubits"].get<int>(), r["num_gates"].get<std::size_t>(), r["num_leaves"].get<std::size_t>(),
                        r["num_exchanges"].get<std::size_t>(), r["partition_seconds"].get<double>(), verify.c_str());
        }
        out << line;
      }
    } else {
      out << json{{"rows", rows}}.dump(2) << "\n";
    }
    return code;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical partitioning and distributed state-vector simulation of OpenQASM 2 circuits", "qpart"};
  app.require_subcommand(1);

  RunConfig config;
  std::string hierarchy, qubits, out_path;
  int generate_qubits = 0;

  const auto add_common = [&](CLI::App* sub, bool with_input) {
    if (with_input) sub->add_option("input", config.input, "OpenQASM 2 file")->required();
    sub->add_option("--hierarchy", hierarchy, "local-qubit counts, outermost first (e.g. 25,15,5)");
    sub->add_option("--ranks", config.ranks, "number of ranks (power of two)");
    sub->add_option("--seed", config.seed, "sampling / generator seed");
    sub->add_option("--format", config.format, "json or text")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--out", out_path, "write output to this file");
  };

  auto* part = app.add_subcommand("partition", "partition a circuit and print the tree");
  add_common(part, true);
  part->add_flag("--dump-tree", config.dump_tree, "include the tree (text format)");
  part->add_flag("--dump-plan", config.dump_plan, "include the lowered plan");

  auto* run = app.add_subcommand("run", "partition, lower and execute a circuit");
  add_common(run, true);
  run->add_option("--shots", config.shots, "sample this many measurements");
  run->add_flag("--verify", config.verify, "compare with the dense reference simulator");
  run->add_flag("--dump-tree", config.dump_tree, "include the partition tree");
  run->add_flag("--dump-plan", config.dump_plan, "include the lowered plan");
  run->add_flag("--dump-state", config.dump_state, "include the final amplitudes");

  auto* stats = app.add_subcommand("stats", "execute and report compute/exchange breakdown");
  add_common(stats, true);

  auto* bench = app.add_subcommand("bench", "partition (and verify when small) a generated benchmark family");
  add_common(bench, false);
  bench->add_option("--family", config.family, "ghz, dj, qft, qpe, ising, su2random or vqc")->required();
  bench->add_option("--qubits", qubits, "qubit counts, e.g. 30-37 or 4,6,8")->required();

  auto* gen = app.add_subcommand("generate", "print a benchmark circuit as OpenQASM 2");
  gen->add_option("--family", config.family, "ghz, dj, qft, qpe, ising, su2random or vqc")->required();
  gen->add_option("--qubits", generate_qubits, "qubit count")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", config.seed, "seed for su2random angles");
  gen->add_option("--out", out_path, "write output to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  std::ostringstream buffer;
  int code = kOk;
  try {
    if (!hierarchy.empty()) config.hierarchy = parse_int_list(hierarchy);
    if (!qubits.empty()) config.qubits = parse_qubit_range(qubits);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  if (*part) {
    code = cmd_partition(config, buffer, err);
  } else if (*run) {
    code = cmd_run(config, buffer, err);
  } else if (*stats) {
    code = cmd_stats(config, buffer, err);
  } else if (*bench) {
    code = cmd_bench(config, buffer, err);
  } else if (*gen) {
    try {
      buffer << generate_qasm(config.family, generate_qubits, config.seed);
    } catch (const UnknownFamily& e) {
      err << "usage error: " << e.what() << "\n";
      return kUsage;
    }
  }

  if (out_path.empty()) {
    out << buffer.str();
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      err << "usage error: cannot write '" << out_path << "'\n";
      return kUsage;
    }
    f << buffer.str();
  }
  return code;
}

}  // namespace qpart::cli
