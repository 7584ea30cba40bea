#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jessy/history.hpp"
#include "jessy/protocol.hpp"

namespace jessy {

enum class AccessDistribution : std::uint8_t { kUniform, kZipf };

struct WorkloadConfig {
  std::size_t txn_count = 10;
  double read_only_fraction = 0.3;
  /// Distinct objects read by each transaction.
  std::size_t ops_per_txn = 3;
  /// Chance that an update transaction also writes an object it read.
  double write_probability = 0.5;
  AccessDistribution distribution = AccessDistribution::kUniform;
  double zipf_s = 1.0;
  /// Transactions start at a uniform tick in [0, arrival_window].
  Tick arrival_window = 100;
};

/// Crash of a process at a tick (optional liveness mode).
struct Fault {
  Tick tick = 0;
  ProcessId process = 0;
};

struct SimConfig {
  std::uint64_t seed = 1;
  Tick delta = 1;
  VectorMode mode = VectorMode::kDv;
  Topology topology;
  WorkloadConfig workload;
  std::vector<Fault> faults;
  /// When non-empty, replaces the generated workload.
  std::vector<TxnPlan> scripted;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Reads the TOML run configuration.
SimConfig parse_config(std::string_view toml_text);
SimConfig load_config(const std::string& path);

/// The transactions a run executes: the scripted list or a seeded sample.
std::vector<TxnPlan> generate_workload(const SimConfig& cfg);

struct TxnTrace {
  TxnPlan plan;
  std::vector<ObservedOp> ops;
  std::optional<std::uint64_t> submit_step;
  std::optional<bool> committed;
  std::optional<std::uint64_t> first_decide_step;
  /// Decision at the coordinator.
  std::optional<Tick> decide_tick;
  /// Latest decision at any process.
  std::optional<Tick> last_decide_tick;
  std::size_t messages = 0;
  std::size_t termination_messages = 0;
  /// Events handled per process on behalf of this transaction.
  std::map<ProcessId, std::size_t> steps;
};

struct RunTrace {
  SimConfig config;
  /// One line per event, tick-prefixed.
  std::vector<std::string> log;
  /// Indexed by transaction id; entry 0 is unused.
  std::vector<TxnTrace> txns;
  std::vector<std::vector<std::uint64_t>> deliveries;
  std::vector<std::map<TxnId, bool>> decisions;
  std::vector<std::vector<TxnId>> undecided;
  std::vector<bool> crashed;
  std::size_t parked_reads = 0;
  Tick end_tick = 0;
};

/// Runs the protocol to quiescence. Identical configs give identical traces.
RunTrace run(const SimConfig& cfg);

std::string render_trace(const RunTrace& trace);

/// The history implemented by the run: one operation per client-visible
/// read, write and termination, ordered when one ends before the other starts.
History extract_history(const RunTrace& trace);

/// Post-run checks: delivery-order acyclicity, agreement, no stuck
/// transactions, genuineness. Returns one line per problem.
std::vector<std::string> check_run(const RunTrace& trace);

/// Processes allowed to act for a transaction: replicas of what it accesses
/// plus its coordinator.
std::vector<ProcessId> allowed_processes(const Topology& topo, const TxnPlan& plan);

}  // namespace jessy
