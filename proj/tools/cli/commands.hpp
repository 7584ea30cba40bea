#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jessy/account.hpp"
#include "jessy/criteria.hpp"
#include "jessy/enumerate.hpp"

namespace jessy::cli {

/// Exit codes shared by every command.
enum ExitCode : int { kOk = 0, kViolation = 1, kUsage = 2 };

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<VectorMode> mode;
  /// Extracted history as poset JSON.
  std::string out;
  /// Event log, one line per event.
  std::string trace;
  /// One line per transaction in the summary.
  bool list_txns = false;
  /// Echo the event log to err (also enabled by JESSY_VERBOSE=1).
  bool verbose = false;
};

struct CheckOptions {
  std::string file;
  std::vector<Criterion> criteria;  // empty: all
  bool json = false;
};

struct FuzzOptions {
  EnumerationBounds bounds;
  /// Compare against a checker with WCF removed; success means the harness
  /// noticed.
  bool mutate = false;
  /// Directory for counterexample files (linear notation).
  std::string dump_dir;
};

struct LatencyOptions {
  std::optional<LatencyProfile> profile;  // empty: all three
  std::optional<std::size_t> remote_reads;  // empty: 0..3
  Tick delta = 1;
  VectorMode mode = VectorMode::kDv;
  std::size_t repetitions = 1;
  /// Also fit update message counts for w_r = 1..max_writes.
  bool messages = false;
  std::size_t max_writes = 6;
  std::size_t members = 3;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_check(const CheckOptions& opts, std::ostream& out, std::ostream& err);
int cmd_fuzz(const FuzzOptions& opts, std::ostream& out, std::ostream& err);
int cmd_latency(const LatencyOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; never throws.
int main_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jessy::cli
