#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jessy/sim.hpp"

namespace jessy {

enum class TxnKind : std::uint8_t { kReadOnly, kLocalUpdate, kGlobalUpdate };

std::string_view to_string(TxnKind k);

struct TxnAccount {
  TxnId id;
  TxnKind kind = TxnKind::kReadOnly;
  /// Reads of objects the coordinator does not replicate.
  std::size_t remote_reads = 0;
  /// Written objects the coordinator does not replicate.
  std::size_t remote_writes = 0;
  std::size_t messages = 0;
  std::size_t termination_messages = 0;
  /// Start-to-decision latency at the coordinator, in Δ.
  double latency = 0;
  bool committed = false;
  bool genuine = true;
};

struct AccountReport {
  std::vector<TxnAccount> txns;
  std::size_t genuineness_violations = 0;
};

AccountReport account(const RunTrace& trace);

enum class LatencyProfile : std::uint8_t { kReadOnly, kGlobalUpdate, kLocalUpdate };

std::string_view to_string(LatencyProfile p);
std::optional<LatencyProfile> parse_latency_profile(std::string_view s);

/// Latency of one transaction in an otherwise idle system.
struct LatencyResult {
  LatencyProfile profile = LatencyProfile::kReadOnly;
  std::size_t remote_reads = 0;
  /// Both in units of Δ.
  double expected = 0;
  double measured = 0;
  double tolerance = 0;
  std::size_t messages = 0;
  bool ok() const { return measured >= expected - tolerance && measured <= expected + tolerance; }
};

/// Expected latency in Δ: r_r·2 for queries, r_r·2 + 5 for global updates,
/// r_r·2 + 4 for local updates (tolerance 1 on that row only).
double expected_latency(LatencyProfile profile, std::size_t remote_reads);

/// Runs a single contention-free transaction of the given profile. A global
/// update needs at least one remote read (it reads what it writes); asking
/// for zero throws ConfigError.
LatencyResult measure_latency(LatencyProfile profile, std::size_t remote_reads, Tick delta,
                              VectorMode mode = VectorMode::kDv);

struct QuadraticFit {
  double a = 0;  // y = a + b x + c x^2
  double b = 0;
  double c = 0;
  double r2 = 0;
};

/// Ordinary least squares fit of y against 1, x, x^2.
QuadraticFit fit_quadratic(const std::vector<std::pair<double, double>>& points);

/// Messages sent for a contention-free global update writing w_r remote
/// objects, one per group of `members` replicas, for w_r in 1..max_writes.
std::vector<std::pair<double, double>> update_messages(std::size_t max_writes, std::size_t members, Tick delta);

}  // namespace jessy
