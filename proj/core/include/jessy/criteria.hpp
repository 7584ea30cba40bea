#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jessy/history.hpp"

namespace jessy {

enum class Criterion : std::uint8_t {
  kAca,
  kCons,
  kSconsA,
  kSconsB,
  kScons,
  kMon,
  kWcf,
  kNmsi,
  kSiDecomp,
  kSiOracle,
};

inline constexpr Criterion kAllCriteria[] = {
    Criterion::kAca, Criterion::kCons, Criterion::kSconsA, Criterion::kSconsB, Criterion::kScons,
    Criterion::kMon, Criterion::kWcf,  Criterion::kNmsi,   Criterion::kSiDecomp, Criterion::kSiOracle,
};

/// Display name ("SCONSa", "SI-oracle", ...).
std::string_view to_string(Criterion c);
/// Command-line name ("sconsa", "si-oracle", ...).
std::string_view flag_name(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view name);

/// Result of a check. When holds is false, ops and txns name the operations
/// and transactions of the first violation found in a deterministic scan.
struct Verdict {
  Criterion criterion = Criterion::kAca;
  bool holds = true;
  std::vector<std::size_t> ops;
  std::vector<TxnId> txns;
  std::string detail;
};

Verdict check(const History& h, Criterion c);

/// SI membership decided by building one extended history (a snapshot point
/// per transaction placed by the construction used in the decomposition
/// proof) and checking the read and write rules on it literally.
Verdict si_oracle(const History& h);

/// Per-transaction consistent snapshot: every version T_i reads is at or
/// after every version of the same object written by a transaction T_i
/// depends on.
bool consistent_snapshot(const History& h, TxnId ti);

/// {"criterion": ..., "holds": ..., "witness": [...], "detail": ...}
std::string verdict_json(const History& h, const Verdict& v);

}  // namespace jessy
