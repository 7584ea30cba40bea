#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jessy/bit_matrix.hpp"

namespace jessy {

/// Dense transaction index within one History. Index 0 is the fictitious
/// initial transaction T0 that wrote version x0 of every object.
struct TxnId {
  std::uint32_t value = 0;

  static constexpr TxnId initial() { return TxnId{0}; }
  constexpr bool is_initial() const { return value == 0; }
  auto operator<=>(const TxnId&) const = default;
};

/// Dense object index within one History.
struct ObjectId {
  std::uint32_t value = 0;
  auto operator<=>(const ObjectId&) const = default;
};

enum class OpKind : std::uint8_t { kRead, kWrite, kCommit, kAbort };

struct Operation {
  OpKind kind = OpKind::kRead;
  TxnId txn;
  ObjectId object;       // reads and writes only
  TxnId read_version;    // reads only: the j in r_i(x_j)

  bool is_access() const { return kind == OpKind::kRead || kind == OpKind::kWrite; }
  bool is_terminator() const { return kind == OpKind::kCommit || kind == OpKind::kAbort; }
  bool operator==(const Operation&) const = default;
};

enum class TxnStatus : std::uint8_t { kCommitted, kAborted, kPending };

/// Per-object list of version writers in version order, starting with T0.
struct VersionOrder {
  std::vector<std::vector<TxnId>> per_object;
};

/// A finite partially ordered set of read/write/commit/abort operations.
///
/// Histories are immutable once built; every derived relation (closure of
/// the real-time order, reads-from, dependency) is computed at construction
/// so queries are cheap and thread-safe. Build one with HistoryBuilder or the
/// parsers in history_io.hpp.
class History {
 public:
  History();

  std::size_t op_count() const { return ops_.size(); }
  const Operation& op(std::size_t i) const { return ops_[i]; }
  const std::vector<Operation>& ops() const { return ops_; }
  /// Declared precedence edges (deduplicated, sorted).
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

  /// Number of transactions including T0.
  std::size_t txn_count() const { return txn_labels_.size(); }
  std::size_t object_count() const { return object_names_.size(); }
  const std::string& txn_label(TxnId t) const { return txn_labels_[t.value]; }
  const std::string& object_name(ObjectId x) const { return object_names_[x.value]; }
  std::optional<TxnId> find_txn(std::string_view label) const;
  std::optional<ObjectId> find_object(std::string_view name) const;

  /// o_a <_h o_b (strict, transitive).
  bool precedes(std::size_t a, std::size_t b) const { return reach_.test(a, b); }
  /// True when every pair of distinct operations is ordered.
  bool is_total() const;

  TxnStatus status(TxnId t) const;
  bool committed(TxnId t) const { return t.is_initial() || status(t) == TxnStatus::kCommitted; }
  std::optional<std::size_t> terminator(TxnId t) const;
  /// Operations of t in program order.
  const std::vector<std::size_t>& txn_ops(TxnId t) const { return txn_ops_[t.value]; }
  /// Read operations of t in program order.
  std::vector<std::size_t> reads_of(TxnId t) const;
  std::optional<std::size_t> write_of(TxnId t, ObjectId x) const;
  bool writes(TxnId t, ObjectId x) const { return t.is_initial() || write_of(t, x).has_value(); }
  std::vector<ObjectId> write_set(TxnId t) const;

  /// c_k <_h c_l, with the implicit c_0 preceding everything.
  bool commit_precedes(TxnId k, TxnId l) const;
  /// c_j <_h op (c_0 precedes every operation).
  bool commit_precedes_op(TxnId j, std::size_t op) const;
  /// x_k precedes-or-equals x_j in the version order of x (x_0 first).
  bool version_at_or_before(ObjectId x, TxnId k, TxnId j) const;

  /// Version order restricted to writers that did not abort.
  VersionOrder version_order() const;

  /// T_i depends on T_j: (T_i, T_j) in the transitive closure of reads-from.
  /// A transaction never depends on itself.
  bool depends(TxnId ti, TxnId tj) const;
  /// Snapshot of T_i precedes snapshot of T_j.
  bool snapshot_precedes(TxnId ti, TxnId tj) const;

  /// Structural equality: same operations (compared by label) and closure.
  bool operator==(const History& other) const;

 private:
  friend class HistoryBuilder;

  std::vector<Operation> ops_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::string> txn_labels_;
  std::vector<std::string> object_names_;

  BitMatrix reach_;
  BitMatrix depends_;
  std::vector<std::vector<std::size_t>> txn_ops_;
  std::vector<std::optional<std::size_t>> terminator_;
};

/// Accumulates operations and precedence edges, then validates them into a
/// History. Throws ModelError on invariant violations.
class HistoryBuilder {
 public:
  HistoryBuilder();

  /// Interns a transaction label ("1", "a", ...). "0" is T0.
  TxnId txn(std::string_view label);
  ObjectId object(std::string_view name);

  std::size_t read(TxnId t, ObjectId x, TxnId version);
  std::size_t write(TxnId t, ObjectId x);
  std::size_t commit(TxnId t);
  std::size_t abort(TxnId t);
  std::size_t add(const Operation& op);

  void edge(std::size_t from, std::size_t to);
  /// Orders every operation after the previously added one.
  void chain_all();

  History build() &&;

 private:
  History h_;
};

std::string_view to_string(OpKind kind);
std::string_view to_string(TxnStatus status);

}  // namespace jessy
