#include "jessy/history.hpp"

#include <algorithm>
#include <string>

#include "jessy/error.hpp"

namespace jessy {

namespace {

std::string describe(const History& h, std::size_t index) {
  const Operation& op = h.op(index);
  std::string out;
  switch (op.kind) {
    case OpKind::kRead:
      out = "r" + h.txn_label(op.txn) + "(" + h.object_name(op.object) + h.txn_label(op.read_version) + ")";
      break;
    case OpKind::kWrite:
      out = "w" + h.txn_label(op.txn) + "(" + h.object_name(op.object) + ")";
      break;
    case OpKind::kCommit:
      out = "c" + h.txn_label(op.txn);
      break;
    case OpKind::kAbort:
      out = "a" + h.txn_label(op.txn);
      break;
  }
  return out + " (op " + std::to_string(index) + ")";
}

}  // namespace

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::kRead: return "read";
    case OpKind::kWrite: return "write";
    case OpKind::kCommit: return "commit";
    case OpKind::kAbort: return "abort";
  }
  return "?";
}

std::string_view to_string(TxnStatus status) {
  switch (status) {
    case TxnStatus::kCommitted: return "committed";
    case TxnStatus::kAborted: return "aborted";
    case TxnStatus::kPending: return "pending";
  }
  return "?";
}

History::History() : txn_labels_{"0"}, txn_ops_(1), terminator_(1) {}

std::optional<TxnId> History::find_txn(std::string_view label) const {
  for (std::size_t i = 0; i < txn_labels_.size(); ++i)
    if (txn_labels_[i] == label) return TxnId{static_cast<std::uint32_t>(i)};
  return std::nullopt;
}

std::optional<ObjectId> History::find_object(std::string_view name) const {
  for (std::size_t i = 0; i < object_names_.size(); ++i)
    if (object_names_[i] == name) return ObjectId{static_cast<std::uint32_t>(i)};
  return std::nullopt;
}

bool History::is_total() const {
  for (std::size_t a = 0; a < ops_.size(); ++a)
    for (std::size_t b = a + 1; b < ops_.size(); ++b)
      if (!precedes(a, b) && !precedes(b, a)) return false;
  return true;
}

TxnStatus History::status(TxnId t) const {
  if (t.is_initial()) return TxnStatus::kCommitted;
  const auto& term = terminator_[t.value];
  if (!term) return TxnStatus::kPending;
  return ops_[*term].kind == OpKind::kCommit ? TxnStatus::kCommitted : TxnStatus::kAborted;
}

std::optional<std::size_t> History::terminator(TxnId t) const { return terminator_[t.value]; }

std::vector<std::size_t> History::reads_of(TxnId t) const {
  std::vector<std::size_t> out;
  for (std::size_t i : txn_ops_[t.value])
    if (ops_[i].kind == OpKind::kRead) out.push_back(i);
  return out;
}

std::optional<std::size_t> History::write_of(TxnId t, ObjectId x) const {
  for (std::size_t i : txn_ops_[t.value])
    if (ops_[i].kind == OpKind::kWrite && ops_[i].object == x) return i;
  return std::nullopt;
}

std::vector<ObjectId> History::write_set(TxnId t) const {
  std::vector<ObjectId> out;
  for (std::size_t i : txn_ops_[t.value])
    if (ops_[i].kind == OpKind::kWrite) out.push_back(ops_[i].object);
  return out;
}

bool History::commit_precedes(TxnId k, TxnId l) const {
  if (l.is_initial() || status(l) != TxnStatus::kCommitted) return false;
  if (k == l) return false;
  if (k.is_initial()) return true;
  if (status(k) != TxnStatus::kCommitted) return false;
  return precedes(*terminator_[k.value], *terminator_[l.value]);
}

bool History::commit_precedes_op(TxnId j, std::size_t op) const {
  if (j.is_initial()) return true;
  if (status(j) != TxnStatus::kCommitted) return false;
  return precedes(*terminator_[j.value], op);
}

bool History::version_at_or_before(ObjectId x, TxnId k, TxnId j) const {
  if (k == j || k.is_initial()) return true;
  if (j.is_initial()) return false;
  auto wk = write_of(k, x);
  auto wj = write_of(j, x);
  return wk && wj && precedes(*wk, *wj);
}

VersionOrder History::version_order() const {
  VersionOrder order;
  order.per_object.resize(object_names_.size());
  for (std::size_t x = 0; x < object_names_.size(); ++x) {
    std::vector<std::size_t> writes;
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      const Operation& op = ops_[i];
      if (op.kind == OpKind::kWrite && op.object.value == x && status(op.txn) != TxnStatus::kAborted)
        writes.push_back(i);
    }
    std::sort(writes.begin(), writes.end(), [this](std::size_t a, std::size_t b) { return precedes(a, b); });
    auto& list = order.per_object[x];
    list.push_back(TxnId::initial());
    for (std::size_t w : writes) list.push_back(ops_[w].txn);
  }
  return order;
}

bool History::depends(TxnId ti, TxnId tj) const {
  if (ti == tj) return false;
  return depends_.test(ti.value, tj.value);
}

bool History::snapshot_precedes(TxnId ti, TxnId tj) const {
  if (ti == tj) return false;
  const auto reads_i = reads_of(ti);
  const auto reads_j = reads_of(tj);
  for (std::size_t rj : reads_j) {
    const TxnId l = ops_[rj].read_version;
    if (l.is_initial() || status(l) != TxnStatus::kCommitted) continue;
    const std::size_t cl = *terminator_[l.value];
    for (std::size_t ri : reads_i) {
      if (precedes(ri, cl)) return true;
      if (writes(l, ops_[ri].object) && commit_precedes(ops_[ri].read_version, l)) return true;
    }
  }
  return false;
}

bool History::operator==(const History& other) const {
  if (ops_.size() != other.ops_.size()) return false;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const Operation& a = ops_[i];
    const Operation& b = other.ops_[i];
    if (a.kind != b.kind || txn_label(a.txn) != other.txn_label(b.txn)) return false;
    if (a.is_access() && object_name(a.object) != other.object_name(b.object)) return false;
    if (a.kind == OpKind::kRead && txn_label(a.read_version) != other.txn_label(b.read_version)) return false;
  }
  return reach_ == other.reach_;
}

// ---------------------------------------------------------------------------

HistoryBuilder::HistoryBuilder() = default;

TxnId HistoryBuilder::txn(std::string_view label) {
  if (label.empty()) throw ModelError("empty transaction label");
  if (auto existing = h_.find_txn(label)) return *existing;
  h_.txn_labels_.emplace_back(label);
  h_.txn_ops_.emplace_back();
  h_.terminator_.emplace_back();
  return TxnId{static_cast<std::uint32_t>(h_.txn_labels_.size() - 1)};
}

ObjectId HistoryBuilder::object(std::string_view name) {
  if (name.empty()) throw ModelError("empty object name");
  if (auto existing = h_.find_object(name)) return *existing;
  h_.object_names_.emplace_back(name);
  return ObjectId{static_cast<std::uint32_t>(h_.object_names_.size() - 1)};
}

std::size_t HistoryBuilder::read(TxnId t, ObjectId x, TxnId version) {
  return add(Operation{OpKind::kRead, t, x, version});
}
std::size_t HistoryBuilder::write(TxnId t, ObjectId x) { return add(Operation{OpKind::kWrite, t, x, TxnId{}}); }
std::size_t HistoryBuilder::commit(TxnId t) { return add(Operation{OpKind::kCommit, t, ObjectId{}, TxnId{}}); }
std::size_t HistoryBuilder::abort(TxnId t) { return add(Operation{OpKind::kAbort, t, ObjectId{}, TxnId{}}); }

std::size_t HistoryBuilder::add(const Operation& op) {
  if (op.txn.value >= h_.txn_labels_.size() || op.txn.is_initial())
    throw ModelError("operation on unknown transaction or on T0");
  if (op.is_access() && op.object.value >= h_.object_names_.size()) throw ModelError("operation on unknown object");
  if (op.kind == OpKind::kRead && op.read_version.value >= h_.txn_labels_.size())
    throw ModelError("read of a version written by an unknown transaction");
  Operation normalized = op;
  if (!op.is_access()) normalized.object = ObjectId{};
  if (op.kind != OpKind::kRead) normalized.read_version = TxnId{};
  h_.ops_.push_back(normalized);
  return h_.ops_.size() - 1;
}

void HistoryBuilder::edge(std::size_t from, std::size_t to) {
  if (from >= h_.ops_.size() || to >= h_.ops_.size()) throw ModelError("edge refers to an unknown operation");
  if (from == to) throw ModelError("self edge on operation " + std::to_string(from));
  h_.edges_.emplace_back(from, to);
}

void HistoryBuilder::chain_all() {
  for (std::size_t i = 1; i < h_.ops_.size(); ++i) h_.edges_.emplace_back(i - 1, i);
}

History HistoryBuilder::build() && {
  History h = std::move(h_);
  const std::size_t n = h.ops_.size();
  std::sort(h.edges_.begin(), h.edges_.end());
  h.edges_.erase(std::unique(h.edges_.begin(), h.edges_.end()), h.edges_.end());

  std::vector<std::vector<std::size_t>> succ(n);
  for (auto [a, b] : h.edges_) succ[a].push_back(b);
  auto closure = transitive_closure(succ);
  if (!closure) throw ModelError("precedence relation has a cycle");
  h.reach_ = std::move(*closure);

  // Program order: each transaction's operations form a chain.
  h.txn_ops_.assign(h.txn_labels_.size(), {});
  h.terminator_.assign(h.txn_labels_.size(), std::nullopt);
  for (std::size_t i = 0; i < n; ++i) h.txn_ops_[h.ops_[i].txn.value].push_back(i);
  for (auto& list : h.txn_ops_) {
    std::sort(list.begin(), list.end(), [&h](std::size_t a, std::size_t b) {
      if (h.precedes(a, b)) return true;
      if (h.precedes(b, a)) return false;
      return a < b;
    });
    for (std::size_t k = 1; k < list.size(); ++k)
      if (!h.precedes(list[k - 1], list[k]))
        throw ModelError("operations " + describe(h, list[k - 1]) + " and " + describe(h, list[k]) +
                         " of one transaction are unordered");
  }

  for (std::size_t t = 1; t < h.txn_labels_.size(); ++t) {
    const auto& list = h.txn_ops_[t];
    std::vector<bool> read(h.object_names_.size(), false);
    std::vector<bool> written(h.object_names_.size(), false);
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Operation& op = h.ops_[list[k]];
      if (op.is_terminator()) {
        if (h.terminator_[t]) throw ModelError("duplicate terminator " + describe(h, list[k]));
        if (k + 1 != list.size()) throw ModelError("operation after terminator " + describe(h, list[k]));
        h.terminator_[t] = list[k];
        continue;
      }
      auto x = op.object.value;
      if (op.kind == OpKind::kRead) {
        if (read[x]) throw ModelError("object read twice by one transaction: " + describe(h, list[k]));
        read[x] = true;
      } else {
        if (written[x]) throw ModelError("object written twice by one transaction: " + describe(h, list[k]));
        if (!read[x]) throw ModelError("write without a prior read: " + describe(h, list[k]));
        written[x] = true;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Operation& op = h.ops_[i];
    if (op.kind != OpKind::kRead || op.read_version.is_initial()) continue;
    if (op.read_version == op.txn) throw ModelError("transaction reads its own version: " + describe(h, i));
    auto w = h.write_of(op.read_version, op.object);
    if (!w) throw ModelError("read of a version that was never written: " + describe(h, i));
    if (!h.precedes(*w, i)) throw ModelError("read does not follow the write it observes: " + describe(h, i));
  }

  // Writes on the same object by transactions that did not abort are ordered.
  for (std::size_t a = 0; a < n; ++a) {
    const Operation& wa = h.ops_[a];
    if (wa.kind != OpKind::kWrite || h.status(wa.txn) == TxnStatus::kAborted) continue;
    for (std::size_t b = a + 1; b < n; ++b) {
      const Operation& wb = h.ops_[b];
      if (wb.kind != OpKind::kWrite || wb.object != wa.object || h.status(wb.txn) == TxnStatus::kAborted) continue;
      if (!h.precedes(a, b) && !h.precedes(b, a))
        throw ModelError("unordered writes " + describe(h, a) + " and " + describe(h, b));
    }
  }

  // Dependency: closure of reads-from over transactions. Cycles are possible
  // in histories that do not avoid cascading aborts, so closure is computed
  // by search rather than by topological order.
  const std::size_t tn = h.txn_labels_.size();
  std::vector<std::vector<std::size_t>> reads_from(tn);
  for (const Operation& op : h.ops_)
    if (op.kind == OpKind::kRead) reads_from[op.txn.value].push_back(op.read_version.value);
  for (auto& out : reads_from) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  h.depends_ = BitMatrix(tn);
  for (std::size_t src = 0; src < tn; ++src) {
    std::vector<std::size_t> stack(reads_from[src].begin(), reads_from[src].end());
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      if (h.depends_.test(src, v)) continue;
      h.depends_.set(src, v);
      for (std::size_t w : reads_from[v]) stack.push_back(w);
    }
  }
  return h;
}

}  // namespace jessy
