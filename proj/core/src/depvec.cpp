#include "jessy/depvec.hpp"

#include <optional>
#include <set>

#include "jessy/criteria.hpp"
#include "jessy/error.hpp"

namespace jessy {

namespace {

enum class Mark : std::uint8_t { kTodo, kActive, kDone };

bool aborted(const History& h, TxnId t) { return !t.is_initial() && h.status(t) == TxnStatus::kAborted; }

}  // namespace

// ---------------------------------------------------------------------------
// Dependence vectors

DvAnnotation dv_annotate(const History& h) {
  DvAnnotation out(h.op_count());
  std::vector<Mark> mark(h.op_count(), Mark::kTodo);

  std::function<const DependenceVector&(std::size_t)> eval = [&](std::size_t i) -> const DependenceVector& {
    if (mark[i] == Mark::kDone) return out[i];
    if (mark[i] == Mark::kActive) throw ModelError("dependence vectors are cyclic at operation " + std::to_string(i));
    mark[i] = Mark::kActive;
    const Operation& op = h.op(i);
    DependenceVector v;
    if (op.kind == OpKind::kRead) {
      if (!op.read_version.is_initial()) v = eval(*h.write_of(op.read_version, op.object));
    } else if (op.kind == OpKind::kWrite) {
      for (std::size_t r : h.reads_of(op.txn)) v.merge(eval(r));
      for (ObjectId z : h.write_set(op.txn)) v.increment(z.value);
    }
    out[i] = std::move(v);
    mark[i] = Mark::kDone;
    return out[i];
  };
  for (std::size_t i = 0; i < h.op_count(); ++i) eval(i);
  return out;
}

bool compatible(std::uint32_t x, const DependenceVector& vx, std::uint32_t y, const DependenceVector& vy) {
  return vx[x] >= vy[x] && vy[y] >= vx[y];
}

SnapshotCheck dv_snapshot_consistent(const History& h, const DvAnnotation& dv, TxnId ti) {
  SnapshotCheck result;
  result.reliable = check(h, Criterion::kAca).holds && check(h, Criterion::kWcf).holds;
  const auto reads = h.reads_of(ti);
  for (std::size_t a = 0; a < reads.size() && result.consistent; ++a) {
    for (std::size_t b = a + 1; b < reads.size(); ++b) {
      const auto x = h.op(reads[a]).object.value;
      const auto y = h.op(reads[b]).object.value;
      if (!compatible(x, dv[reads[a]], y, dv[reads[b]])) {
        result.consistent = false;
        break;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Partitions

Partition::Partition(std::vector<std::uint32_t> class_of) : class_of_(std::move(class_of)) {
  std::set<std::uint32_t> used(class_of_.begin(), class_of_.end());
  class_count_ = used.size();
  if (!used.empty() && *used.rbegin() + 1 != used.size())
    throw ConfigError("partition class indices must be contiguous from 0");
}

Partition Partition::singletons(std::size_t objects) {
  std::vector<std::uint32_t> c(objects);
  for (std::size_t i = 0; i < objects; ++i) c[i] = static_cast<std::uint32_t>(i);
  return Partition(std::move(c));
}

Partition Partition::single_class(std::size_t objects) { return Partition(std::vector<std::uint32_t>(objects, 0)); }

Partition Partition::from_names(const History& h, const std::vector<std::vector<std::string>>& classes) {
  constexpr std::uint32_t kUnset = ~std::uint32_t{0};
  std::vector<std::uint32_t> c(h.object_count(), kUnset);
  std::uint32_t next = 0;
  for (const auto& cls : classes) {
    bool any = false;
    for (const auto& name : cls) {
      auto x = h.find_object(name);
      if (!x) continue;  // objects the history never touches
      if (c[x->value] != kUnset) throw ConfigError("object '" + name + "' appears in two partition classes");
      c[x->value] = next;
      any = true;
    }
    if (any) ++next;
  }
  for (std::size_t x = 0; x < c.size(); ++x)
    if (c[x] == kUnset) throw ConfigError("object '" + h.object_name(ObjectId{static_cast<std::uint32_t>(x)}) +
                                          "' is in no partition class");
  return Partition(std::move(c));
}

PartitionCheck is_proper_partition(const History& h, const Partition& p) {
  if (p.object_count() < h.object_count()) throw ConfigError("partition does not cover every object");
  std::vector<std::size_t> writes;
  for (std::size_t i = 0; i < h.op_count(); ++i)
    if (h.op(i).kind == OpKind::kWrite) writes.push_back(i);
  for (std::size_t a = 0; a < writes.size(); ++a)
    for (std::size_t b = a + 1; b < writes.size(); ++b) {
      const auto wa = writes[a];
      const auto wb = writes[b];
      if (!p.same_class(h.op(wa).object.value, h.op(wb).object.value)) continue;
      if (!h.precedes(wa, wb) && !h.precedes(wb, wa)) return PartitionCheck{false, {wa, wb}};
    }
  return PartitionCheck{};
}

// ---------------------------------------------------------------------------
// Partitioned dependence vectors

PdvAnnotation pdv_annotate(const History& h, const Partition& p) {
  if (!is_proper_partition(h, p).proper) throw ModelError("partition is not proper for this history");
  const VersionOrder vo = h.version_order();

  // Candidate writers: writes of transactions that did not abort.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < h.op_count(); ++i)
    if (h.op(i).kind == OpKind::kWrite && !aborted(h, h.op(i).txn)) candidates.push_back(i);
  auto cls = [&](std::size_t op) { return p.class_of(h.op(op).object.value); };

  PdvAnnotation out(h.op_count());
  std::vector<Mark> mark(h.op_count(), Mark::kTodo);
  std::function<const PartitionedDependenceVector&(std::size_t)> eval =
      [&](std::size_t i) -> const PartitionedDependenceVector& {
    if (mark[i] == Mark::kDone) return out[i];
    if (mark[i] == Mark::kActive)
      throw ModelError("partitioned dependence vectors are cyclic at operation " + std::to_string(i));
    mark[i] = Mark::kActive;
    const Operation& op = h.op(i);
    PartitionedDependenceVector v;
    if (op.kind == OpKind::kRead && !op.read_version.is_initial()) {
      // Later versions of x bound the candidates from above.
      std::vector<std::size_t> later;
      const auto& order = vo.per_object[op.object.value];
      auto pos = std::find(order.begin(), order.end(), op.read_version);
      if (pos != order.end())
        for (auto it = pos + 1; it != order.end(); ++it) later.push_back(*h.write_of(*it, op.object));
      for (std::size_t w : candidates) {
        if (cls(w) != cls(i) || !h.precedes(w, i) || !h.commit_precedes_op(h.op(w).txn, i)) continue;
        bool below = true;
        for (std::size_t k : later) below = below && h.precedes(w, k);
        if (below) v.merge(eval(w));
      }
    } else if (op.kind == OpKind::kWrite) {
      for (std::size_t r : h.reads_of(op.txn)) v.merge(eval(r));
      for (std::size_t w : candidates)
        if (w != i && cls(w) == cls(i) && h.precedes(w, i)) v.merge(eval(w));
      std::set<std::uint32_t> written;
      for (ObjectId z : h.write_set(op.txn)) written.insert(p.class_of(z.value));
      for (std::uint32_t c : written) v.increment(c);
    }
    out[i] = std::move(v);
    mark[i] = Mark::kDone;
    return out[i];
  };
  for (std::size_t i = 0; i < h.op_count(); ++i) eval(i);
  return out;
}

bool pdv_compatible(std::uint32_t class_x, const PartitionedDependenceVector& vx, std::uint32_t class_y,
                    const PartitionedDependenceVector& vy, const std::function<bool()>& y_is_latest,
                    const std::function<bool()>& x_is_latest) {
  if (class_x != class_y) return vx[class_x] >= vy[class_x] && vy[class_y] >= vx[class_y];
  const std::uint32_t c = class_x;
  if (vx[c] > vy[c]) return y_is_latest();
  if (vy[c] > vx[c]) return x_is_latest();
  return true;
}

namespace {

// Latest version of y whose (non-aborted) write precedes write_op, or T0.
// The writes of one transaction count as simultaneous.
TxnId latest_before(const History& h, const VersionOrder& vo, ObjectId y, std::optional<std::size_t> write_op) {
  if (!write_op) return TxnId::initial();
  const auto& order = vo.per_object[y.value];
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (it->is_initial()) break;
    if (*it == h.op(*write_op).txn || h.precedes(*h.write_of(*it, y), *write_op)) return *it;
  }
  return TxnId::initial();
}

bool pdv_compatible_with(const History& h, const VersionOrder& vo, const Partition& p, const PdvAnnotation& pdv,
                         std::size_t read_x, std::size_t read_y) {
  const Operation& rx = h.op(read_x);
  const Operation& ry = h.op(read_y);
  auto write_of_version = [&h](const Operation& r) -> std::optional<std::size_t> {
    if (r.read_version.is_initial()) return std::nullopt;
    return h.write_of(r.read_version, r.object);
  };
  return pdv_compatible(
      p.class_of(rx.object.value), pdv[read_x], p.class_of(ry.object.value), pdv[read_y],
      [&] { return ry.read_version == latest_before(h, vo, ry.object, write_of_version(rx)); },
      [&] { return rx.read_version == latest_before(h, vo, rx.object, write_of_version(ry)); });
}

}  // namespace

bool pdv_compatible(const History& h, const Partition& p, const PdvAnnotation& pdv, std::size_t read_x,
                    std::size_t read_y) {
  return pdv_compatible_with(h, h.version_order(), p, pdv, read_x, read_y);
}

bool pdv_snapshot_consistent(const History& h, const Partition& p, const PdvAnnotation& pdv, TxnId ti) {
  const VersionOrder vo = h.version_order();
  const auto reads = h.reads_of(ti);
  for (std::size_t a = 0; a < reads.size(); ++a)
    for (std::size_t b = a + 1; b < reads.size(); ++b)
      if (!pdv_compatible_with(h, vo, p, pdv, reads[a], reads[b])) return false;
  return true;
}

bool projected_cons(const History& h, const Partition& p) {
  auto class_writes = [&](TxnId t, std::uint32_t cls) {
    std::vector<std::size_t> out;
    for (std::size_t i : h.txn_ops(t))
      if (h.op(i).kind == OpKind::kWrite && p.class_of(h.op(i).object.value) == cls) out.push_back(i);
    return out;
  };
  auto at_or_before = [&](std::uint32_t cls, TxnId k, TxnId j) {
    if (k == j || k.is_initial()) return true;
    if (j.is_initial()) return false;
    for (std::size_t wk : class_writes(k, cls))
      for (std::size_t wj : class_writes(j, cls))
        if (!h.precedes(wk, wj)) return false;
    return true;
  };
  for (std::uint32_t i = 1; i < h.txn_count(); ++i) {
    const TxnId ti{i};
    for (std::size_t r : h.reads_of(ti)) {
      const Operation& op = h.op(r);
      const std::uint32_t cls = p.class_of(op.object.value);
      for (std::uint32_t k = 1; k < h.txn_count(); ++k) {
        const TxnId tk{k};
        if (tk == ti || !h.depends(ti, tk) || class_writes(tk, cls).empty()) continue;
        if (!at_or_before(cls, tk, op.read_version)) return false;
      }
    }
  }
  return true;
}

}  // namespace jessy
