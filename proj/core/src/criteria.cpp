#include "jessy/criteria.hpp"

#include <algorithm>

#include <json.hpp>

#include "jessy/bit_matrix.hpp"
#include "jessy/history_io.hpp"

namespace jessy {

namespace {

struct NameEntry {
  Criterion c;
  std::string_view display;
  std::string_view flag;
};

constexpr NameEntry kNames[] = {
    {Criterion::kAca, "ACA", "aca"},          {Criterion::kCons, "CONS", "cons"},
    {Criterion::kSconsA, "SCONSa", "sconsa"}, {Criterion::kSconsB, "SCONSb", "sconsb"},
    {Criterion::kScons, "SCONS", "scons"},    {Criterion::kMon, "MON", "mon"},
    {Criterion::kWcf, "WCF", "wcf"},          {Criterion::kNmsi, "NMSI", "nmsi"},
    {Criterion::kSiDecomp, "SI", "si"},       {Criterion::kSiOracle, "SI-oracle", "si-oracle"},
};

Verdict pass(Criterion c) { return Verdict{c, true, {}, {}, {}}; }

Verdict fail(Criterion c, std::vector<std::size_t> ops, std::vector<TxnId> txns, std::string detail) {
  return Verdict{c, false, std::move(ops), std::move(txns), std::move(detail)};
}

std::vector<TxnId> all_txns(const History& h) {
  std::vector<TxnId> out;
  for (std::uint32_t t = 1; t < h.txn_count(); ++t) out.push_back(TxnId{t});
  return out;
}

bool committed_non_initial(const History& h, TxnId t) {
  return !t.is_initial() && h.status(t) == TxnStatus::kCommitted;
}

Verdict check_aca(const History& h) {
  for (std::size_t i = 0; i < h.op_count(); ++i) {
    const Operation& op = h.op(i);
    if (op.kind != OpKind::kRead || op.read_version.is_initial()) continue;
    if (!h.commit_precedes_op(op.read_version, i)) {
      std::vector<std::size_t> ops{i};
      if (auto term = h.terminator(op.read_version)) ops.push_back(*term);
      return fail(Criterion::kAca, std::move(ops), {op.txn, op.read_version},
                  "read " + render_op(h, i) + " observes a version whose commit does not precede it");
    }
  }
  return pass(Criterion::kAca);
}

std::optional<Verdict> cons_violation(const History& h, TxnId ti) {
  for (std::size_t r : h.reads_of(ti)) {
    const Operation& op = h.op(r);
    for (std::uint32_t k = 1; k < h.txn_count(); ++k) {
      const TxnId tk{k};
      if (tk == ti || !h.depends(ti, tk)) continue;
      auto wk = h.write_of(tk, op.object);
      if (!wk) continue;
      if (!h.version_at_or_before(op.object, tk, op.read_version)) {
        return fail(Criterion::kCons, {r, *wk}, {ti, tk},
                    "T" + h.txn_label(ti) + " depends on T" + h.txn_label(tk) + " but " + render_op(h, r) +
                        " misses its write " + render_op(h, *wk));
      }
    }
  }
  return std::nullopt;
}

Verdict check_cons(const History& h) {
  for (TxnId ti : all_txns(h))
    if (auto v = cons_violation(h, ti)) return *v;
  return pass(Criterion::kCons);
}

Verdict check_scons_a(const History& h) {
  for (TxnId ti : all_txns(h)) {
    const auto reads = h.reads_of(ti);
    for (std::size_t rx : reads) {
      const TxnId tj = h.op(rx).read_version;
      if (!h.committed(tj)) continue;
      for (std::size_t ry : reads) {
        const TxnId tl = h.op(ry).read_version;
        if (!committed_non_initial(h, tl)) continue;
        const std::size_t cl = *h.terminator(tl);
        if (h.precedes(rx, cl))
          return fail(Criterion::kSconsA, {rx, ry, cl}, {ti, tl},
                      render_op(h, rx) + " precedes c" + h.txn_label(tl) + " although T" + h.txn_label(ti) +
                          " reads " + render_op(h, ry));
      }
    }
  }
  return pass(Criterion::kSconsA);
}

Verdict check_scons_b(const History& h) {
  for (TxnId ti : all_txns(h)) {
    const auto reads = h.reads_of(ti);
    for (std::size_t rx : reads) {
      const Operation& opx = h.op(rx);
      const TxnId tj = opx.read_version;
      if (!h.committed(tj)) continue;
      for (std::size_t ry : reads) {
        const TxnId tl = h.op(ry).read_version;
        if (!committed_non_initial(h, tl)) continue;
        for (std::uint32_t k = 0; k < h.txn_count(); ++k) {
          const TxnId tk{k};
          if (tk == tj || !h.committed(tk) || !h.writes(tk, opx.object)) continue;
          if (h.commit_precedes(tk, tl) && !h.commit_precedes(tk, tj)) {
            std::vector<std::size_t> ops{rx, ry};
            if (auto wk = h.write_of(tk, opx.object)) ops.push_back(*wk);
            return fail(Criterion::kSconsB, std::move(ops), {ti, tk, tl},
                        "c" + h.txn_label(tk) + " precedes c" + h.txn_label(tl) + " but T" + h.txn_label(ti) +
                            " reads " + render_op(h, rx) + " instead of the later version");
          }
        }
      }
    }
  }
  return pass(Criterion::kSconsB);
}

Verdict check_mon(const History& h) {
  const std::size_t n = h.txn_count();
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::uint32_t i = 1; i < n; ++i)
    for (std::uint32_t j = 1; j < n; ++j)
      if (i != j && h.snapshot_precedes(TxnId{i}, TxnId{j})) succ[i].push_back(j);
  auto cycle = find_cycle(succ);
  if (cycle.empty()) return pass(Criterion::kMon);
  std::vector<TxnId> txns;
  std::string detail = "snapshot precedence cycle:";
  for (std::size_t t : cycle) {
    txns.push_back(TxnId{static_cast<std::uint32_t>(t)});
    detail += " T" + h.txn_label(txns.back()) + " ->";
  }
  detail += " T" + h.txn_label(txns.front());
  return fail(Criterion::kMon, {}, std::move(txns), std::move(detail));
}

Verdict check_wcf(const History& h) {
  const auto txns = all_txns(h);
  for (std::size_t a = 0; a < txns.size(); ++a) {
    const TxnId ti = txns[a];
    if (h.status(ti) != TxnStatus::kCommitted) continue;
    for (std::size_t b = a + 1; b < txns.size(); ++b) {
      const TxnId tj = txns[b];
      if (h.status(tj) != TxnStatus::kCommitted) continue;
      if (h.depends(ti, tj) || h.depends(tj, ti)) continue;
      for (ObjectId x : h.write_set(ti)) {
        if (auto wj = h.write_of(tj, x))
          return fail(Criterion::kWcf, {*h.write_of(ti, x), *wj}, {ti, tj},
                      "independent T" + h.txn_label(ti) + " and T" + h.txn_label(tj) + " both write " +
                          h.object_name(x));
      }
    }
  }
  return pass(Criterion::kWcf);
}

Verdict conjunction(const History& h, Criterion tag, std::initializer_list<Criterion> parts) {
  for (Criterion part : parts) {
    Verdict v = check(h, part);
    if (!v.holds) {
      v.detail = std::string(to_string(part)) + ": " + v.detail;
      v.criterion = tag;
      return v;
    }
  }
  return pass(tag);
}

}  // namespace

std::string_view to_string(Criterion c) {
  for (const auto& e : kNames)
    if (e.c == c) return e.display;
  return "?";
}

std::string_view flag_name(Criterion c) {
  for (const auto& e : kNames)
    if (e.c == c) return e.flag;
  return "?";
}

std::optional<Criterion> parse_criterion(std::string_view name) {
  for (const auto& e : kNames)
    if (e.flag == name) return e.c;
  return std::nullopt;
}

Verdict check(const History& h, Criterion c) {
  switch (c) {
    case Criterion::kAca: return check_aca(h);
    case Criterion::kCons: return check_cons(h);
    case Criterion::kSconsA: return check_scons_a(h);
    case Criterion::kSconsB: return check_scons_b(h);
    case Criterion::kScons: return conjunction(h, c, {Criterion::kSconsA, Criterion::kSconsB});
    case Criterion::kMon: return check_mon(h);
    case Criterion::kWcf: return check_wcf(h);
    case Criterion::kNmsi: return conjunction(h, c, {Criterion::kAca, Criterion::kCons, Criterion::kWcf});
    case Criterion::kSiDecomp:
      return conjunction(h, c, {Criterion::kAca, Criterion::kSconsA, Criterion::kSconsB, Criterion::kMon,
                                Criterion::kWcf});
    case Criterion::kSiOracle: return si_oracle(h);
  }
  return pass(c);
}

bool consistent_snapshot(const History& h, TxnId ti) { return !cons_violation(h, ti).has_value(); }

Verdict si_oracle(const History& h) {
  constexpr Criterion kTag = Criterion::kSiOracle;
  const std::size_t n = h.op_count();
  const std::size_t tn = h.txn_count();
  // Node layout: operations, then one snapshot point per transaction (index
  // n + t, T0's slot unused), then the implicit c0.
  const std::size_t c0 = n + tn;
  auto snap = [n](TxnId t) { return n + t.value; };
  auto commit_node = [&h, c0](TxnId t) { return t.is_initial() ? c0 : *h.terminator(t); };

  for (std::size_t i = 0; i < n; ++i) {
    const Operation& op = h.op(i);
    if (op.kind == OpKind::kRead && !h.committed(op.read_version))
      return fail(kTag, {i}, {op.txn, op.read_version},
                  "D1.1: " + render_op(h, i) + " reads a version of a transaction that never commits");
  }

  std::vector<std::vector<std::size_t>> succ(c0 + 1);
  for (auto [a, b] : h.edges()) succ[a].push_back(b);
  for (std::size_t v = 0; v < c0; ++v)
    if (v < n || v > n) succ[c0].push_back(v);
  for (std::uint32_t t = 1; t < tn; ++t)
    for (std::size_t o : h.txn_ops(TxnId{t})) succ[snap(TxnId{t})].push_back(o);  // S1
  for (std::size_t r = 0; r < n; ++r) {
    const Operation& op = h.op(r);
    if (op.kind != OpKind::kRead) continue;
    const TxnId ti = op.txn;
    const TxnId tj = op.read_version;
    if (!tj.is_initial()) succ[commit_node(tj)].push_back(snap(ti));  // S2a
    for (std::uint32_t k = 1; k < tn; ++k) {  // S2b
      const TxnId tk{k};
      if (tk == tj || !committed_non_initial(h, tk) || !h.writes(tk, op.object)) continue;
      if (!h.commit_precedes(tk, tj)) succ[snap(ti)].push_back(commit_node(tk));
    }
  }

  auto closure = transitive_closure(succ);
  if (!closure) {
    std::vector<std::size_t> ops;
    std::vector<TxnId> txns;
    for (std::size_t v : find_cycle(succ)) {
      if (v < n) ops.push_back(v);
      else if (v < c0) txns.push_back(TxnId{static_cast<std::uint32_t>(v - n)});
    }
    return fail(kTag, std::move(ops), std::move(txns), "extended history is cyclic");
  }
  const BitMatrix& hs = *closure;

  for (std::size_t r = 0; r < n; ++r) {
    const Operation& op = h.op(r);
    if (op.kind != OpKind::kRead) continue;
    const TxnId ti = op.txn;
    const TxnId tj = op.read_version;
    const std::size_t cj = commit_node(tj);
    if (!hs.test(cj, snap(ti)))
      return fail(kTag, {r}, {ti, tj}, "D1.2: c" + h.txn_label(tj) + " does not precede s" + h.txn_label(ti));
    for (std::uint32_t k = 0; k < tn; ++k) {
      const TxnId tk{k};
      if (tk == tj || !h.committed(tk) || !h.writes(tk, op.object)) continue;
      const std::size_t ck = commit_node(tk);
      if (!hs.test(ck, cj) && !hs.test(snap(ti), ck)) {
        std::vector<std::size_t> ops{r};
        if (auto wk = h.write_of(tk, op.object)) ops.push_back(*wk);
        return fail(kTag, std::move(ops), {ti, tj, tk},
                    "D1.3: neither c" + h.txn_label(tk) + " < c" + h.txn_label(tj) + " nor s" + h.txn_label(ti) +
                        " < c" + h.txn_label(tk));
      }
    }
  }

  for (std::uint32_t i = 1; i < tn; ++i) {
    const TxnId ti{i};
    if (!committed_non_initial(h, ti)) continue;
    for (std::uint32_t j = i + 1; j < tn; ++j) {
      const TxnId tj{j};
      if (!committed_non_initial(h, tj)) continue;
      for (ObjectId x : h.write_set(ti)) {
        if (!h.write_of(tj, x)) continue;
        if (!hs.test(commit_node(ti), snap(tj)) && !hs.test(commit_node(tj), snap(ti)))
          return fail(kTag, {*h.write_of(ti, x), *h.write_of(tj, x)}, {ti, tj},
                      "D2: concurrent T" + h.txn_label(ti) + " and T" + h.txn_label(tj) + " both write " +
                          h.object_name(x));
      }
    }
  }
  return pass(kTag);
}

std::string verdict_json(const History& h, const Verdict& v) {
  nlohmann::ordered_json doc;
  doc["criterion"] = std::string(to_string(v.criterion));
  doc["holds"] = v.holds;
  nlohmann::ordered_json witness = nlohmann::ordered_json::array();
  for (std::size_t i : v.ops) witness.push_back({{"op", i}, {"text", render_op(h, i)}});
  for (TxnId t : v.txns) witness.push_back({{"txn", h.txn_label(t)}});
  doc["witness"] = std::move(witness);
  if (!v.holds) doc["detail"] = v.detail;
  return doc.dump();
}

}  // namespace jessy
