#include "run_inspection.hpp"

#include <set>

#include "jessy/criteria.hpp"

namespace jessy::testing {

RunFindings inspect_run(const RunTrace& trace) {
  RunFindings f;
  const Topology& topo = trace.config.topology;
  const History h = extract_history(trace);
  const Verdict nmsi = check(h, Criterion::kNmsi);
  if (!nmsi.holds) {
    ++f.nmsi_violations;
    f.problems.push_back("NMSI: " + nmsi.detail);
  }
  for (const std::string& p : check_run(trace)) f.problems.push_back(p);

  for (std::size_t i = 1; i < trace.txns.size(); ++i) {
    const TxnTrace& t = trace.txns[i];
    ++f.txns;
    const bool committed = t.committed.value_or(false);
    f.commits += committed ? 1 : 0;

    std::set<ProcessId> allowed{t.plan.coord};
    std::set<std::uint32_t> writes;
    for (const PlannedOp& op : t.plan.ops) {
      for (ProcessId p : topo.replicas(op.object)) allowed.insert(p);
      if (op.kind == OpKind::kWrite) writes.insert(op.object);
    }
    for (auto [p, steps] : t.steps)
      if (steps > 0 && !allowed.count(p)) ++f.genuineness_violations;

    if (trace.crashed[t.plan.coord]) continue;
    if (writes.empty()) {
      if (!committed || t.termination_messages != 0) ++f.wfq_violations;
      continue;
    }
    if (committed) continue;
    const auto ti = h.find_txn(std::to_string(i));
    if (!ti) continue;
    bool contended = false;
    for (std::size_t j = 1; j < trace.txns.size() && !contended; ++j) {
      if (j == i) continue;
      bool conflict = false;
      for (const PlannedOp& op : trace.txns[j].plan.ops)
        conflict = conflict || (op.kind == OpKind::kWrite && writes.count(op.object));
      if (!conflict) continue;
      const auto tj = h.find_txn(std::to_string(j));
      contended = !tj || !h.depends(*ti, *tj);
    }
    if (!contended) ++f.ofu_violations;
  }
  return f;
}

}  // namespace jessy::testing
