#include "jessy/account.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "jessy/error.hpp"

namespace jessy {

std::string_view to_string(TxnKind k) {
  switch (k) {
    case TxnKind::kReadOnly: return "read-only";
    case TxnKind::kLocalUpdate: return "local-update";
    case TxnKind::kGlobalUpdate: return "global-update";
  }
  return "?";
}

std::string_view to_string(LatencyProfile p) {
  switch (p) {
    case LatencyProfile::kReadOnly: return "readonly";
    case LatencyProfile::kGlobalUpdate: return "global-update";
    case LatencyProfile::kLocalUpdate: return "local-update";
  }
  return "?";
}

std::optional<LatencyProfile> parse_latency_profile(std::string_view s) {
  for (auto p : {LatencyProfile::kReadOnly, LatencyProfile::kGlobalUpdate, LatencyProfile::kLocalUpdate})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

AccountReport account(const RunTrace& trace) {
  const Topology& topo = trace.config.topology;
  AccountReport report;
  for (std::size_t i = 1; i < trace.txns.size(); ++i) {
    const TxnTrace& t = trace.txns[i];
    TxnAccount a;
    a.id = TxnId{static_cast<std::uint32_t>(i)};
    bool writes = false;
    bool all_local = true;
    for (const PlannedOp& op : t.plan.ops) {
      const bool local = topo.replicates(t.plan.coord, op.object);
      if (op.kind == OpKind::kRead) {
        a.remote_reads += local ? 0 : 1;
      } else {
        writes = true;
        a.remote_writes += local ? 0 : 1;
        all_local = all_local && local;
      }
    }
    a.kind = !writes ? TxnKind::kReadOnly : all_local ? TxnKind::kLocalUpdate : TxnKind::kGlobalUpdate;
    a.messages = t.messages;
    a.termination_messages = t.termination_messages;
    if (t.decide_tick)
      a.latency = static_cast<double>(*t.decide_tick - t.plan.start) / static_cast<double>(trace.config.delta);
    a.committed = t.committed.value_or(false);
    const auto allowed = allowed_processes(topo, t.plan);
    for (auto [p, steps] : t.steps)
      if (steps && !std::binary_search(allowed.begin(), allowed.end(), p)) a.genuine = false;
    report.genuineness_violations += a.genuine ? 0 : 1;
    report.txns.push_back(a);
  }
  return report;
}

double expected_latency(LatencyProfile profile, std::size_t remote_reads) {
  const double reads = 2.0 * static_cast<double>(remote_reads);
  switch (profile) {
    case LatencyProfile::kReadOnly: return reads;
    case LatencyProfile::kGlobalUpdate: return reads + 5;
    case LatencyProfile::kLocalUpdate: return reads + 4;
  }
  return 0;
}

namespace {

// Group 0 holds "home" and "home2" and contains the coordinator (process 0,
// its leader); group k >= 1 holds "o<k>". Every group has three members.
SimConfig star_topology(std::size_t remote_groups, Tick delta, VectorMode mode) {
  SimConfig cfg;
  cfg.delta = delta;
  cfg.mode = mode;
  Topology& topo = cfg.topology;
  std::vector<Group> groups;
  for (std::size_t g = 0; g <= remote_groups; ++g) {
    Group group;
    group.id = static_cast<GroupId>(g);
    for (ProcessId m = 0; m < 3; ++m) group.members.push_back(static_cast<ProcessId>(3 * g) + m);
    const std::vector<std::string> names =
        g == 0 ? std::vector<std::string>{"home", "home2"} : std::vector<std::string>{"o" + std::to_string(g)};
    for (const std::string& n : names) {
      group.objects.push_back(static_cast<std::uint32_t>(topo.objects.size()));
      topo.objects.push_back(n);
      topo.placement.push_back(group.id);
    }
    groups.push_back(std::move(group));
  }
  topo.processes = 3 * (remote_groups + 1);
  topo.directory = Directory(std::move(groups));
  topo.partition = Partition::singletons(topo.objects.size());
  return cfg;
}

std::uint32_t remote_object(std::size_t k) { return static_cast<std::uint32_t>(k + 2); }  // o<k+1>

}  // namespace

LatencyResult measure_latency(LatencyProfile profile, std::size_t remote_reads, Tick delta, VectorMode mode) {
  if (profile == LatencyProfile::kGlobalUpdate && remote_reads == 0)
    throw ConfigError("a global update reads the remote object it writes, so it needs at least one remote read");
  SimConfig cfg = star_topology(remote_reads, delta, mode);
  TxnPlan plan;
  plan.id = TxnId{1};
  plan.coord = 0;
  plan.start = 0;
  switch (profile) {
    case LatencyProfile::kReadOnly:
      if (remote_reads == 0) plan.ops.push_back(PlannedOp{OpKind::kRead, 0, 0});
      for (std::size_t k = 0; k < remote_reads; ++k) plan.ops.push_back(PlannedOp{OpKind::kRead, remote_object(k), 0});
      break;
    case LatencyProfile::kGlobalUpdate:
      for (std::size_t k = 0; k < remote_reads; ++k) plan.ops.push_back(PlannedOp{OpKind::kRead, remote_object(k), 0});
      plan.ops.push_back(PlannedOp{OpKind::kWrite, remote_object(0), 1});
      break;
    case LatencyProfile::kLocalUpdate:
      for (std::size_t k = 0; k < remote_reads; ++k) plan.ops.push_back(PlannedOp{OpKind::kRead, remote_object(k), 0});
      plan.ops.push_back(PlannedOp{OpKind::kRead, 0, 0});
      plan.ops.push_back(PlannedOp{OpKind::kWrite, 0, 1});
      break;
  }
  cfg.scripted.push_back(plan);
  const RunTrace trace = run(cfg);
  const TxnAccount a = account(trace).txns.at(0);
  if (!a.committed) throw Error("contention-free transaction did not commit");
  LatencyResult r;
  r.profile = profile;
  r.remote_reads = remote_reads;
  r.expected = expected_latency(profile, remote_reads);
  r.measured = a.latency;
  r.tolerance = profile == LatencyProfile::kLocalUpdate ? 1.0 : 0.0;
  r.messages = a.messages;
  return r;
}

QuadraticFit fit_quadratic(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ConfigError("a quadratic fit needs at least three points");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto [px, py] = points[static_cast<std::size_t>(k)];
    x.row(k) << 1.0, px, px * px;
    y(k) = py;
  }
  const auto qr = x.colPivHouseholderQr();
  if (qr.rank() < 3) throw ConfigError("quadratic fit needs three distinct x values");
  const Eigen::Vector3d beta = qr.solve(y);
  const double ss_res = (x * beta - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  return QuadraticFit{beta(0), beta(1), beta(2), ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot};
}

std::vector<std::pair<double, double>> update_messages(std::size_t max_writes, std::size_t members, Tick delta) {
  if (members == 0) throw ConfigError("groups need at least one member");
  std::vector<std::pair<double, double>> out;
  for (std::size_t w = 1; w <= max_writes; ++w) {
    // Process 0 coordinates and replicates nothing; group k holds object k.
    SimConfig cfg;
    cfg.delta = delta;
    Topology& topo = cfg.topology;
    std::vector<Group> groups;
    for (std::size_t g = 0; g < w; ++g) {
      Group group;
      group.id = static_cast<GroupId>(g);
      for (std::size_t m = 0; m < members; ++m) group.members.push_back(static_cast<ProcessId>(1 + g * members + m));
      group.objects.push_back(static_cast<std::uint32_t>(g));
      topo.objects.push_back("o" + std::to_string(g + 1));
      topo.placement.push_back(group.id);
      groups.push_back(std::move(group));
    }
    topo.processes = 1 + w * members;
    topo.directory = Directory(std::move(groups));
    topo.partition = Partition::singletons(w);
    TxnPlan plan;
    plan.id = TxnId{1};
    for (std::uint32_t x = 0; x < w; ++x) {
      plan.ops.push_back(PlannedOp{OpKind::kRead, x, 0});
      plan.ops.push_back(PlannedOp{OpKind::kWrite, x, 1});
    }
    cfg.scripted.push_back(plan);
    const TxnAccount a = account(run(cfg)).txns.at(0);
    out.emplace_back(static_cast<double>(a.remote_writes), static_cast<double>(a.messages));
  }
  return out;
}

}  // namespace jessy
