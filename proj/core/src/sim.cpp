#include "jessy/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <random>
#include <set>

#include "jessy/bit_matrix.hpp"
#include "jessy/error.hpp"

namespace jessy {

void SimConfig::validate() const {
  if (delta < 1) throw ConfigError("delta must be at least 1 tick");
  if (workload.read_only_fraction < 0 || workload.read_only_fraction > 1)
    throw ConfigError("read_only_fraction must lie in [0, 1]");
  if (workload.write_probability < 0 || workload.write_probability > 1)
    throw ConfigError("write_probability must lie in [0, 1]");
  topology.validate(mode);
  if (scripted.empty() && workload.ops_per_txn > topology.objects.size())
    throw ConfigError("ops_per_txn exceeds the number of objects");
  if (scripted.empty() && workload.ops_per_txn == 0 && workload.txn_count > 0)
    throw ConfigError("ops_per_txn must be at least 1");

  std::map<GroupId, std::size_t> crashes;
  std::set<ProcessId> faulty;
  for (const Fault& f : faults) {
    if (f.process >= topology.processes) throw ConfigError("fault names unknown process " + std::to_string(f.process));
    if (!faulty.insert(f.process).second) continue;
    auto g = topology.directory.group_of(f.process);
    if (!g) continue;
    const Group& group = topology.directory.group(*g);
    if (group.leader() == f.process)
      throw ConfigError("process " + std::to_string(f.process) + " leads group " + std::to_string(*g) +
                        "; leader crashes are not supported");
    if (++crashes[*g] > group.members.size() - group.majority())
      throw ConfigError("group " + std::to_string(*g) + " would lose its majority");
  }
  if (faulty.size() == topology.processes) throw ConfigError("every process is scheduled to crash");
  for (const TxnPlan& p : scripted) {
    if (p.coord >= topology.processes) throw ConfigError("scripted transaction has unknown coordinator");
    if (faulty.count(p.coord)) throw ConfigError("coordinators must not crash");
    for (const PlannedOp& op : p.ops)
      if (op.object >= topology.objects.size()) throw ConfigError("scripted transaction names unknown object");
  }
}

std::vector<TxnPlan> generate_workload(const SimConfig& cfg) {
  if (!cfg.scripted.empty()) return cfg.scripted;
  const WorkloadConfig& w = cfg.workload;
  std::mt19937_64 rng(cfg.seed);
  std::set<ProcessId> faulty;
  for (const Fault& f : cfg.faults) faulty.insert(f.process);
  std::vector<ProcessId> coords;
  for (ProcessId p = 0; p < cfg.topology.processes; ++p)
    if (!faulty.count(p)) coords.push_back(p);

  const std::size_t n = cfg.topology.objects.size();
  std::vector<double> weights(n, 1.0);
  if (w.distribution == AccessDistribution::kZipf)
    for (std::size_t k = 0; k < n; ++k) weights[k] = 1.0 / std::pow(static_cast<double>(k + 1), w.zipf_s);

  std::vector<TxnPlan> out;
  for (std::size_t i = 0; i < w.txn_count; ++i) {
    TxnPlan plan;
    plan.id = TxnId{static_cast<std::uint32_t>(i + 1)};
    plan.coord = coords[std::uniform_int_distribution<std::size_t>(0, coords.size() - 1)(rng)];
    plan.start = std::uniform_int_distribution<Tick>(0, w.arrival_window)(rng);
    const bool read_only = std::bernoulli_distribution(w.read_only_fraction)(rng);

    std::vector<double> left = weights;
    std::vector<std::uint32_t> objects;
    for (std::size_t k = 0; k < w.ops_per_txn; ++k) {
      std::discrete_distribution<std::uint32_t> pick(left.begin(), left.end());
      const std::uint32_t x = pick(rng);
      left[x] = 0;
      objects.push_back(x);
    }
    std::vector<bool> write(objects.size(), false);
    if (!read_only) {
      bool any = false;
      for (std::size_t k = 0; k < objects.size(); ++k) {
        write[k] = std::bernoulli_distribution(w.write_probability)(rng);
        any = any || write[k];
      }
      if (!any) write[std::uniform_int_distribution<std::size_t>(0, objects.size() - 1)(rng)] = true;
    }
    for (std::size_t k = 0; k < objects.size(); ++k) {
      plan.ops.push_back(PlannedOp{OpKind::kRead, objects[k], 0});
      if (write[k]) plan.ops.push_back(PlannedOp{OpKind::kWrite, objects[k], static_cast<std::int64_t>(plan.id.value)});
    }
    out.push_back(std::move(plan));
  }
  return out;
}

std::vector<ProcessId> allowed_processes(const Topology& topo, const TxnPlan& plan) {
  std::vector<std::uint32_t> objects;
  for (const PlannedOp& op : plan.ops) objects.push_back(op.object);
  std::vector<ProcessId> out = topo.replicas_of(objects);
  if (std::find(out.begin(), out.end(), plan.coord) == out.end()) out.push_back(plan.coord);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct Event {
  Tick tick = 0;
  std::uint64_t seq = 0;
  ProcessId from = 0;
  ProcessId to = 0;
  TxnId txn;
  std::optional<Message> msg;  // empty: the client starts txn at `to`
};

struct Later {
  bool operator()(const Event& a, const Event& b) const { return std::tie(a.tick, a.seq) > std::tie(b.tick, b.seq); }
};

class Engine final : public Environment {
 public:
  explicit Engine(const SimConfig& cfg) {
    cfg.validate();
    trace_.config = cfg;
    const Topology& topo = trace_.config.topology;
    const std::size_t n = topo.processes;
    trace_.deliveries.resize(n);
    trace_.decisions.resize(n);
    trace_.undecided.resize(n);
    trace_.crashed.assign(n, false);
    for (ProcessId p = 0; p < n; ++p)
      replicas_.push_back(std::make_unique<Replica>(p, &topo, trace_.config.mode, this));
    for (const Fault& f : trace_.config.faults) {
      auto [it, fresh] = crash_at_.emplace(f.process, f.tick);
      if (!fresh) it->second = std::min(it->second, f.tick);
    }
  }

  RunTrace run() {
    auto plans = generate_workload(trace_.config);
    trace_.txns.resize(plans.size() + 1);
    for (const TxnPlan& p : plans) {
      if (p.id.value == 0 || p.id.value > plans.size() || !trace_.txns[p.id.value].plan.ops.empty())
        throw ConfigError("transaction ids must be 1..n without repeats");
      trace_.txns[p.id.value].plan = p;
      push(Event{p.start, 0, p.coord, p.coord, p.id, std::nullopt});
    }
    constexpr std::size_t kMaxEvents = 50'000'000;
    std::size_t handled = 0;
    while (!queue_.empty()) {
      Event e = queue_.top();
      queue_.pop();
      now_ = e.tick;
      if (++handled > kMaxEvents) throw Error("simulation exceeded its event budget");
      if (is_crashed(e.to)) {
        if (!trace_.crashed[e.to]) {
          trace_.crashed[e.to] = true;
          log("tick=" + std::to_string(now_) + " proc=" + std::to_string(e.to) + " event=crash");
        }
        continue;
      }
      ++trace_.txns[e.txn.value].steps[e.to];
      Replica& r = *replicas_[e.to];
      if (!e.msg) {
        log("tick=" + std::to_string(now_) + " proc=" + std::to_string(e.to) + " event=begin txn=" +
            std::to_string(e.txn.value));
        r.start(trace_.txns[e.txn.value].plan);
      } else {
        r.receive(e.from, *e.msg);
      }
    }
    trace_.end_tick = now_;
    for (ProcessId p = 0; p < replicas_.size(); ++p) {
      if (is_crashed(p)) trace_.crashed[p] = true;
      trace_.deliveries[p] = replicas_[p]->delivered();
      trace_.undecided[p] = replicas_[p]->undecided_queue();
      trace_.parked_reads += trace_.crashed[p] ? 0 : replicas_[p]->parked_reads();
    }
    return std::move(trace_);
  }

  void send(ProcessId from, ProcessId to, TxnId txn, Message m) override {
    const bool mcast = std::holds_alternative<McastPacket>(m);
    const bool local = from == to && !mcast;
    TxnTrace& t = trace_.txns.at(txn.value);
    if (!local) {
      ++t.messages;
      if (is_termination(m)) ++t.termination_messages;
    }
    log("tick=" + std::to_string(now_) + " from=" + std::to_string(from) + " to=" + std::to_string(to) +
        " type=" + std::string(message_type(m)) + " msg=" + std::to_string(txn.value));
    push(Event{now_ + (local ? 0 : trace_.config.delta), 0, from, to, txn, std::move(m)});
  }

  std::uint64_t next_step() override { return ++step_; }

  void observe_op(ProcessId, const ObservedOp& op) override {
    TxnTrace& t = trace_.txns.at(op.txn.value);
    if (op.kind == OpKind::kCommit) {
      t.submit_step = op.first_step;
      log("tick=" + std::to_string(now_) + " proc=" + std::to_string(t.plan.coord) + " event=submit txn=" +
          std::to_string(op.txn.value));
    } else {
      t.ops.push_back(op);
    }
  }

  void observe_decision(ProcessId p, TxnId txn, bool committed, std::uint64_t step) override {
    TxnTrace& t = trace_.txns.at(txn.value);
    trace_.decisions[p][txn] = committed;
    if (!t.first_decide_step) {
      t.first_decide_step = step;
      t.committed = committed;
    }
    if (p == t.plan.coord) t.decide_tick = now_;
    t.last_decide_tick = now_;
    log("tick=" + std::to_string(now_) + " proc=" + std::to_string(p) + " event=" + (committed ? "commit" : "abort") +
        " txn=" + std::to_string(txn.value));
  }

 private:
  void push(Event e) {
    e.seq = seq_++;
    queue_.push(std::move(e));
  }
  bool is_crashed(ProcessId p) const {
    auto it = crash_at_.find(p);
    return it != crash_at_.end() && now_ >= it->second;
  }
  void log(std::string line) { trace_.log.push_back(std::move(line)); }

  RunTrace trace_;
  std::vector<std::unique_ptr<Replica>> replicas_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::map<ProcessId, Tick> crash_at_;
  Tick now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t step_ = 0;
};

}  // namespace

RunTrace run(const SimConfig& cfg) { return Engine(cfg).run(); }

std::string render_trace(const RunTrace& trace) {
  std::string out;
  for (const std::string& line : trace.log) {
    out += line;
    out += '\n';
  }
  return out;
}

History extract_history(const RunTrace& trace) {
  const Topology& topo = trace.config.topology;
  HistoryBuilder b;
  struct Span {
    std::size_t op;
    std::uint64_t first;
    std::uint64_t last;
  };
  std::vector<Span> spans;
  for (std::size_t i = 1; i < trace.txns.size(); ++i) {
    const TxnTrace& t = trace.txns[i];
    if (t.ops.empty() && !t.submit_step) continue;
    const TxnId id = b.txn(std::to_string(i));
    std::vector<std::size_t> program;
    for (const ObservedOp& op : t.ops) {
      const ObjectId x = b.object(topo.objects.at(op.object));
      std::size_t index = 0;
      if (op.kind == OpKind::kRead) {
        const TxnId version = op.read_version.is_initial() ? TxnId::initial() : b.txn(std::to_string(op.read_version.value));
        index = b.read(id, x, version);
      } else {
        index = b.write(id, x);
      }
      spans.push_back(Span{index, op.first_step, op.last_step});
      program.push_back(index);
    }
    if (t.committed && t.submit_step) {
      const std::size_t index = *t.committed ? b.commit(id) : b.abort(id);
      spans.push_back(Span{index, *t.submit_step, *t.first_decide_step});
      program.push_back(index);
    }
    for (std::size_t k = 1; k < program.size(); ++k) b.edge(program[k - 1], program[k]);
  }
  for (const Span& a : spans)
    for (const Span& c : spans)
      if (a.last < c.first) b.edge(a.op, c.op);
  return std::move(b).build();
}

std::vector<std::string> check_run(const RunTrace& trace) {
  std::vector<std::string> problems;
  const Topology& topo = trace.config.topology;

  // Delivery orders: the union of local orders must be acyclic.
  const std::size_t n = trace.txns.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t p = 0; p < trace.deliveries.size(); ++p) {
    const auto& d = trace.deliveries[p];
    std::set<std::uint64_t> seen;
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (!seen.insert(d[k]).second)
        problems.push_back("process " + std::to_string(p) + " delivered txn " + std::to_string(d[k]) + " twice");
      if (k > 0) succ[d[k - 1]].push_back(d[k]);
    }
  }
  if (auto cycle = find_cycle(succ); !cycle.empty()) {
    std::string text;
    for (std::size_t t : cycle) text += " " + std::to_string(t);
    problems.push_back("delivery orders form a cycle:" + text);
  }

  for (std::size_t i = 1; i < n; ++i) {
    const TxnTrace& t = trace.txns[i];
    const bool read_only = std::none_of(t.plan.ops.begin(), t.plan.ops.end(),
                                        [](const PlannedOp& op) { return op.kind == OpKind::kWrite; });
    // Agreement over wreplicas and the coordinator.
    std::vector<std::uint32_t> ws;
    for (const PlannedOp& op : t.plan.ops)
      if (op.kind == OpKind::kWrite) ws.push_back(op.object);
    std::vector<ProcessId> parties = topo.replicas_of(ws);
    parties.push_back(t.plan.coord);
    std::optional<bool> outcome;
    for (ProcessId p : parties) {
      if (trace.crashed[p]) continue;
      auto it = trace.decisions[p].find(TxnId{static_cast<std::uint32_t>(i)});
      if (it == trace.decisions[p].end()) {
        problems.push_back("txn " + std::to_string(i) + " undecided at process " + std::to_string(p));
        continue;
      }
      if (outcome && *outcome != it->second)
        problems.push_back("txn " + std::to_string(i) + " decided both ways");
      outcome = it->second;
    }
    if (read_only && t.termination_messages)
      problems.push_back("read-only txn " + std::to_string(i) + " sent termination messages");

    const auto allowed = allowed_processes(topo, t.plan);
    for (auto [p, steps] : t.steps)
      if (steps && !std::binary_search(allowed.begin(), allowed.end(), p))
        problems.push_back("process " + std::to_string(p) + " took steps for txn " + std::to_string(i));
  }
  for (std::size_t p = 0; p < trace.undecided.size(); ++p)
    if (!trace.crashed[p] && !trace.undecided[p].empty())
      problems.push_back("process " + std::to_string(p) + " is stuck with " +
                         std::to_string(trace.undecided[p].size()) + " undecided deliveries");
  return problems;
}

}  // namespace jessy
