#include "jessy/protocol.hpp"

#include <algorithm>

#include "jessy/error.hpp"

namespace jessy {

// ---------------------------------------------------------------------------
// Topology

void Topology::validate(VectorMode mode) const {
  if (objects.empty()) throw ConfigError("no objects configured");
  if (placement.size() != objects.size()) throw ConfigError("every object needs a group");
  for (const Group& g : directory.groups())
    for (ProcessId p : g.members)
      if (p >= processes)
        throw ConfigError("group " + std::to_string(g.id) + " names process " + std::to_string(p) +
                          " but only " + std::to_string(processes) + " processes exist");
  for (std::size_t x = 0; x < placement.size(); ++x) directory.group(placement[x]);
  if (partition.object_count() != objects.size()) throw ConfigError("partition does not cover every object");
  if (mode == VectorMode::kPdv) {
    std::map<std::uint32_t, GroupId> home;
    for (std::uint32_t x = 0; x < objects.size(); ++x) {
      auto [it, fresh] = home.emplace(partition.class_of(x), placement[x]);
      if (!fresh && it->second != placement[x])
        throw ConfigError("partition class of '" + objects[x] +
                          "' spans several groups; its writes would not be serialized");
    }
  }
}

bool Topology::replicates(ProcessId p, std::uint32_t object) const {
  const auto& r = replicas(object);
  return std::find(r.begin(), r.end(), p) != r.end();
}

std::vector<GroupId> Topology::groups_of(const std::vector<std::uint32_t>& objs) const {
  std::vector<GroupId> out;
  for (auto x : objs) out.push_back(placement.at(x));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ProcessId> Topology::replicas_of(const std::vector<std::uint32_t>& objs) const {
  std::vector<ProcessId> out;
  for (GroupId g : groups_of(objs))
    for (ProcessId p : directory.group(g).members) out.push_back(p);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Small helpers

const ReadEntry* TxnRecord::read_of(std::uint32_t object) const {
  for (const ReadEntry& e : reads)
    if (e.object == object) return &e;
  return nullptr;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kExecuting: return "executing";
    case Phase::kSubmitted: return "submitted";
    case Phase::kCommitted: return "committed";
    case Phase::kAborted: return "aborted";
  }
  return "?";
}

std::string_view to_string(VoteOutcome v) {
  switch (v) {
    case VoteOutcome::kUnknown: return "unknown";
    case VoteOutcome::kTrue: return "true";
    case VoteOutcome::kFalse: return "false";
  }
  return "?";
}

std::string_view message_type(const Message& m) {
  struct {
    std::string_view operator()(const ReadRequest&) const { return "READ"; }
    std::string_view operator()(const ReadReply&) const { return "REPLY"; }
    std::string_view operator()(const Vote&) const { return "VOTE"; }
    std::string_view operator()(const McastPacket& p) const { return to_string(p.stage); }
  } visitor;
  return std::visit(visitor, m);
}

bool is_termination(const Message& m) {
  return std::holds_alternative<Vote>(m) || std::holds_alternative<McastPacket>(m);
}

VoteOutcome vote_outcome(const Topology& topo, const TxnRecord& t, const std::map<ProcessId, bool>& votes) {
  if (t.write_set.empty()) return VoteOutcome::kTrue;
  // A quorum takes one replica per certified object, so "every quorum has an
  // unheard member" means some object has no heard replica at all, and an
  // all-true quorum exists iff every object has a replica that voted true.
  bool all_true = true;
  for (std::uint32_t x : t.write_set) {
    bool heard = false;
    bool yes = false;
    for (ProcessId p : topo.replicas(x)) {
      auto it = votes.find(p);
      if (it == votes.end()) continue;
      heard = true;
      yes = yes || it->second;
    }
    if (!heard) return VoteOutcome::kUnknown;
    all_true = all_true && yes;
  }
  return all_true ? VoteOutcome::kTrue : VoteOutcome::kFalse;
}

// ---------------------------------------------------------------------------
// Replica

Replica::Replica(ProcessId self, const Topology* topo, VectorMode mode, Environment* env)
    : self_(self),
      topo_(topo),
      mode_(mode),
      env_(env),
      amcast_(self, &topo->directory, [this](ProcessId to, McastPacket p) {
        const TxnId txn{static_cast<std::uint32_t>(p.msg)};
        env_->send(self_, to, txn, Message{std::move(p)});
      }) {
  for (std::uint32_t x = 0; x < topo->objects.size(); ++x)
    if (topo->replicates(self, x)) db_[x].push_back(VersionInfo{});
}

std::optional<Phase> Replica::phase(TxnId t) const {
  if (auto it = clients_.find(t); it != clients_.end()) return it->second.phase;
  if (std::find(committed_order_.begin(), committed_order_.end(), t) != committed_order_.end())
    return Phase::kCommitted;
  if (aborted_.count(t)) return Phase::kAborted;
  for (const Queued& q : queue_)
    if (q.rec->id == t) return Phase::kSubmitted;
  return std::nullopt;
}

const std::vector<VersionInfo>& Replica::versions(std::uint32_t object) const {
  auto it = db_.find(object);
  if (it == db_.end()) throw ConfigError("object " + topo_->objects.at(object) + " is not replicated here");
  return it->second;
}

std::vector<TxnId> Replica::undecided_queue() const {
  std::vector<TxnId> out;
  for (const Queued& q : queue_)
    if (!q.decided) out.push_back(q.rec->id);
  return out;
}

void Replica::start(const TxnPlan& plan) {
  Client c;
  c.plan = plan;
  c.rec.id = plan.id;
  c.rec.coord = self_;
  auto [it, fresh] = clients_.emplace(plan.id, std::move(c));
  if (!fresh) throw ConfigError("transaction " + std::to_string(plan.id.value) + " started twice");
  advance(it->second);
}

void Replica::advance(Client& c) {
  while (c.next < c.plan.ops.size()) {
    const PlannedOp& op = c.plan.ops[c.next];
    if (op.kind == OpKind::kWrite) {
      if (!c.rec.read_of(op.object))
        throw ModelError("transaction " + std::to_string(c.rec.id.value) + " writes " +
                         topo_->objects[op.object] + " without reading it first");
      if (std::find(c.rec.write_set.begin(), c.rec.write_set.end(), op.object) != c.rec.write_set.end())
        throw ModelError("transaction " + std::to_string(c.rec.id.value) + " writes " +
                         topo_->objects[op.object] + " twice");
      c.rec.write_set.push_back(op.object);
      c.rec.updates.emplace_back(op.object, op.value);
      const std::uint64_t s = env_->next_step();
      env_->observe_op(self_, ObservedOp{c.rec.id, OpKind::kWrite, op.object, TxnId{}, s, s});
      ++c.next;
      continue;
    }
    if (std::any_of(c.rec.updates.begin(), c.rec.updates.end(), [&](auto& u) { return u.first == op.object; })) {
      // Read of an own write: served from the buffer, not a history operation.
      ++c.next;
      continue;
    }
    if (c.rec.read_of(op.object))
      throw ModelError("transaction " + std::to_string(c.rec.id.value) + " reads " + topo_->objects[op.object] +
                       " twice");
    c.awaiting = op.object;
    auto snapshot = std::make_shared<const std::vector<ReadEntry>>(c.rec.reads);
    for (ProcessId p : topo_->replicas(op.object))
      env_->send(self_, p, c.rec.id, Message{ReadRequest{c.rec.id, op.object, snapshot}});
    return;
  }
  submit(c);
}

void Replica::submit(Client& c) {
  c.phase = Phase::kSubmitted;
  env_->observe_op(self_, ObservedOp{c.rec.id, OpKind::kCommit, 0, TxnId{}, env_->next_step(), 0});
  if (c.rec.read_only()) {
    // Certified set is empty: VoteOutcome is true without any message.
    finish_client(c.rec.id, true, env_->next_step());
    return;
  }
  if (mode_ == VectorMode::kDv) {
    DependenceVector v;
    for (const ReadEntry& e : c.rec.reads) v.merge(e.version.dv);
    for (std::uint32_t x : c.rec.write_set) v.increment(x);
    c.rec.dv = std::move(v);
  }
  auto rec = std::make_shared<const TxnRecord>(c.rec);
  amcast_.amcast(c.rec.id.value, topo_->groups_of(c.rec.write_set), rec);
}

void Replica::finish_client(TxnId t, bool commit, std::uint64_t step) {
  auto it = clients_.find(t);
  if (it == clients_.end() || (it->second.phase != Phase::kSubmitted)) return;
  it->second.phase = commit ? Phase::kCommitted : Phase::kAborted;
  if (!is_wreplica(it->second.rec)) env_->observe_decision(self_, t, commit, step);
}

void Replica::receive(ProcessId from, const Message& m) {
  if (auto* r = std::get_if<ReadRequest>(&m)) return on_read_request(from, *r);
  if (auto* r = std::get_if<ReadReply>(&m)) return on_read_reply(*r);
  if (auto* v = std::get_if<Vote>(&m)) return on_vote(from, *v);
  amcast_.receive(std::get<McastPacket>(m));
  while (auto d = amcast_.deliver_next()) on_deliver(d->payload);
}

// ----- execution protocol --------------------------------------------------

bool Replica::compatible_with(std::uint32_t x, const VersionInfo& cand, const std::vector<ReadEntry>& read_set) const {
  for (const ReadEntry& e : read_set) {
    const std::uint32_t y = e.object;
    if (y == x) continue;
    if (mode_ == VectorMode::kDv) {
      if (!compatible(x, cand.dv, y, e.version.dv)) return false;
      continue;
    }
    const auto& p = topo_->partition;
    if (e.version.pdv[p.class_of(x)] > cand.class_top || cand.pdv[p.class_of(y)] > e.version.class_top) return false;
  }
  return true;
}

bool Replica::try_serve(ProcessId from, const ReadRequest& r) {
  const auto& vs = versions(r.object);
  for (std::size_t i = vs.size(); i-- > 0;) {
    VersionInfo cand = vs[i];
    if (mode_ == VectorMode::kPdv) {
      const std::uint32_t c = topo_->partition.class_of(r.object);
      if (i + 1 < vs.size()) {
        cand.class_top = vs[i + 1].pdv[c] - 1;
      } else {
        auto latest = class_latest_.find(c);
        cand.class_top = latest == class_latest_.end() ? cand.pdv[c] : latest->second[c];
      }
    }
    if (!compatible_with(r.object, cand, *r.read_set)) continue;
    env_->send(self_, from, r.txn, Message{ReadReply{r.txn, r.object, std::move(cand), env_->next_step()}});
    return true;
  }
  return false;
}

void Replica::on_read_request(ProcessId from, const ReadRequest& r) {
  if (!topo_->replicates(self_, r.object))
    throw ModelError("read request for " + topo_->objects[r.object] + " reached a non-replica");
  if (!try_serve(from, r)) parked_.push_back(Parked{from, r});
}

void Replica::on_read_reply(const ReadReply& r) {
  auto it = clients_.find(r.txn);
  if (it == clients_.end()) return;
  Client& c = it->second;
  if (c.awaiting != r.object) return;  // a slower replica answered an earlier read
  c.awaiting.reset();
  c.rec.reads.push_back(ReadEntry{r.object, r.version});
  env_->observe_op(self_, ObservedOp{r.txn, OpKind::kRead, r.object, r.version.writer, r.step, env_->next_step()});
  ++c.next;
  advance(c);
}

// ----- termination protocol ------------------------------------------------

bool Replica::is_wreplica(const TxnRecord& t) const {
  return std::any_of(t.write_set.begin(), t.write_set.end(), [&](std::uint32_t x) { return db_.count(x) > 0; });
}

bool Replica::certify(const TxnRecord& t) const {
  if (mode_ == VectorMode::kPdv) {
    // Partitioned vectors over-approximate dependency, so check directly that
    // every local object written was read at its latest committed version.
    for (std::uint32_t x : t.write_set) {
      auto it = db_.find(x);
      if (it == db_.end()) continue;
      const ReadEntry* r = t.read_of(x);
      if (!r || r->version.writer != it->second.back().writer) return false;
    }
    return true;
  }
  // Committed writers of x form a chain numbered by their x entry, so t
  // depends on c exactly when something t read has caught up with c on x.
  for (const auto& c : committed_records_) {
    for (std::uint32_t x : t.write_set) {
      if (std::find(c->write_set.begin(), c->write_set.end(), x) == c->write_set.end()) continue;
      std::uint64_t seen = 0;
      for (const ReadEntry& r : t.reads) seen = std::max<std::uint64_t>(seen, r.version.dv[x]);
      if (seen < c->dv[x]) return false;
    }
  }
  return true;
}

PartitionedDependenceVector Replica::vote_vector(const TxnRecord& t) const {
  PartitionedDependenceVector v;
  if (mode_ != VectorMode::kPdv) return v;
  for (std::uint32_t x : t.write_set) {
    if (!db_.count(x)) continue;
    auto it = class_latest_.find(topo_->partition.class_of(x));
    if (it != class_latest_.end()) v.merge(it->second);
  }
  return v;
}

void Replica::on_deliver(std::shared_ptr<const TxnRecord> rec) {
  queue_.push_back(Queued{std::move(rec)});
  progress_queue();
}

void Replica::progress_queue() {
  for (;;) {
    auto it = std::find_if(queue_.begin(), queue_.end(), [](const Queued& q) { return !q.decided; });
    if (it == queue_.end()) return;
    if (!it->voted) {
      it->voted = true;
      const TxnRecord& t = *it->rec;
      Vote v{t.id, certify(t), vote_vector(t)};
      std::vector<ProcessId> to = topo_->replicas_of(t.write_set);
      if (std::find(to.begin(), to.end(), t.coord) == to.end()) to.push_back(t.coord);
      for (ProcessId q : to) env_->send(self_, q, t.id, Message{v});
    }
    if (!try_decide(it->rec->id)) return;
  }
}

void Replica::on_vote(ProcessId from, const Vote& v) {
  if (decided_.count(v.txn)) return;
  votes_[v.txn][from] = Heard{v.ok, v.pdv};
  auto head = std::find_if(queue_.begin(), queue_.end(), [](const Queued& q) { return !q.decided; });
  if (head != queue_.end() && head->rec->id == v.txn) {
    progress_queue();
    return;
  }
  // A coordinator outside the write groups decides on votes alone.
  auto c = clients_.find(v.txn);
  if (c != clients_.end() && !is_wreplica(c->second.rec)) try_decide(v.txn);
}

bool Replica::try_decide(TxnId t) {
  if (decided_.count(t)) return true;
  const TxnRecord* rec = nullptr;
  Queued* queued = nullptr;
  for (Queued& q : queue_)
    if (q.rec->id == t) {
      rec = q.rec.get();
      queued = &q;
    }
  if (!rec) {
    auto c = clients_.find(t);
    if (c == clients_.end() || is_wreplica(c->second.rec)) return false;
    rec = &c->second.rec;
  }
  std::map<ProcessId, bool> heard;
  for (auto& [p, h] : votes_[t]) heard[p] = h.ok;
  const VoteOutcome outcome = vote_outcome(*topo_, *rec, heard);
  if (outcome == VoteOutcome::kUnknown) return false;
  const bool commit = outcome == VoteOutcome::kTrue;
  decided_.insert(t);
  if (queued) {
    apply(*rec, commit);
    queued->decided = true;
  }
  const std::uint64_t step = env_->next_step();
  if (queued) env_->observe_decision(self_, t, commit, step);
  finish_client(t, commit, step);
  votes_.erase(t);
  if (queued && commit && !parked_.empty()) {
    std::vector<Parked> waiting;
    waiting.swap(parked_);
    for (Parked& p : waiting)
      if (!try_serve(p.from, p.req)) parked_.push_back(std::move(p));
  }
  return true;
}

void Replica::apply(const TxnRecord& t, bool commit) {
  if (!commit) {
    aborted_.insert(t.id);
    return;
  }
  ++commit_counter_;
  PartitionedDependenceVector pdv;
  if (mode_ == VectorMode::kPdv) {
    for (const ReadEntry& e : t.reads) pdv.merge(e.version.pdv);
    for (auto& [p, h] : votes_[t.id])
      if (h.ok) pdv.merge(h.pdv);
    std::set<std::uint32_t> classes;
    for (std::uint32_t x : t.write_set) classes.insert(topo_->partition.class_of(x));
    for (std::uint32_t c : classes) pdv.increment(c);
  }
  for (auto [x, value] : t.updates) {
    auto it = db_.find(x);
    if (it == db_.end()) continue;
    it->second.push_back(VersionInfo{t.id, value, t.dv, pdv, commit_counter_});
    if (mode_ == VectorMode::kPdv) class_latest_[topo_->partition.class_of(x)] = pdv;
  }
  for (const Queued& q : queue_)
    if (q.rec->id == t.id) committed_records_.push_back(q.rec);
  committed_order_.push_back(t.id);
}

}  // namespace jessy
