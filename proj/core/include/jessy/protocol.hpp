#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "jessy/amcast.hpp"
#include "jessy/depvec.hpp"
#include "jessy/history.hpp"
#include "jessy/net.hpp"

namespace jessy {

enum class VectorMode : std::uint8_t { kDv, kPdv };

/// Processes, groups and object placement. Objects are numbered 0..n-1.
struct Topology {
  std::size_t processes = 0;
  Directory directory;
  std::vector<std::string> objects;
  std::vector<GroupId> placement;
  /// Classes for partitioned vectors; singletons unless configured.
  Partition partition;

  /// Checks placement, group membership and, in pdv mode, that every class
  /// lives inside one group. Throws ConfigError.
  void validate(VectorMode mode) const;

  const std::vector<ProcessId>& replicas(std::uint32_t object) const {
    return directory.group(placement.at(object)).members;
  }
  bool replicates(ProcessId p, std::uint32_t object) const;
  std::vector<GroupId> groups_of(const std::vector<std::uint32_t>& objects) const;
  std::vector<ProcessId> replicas_of(const std::vector<std::uint32_t>& objects) const;
};

/// A committed version as stored in a replica's db. commit_index counts the
/// commits applied by the replica's group (0 for the initial version).
struct VersionInfo {
  TxnId writer;
  std::int64_t value = 0;
  DependenceVector dv;
  PartitionedDependenceVector pdv;
  std::uint64_t commit_index = 0;
  /// Set on read replies in pdv mode: the last class position at which this
  /// version was still the latest one known to the serving replica.
  std::uint64_t class_top = 0;
};

struct ReadEntry {
  std::uint32_t object = 0;
  VersionInfo version;
};

struct TxnRecord {
  TxnId id;
  ProcessId coord = 0;
  std::vector<ReadEntry> reads;
  std::vector<std::uint32_t> write_set;
  std::vector<std::pair<std::uint32_t, std::int64_t>> updates;
  /// Vector of the transaction's writes in dv mode.
  DependenceVector dv;

  bool read_only() const { return write_set.empty(); }
  const ReadEntry* read_of(std::uint32_t object) const;
};

enum class Phase : std::uint8_t { kExecuting, kSubmitted, kCommitted, kAborted };
enum class VoteOutcome : std::uint8_t { kUnknown, kTrue, kFalse };

std::string_view to_string(Phase p);
std::string_view to_string(VoteOutcome v);

struct PlannedOp {
  OpKind kind = OpKind::kRead;  // kRead or kWrite
  std::uint32_t object = 0;
  std::int64_t value = 0;
};

struct TxnPlan {
  TxnId id;
  ProcessId coord = 0;
  Tick start = 0;
  std::vector<PlannedOp> ops;
};

struct ReadRequest {
  TxnId txn;
  std::uint32_t object = 0;
  std::shared_ptr<const std::vector<ReadEntry>> read_set;
};

struct ReadReply {
  TxnId txn;
  std::uint32_t object = 0;
  VersionInfo version;
  std::uint64_t step = 0;
};

struct Vote {
  TxnId txn;
  bool ok = false;
  /// Latest class vectors at the voter for the classes it replicates.
  PartitionedDependenceVector pdv;
};

using McastPacket = AmcastPacket<TxnRecord>;
using Message = std::variant<ReadRequest, ReadReply, Vote, McastPacket>;

std::string_view message_type(const Message& m);
/// True for messages of the termination protocol (multicast and votes).
bool is_termination(const Message& m);

/// A client-visible operation as observed at the coordinator.
struct ObservedOp {
  TxnId txn;
  OpKind kind = OpKind::kRead;
  std::uint32_t object = 0;
  TxnId read_version;
  std::uint64_t first_step = 0;
  std::uint64_t last_step = 0;
};

/// Services the simulator provides to a replica.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual void send(ProcessId from, ProcessId to, TxnId txn, Message m) = 0;
  /// Fresh value of the global action counter.
  virtual std::uint64_t next_step() = 0;
  /// Reads, writes and submissions (kind kCommit, first_step only).
  virtual void observe_op(ProcessId coord, const ObservedOp& op) = 0;
  virtual void observe_decision(ProcessId p, TxnId txn, bool committed, std::uint64_t step) = 0;
};

/// VoteOutcome over the certified set ws(T), given the votes heard so far.
VoteOutcome vote_outcome(const Topology& topo, const TxnRecord& t, const std::map<ProcessId, bool>& votes);

/// One process running the execution and termination protocols.
class Replica {
 public:
  Replica(ProcessId self, const Topology* topo, VectorMode mode, Environment* env);

  ProcessId id() const { return self_; }

  /// Starts coordinating a transaction.
  void start(const TxnPlan& plan);
  void receive(ProcessId from, const Message& m);

  /// Certification against the transactions committed here.
  bool certify(const TxnRecord& t) const;

  std::optional<Phase> phase(TxnId t) const;
  const std::vector<VersionInfo>& versions(std::uint32_t object) const;
  const std::vector<TxnId>& committed() const { return committed_order_; }
  const std::set<TxnId>& aborted() const { return aborted_; }
  const std::vector<std::uint64_t>& delivered() const { return amcast_.delivered(); }
  /// Delivered transactions still waiting for a decision, in queue order.
  std::vector<TxnId> undecided_queue() const;
  std::size_t parked_reads() const { return parked_.size(); }

 private:
  struct Client {
    TxnPlan plan;
    std::size_t next = 0;
    TxnRecord rec;
    std::optional<std::uint32_t> awaiting;
    Phase phase = Phase::kExecuting;
  };
  struct Parked {
    ProcessId from;
    ReadRequest req;
  };
  struct Queued {
    std::shared_ptr<const TxnRecord> rec;
    bool voted = false;
    bool decided = false;
  };
  struct Heard {
    bool ok = false;
    PartitionedDependenceVector pdv;
  };

  void advance(Client& c);
  void submit(Client& c);
  void on_read_request(ProcessId from, const ReadRequest& r);
  bool try_serve(ProcessId from, const ReadRequest& r);
  void on_read_reply(const ReadReply& r);
  void on_vote(ProcessId from, const Vote& v);
  void on_deliver(std::shared_ptr<const TxnRecord> rec);
  void progress_queue();
  bool try_decide(TxnId t);
  void apply(const TxnRecord& t, bool commit);
  void finish_client(TxnId t, bool commit, std::uint64_t step);

  bool compatible_with(std::uint32_t x, const VersionInfo& cand, const std::vector<ReadEntry>& read_set) const;
  PartitionedDependenceVector vote_vector(const TxnRecord& t) const;
  bool is_wreplica(const TxnRecord& t) const;

  ProcessId self_;
  const Topology* topo_;
  VectorMode mode_;
  Environment* env_;
  AmcastEndpoint<TxnRecord> amcast_;

  std::map<std::uint32_t, std::vector<VersionInfo>> db_;
  std::map<std::uint32_t, PartitionedDependenceVector> class_latest_;
  std::uint64_t commit_counter_ = 0;
  std::vector<std::shared_ptr<const TxnRecord>> committed_records_;
  std::vector<TxnId> committed_order_;
  std::set<TxnId> aborted_;

  std::map<TxnId, Client> clients_;
  std::vector<Parked> parked_;
  std::vector<Queued> queue_;
  std::map<TxnId, std::map<ProcessId, Heard>> votes_;
  std::set<TxnId> decided_;
};

}  // namespace jessy
