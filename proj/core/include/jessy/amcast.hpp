#pragma once

#include <algorithm>
#include <compare>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "jessy/error.hpp"
#include "jessy/net.hpp"

namespace jessy {

/// Skeen timestamp; the group id breaks clock ties.
struct Timestamp {
  std::uint64_t clock = 0;
  GroupId group = 0;
  auto operator<=>(const Timestamp&) const = default;
};

enum class AmcastStage : std::uint8_t { kSubmit, kPropose, kAgree, kAck };

std::string_view to_string(AmcastStage s);

/// One hop of the multicast pipeline:
///   sender -> destination leaders        (SUBMIT)
///   leader -> destination leaders        (PROPOSE, local timestamp)
///   leader -> its members                (AGREE, final timestamp + slot)
///   member -> its members                (ACK, slot)
/// A member delivers slot s once it holds AGREE(s) and a majority of ACK(s),
/// and every earlier slot is delivered.
template <class Payload>
struct AmcastPacket {
  AmcastStage stage = AmcastStage::kSubmit;
  std::uint64_t msg = 0;
  std::vector<GroupId> dests;
  Timestamp ts;
  std::uint64_t slot = 0;
  ProcessId from = 0;
  std::shared_ptr<const Payload> payload;
};

/// Group layout shared by every endpoint.
class Directory {
 public:
  Directory() = default;
  explicit Directory(std::vector<Group> groups) : groups_(std::move(groups)) {
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      if (groups_[g].id != g) throw ConfigError("group ids must be 0..n-1 in order");
      if (groups_[g].members.empty()) throw ConfigError("group " + std::to_string(g) + " has no members");
      for (ProcessId p : groups_[g].members)
        if (!group_of_.emplace(p, static_cast<GroupId>(g)).second)
          throw ConfigError("process " + std::to_string(p) + " belongs to two groups");
    }
  }

  const std::vector<Group>& groups() const { return groups_; }
  const Group& group(GroupId g) const {
    if (g >= groups_.size()) throw ConfigError("unknown group " + std::to_string(g));
    return groups_[g];
  }
  std::optional<GroupId> group_of(ProcessId p) const {
    auto it = group_of_.find(p);
    if (it == group_of_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<Group> groups_;
  std::map<ProcessId, GroupId> group_of_;
};

/// Per-process endpoint of the genuine atomic multicast. Deterministic: every
/// handler is a function of the endpoint state and the packet.
template <class Payload>
class AmcastEndpoint {
 public:
  using Packet = AmcastPacket<Payload>;
  using Send = std::function<void(ProcessId to, Packet packet)>;

  struct Delivery {
    std::uint64_t msg = 0;
    std::vector<GroupId> dests;
    std::shared_ptr<const Payload> payload;
  };

  AmcastEndpoint(ProcessId self, const Directory* directory, Send send)
      : self_(self), dir_(directory), send_(std::move(send)), group_(directory->group_of(self)) {}

  ProcessId self() const { return self_; }

  /// Multicasts msg to the members of dests. msg ids must be unique system-wide.
  void amcast(std::uint64_t msg, std::vector<GroupId> dests, std::shared_ptr<const Payload> payload) {
    if (dests.empty()) throw ConfigError("amcast needs at least one destination group");
    std::sort(dests.begin(), dests.end());
    dests.erase(std::unique(dests.begin(), dests.end()), dests.end());
    for (GroupId g : dests) {
      Packet p;
      p.stage = AmcastStage::kSubmit;
      p.msg = msg;
      p.dests = dests;
      p.from = self_;
      p.payload = payload;
      send_(dir_->group(g).leader(), std::move(p));
    }
  }

  void receive(const Packet& p) {
    switch (p.stage) {
      case AmcastStage::kSubmit: on_submit(p); break;
      case AmcastStage::kPropose: on_propose(p); break;
      case AmcastStage::kAgree: on_agree(p); break;
      case AmcastStage::kAck: on_ack(p); break;
    }
  }

  /// Next message in this process's delivery order, at most once each.
  std::optional<Delivery> deliver_next() {
    auto it = slots_.find(next_delivery_);
    if (it == slots_.end() || !it->second.agreed || it->second.acks.size() < my_group().majority())
      return std::nullopt;
    Delivery d{it->second.msg, it->second.dests, it->second.payload};
    slots_.erase(it);
    ++next_delivery_;
    delivered_.push_back(d.msg);
    return d;
  }

  const std::vector<std::uint64_t>& delivered() const { return delivered_; }

 private:
  struct Pending {
    std::vector<GroupId> dests;
    std::shared_ptr<const Payload> payload;
    Timestamp ts;
    std::map<GroupId, Timestamp> proposals;
    bool submitted = false;
    bool final = false;
  };
  struct Slot {
    std::uint64_t msg = 0;
    std::vector<GroupId> dests;
    std::shared_ptr<const Payload> payload;
    bool agreed = false;
    std::set<ProcessId> acks;
  };

  const Group& my_group() const {
    if (!group_) throw ConfigError("process " + std::to_string(self_) + " is in no group");
    return dir_->group(*group_);
  }
  bool leader() const { return group_ && my_group().leader() == self_; }

  void on_submit(const Packet& p) {
    if (!leader()) throw ConfigError("SUBMIT reached a non-leader");
    Pending& pending = pending_[p.msg];
    if (pending.submitted) return;
    pending.submitted = true;
    pending.dests = p.dests;
    pending.payload = p.payload;
    pending.ts = Timestamp{++clock_, *group_};
    for (GroupId g : p.dests) {
      Packet out;
      out.stage = AmcastStage::kPropose;
      out.msg = p.msg;
      out.dests = p.dests;
      out.ts = pending.ts;
      out.from = self_;
      send_(dir_->group(g).leader(), std::move(out));
    }
    maybe_finalize(p.msg);
  }

  void on_propose(const Packet& p) {
    if (!leader()) throw ConfigError("PROPOSE reached a non-leader");
    pending_[p.msg].proposals[p.ts.group] = p.ts;
    maybe_finalize(p.msg);
  }

  void maybe_finalize(std::uint64_t msg) {
    Pending& pending = pending_[msg];
    if (!pending.submitted || pending.final || pending.proposals.size() < pending.dests.size()) return;
    Timestamp final_ts;
    for (auto& [g, ts] : pending.proposals) final_ts = std::max(final_ts, ts);
    pending.ts = final_ts;
    pending.final = true;
    clock_ = std::max(clock_, final_ts.clock);
    release();
  }

  // Hands out slots while the smallest pending timestamp is final; a message
  // still collecting proposals can only end up with a larger timestamp.
  void release() {
    for (;;) {
      auto best = pending_.end();
      for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        if (!it->second.submitted) continue;
        if (best == pending_.end() || std::pair(it->second.ts, it->first) < std::pair(best->second.ts, best->first))
          best = it;
      }
      if (best == pending_.end() || !best->second.final) return;
      const std::uint64_t slot = next_slot_++;
      for (ProcessId q : my_group().members) {
        Packet out;
        out.stage = AmcastStage::kAgree;
        out.msg = best->first;
        out.dests = best->second.dests;
        out.ts = best->second.ts;
        out.slot = slot;
        out.from = self_;
        out.payload = best->second.payload;
        send_(q, std::move(out));
      }
      pending_.erase(best);
    }
  }

  void on_agree(const Packet& p) {
    Slot& s = slots_[p.slot];
    s.msg = p.msg;
    s.dests = p.dests;
    s.payload = p.payload;
    s.agreed = true;
    for (ProcessId q : my_group().members) {
      Packet out;
      out.stage = AmcastStage::kAck;
      out.msg = p.msg;
      out.dests = p.dests;
      out.ts = p.ts;
      out.slot = p.slot;
      out.from = self_;
      send_(q, std::move(out));
    }
  }

  void on_ack(const Packet& p) {
    if (p.slot < next_delivery_) return;
    slots_[p.slot].acks.insert(p.from);
  }

  ProcessId self_;
  const Directory* dir_;
  Send send_;
  std::optional<GroupId> group_;

  std::uint64_t clock_ = 0;
  std::map<std::uint64_t, Pending> pending_;
  std::uint64_t next_slot_ = 0;

  std::map<std::uint64_t, Slot> slots_;
  std::uint64_t next_delivery_ = 0;
  std::vector<std::uint64_t> delivered_;
};

}  // namespace jessy
