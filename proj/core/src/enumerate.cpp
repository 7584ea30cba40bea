#include "jessy/enumerate.hpp"

#include <string>

#include "jessy/error.hpp"

namespace jessy {

namespace {

constexpr int kMaxTxns = 9;
constexpr int kMaxObjects = 4;

struct Step {
  OpKind kind;
  int txn;
  int object;
  int version;
};

class Enumerator {
 public:
  Enumerator(const EnumerationBounds& b, const std::function<void(const History&)>& visit) : b_(b), visit_(visit) {}

  std::size_t run() {
    dfs();
    return count_;
  }

 private:
  void emit() {
    if (++count_ > b_.budget)
      throw BudgetError("enumeration exceeds the budget of " + std::to_string(b_.budget) + " histories");
    static constexpr const char* kNames[] = {"x", "y", "z", "u"};
    HistoryBuilder hb;
    std::vector<TxnId> ids(kMaxTxns + 1, TxnId::initial());
    std::vector<ObjectId> objs;
    for (int x = 0; x < objects_; ++x) objs.push_back(hb.object(kNames[x]));
    for (int t = 1; t <= started_; ++t) ids[t] = hb.txn(std::to_string(t));
    for (const Step& s : steps_) {
      switch (s.kind) {
        case OpKind::kRead: hb.read(ids[s.txn], objs[s.object], ids[s.version]); break;
        case OpKind::kWrite: hb.write(ids[s.txn], objs[s.object]); break;
        case OpKind::kCommit: hb.commit(ids[s.txn]); break;
        case OpKind::kAbort: hb.abort(ids[s.txn]); break;
      }
    }
    hb.chain_all();
    visit_(std::move(hb).build());
  }

  void push(const Step& s) {
    steps_.push_back(s);
    dfs();
    steps_.pop_back();
  }

  void dfs() {
    if (running_ == 0) emit();
    const int used = static_cast<int>(steps_.size());
    if (used >= b_.max_ops) return;
    const int remaining = b_.max_ops - used;
    // Every running transaction still needs its terminator.
    if (remaining <= running_) {
      if (remaining == running_) terminate_only();
      return;
    }
    for (int t = 1; t <= started_ + 1 && t <= b_.max_txns; ++t) {
      const bool fresh = t == started_ + 1;
      if (!fresh && done_[t]) continue;
      // A new transaction needs room for a read and a terminator.
      if (fresh && remaining < running_ + 2) continue;
      if (fresh) {
        ++started_;
        ++running_;
      }
      for (int x = 0; x < objects_ + 1 && x < b_.max_objects; ++x) {
        const bool new_object = x == objects_;
        if (read_[t][x]) continue;
        if (new_object) ++objects_;
        read_[t][x] = true;
        push({OpKind::kRead, t, x, 0});
        for (int w : writers_[x])
          if (w != t) push({OpKind::kRead, t, x, w});
        read_[t][x] = false;
        if (new_object) --objects_;
      }
      if (!fresh) {
        for (int x = 0; x < objects_; ++x) {
          if (!read_[t][x] || wrote_[t][x]) continue;
          wrote_[t][x] = true;
          writers_[x].push_back(t);
          push({OpKind::kWrite, t, x, 0});
          writers_[x].pop_back();
          wrote_[t][x] = false;
        }
        terminate(t);
      }
      if (fresh) {
        --started_;
        --running_;
      }
    }
  }

  void terminate(int t) {
    done_[t] = true;
    --running_;
    push({OpKind::kCommit, t, 0, 0});
    push({OpKind::kAbort, t, 0, 0});
    ++running_;
    done_[t] = false;
  }

  void terminate_only() {
    for (int t = 1; t <= started_; ++t)
      if (!done_[t]) terminate(t);
  }

  const EnumerationBounds& b_;
  const std::function<void(const History&)>& visit_;
  std::size_t count_ = 0;
  int started_ = 0;
  int running_ = 0;
  int objects_ = 0;
  bool done_[kMaxTxns + 1] = {};
  bool read_[kMaxTxns + 1][kMaxObjects] = {};
  bool wrote_[kMaxTxns + 1][kMaxObjects] = {};
  std::vector<int> writers_[kMaxObjects];
  std::vector<Step> steps_;
};

}  // namespace

std::size_t enumerate_histories(const EnumerationBounds& bounds, const std::function<void(const History&)>& visit) {
  if (bounds.max_txns < 0 || bounds.max_objects < 0 || bounds.max_ops < 0)
    throw BudgetError("enumeration bounds must be non-negative");
  if (bounds.max_txns > kMaxTxns || bounds.max_objects > kMaxObjects)
    throw BudgetError("enumeration supports at most " + std::to_string(kMaxTxns) + " transactions and " +
                      std::to_string(kMaxObjects) + " objects");
  return Enumerator(bounds, visit).run();
}

std::vector<History> enumerate_histories(const EnumerationBounds& bounds) {
  std::vector<History> out;
  enumerate_histories(bounds, [&out](const History& h) { out.push_back(h); });
  return out;
}

}  // namespace jessy
