#include "random_history.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace jessy::testing {

namespace {

struct Draft {
  OpKind kind;
  int txn;
  int object;
  int version;
};

}  // namespace

History random_history(std::mt19937_64& rng, const RandomHistoryOptions& opts) {
  const int n = opts.txns;
  const int m = opts.objects;
  std::vector<std::vector<bool>> read(n + 1, std::vector<bool>(m, false));
  std::vector<std::vector<bool>> wrote(n + 1, std::vector<bool>(m, false));
  std::vector<int> state(n + 1, 0);  // 0 running, 1 committed, 2 aborted
  std::vector<std::vector<int>> writers(m);
  std::vector<Draft> drafts;
  auto coin = [&rng](double p) { return std::bernoulli_distribution(p)(rng); };
  auto pick = [&rng](std::size_t size) { return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng); };

  std::vector<int> live;
  for (int t = 1; t <= n; ++t) live.push_back(t);
  while (!live.empty()) {
    const std::size_t slot = pick(live.size());
    const int t = live[slot];
    std::vector<Draft> choices;
    for (int x = 0; x < m; ++x) {
      if (!read[t][x]) {
        std::vector<int> committed{0};
        std::vector<int> any{0};
        for (int w : writers[x]) {
          if (w == t) continue;
          any.push_back(w);
          if (state[w] == 1) committed.push_back(w);
        }
        const auto& pool = coin(opts.committed_read_bias) ? committed : any;
        choices.push_back({OpKind::kRead, t, x, pool[pick(pool.size())]});
      } else if (!wrote[t][x]) {
        choices.push_back({OpKind::kWrite, t, x, 0});
      }
    }
    const bool terminate = choices.empty() || coin(1.0 / (1.0 + static_cast<double>(choices.size())));
    if (terminate) {
      if (opts.allow_pending && coin(0.2)) {
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(slot));
        continue;
      }
      const bool abort = coin(opts.abort_probability);
      drafts.push_back({abort ? OpKind::kAbort : OpKind::kCommit, t, 0, 0});
      state[t] = abort ? 2 : 1;
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(slot));
      continue;
    }
    const Draft d = choices[pick(choices.size())];
    if (d.kind == OpKind::kRead) {
      read[t][d.object] = true;
    } else {
      wrote[t][d.object] = true;
      writers[d.object].push_back(t);
    }
    drafts.push_back(d);
  }

  HistoryBuilder b;
  std::vector<TxnId> ids(n + 1);
  std::vector<ObjectId> objs(m);
  static constexpr std::string_view kNames = "xyzuvwpqst";
  for (int x = 0; x < m; ++x) objs[x] = b.object(std::string(1, kNames[static_cast<std::size_t>(x) % kNames.size()]) + std::string(static_cast<std::size_t>(x) / kNames.size(), 'a'));
  ids[0] = TxnId::initial();
  for (const Draft& d : drafts)
    if (ids[d.txn].is_initial()) ids[d.txn] = b.txn(std::to_string(d.txn));
  for (const Draft& d : drafts) {
    switch (d.kind) {
      case OpKind::kRead: b.read(ids[d.txn], objs[d.object], d.version == 0 ? TxnId::initial() : b.txn(std::to_string(d.version))); break;
      case OpKind::kWrite: b.write(ids[d.txn], objs[d.object]); break;
      case OpKind::kCommit: b.commit(ids[d.txn]); break;
      case OpKind::kAbort: b.abort(ids[d.txn]); break;
    }
  }

  // Mandatory pairs keep the history valid; the rest is thinned at random.
  const std::size_t len = drafts.size();
  for (std::size_t a = 0; a < len; ++a) {
    for (std::size_t c = a + 1; c < len; ++c) {
      const Draft& da = drafts[a];
      const Draft& dc = drafts[c];
      bool mandatory = da.txn == dc.txn;
      if (dc.kind == OpKind::kRead && da.kind == OpKind::kWrite && da.txn == dc.version && da.object == dc.object)
        mandatory = true;
      if (da.kind == OpKind::kWrite && dc.kind == OpKind::kWrite && da.object == dc.object) mandatory = true;
      if (mandatory || !coin(opts.drop_order)) b.edge(a, c);
    }
  }
  return std::move(b).build();
}

}  // namespace jessy::testing
