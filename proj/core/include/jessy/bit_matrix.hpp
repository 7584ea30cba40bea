#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace jessy {

/// Dense square boolean matrix stored as rows of 64-bit words. Used for
/// reachability (transitive closure) over operations and transactions.
class BitMatrix {
 public:
  BitMatrix() = default;
  explicit BitMatrix(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  std::size_t size() const { return n_; }

  bool test(std::size_t row, std::size_t col) const {
    return (bits_[row * words_ + col / 64] >> (col % 64)) & 1U;
  }
  void set(std::size_t row, std::size_t col) {
    bits_[row * words_ + col / 64] |= std::uint64_t{1} << (col % 64);
  }
  /// row(dst) |= row(src)
  void merge_row(std::size_t dst, std::size_t src) {
    for (std::size_t w = 0; w < words_; ++w) bits_[dst * words_ + w] |= bits_[src * words_ + w];
  }

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Transitive closure of a directed graph given as adjacency lists.
/// Returns std::nullopt if the graph has a cycle.
inline std::optional<BitMatrix> transitive_closure(const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t n = succ.size();
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& out : succ)
    for (std::size_t v : out) ++indegree[v];
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) order.push_back(v);
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::size_t v : succ[order[head]])
      if (--indegree[v] == 0) order.push_back(v);
  }
  if (order.size() != n) return std::nullopt;

  BitMatrix reach(n);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (std::size_t v : succ[*it]) {
      reach.set(*it, v);
      reach.merge_row(*it, v);
    }
  }
  return reach;
}

/// Finds one directed cycle (as a vertex list) or returns an empty vector.
inline std::vector<std::size_t> find_cycle(const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t n = succ.size();
  enum class Mark { kWhite, kGrey, kBlack };
  std::vector<Mark> mark(n, Mark::kWhite);
  std::vector<std::size_t> parent(n, n);
  for (std::size_t root = 0; root < n; ++root) {
    if (mark[root] != Mark::kWhite) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::kGrey;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < succ[v].size()) {
        std::size_t w = succ[v][next++];
        if (mark[w] == Mark::kGrey) {
          std::vector<std::size_t> cycle{w};
          for (std::size_t u = v; u != w; u = parent[u]) cycle.push_back(u);
          return {cycle.rbegin(), cycle.rend()};
        }
        if (mark[w] == Mark::kWhite) {
          mark[w] = Mark::kGrey;
          parent[w] = v;
          stack.emplace_back(w, 0);
        }
      } else {
        mark[v] = Mark::kBlack;
        stack.pop_back();
      }
    }
  }
  return {};
}

}  // namespace jessy
