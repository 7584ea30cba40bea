#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "jessy/history.hpp"

namespace jessy {

/// Sparse vector of natural counters; absent keys count as zero. Tag keeps
/// object-indexed and class-indexed vectors apart.
template <class Tag>
class SparseVector {
 public:
  using Entry = std::pair<std::uint32_t, std::uint32_t>;

  SparseVector() = default;
  SparseVector(std::initializer_list<Entry> entries) {
    for (auto [k, v] : entries) set(k, v);
  }

  std::uint32_t operator[](std::uint32_t key) const {
    auto it = find(key);
    return it != entries_.end() && it->first == key ? it->second : 0;
  }

  void set(std::uint32_t key, std::uint32_t value) {
    auto it = find(key);
    if (it != entries_.end() && it->first == key) {
      if (value == 0) entries_.erase(it);
      else it->second = value;
    } else if (value != 0) {
      entries_.insert(it, {key, value});
    }
  }

  void increment(std::uint32_t key, std::uint32_t by = 1) { set(key, (*this)[key] + by); }

  /// Componentwise maximum, in place.
  void merge(const SparseVector& other) {
    for (auto [k, v] : other.entries_)
      if (v > (*this)[k]) set(k, v);
  }

  static SparseVector max(const SparseVector& a, const SparseVector& b) {
    SparseVector out = a;
    out.merge(b);
    return out;
  }

  /// Componentwise >=.
  bool covers(const SparseVector& other) const {
    for (auto [k, v] : other.entries_)
      if ((*this)[k] < v) return false;
    return true;
  }

  bool is_zero() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  bool operator==(const SparseVector&) const = default;

 private:
  typename std::vector<Entry>::iterator find(std::uint32_t key) {
    return std::lower_bound(entries_.begin(), entries_.end(), key,
                            [](const Entry& e, std::uint32_t k) { return e.first < k; });
  }
  typename std::vector<Entry>::const_iterator find(std::uint32_t key) const {
    return std::lower_bound(entries_.begin(), entries_.end(), key,
                            [](const Entry& e, std::uint32_t k) { return e.first < k; });
  }

  std::vector<Entry> entries_;
};

struct ObjectKeyTag;
struct ClassKeyTag;
using DependenceVector = SparseVector<ObjectKeyTag>;
using PartitionedDependenceVector = SparseVector<ClassKeyTag>;

/// a > b: componentwise >= with at least one strict component.
template <class Tag>
bool dominates(const SparseVector<Tag>& a, const SparseVector<Tag>& b) {
  return a.covers(b) && !(a == b);
}

/// Renders every dimension, e.g. "⟨x:1,y:0⟩".
template <class Tag>
std::string render_vector(const SparseVector<Tag>& v, const std::vector<std::string>& names) {
  std::string out = "⟨";
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k) out += ',';
    out += names[k] + ":" + std::to_string(v[static_cast<std::uint32_t>(k)]);
  }
  return out + "⟩";
}

/// Vector per operation index; commits and aborts carry the zero vector.
using DvAnnotation = std::vector<DependenceVector>;
using PdvAnnotation = std::vector<PartitionedDependenceVector>;

/// Dependence vectors of every read and write. Throws ModelError when the
/// definition is cyclic (possible only when reads observe uncommitted data).
DvAnnotation dv_annotate(const History& h);

/// Compatibility of two reads of one transaction on objects x != y.
bool compatible(std::uint32_t x, const DependenceVector& vx, std::uint32_t y, const DependenceVector& vy);

struct SnapshotCheck {
  bool consistent = true;
  /// False when the history leaves the class where vectors characterize
  /// consistent snapshots (it avoids cascading aborts and is write-conflict
  /// free); the answer is still computed.
  bool reliable = true;
};

/// Pairwise compatibility of every two reads of ti.
SnapshotCheck dv_snapshot_consistent(const History& h, const DvAnnotation& dv, TxnId ti);

/// Disjoint classes covering every object.
class Partition {
 public:
  Partition() = default;
  /// class_of[object] = class index; classes must be 0..n-1 without gaps.
  explicit Partition(std::vector<std::uint32_t> class_of);

  static Partition singletons(std::size_t objects);
  static Partition single_class(std::size_t objects);
  /// Classes given by object names of h; throws ConfigError unless they are
  /// disjoint and cover h's objects.
  static Partition from_names(const History& h, const std::vector<std::vector<std::string>>& classes);

  std::size_t class_count() const { return class_count_; }
  std::size_t object_count() const { return class_of_.size(); }
  std::uint32_t class_of(std::uint32_t object) const { return class_of_[object]; }
  bool same_class(std::uint32_t a, std::uint32_t b) const { return class_of_[a] == class_of_[b]; }

 private:
  std::vector<std::uint32_t> class_of_;
  std::size_t class_count_ = 0;
};

struct PartitionCheck {
  bool proper = true;
  /// Two unordered same-class writes when not proper.
  std::vector<std::size_t> ops;
};

/// Proper iff every two writes on objects of one class are ordered.
PartitionCheck is_proper_partition(const History& h, const Partition& p);

/// Partitioned dependence vectors. Versions written by aborted transactions
/// never serve as candidates, and a read folds in only writes whose
/// transaction committed before it. Throws ModelError if p is not proper for h or
/// the definition is cyclic.
PdvAnnotation pdv_annotate(const History& h, const Partition& p);

/// Compatibility under partitioned vectors. For two reads in one class the
/// callbacks answer the ordering clauses: y_is_latest() tells whether the
/// version of y read is the latest version of y written no later than the
/// write of the x version read, and x_is_latest() the symmetric question.
bool pdv_compatible(std::uint32_t class_x, const PartitionedDependenceVector& vx, std::uint32_t class_y,
                    const PartitionedDependenceVector& vy, const std::function<bool()>& y_is_latest,
                    const std::function<bool()>& x_is_latest);

/// Offline form of pdv_compatible for two read operations of h.
bool pdv_compatible(const History& h, const Partition& p, const PdvAnnotation& pdv, std::size_t read_x,
                    std::size_t read_y);

/// Pairwise pdv compatibility of every two reads of ti.
bool pdv_snapshot_consistent(const History& h, const Partition& p, const PdvAnnotation& pdv, TxnId ti);

/// CONS evaluated on the history obtained by replacing every object with its
/// class (dependency unchanged; class version X_k precedes X_j when every
/// write of T_k on X precedes every write of T_j on X).
bool projected_cons(const History& h, const Partition& p);

}  // namespace jessy
