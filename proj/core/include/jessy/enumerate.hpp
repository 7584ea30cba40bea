#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "jessy/history.hpp"

namespace jessy {

struct EnumerationBounds {
  int max_txns = 3;
  int max_objects = 2;
  int max_ops = 7;
  /// Refuse (BudgetError) once more histories than this would be produced.
  std::size_t budget = 5'000'000;
};

/// Visits every valid, complete, totally ordered history within the bounds,
/// each exactly once up to renaming. Transactions are labelled "1", "2", ...
/// and objects "x", "y", ... in order of first appearance; every transaction
/// performs at least one read. The visiting order is deterministic.
/// Returns the number of histories visited.
std::size_t enumerate_histories(const EnumerationBounds& bounds, const std::function<void(const History&)>& visit);

std::vector<History> enumerate_histories(const EnumerationBounds& bounds);

}  // namespace jessy
